"""Exact Haar moments of reduced states, Catalan asymptotics and Renyi bounds.

All moments are exact :class:`fractions.Fraction` values. Entropies are in bits.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Union

import mpmath
import numpy as np

from .permgroup import (
    IntegerPartition,
    Permutation,
    check_cap,
    partitions,
    state_cycle_polynomial,
)
from .weingarten import weingarten_table

CHOI_CAP = 6
LOG_PRECISION_BITS = 128


@dataclass(frozen=True)
class StatePartition:
    d_A: int
    d_B: int

    def __post_init__(self):
        if self.d_A < 1 or self.d_B < 1:
            raise ValueError(f"subsystem dimensions must be >= 1, got {self.d_A}, {self.d_B}")

    @property
    def d(self) -> int:
        return self.d_A * self.d_B

    def swapped(self) -> StatePartition:
        return StatePartition(self.d_B, self.d_A)


@dataclass(frozen=True)
class ChoiPartitionSpec:
    """Input split ``A|B`` and output split ``C|D`` of a d-dimensional unitary."""

    d_A: int
    d_B: int
    d_C: int
    d_D: int

    def __post_init__(self):
        if min(self.d_A, self.d_B, self.d_C, self.d_D) < 1:
            raise ValueError("subsystem dimensions must be >= 1")
        if self.d_A * self.d_B != self.d_C * self.d_D:
            raise ValueError(
                f"input and output registers differ: {self.d_A}*{self.d_B} != {self.d_C}*{self.d_D}"
            )

    @property
    def d(self) -> int:
        return self.d_A * self.d_B


Partition = Union[StatePartition, ChoiPartitionSpec]


@dataclass(frozen=True)
class MomentResult:
    """Exact Haar average of ``tr rho^alpha`` for the reduced state in ``context``."""

    value: Fraction
    alpha: int
    context: Partition

    def __post_init__(self):
        if not 0 < self.value <= 1:
            raise ArithmeticError(f"moment {self.value} outside (0, 1]")
        if isinstance(self.context, StatePartition):
            floor = Fraction(1, min(self.context.d_A, self.context.d_B) ** (self.alpha - 1))
            if self.value < floor:
                raise ArithmeticError(f"moment {self.value} below the maximally mixed floor {floor}")

    def __float__(self):
        return float(self.value)

    @property
    def max_bits(self) -> float:
        """Largest attainable Renyi entropy of the reduced state."""
        c = self.context
        if isinstance(c, StatePartition):
            return math.log2(min(c.d_A, c.d_B))
        return math.log2(min(c.d_A * c.d_C, c.d_B * c.d_D))


def symmetric_subspace_dim(d: int, alpha: int) -> int:
    return math.comb(d + alpha - 1, alpha)


def catalan(alpha: int) -> int:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return math.comb(2 * alpha, alpha) // (alpha + 1)


def haar_state_moment(p: StatePartition, alpha: int) -> MomentResult:
    """Haar average of ``tr rho_A^alpha`` over pure states on ``A (x) B``.

    Sums ``d_A^xi(sigma tau) d_B^xi(sigma)`` over S_alpha and normalizes by
    ``alpha! * C(d_A d_B + alpha - 1, alpha)``.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    poly = state_cycle_polynomial(alpha)
    total = sum(c * p.d_A**i * p.d_B**j for (i, j), c in poly.items())
    value = Fraction(total, math.factorial(alpha) * symmetric_subspace_dim(p.d, alpha))
    return MomentResult(value, alpha, p)


def _fixed_point_signature(perms: np.ndarray) -> np.ndarray:
    """Fixed-point counts of the powers 1..alpha; determines the cycle type."""
    alpha = perms.shape[-1]
    ident = np.arange(alpha, dtype=perms.dtype)
    out = np.empty(perms.shape[:-1] + (alpha,), dtype=np.int16)
    power = perms
    for k in range(alpha):
        out[..., k] = (power == ident).sum(axis=-1)
        power = np.take_along_axis(perms, power, axis=-1)
    return out


def _cycle_counts(perms: np.ndarray) -> np.ndarray:
    # a cycle of length k contributes k fixed points to every power divisible by k
    alpha = perms.shape[-1]
    fixed = _fixed_point_signature(perms)
    total = np.zeros(perms.shape[:-1], dtype=np.int64)
    for k in range(1, alpha + 1):
        m_k = np.zeros(perms.shape[:-1], dtype=np.int64)
        for j in range(1, k + 1):
            if k % j == 0:
                m_k += _mobius(k // j) * fixed[..., j - 1]
        total += m_k // k
    return total


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


@lru_cache(maxsize=None)
def choi_cycle_table(alpha: int, cap: int = CHOI_CAP) -> dict[tuple[int, int, int, int, IntegerPartition], int]:
    """Multiplicities of ``(xi(s t), xi(s), xi(g t), xi(g), type(s g^-1))`` over S_alpha^2."""
    check_cap(alpha, cap, "the (alpha!)^2 Choi double sum")

    perms = np.array(list(itertools.permutations(range(alpha))), dtype=np.int8)
    n = len(perms)
    inv = np.argsort(perms, axis=1).astype(np.int8)
    tau = np.array(Permutation.shift(alpha).images, dtype=np.int8)
    xi = _cycle_counts(perms)
    xi_tau = _cycle_counts(perms[:, tau])

    # class signature -> partition, from one representative per class
    sig_to_class = {}
    for mu in partitions(alpha):
        start, cycles = 0, []
        for part in mu:
            cycles.append(list(range(start, start + part)))
            start += part
        rep = np.array(Permutation.from_cycles(alpha, cycles).images, dtype=np.int8)
        sig_to_class[tuple(_fixed_point_signature(rep))] = mu

    table: dict = {}
    # composite (s g^-1)(i) = s[g^-1[i]]
    for a in range(n):
        comp = perms[a][inv]
        sigs = _fixed_point_signature(comp)
        keys = np.column_stack([np.full(n, xi_tau[a]), np.full(n, xi[a]), xi_tau, xi, sigs])
        uniq, counts = np.unique(keys, axis=0, return_counts=True)
        for row, c in zip(uniq, counts):
            key = (int(row[0]), int(row[1]), int(row[2]), int(row[3]), sig_to_class[tuple(int(x) for x in row[4:])])
            table[key] = table.get(key, 0) + int(c)
    return table


def haar_choi_moment(p: ChoiPartitionSpec, alpha: int, cap: int = CHOI_CAP) -> MomentResult:
    """Haar average of ``tr rho_AC^alpha`` for the Choi state of a d-dimensional unitary."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    d = p.d
    if d < alpha:
        raise ValueError(
            f"d={d} < alpha={alpha}: Weingarten function outside the invertible regime"
        )
    wg = weingarten_table(d, alpha)
    total = Fraction(0)
    for (x1, x2, x3, x4, mu), count in choi_cycle_table(alpha, cap).items():
        total += count * p.d_A**x1 * p.d_B**x2 * p.d_C**x3 * p.d_D**x4 * wg.values[mu]
    return MomentResult(total / d**alpha, alpha, p)


def state_moment_asymptotic(d_A: int, alpha: int) -> float:
    """Leading term ``Cat_alpha * d_A^-(alpha-1)`` for equal partitions (remainder dropped)."""
    return catalan(alpha) / d_A ** (alpha - 1)


def exact_log2(x: Fraction) -> float:
    """``log2`` of a positive rational through a 128-bit intermediate."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of non-positive value")
    with mpmath.workprec(LOG_PRECISION_BITS):
        return float(mpmath.log(mpmath.mpf(x.numerator) / x.denominator, 2))


def design_renyi_lower_bound(m: MomentResult) -> float:
    """Jensen lower bound ``log2(moment) / (1 - alpha)`` on the design-averaged Renyi entropy."""
    if m.alpha < 2:
        raise ValueError(
            "the Renyi-1 prefactor 1/(1-alpha) is singular; use von Neumann entropy tools instead"
        )
    return exact_log2(m.value) / (1 - m.alpha)


class Theorem(str, enum.Enum):
    T1 = "T1"
    T2a = "T2a"
    T2b = "T2b"
    T3 = "T3"
    T4 = "T4"
    T5 = "T5"
    T6 = "T6"


@dataclass(frozen=True)
class BoundResult:
    theorem: Theorem
    bound_bits: float
    valid: bool
    constraint_report: str
    asymptotic: bool = False


def _h(q: float) -> float:
    return 1 + 2 * q / (3 * (1 - q))


def _require(params: Mapping, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise ValueError(f"missing parameters: {', '.join(missing)}")


def _int_param(params: Mapping, name: str, minimum: int = 1) -> int:
    value = params[name]
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"parameter {name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _log_cat_per(alpha: int) -> float:
    return math.log2(catalan(alpha)) / (alpha - 1)


def theorem_bound(theorem: Theorem | str, params: Mapping) -> BoundResult:
    """Evaluate one of the design-averaged entropy lower bounds, in bits.

    Parameters by theorem (``d_B`` defaults to ``d_A`` where equal partitions apply)::

        T1   d_A, alpha            equal partitions, leading order
        T2a  d_A, d_B, alpha       finite-size Catalan/Stirling bound
        T2b  d_A, d_B, c           small-d_A bound; c=2 complex, c=1 real
        T3   d_A, d_B, a           min entropy with alpha = ceil(log2 d_A / a)
        T4   d, alpha              Choi, equal partitions, leading order
        T5   d, d_A, d_B, alpha    Choi, finite size
        T6   d, a                  Choi min entropy with alpha = ceil(log2 d / a)

    A failed hypothesis returns ``valid=False`` with the reason; the bound
    value is still computed where it is finite.
    """
    theorem = Theorem(theorem)
    params = dict(params)
    notes: list[str] = []
    valid = True

    if theorem in (Theorem.T1, Theorem.T4):
        key = "d_A" if theorem is Theorem.T1 else "d"
        _require(params, key, "alpha")
        dim, alpha = _int_param(params, key), _int_param(params, "alpha")
        if alpha < 2:
            raise ValueError("alpha must be >= 2")
        bound = math.log2(dim) - _log_cat_per(alpha)
        remainder = "O(d_A^-2)" if theorem is Theorem.T1 else "O(d^-1)"
        notes.append(f"asymptotic: {remainder} remainder omitted (constant not available)")
        return BoundResult(theorem, bound, valid, "; ".join(notes), asymptotic=True)

    if theorem is Theorem.T2a:
        _require(params, "d_A", "alpha")
        d_A = _int_param(params, "d_A")
        d_B = _int_param(params, "d_B") if params.get("d_B") is not None else d_A
        alpha = _int_param(params, "alpha")
        if alpha < 2:
            raise ValueError("alpha must be >= 2")
        if d_A > d_B:
            valid = False
            notes.append(f"requires d_A <= d_B (got {d_A} > {d_B})")
        q = alpha**3 / (32 * d_B**2)
        if q >= 1:
            notes.append(f"q = alpha^3/(32 d_B^2) = {q:.6g} >= 1")
            return BoundResult(theorem, -math.inf, False, "; ".join(notes))
        penalty = (2 * alpha - 1.5 * math.log2(alpha) + math.log2(_h(q)) - 0.5 * math.log2(math.pi)) / (alpha - 1)
        notes.append(f"q={q:.6g}, h(q)={_h(q):.6g}")
        return BoundResult(theorem, math.log2(d_A) - penalty, valid, "; ".join(notes))

    if theorem is Theorem.T2b:
        _require(params, "d_A")
        d_A = _int_param(params, "d_A")
        d_B = _int_param(params, "d_B") if params.get("d_B") is not None else d_A
        c = params.get("c", 2)
        if c not in (1, 2):
            raise ValueError("c must be 1 (real Hilbert space) or 2 (complex)")
        if d_A > d_B:
            valid = False
            notes.append(f"requires d_A <= d_B (got {d_A} > {d_B})")
        ratio = math.sqrt(d_A / d_B)
        bound = math.log2(d_A) - 2 * math.log2(1 + ratio) - math.log2(c)
        relaxed = math.log2(d_A) - 2 / math.log(2) * ratio - math.log2(c)
        notes.append(f"relaxed form {relaxed:.12g}")
        return BoundResult(theorem, bound, valid, "; ".join(notes))

    if theorem in (Theorem.T3, Theorem.T6):
        key = "d_A" if theorem is Theorem.T3 else "d"
        _require(params, key, "a")
        dim = _int_param(params, key)
        a = float(params["a"])
        if not a > 0:
            raise ValueError("a must be > 0")
        alpha = math.ceil(math.log2(dim) / a)
        if theorem is Theorem.T3:
            d_B = _int_param(params, "d_B") if params.get("d_B") is not None else dim
            if a > 1:
                valid = False
                notes.append(f"requires 0 < a <= 1 (got {a})")
            limit = (16 * d_B**2) ** (1 / 3)
            if alpha > limit:
                valid = False
                notes.append(f"alpha={alpha} exceeds (16 d_B^2)^(1/3)={limit:.6g}")
        else:
            limit = math.sqrt(dim) / 2
            if not 1 <= alpha <= limit:
                valid = False
                notes.append(f"alpha={alpha} outside [1, sqrt(d)/2={limit:.6g}]")
        notes.insert(0, f"alpha={alpha}")
        return BoundResult(theorem, math.log2(dim) - 2 - a, valid, "; ".join(notes))

    # T5
    _require(params, "d", "d_A", "d_B", "alpha")
    d = _int_param(params, "d")
    d_A, d_B = _int_param(params, "d_A"), _int_param(params, "d_B")
    alpha = _int_param(params, "alpha")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    if d_A * d_B != d:
        raise ValueError(f"d_A*d_B={d_A * d_B} does not match d={d}")
    if d_A > d_B:
        valid = False
        notes.append(f"requires d_A <= d_B (got {d_A} > {d_B})")
    threshold = math.sqrt(6) * alpha**1.75
    q = alpha**3 / (32 * d_B**2)
    notes.append("q taken as alpha^3/(32 d_B^2) with the input-side d_B")
    if d <= threshold:
        notes.append(f"requires d > sqrt(6) alpha^(7/4) = {threshold:.6g}")
        return BoundResult(theorem, -math.inf, False, "; ".join(notes))
    if q >= 1:
        notes.append(f"q={q:.6g} >= 1")
        return BoundResult(theorem, -math.inf, False, "; ".join(notes))
    a_alpha = 1 / (1 - 6 * alpha**3.5 / d**2)
    inner = a_alpha * _h(q) / 8 * (7 + math.cosh(2 * alpha * (alpha - 1) / d))
    bound = math.log2(d) - _log_cat_per(alpha) - math.log2(inner) / (alpha - 1)
    notes.append(f"a_alpha={a_alpha:.6g}, h(q)={_h(q):.6g}")
    return BoundResult(theorem, bound, valid, "; ".join(notes))
