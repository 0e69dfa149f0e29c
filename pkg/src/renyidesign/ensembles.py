"""Finite state/unitary ensembles, the gap 2-design, and design testers."""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np
import sympy

from .moments import ChoiPartitionSpec, StatePartition, haar_choi_moment, haar_state_moment
from .permgroup import partitions, sym_irrep_dim
from .quantum import PureState, check_unitary, choi_state, reduced_density, trace_power
from .sampling import McEstimate, RandomStream, _estimate, haar_unitaries

FRAME_OPERATOR_CAP = 4096
PAULI_CAP = 5
SCHEMA_VERSION = 1


def _normalize_weights(weights, n: int) -> tuple:
    if weights is None:
        return tuple(Fraction(1, n) for _ in range(n))
    weights = tuple(Fraction(w) if isinstance(w, (int, Fraction, str)) else float(w) for w in weights)
    if len(weights) != n:
        raise ValueError(f"{len(weights)} weights for {n} members")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    if abs(float(sum(weights)) - 1) > 1e-12:
        raise ValueError(f"weights sum to {float(sum(weights))}, not 1")
    return weights


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    """Finite weighted list of pure states (uniform weights by default).

    ``exact`` optionally holds the amplitudes as sympy numbers, enabling
    exact moment arithmetic.
    """

    members: tuple[PureState, ...]
    weights: tuple = None
    exact: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("empty ensemble")
        if len({m.dim for m in members}) != 1:
            raise ValueError("ensemble members must share a dimension")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "weights", _normalize_weights(self.weights, len(members)))

    @property
    def dim(self) -> int:
        return self.members[0].dim


@dataclass(frozen=True, eq=False)
class OrbitEnsemble:
    """Orbit of ``base`` under local unitaries ``U_A (x) U_B``, sampled from Haar."""

    base: PureState

    def __post_init__(self):
        if len(self.base.dims) != 2:
            raise ValueError("orbit base state needs a bipartite (d_A, d_B) factorization")


@dataclass(frozen=True, eq=False)
class UnitaryEnsemble:
    members: tuple[np.ndarray, ...]
    weights: tuple = None

    def __post_init__(self):
        members = tuple(check_unitary(m) for m in self.members)
        if not members:
            raise ValueError("empty ensemble")
        if len({m.shape for m in members}) != 1:
            raise ValueError("ensemble members must share a dimension")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "weights", _normalize_weights(self.weights, len(members)))

    @property
    def dim(self) -> int:
        return self.members[0].shape[0]

    def __len__(self):
        return len(self.members)


# ---------------------------------------------------------------- gap 2-design


@dataclass(frozen=True)
class Surd:
    """``rational + coeff * sqrt(radicand)`` with rational parts."""

    rational: Fraction
    coeff: Fraction
    radicand: int

    def __mul__(self, other: Surd) -> Surd:
        assert self.radicand == other.radicand
        return Surd(
            self.rational * other.rational + self.coeff * other.coeff * self.radicand,
            self.rational * other.coeff + self.coeff * other.rational,
            self.radicand,
        )

    def __add__(self, other: Surd) -> Surd:
        assert self.radicand == other.radicand
        return Surd(self.rational + other.rational, self.coeff + other.coeff, self.radicand)

    def scale(self, k) -> Surd:
        return Surd(self.rational * k, self.coeff * k, self.radicand)

    def __float__(self):
        return float(self.rational) + float(self.coeff) * math.sqrt(self.radicand)


def gap_spectrum_exact(d_A: int, d_B: int) -> tuple[Surd, Surd]:
    """The two distinct Schmidt weights ``(lambda_1, lambda_2)`` as exact surds.

    ``lambda_1`` appears once and ``lambda_2`` appears ``d_A - 1`` times.
    """
    if d_A < 1 or d_B < 1:
        raise ValueError("dimensions must be >= 1")
    if d_A > d_B:
        raise ValueError(f"Schmidt rank d_A={d_A} does not fit in d_B={d_B}")
    n = d_A * d_B + 1
    radicand = (d_A + 1) * n
    denom = d_A * n
    lam1 = Surd(Fraction(n, denom), Fraction(d_A - 1, denom), radicand)
    lam2 = Surd(Fraction(n, denom), Fraction(-1, denom), radicand)
    if float(lam2) < -1e-15:
        raise ValueError(f"lambda_2 = {float(lam2)} < 0: outside the valid regime")
    return lam1, lam2


def gap_spectrum(d_A: int, d_B: int) -> np.ndarray:
    lam1, lam2 = gap_spectrum_exact(d_A, d_B)
    return np.array([float(lam1)] + [max(float(lam2), 0.0)] * (d_A - 1))


def gap_purity_exact(d_A: int, d_B: int) -> Fraction:
    """``tr rho_A^2`` of the gap state in exact arithmetic; the surd parts cancel."""
    lam1, lam2 = gap_spectrum_exact(d_A, d_B)
    total = lam1 * lam1 + (lam2 * lam2).scale(d_A - 1)
    if total.coeff != 0:
        raise ArithmeticError(f"irrational purity: residual surd coefficient {total.coeff}")
    return total.rational


def gap2_design_state(d_A: int, d_B: int) -> PureState:
    """Pure state with Schmidt weights ``(lambda_1, lambda_2, ..., lambda_2)``.

    Amplitudes ``sqrt(lambda_i)`` sit on ``|i>_A |i>_B``; the local-unitary
    orbit of this state is a projective 2-design.
    """
    lam = gap_spectrum(d_A, d_B)
    psi = np.zeros(d_A * d_B, dtype=complex)
    for i, w in enumerate(lam):
        psi[i * d_B + i] = math.sqrt(w)
    psi /= np.linalg.norm(psi)
    return PureState(psi, (d_A, d_B))


def gap_renyi_upper_bound(d_A: int, r: float, alpha: int) -> float:
    """Upper bound on ``S_R^(alpha)(rho_A)`` of the gap state when ``d_B / d_A <= r``."""
    if alpha <= 2:
        raise ValueError("the gap is only asserted for alpha > 2")
    if r < 1:
        raise ValueError("r must be >= 1")
    return alpha / (2 * (alpha - 1)) * (math.log2(d_A) + math.log2(r))


def gap_from_max(d_A: int, r: float, alpha: int) -> float:
    return math.log2(d_A) - gap_renyi_upper_bound(d_A, r, alpha)


# ---------------------------------------------------------------- fixtures

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)


def pauli_group(n_qubits: int) -> UnitaryEnsemble:
    """The 4^n n-qubit Pauli strings with uniform weights (phases dropped)."""
    if not 1 <= n_qubits <= PAULI_CAP:
        raise ValueError(f"n_qubits must be in [1, {PAULI_CAP}]")
    members = []
    for word in itertools.product(PAULIS, repeat=n_qubits):
        m = np.ones((1, 1), dtype=complex)
        for p in word:
            m = np.kron(m, p)
        members.append(m)
    return UnitaryEnsemble(tuple(members))


def canonical_phase(U: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Multiply by a global phase so the first nonzero entry (row-major) is real positive."""
    flat = U.reshape(-1)
    k = int(np.argmax(np.abs(flat) > tol))
    return U * (abs(flat[k]) / flat[k])


def _key(U: np.ndarray) -> tuple:
    return tuple(np.round(U.reshape(-1), 8).view(float) + 0.0)


def single_qubit_clifford() -> UnitaryEnsemble:
    """The 24 single-qubit Cliffords modulo phase, generated by H and S."""
    seen = {}
    frontier = [canonical_phase(np.eye(2, dtype=complex))]
    seen[_key(frontier[0])] = frontier[0]
    while frontier:
        nxt = []
        for U in frontier:
            for g in (HADAMARD, PHASE):
                V = canonical_phase(g @ U)
                k = _key(V)
                if k not in seen:
                    seen[k] = V
                    nxt.append(V)
        frontier = nxt
    return UnitaryEnsemble(tuple(seen.values()))


def computational_basis(d: int) -> StateEnsemble:
    members = tuple(PureState(np.eye(d, dtype=complex)[i]) for i in range(d))
    exact = tuple(tuple(sympy.Integer(int(i == j)) for j in range(d)) for i in range(d))
    return StateEnsemble(members, exact=exact)


def stabilizer_states_1q() -> StateEnsemble:
    """The six single-qubit stabilizer states (a projective 3-design)."""
    h = sympy.sqrt(2) / 2
    exact = (
        (sympy.Integer(1), sympy.Integer(0)),
        (sympy.Integer(0), sympy.Integer(1)),
        (h, h),
        (h, -h),
        (h, sympy.I * h),
        (h, -sympy.I * h),
    )
    members = tuple(PureState(np.array([complex(a) for a in v])) for v in exact)
    return StateEnsemble(members, exact=exact)


# ---------------------------------------------------------------- design tests


def _exact_state_moment(amps, p: StatePartition, alpha: int):
    M = sympy.Matrix(p.d_A, p.d_B, list(amps))
    rho = M * M.H
    return sympy.nsimplify(sympy.simplify((rho**alpha).trace()))


def _to_fraction(x) -> Fraction | float:
    x = sympy.nsimplify(x)
    if x.is_Rational:
        return Fraction(int(x.p), int(x.q))
    return float(x)


def moment_deviation(
    e: Union[StateEnsemble, OrbitEnsemble, UnitaryEnsemble],
    p: Union[StatePartition, ChoiPartitionSpec],
    alpha: int,
    n: int | None = None,
    rng: RandomStream | None = None,
) -> Fraction | float | McEstimate:
    """Ensemble average of ``tr rho^alpha`` minus its Haar value.

    A vanishing deviation is necessary, not sufficient, for an alpha-design.
    Exact (a :class:`Fraction`) when every member carries exact amplitudes
    and the result is rational; a float for other finite ensembles; an
    :class:`McEstimate` for sampled orbits.
    """
    if alpha == 1 and isinstance(p, StatePartition):
        warnings.warn("alpha=1 state moments are identically 1: the test is vacuous", stacklevel=2)

    if isinstance(e, UnitaryEnsemble):
        if not isinstance(p, ChoiPartitionSpec):
            raise TypeError("unitary ensembles are tested on a ChoiPartitionSpec")
        if e.dim != p.d:
            raise ValueError("partition does not match ensemble dimension")
        dims = (p.d_A, p.d_B, p.d_C, p.d_D)
        avg = sum(
            float(w) * trace_power(reduced_density(choi_state(U), [0, 2], dims), alpha)
            for U, w in zip(e.members, e.weights)
        )
        return avg - float(haar_choi_moment(p, alpha).value)

    haar = haar_state_moment(p, alpha).value

    if isinstance(e, OrbitEnsemble):
        if n is None or rng is None:
            raise ValueError("orbit ensembles need a sample count n and a RandomStream")
        if e.base.dims != (p.d_A, p.d_B):
            raise ValueError("partition does not match the orbit base state")
        psi = e.base.amplitudes.reshape(p.d_A, p.d_B)
        shift = float(haar)

        def batch(m, gen):
            UA = haar_unitaries(p.d_A, m, gen)
            UB = haar_unitaries(p.d_B, m, gen)
            X = UA @ psi @ np.swapaxes(UB, -1, -2)
            rho = X @ np.conj(np.swapaxes(X, -1, -2))
            return np.trace(np.linalg.matrix_power(rho, alpha), axis1=-2, axis2=-1).real - shift

        return _estimate(batch, n, rng)

    if e.dim != p.d:
        raise ValueError("partition does not match ensemble dimension")
    if e.exact is not None and all(isinstance(w, Fraction) for w in e.weights):
        total = sum(
            _sympy_rational(w) * _exact_state_moment(a, p, alpha)
            for a, w in zip(e.exact, e.weights)
        )
        return _to_fraction(total - _sympy_rational(haar))
    avg = sum(
        float(w) * trace_power(reduced_density(m, [0], (p.d_A, p.d_B)), alpha)
        for m, w in zip(e.members, e.weights)
    )
    return avg - float(haar)


def symmetric_projector(d: int, alpha: int) -> np.ndarray:
    """Projector onto the symmetric subspace of ``(C^d)^(x alpha)``."""
    dim = d**alpha
    eye = np.eye(dim, dtype=complex).reshape((dim,) + (d,) * alpha)
    P = np.zeros((dim, dim), dtype=complex)
    for perm in itertools.permutations(range(alpha)):
        P += eye.transpose((0,) + tuple(1 + k for k in perm)).reshape(dim, dim)
    return P / math.factorial(alpha)


def frame_operator_distance(e: StateEnsemble, alpha: int) -> float:
    """Trace-norm distance between ``D_[alpha] E |psi><psi|^(x alpha)`` and the symmetric projector."""
    d = e.dim
    dim = d**alpha
    if dim > FRAME_OPERATOR_CAP:
        raise ValueError(f"d^alpha = {dim} exceeds the dense cap {FRAME_OPERATOR_CAP}")
    frame = np.zeros((dim, dim), dtype=complex)
    for m, w in zip(e.members, e.weights):
        v = np.ones(1, dtype=complex)
        for _ in range(alpha):
            v = np.kron(v, m.amplitudes)
        frame += float(w) * np.outer(v, v.conj())
    frame *= math.comb(d + alpha - 1, alpha)
    diff = frame - symmetric_projector(d, alpha)
    # dense library eigensolver: these matrices reach 4096 x 4096
    return float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def _trace_overlaps(e: UnitaryEnsemble) -> np.ndarray:
    U = np.stack(e.members)
    T = np.einsum("iab,jab->ij", U.conj(), U)
    return np.abs(T) ** 2


def frame_potential(e: UnitaryEnsemble, t: int, exact: bool = False) -> float | Fraction:
    """``F_t = E_{U,V} |tr(U^dag V)|^(2t)`` over the ensemble.

    With ``exact=True`` every ``|tr(U^dag V)|^2`` must be an integer (as for
    Pauli and Clifford groups) and the weights rational; the result is a
    :class:`Fraction`.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if len(e) ** 2 > 4_000_000:
        raise ValueError(f"{len(e)}^2 pairs exceed the enumeration cap")
    overlaps = _trace_overlaps(e)
    if not exact:
        w = np.array([float(x) for x in e.weights])
        return float(w @ overlaps**t @ w)
    rounded = np.rint(overlaps)
    err = np.abs(overlaps - rounded).max()
    if err > 1e-9:
        raise ValueError(f"|tr(U^dag V)|^2 not integral (off by {err:.3e}); use exact=False")
    if not all(isinstance(x, Fraction) for x in e.weights):
        raise ValueError("exact frame potential needs rational weights")
    total = Fraction(0)
    ints = rounded.astype(np.int64)
    for i, wi in enumerate(e.weights):
        for j, wj in enumerate(e.weights):
            total += wi * wj * int(ints[i, j]) ** t
    return total


def haar_frame_potential(d: int, t: int) -> int:
    """Exact Haar value of ``F_t`` on U(d): ``sum f_lambda^2`` over ``lambda |- t`` with at most d rows.

    Equals ``t!`` once ``d >= t``.
    """
    return sum(sym_irrep_dim(lam) ** 2 for lam in partitions(t) if lam.rows <= d)


def haar_frame_potential_mc(d: int, t: int, n: int, rng: RandomStream) -> McEstimate:
    """Monte Carlo Haar reference ``E |tr U|^(2t)`` from sampled unitaries."""

    def batch(m, gen):
        U = haar_unitaries(d, m, gen)
        return np.abs(np.trace(U, axis1=-2, axis2=-1)) ** (2 * t)

    return _estimate(batch, n, rng)


# ---------------------------------------------------------------- JSON


def _encode_number(z) -> list[str]:
    if isinstance(z, sympy.Basic):
        re, im = sympy.re(z), sympy.im(z)
        if re.is_Rational and im.is_Rational:
            return [f"{re.p}/{re.q}", f"{im.p}/{im.q}"]
    z = complex(z)
    return [repr(z.real), repr(z.imag)]


def _decode_part(s: str):
    return Fraction(s) if "/" in s else float(s)


def _sympy_rational(q: Fraction) -> sympy.Rational:
    return sympy.Rational(q.numerator, q.denominator)


def ensemble_to_json(e: Union[StateEnsemble, UnitaryEnsemble]) -> str:
    """Serialize as ``{schema_version, kind, dims, members: [{weight, entries}]}``.

    Entries are ``[re, im]`` string pairs, row-major for unitaries; exact
    rational parts use ``"p/q"``.
    """
    members = []
    if isinstance(e, StateEnsemble):
        kind, dims = "state", list(e.members[0].dims)
        for k, (m, w) in enumerate(zip(e.members, e.weights)):
            if e.exact is not None and all(
                sympy.re(a).is_Rational and sympy.im(a).is_Rational for a in e.exact[k]
            ):
                entries = [_encode_number(a) for a in e.exact[k]]
            else:
                entries = [_encode_number(a) for a in m.amplitudes]
            members.append({"weight": str(w), "entries": entries})
    else:
        kind, dims = "unitary", [e.dim]
        for U, w in zip(e.members, e.weights):
            members.append({"weight": str(w), "entries": [[_encode_number(z) for z in row] for row in U]})
    return json.dumps({"schema_version": SCHEMA_VERSION, "kind": kind, "dims": dims, "members": members})


def ensemble_from_json(text: str) -> Union[StateEnsemble, UnitaryEnsemble]:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
    weights = [Fraction(m["weight"]) if "/" in m["weight"] else float(m["weight"]) for m in doc["members"]]
    if doc["kind"] == "state":
        decoded = [[tuple(_decode_part(x) for x in pair) for pair in m["entries"]] for m in doc["members"]]
        members = tuple(
            PureState(np.array([complex(float(a), float(b)) for a, b in parts]), doc["dims"]) for parts in decoded
        )
        exact = None
        if all(isinstance(x, Fraction) for parts in decoded for pair in parts for x in pair):
            exact = tuple(
                tuple(_sympy_rational(a) + sympy.I * _sympy_rational(b) for a, b in parts) for parts in decoded
            )
        return StateEnsemble(members, tuple(weights), exact)
    if doc["kind"] == "unitary":
        members = [
            np.array([[complex(*(float(_decode_part(x)) for x in p)) for p in row] for row in m["entries"]])
            for m in doc["members"]
        ]
        return UnitaryEnsemble(tuple(members), tuple(weights))
    raise ValueError(f"unknown ensemble kind {doc['kind']!r}")
