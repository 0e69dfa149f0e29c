"""Symmetric-group combinatorics: permutations, partitions, characters, irrep dimensions.

Composition convention: ``sigma * tau`` applies ``tau`` first, then ``sigma``,
i.e. ``(sigma * tau)(i) == sigma(tau(i))``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

DEFAULT_ENUMERATION_CAP = 9


class EnumerationCapError(ValueError):
    """Raised when a brute-force enumeration over S_alpha would be too large."""


def check_cap(alpha: int, cap: int, what: str = "S_alpha") -> None:
    if alpha > cap:
        raise EnumerationCapError(
            f"alpha={alpha} exceeds enumeration cap {cap} for {what}: "
            f"{math.factorial(alpha)} permutations would be visited"
        )


@dataclass(frozen=True, slots=True)
class Permutation:
    """Bijection on ``{0, ..., n-1}``; ``images[i]`` is the image of ``i``."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation of range({len(images)}): {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def shift(cls, n: int) -> Permutation:
        """Canonical full cycle ``i -> i + 1 (mod n)``."""
        return cls(tuple((i + 1) % n for i in range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]]) -> Permutation:
        images = list(range(n))
        for cyc in cycles:
            for k, i in enumerate(cyc):
                images[i] = cyc[(k + 1) % len(cyc)]
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __len__(self) -> int:
        return len(self.images)

    def inverse(self) -> Permutation:
        return invert(self)

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * len(self.images)
        out = []
        for start in range(len(self.images)):
            if seen[start]:
                continue
            cyc = []
            i = start
            while not seen[i]:
                seen[i] = True
                cyc.append(i)
                i = self.images[i]
            out.append(tuple(cyc))
        return out

    def cycle_type(self) -> IntegerPartition:
        return IntegerPartition(sorted((len(c) for c in self.cycles()), reverse=True))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p * q``: apply ``q`` first, then ``p``."""
    if len(p) != len(q):
        raise ValueError("cannot compose permutations of different degree")
    pi = p.images
    return Permutation(tuple(pi[j] for j in q.images))


def invert(p: Permutation) -> Permutation:
    inv = [0] * len(p)
    for i, j in enumerate(p.images):
        inv[j] = i
    return Permutation(tuple(inv))


def _cycle_count_images(images: Sequence[int]) -> int:
    n = len(images)
    seen = bytearray(n)
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        i = start
        while not seen[i]:
            seen[i] = 1
            i = images[i]
    return count


def cycle_count(sigma: Permutation) -> int:
    """Number of disjoint cycles of ``sigma``, fixed points included."""
    return _cycle_count_images(sigma.images)


def _cycle_type_images(images: Sequence[int]) -> tuple[int, ...]:
    n = len(images)
    seen = bytearray(n)
    lengths = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = 1
            i = images[i]
            length += 1
        lengths.append(length)
    lengths.sort(reverse=True)
    return tuple(lengths)


def enumerate_group(alpha: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Permutation]:
    """Yield every element of S_alpha exactly once (lexicographic order)."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    check_cap(alpha, cap)
    for images in itertools.permutations(range(alpha)):
        yield Permutation(images)


class IntegerPartition(tuple):
    """Weakly decreasing tuple of positive integers.

    Doubles as a cycle type (conjugacy class label) and as an irrep label.
    """

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        if any(p < 1 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"partition parts must be non-increasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def size(self) -> int:
        return sum(self)

    @property
    def rows(self) -> int:
        return len(self)

    def conjugate(self) -> IntegerPartition:
        if not self:
            return IntegerPartition()
        return IntegerPartition(sum(1 for p in self if p > j) for j in range(self[0]))

    def __repr__(self):
        return f"IntegerPartition({tuple(self)})"


def partitions(n: int) -> list[IntegerPartition]:
    """All partitions of ``n`` in reverse lexicographic order, ``(n)`` first."""

    def gen(n, max_part):
        if n == 0:
            yield ()
            return
        for k in range(min(n, max_part), 0, -1):
            for rest in gen(n - k, k):
                yield (k,) + rest

    return [IntegerPartition(p) for p in gen(n, n)]


def class_size(mu: IntegerPartition) -> int:
    """Number of permutations with cycle type ``mu``."""
    n = sum(mu)
    z = 1
    for k, m in Counter(mu).items():
        z *= k**m * math.factorial(m)
    return math.factorial(n) // z


def _beta_set(lam: tuple[int, ...]) -> tuple[int, ...]:
    k = len(lam)
    return tuple(lam[i] + (k - 1 - i) for i in range(k))


def _from_beta_set(beta) -> tuple[int, ...]:
    beta = sorted(beta, reverse=True)
    k = len(beta)
    parts = [beta[i] - (k - 1 - i) for i in range(k)]
    return tuple(p for p in parts if p > 0)


@lru_cache(maxsize=None)
def _mn(lam: tuple[int, ...], mu: tuple[int, ...]) -> int:
    if not mu:
        return 1 if not lam else 0
    r, rest = mu[0], mu[1:]
    beta = _beta_set(lam)
    occupied = set(beta)
    total = 0
    # removing a rim hook of length r == sliding one bead down r places
    for b in beta:
        target = b - r
        if target < 0 or target in occupied:
            continue
        height = sum(1 for c in beta if target < c < b)
        new_beta = (occupied - {b}) | {target}
        total += (-1) ** height * _mn(_from_beta_set(new_beta), rest)
    return total


def mn_character(lam: Sequence[int], mu: Sequence[int]) -> int:
    """Irreducible character chi^lam on the class of cycle type ``mu``.

    Murnaghan-Nakayama recursion over rim hooks; memoized on the canonical
    ``(lam, mu)`` pair for the life of the process.
    """
    lam = IntegerPartition(lam)
    mu = IntegerPartition(sorted(mu, reverse=True))
    if lam.size != mu.size:
        raise ValueError(f"partitions of different sizes: {tuple(lam)} vs {tuple(mu)}")
    return _mn(tuple(lam), tuple(mu))


def hook_lengths(lam: Sequence[int]) -> list[tuple[int, int, int]]:
    """``(i, j, hook)`` for each box of the Young diagram."""
    lam = IntegerPartition(lam)
    conj = lam.conjugate()
    return [(i, j, (row - j) + (conj[j] - i) - 1) for i, row in enumerate(lam) for j in range(row)]


def sym_irrep_dim(lam: Sequence[int]) -> int:
    """Dimension of the S_n irrep ``lam`` by the hook-length formula."""
    n = sum(lam)
    prod = 1
    for _, _, h in hook_lengths(lam):
        prod *= h
    return math.factorial(n) // prod


def unitary_irrep_dim(lam: Sequence[int], d: int) -> int:
    """Dimension of the U(d) irrep ``lam`` (hook-content formula); 0 if rows > d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    lam = IntegerPartition(lam)
    if lam.rows > d:
        return 0
    value = Fraction(1)
    for i, j, h in hook_lengths(lam):
        value *= Fraction(d + j - i, h)
    assert value.denominator == 1
    return int(value)


class CycleLemmaReport(NamedTuple):
    holds: bool
    saturating_count: int
    violations: int


def verify_cycle_lemma(alpha: int, cap: int = DEFAULT_ENUMERATION_CAP) -> CycleLemmaReport:
    """Brute-force ``xi(sigma tau) + xi(sigma) <= alpha + 1`` over S_alpha.

    ``saturating_count`` counts the permutations attaining equality.
    """
    check_cap(alpha, cap)
    tau = Permutation.shift(alpha).images
    saturating = violations = 0
    for images in itertools.permutations(range(alpha)):
        st = tuple(images[j] for j in tau)
        total = _cycle_count_images(st) + _cycle_count_images(images)
        if total == alpha + 1:
            saturating += 1
        elif total > alpha + 1:
            violations += 1
    return CycleLemmaReport(violations == 0, saturating, violations)


@lru_cache(maxsize=None)
def state_cycle_polynomial(alpha: int) -> dict[tuple[int, int], int]:
    """Coefficients ``{(xi(sigma tau), xi(sigma)): count}`` over all of S_alpha."""
    check_cap(alpha, DEFAULT_ENUMERATION_CAP)
    tau = Permutation.shift(alpha).images
    counts: Counter = Counter()
    for images in itertools.permutations(range(alpha)):
        st = tuple(images[j] for j in tau)
        counts[_cycle_count_images(st), _cycle_count_images(images)] += 1
    return dict(counts)
