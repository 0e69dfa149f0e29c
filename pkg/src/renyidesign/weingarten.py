"""Exact unitary Weingarten functions via the character expansion."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .permgroup import (
    IntegerPartition,
    Permutation,
    _cycle_count_images,
    _cycle_type_images,
    check_cap,
    mn_character,
    partitions,
    sym_irrep_dim,
    unitary_irrep_dim,
)

GRAM_CAP = 6


class WeingartenRegimeWarning(UserWarning):
    """d < alpha: the Gram matrix is singular and Wg is its pseudo-inverse."""


@dataclass(frozen=True)
class WeingartenTable:
    """Wg(d, .) on S_alpha, stored once per conjugacy class."""

    order: int
    dimension: int
    values: dict[IntegerPartition, Fraction] = field(repr=False)

    def __getitem__(self, sigma) -> Fraction:
        if isinstance(sigma, Permutation):
            sigma = sigma.cycle_type()
        return self.values[IntegerPartition(sorted(sigma, reverse=True))]


def _wg_class(d: int, mu: tuple[int, ...]) -> Fraction:
    alpha = sum(mu)
    total = Fraction(0)
    for lam in partitions(alpha):
        if lam.rows > d:
            continue
        f = sym_irrep_dim(lam)
        total += Fraction(f * f * mn_character(lam, mu), unitary_irrep_dim(lam, d))
    return total / math.factorial(alpha) ** 2


@lru_cache(maxsize=None)
def weingarten_table(d: int, alpha: int) -> WeingartenTable:
    if d < 1 or alpha < 1:
        raise ValueError("need d >= 1 and alpha >= 1")
    if d < alpha:
        warnings.warn(
            f"d={d} < alpha={alpha}: summing only irreps with at most d rows "
            "(pseudo-inverse of the singular Gram matrix)",
            WeingartenRegimeWarning,
            stacklevel=3,
        )
    values = {mu: _wg_class(d, tuple(mu)) for mu in partitions(alpha)}
    return WeingartenTable(alpha, d, values)


def weingarten(d: int, sigma: Permutation | Sequence[int], alpha: int | None = None) -> Fraction:
    """Wg(d, sigma) as an exact rational.

    ``sigma`` is a :class:`Permutation` or a cycle type; ``alpha`` defaults to
    the permutation degree (or the size of the cycle type).
    """
    if isinstance(sigma, Permutation):
        mu = sigma.cycle_type()
    else:
        mu = IntegerPartition(sorted(sigma, reverse=True))
    if alpha is None:
        alpha = mu.size
    if mu.size != alpha:
        raise ValueError(f"cycle type {tuple(mu)} is not a partition of {alpha}")
    return weingarten_table(d, alpha)[mu]


def _all_images(alpha: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(alpha)))


def _inverse_images(images: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(images)
    for i, j in enumerate(images):
        inv[j] = i
    return tuple(inv)


def gram_matrix(d: int, alpha: int) -> np.ndarray:
    """Integer matrix ``G[s, g] = d ** xi(s^-1 g)`` over S_alpha (lexicographic order)."""
    check_cap(alpha, GRAM_CAP, "the alpha! x alpha! Gram matrix")
    perms = _all_images(alpha)
    n = len(perms)
    G = np.empty((n, n), dtype=object)
    for a, s in enumerate(perms):
        s_inv = _inverse_images(s)
        for b, g in enumerate(perms):
            G[a, b] = d ** _cycle_count_images(tuple(s_inv[j] for j in g))
    return G


def verify_wg_inverse(d: int, alpha: int) -> bool:
    """Exact check of ``sum_g Wg(d, s g^-1) d^xi(g r^-1) == delta(s, r)``."""
    if d < alpha:
        raise ValueError(
            f"d={d} < alpha={alpha}: the Gram matrix is singular and Wg is only a "
            "pseudo-inverse, so the identity does not hold"
        )
    check_cap(alpha, GRAM_CAP, "the alpha! x alpha! Gram matrix")
    table = weingarten_table(d, alpha)
    perms = _all_images(alpha)
    inverses = [_inverse_images(p) for p in perms]
    denom = math.lcm(*(v.denominator for v in table.values.values()))
    scaled = {mu: int(v * denom) for mu, v in table.values.items()}

    n = len(perms)
    W = np.empty((n, n), dtype=object)
    D = np.empty((n, n), dtype=object)
    for a, p in enumerate(perms):
        for b in range(n):
            q_inv = inverses[b]
            p_q_inv = tuple(p[j] for j in q_inv)
            # W[s, g] = Wg(s g^-1) and D[g, r] = d^xi(g r^-1) share the same index map
            W[a, b] = scaled[IntegerPartition(_cycle_type_images(p_q_inv))]
            D[a, b] = d ** _cycle_count_images(p_q_inv)
    product = W.dot(D)
    expected = np.zeros((n, n), dtype=object)
    for i in range(n):
        expected[i, i] = denom
    return bool((product == expected).all())
