"""Haar-random states and unitaries, and Monte Carlo moment estimators.

Randomness comes from numpy's Philox4x64 counter-based generator; normals are
numpy's ziggurat ``standard_normal``. Estimators split the sample budget into
fixed-size chunks, chunk ``k`` drawing from substream ``k`` of the seed, so an
estimate depends only on ``(seed, parameters)`` and never on worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .moments import ChoiPartitionSpec, StatePartition
from .quantum import PureState, min_entropies, von_neumann_entropies

ALGORITHM = "numpy-philox4x64/ziggurat"
CHUNK = 4096
THREADS_ENV = "RENYIDESIGN_THREADS"


@dataclass
class RandomStream:
    seed: int
    algorithm: str = ALGORITHM
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.generator = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.seed)))

    def substream(self, index: int) -> np.random.Generator:
        """Independent generator for chunk ``index`` (seed-splitting via SeedSequence)."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(int(index),))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int

    def z_score(self, exact: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == exact else math.copysign(math.inf, self.mean - exact)
        return (self.mean - exact) / self.std_error

    def agrees(self, exact: float, n_sigma: float = 4.0) -> bool:
        return abs(self.z_score(float(exact))) <= n_sigma


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator
    return rng


def haar_states(d: int, n: int, gen: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random unit vectors in C^d, shape ``(n, d)``."""
    z = gen.standard_normal((n, d, 2))
    psi = z[..., 0] + 1j * z[..., 1]
    return psi / np.linalg.norm(psi, axis=1, keepdims=True)


def haar_unitaries(d: int, n: int, gen: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random d x d unitaries: Ginibre -> QR -> divide out R's diagonal phases."""
    z = gen.standard_normal((n, d, d, 2))
    ginibre = (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[..., None, :]


def sample_haar_state(d: int, rng: RandomStream | np.random.Generator, dims=None) -> PureState:
    if d < 1:
        raise ValueError("d must be >= 1")
    return PureState(haar_states(d, 1, _gen(rng))[0], dims)


def sample_haar_unitary(d: int, rng: RandomStream | np.random.Generator) -> np.ndarray:
    if d < 1:
        raise ValueError("d must be >= 1")
    return haar_unitaries(d, 1, _gen(rng))[0]


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class _Stats:
    n: int
    mean: float
    m2: float

    @classmethod
    def of(cls, x: np.ndarray) -> _Stats:
        x = np.asarray(x, dtype=float)
        mean = float(x.mean())
        return cls(x.size, mean, float(((x - mean) ** 2).sum()))

    def merge(self, other: _Stats) -> _Stats:
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        return _Stats(n, mean, self.m2 + other.m2 + delta * delta * self.n * other.n / n)


def _pairwise_merge(stats: list[_Stats]) -> _Stats:
    while len(stats) > 1:
        merged = [stats[i].merge(stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            merged.append(stats[-1])
        stats = merged
    return stats[0]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _estimate(batch: Callable[[int, np.random.Generator], np.ndarray], n: int, rng: RandomStream) -> McEstimate:
    if n < 2:
        raise ValueError("need at least 2 samples")
    if not isinstance(rng, RandomStream):
        raise TypeError("Monte Carlo estimators need a RandomStream for reproducible substreams")
    sizes = [min(CHUNK, n - start) for start in range(0, n, CHUNK)]

    def run(k):
        return _Stats.of(batch(sizes[k], rng.substream(k)))

    threads = _threads()
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(threads) as pool:
            stats = list(pool.map(run, range(len(sizes))))
    else:
        stats = [run(k) for k in range(len(sizes))]
    total = _pairwise_merge(stats)
    std = math.sqrt(total.m2 / (total.n - 1))
    return McEstimate(total.mean, std / math.sqrt(total.n), total.n, rng.seed)


def _batched_trace_power(rho: np.ndarray, alpha: int) -> np.ndarray:
    return np.trace(np.linalg.matrix_power(rho, alpha), axis1=-2, axis2=-1).real


def _state_reduced(p: StatePartition, n: int, gen) -> np.ndarray:
    psi = haar_states(p.d, n, gen).reshape(n, p.d_A, p.d_B)
    return psi @ np.conj(np.swapaxes(psi, -1, -2))


def _choi_reduced(p: ChoiPartitionSpec, n: int, gen) -> np.ndarray:
    U = haar_unitaries(p.d, n, gen)
    # Choi coefficient tensor M[(a,b),(c,e)] = U[(c,e),(a,b)] / sqrt(d)
    M = np.swapaxes(U, -1, -2).reshape(n, p.d_A, p.d_B, p.d_C, p.d_D) / math.sqrt(p.d)
    X = M.transpose(0, 1, 3, 2, 4).reshape(n, p.d_A * p.d_C, p.d_B * p.d_D)
    return X @ np.conj(np.swapaxes(X, -1, -2))


def mc_state_moment(p: StatePartition, alpha: int, n: int, rng: RandomStream) -> McEstimate:
    """Monte Carlo ``E tr rho_A^alpha`` over Haar pure states."""
    if n < 100:
        raise ValueError("n must be >= 100")
    return _estimate(lambda m, g: _batched_trace_power(_state_reduced(p, m, g), alpha), n, rng)


def mc_choi_moment(p: ChoiPartitionSpec, alpha: int, n: int, rng: RandomStream) -> McEstimate:
    """Monte Carlo ``E tr rho_AC^alpha`` over Choi states of Haar unitaries."""
    if n < 100:
        raise ValueError("n must be >= 100")
    return _estimate(lambda m, g: _batched_trace_power(_choi_reduced(p, m, g), alpha), n, rng)


def _entropies(rhos: np.ndarray, kind) -> np.ndarray:
    if kind not in ("vn", "min"):
        alpha = int(kind)
        if alpha < 2:
            raise ValueError("Renyi order must be >= 2")
        return np.log2(_batched_trace_power(rhos, alpha)) / (1 - alpha)
    if kind == "min":
        return min_entropies(rhos)
    return von_neumann_entropies(rhos)


def mc_entropy_average(
    target: str,
    partition: Union[StatePartition, ChoiPartitionSpec],
    kind: int | str,
    n: int,
    rng: RandomStream,
) -> McEstimate:
    """Monte Carlo Haar average of an entropy of the reduced state.

    ``target`` is ``"state"`` (reduce onto A) or ``"choi"`` (reduce onto AC);
    ``kind`` is a Renyi order >= 2, ``"min"`` or ``"vn"``.
    """
    if target == "state":
        reduce = _state_reduced
    elif target == "choi":
        reduce = _choi_reduced
    else:
        raise ValueError(f"target must be 'state' or 'choi', got {target!r}")
    return _estimate(lambda m, g: _entropies(reduce(partition, m, g), kind), n, rng)


def mc_mean(f: Callable[[np.random.Generator], float], n: int, rng: RandomStream) -> McEstimate:
    """Monte Carlo mean of a scalar function of one draw from a generator."""
    return _estimate(lambda m, g: np.array([f(g) for _ in range(m)]), n, rng)
