"""Dense states, partial traces, Choi states and the generalized entropy family.

Composite registers are row-major with the first listed factor most
significant, e.g. ``i = a * d_B + b``. Entropies are in bits unless noted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10
UNITARY_TOL = 1e-10
ZERO_EIG = 1e-14


class NotUnitaryError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _check_dims(dims: Sequence[int], total: int) -> tuple[int, ...]:
    dims = tuple(int(x) for x in dims)
    if any(x < 1 for x in dims) or math.prod(dims) != total:
        raise ValueError(f"dims {dims} do not factor dimension {total}")
    return dims


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, amplitudes, dims: Sequence[int] | None = None, tol: float = HERMITIAN_TOL):
        psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dims = (psi.size,) if dims is None else dims
        object.__setattr__(self, "amplitudes", psi)
        object.__setattr__(self, "dims", _check_dims(dims, psi.size))
        norm = np.vdot(psi, psi).real
        if abs(norm - 1) > tol:
            raise ValueError(f"state not normalized: |psi|^2 = {norm!r}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityMatrix:
        psi = self.amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()), self.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix with subsystem metadata.

    Construction checks Hermiticity and trace; :meth:`validate` also checks
    the spectrum.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        rho = np.asarray(matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {rho.shape}")
        dims = (rho.shape[0],) if dims is None else dims
        object.__setattr__(self, "matrix", rho)
        object.__setattr__(self, "dims", _check_dims(dims, rho.shape[0]))
        herm = np.abs(rho - rho.conj().T).max(initial=0.0)
        if herm > HERMITIAN_TOL:
            raise ValueError(f"matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1) > TRACE_TOL:
            raise ValueError(f"trace {tr} != 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self) -> DensityMatrix:
        lo = eigvalsh(self.matrix).min()
        if lo < -NEGATIVE_EIG_TOL:
            raise ValueError(f"negative eigenvalue {lo:.3e}")
        return self

    def kron(self, other: DensityMatrix) -> DensityMatrix:
        return DensityMatrix(np.kron(self.matrix, other.matrix), self.dims + other.dims)


State = Union[PureState, DensityMatrix]


def check_unitary(U, tol: float = UNITARY_TOL) -> np.ndarray:
    """Return ``U`` as a complex array, raising :class:`NotUnitaryError` if ``U^dag U != I``."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise NotUnitaryError(f"unitary must be square, got shape {U.shape}")
    err = np.abs(U.conj().T @ U - np.eye(U.shape[0])).max()
    if err > tol:
        raise NotUnitaryError(f"U^dag U deviates from identity by {err:.3e}")
    return U


# ---------------------------------------------------------------- eigensolvers


def _off_norm(A: np.ndarray) -> np.ndarray:
    n = A.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt((np.abs(A[..., mask]) ** 2).sum(axis=-1))


def eigvalsh(H, tol: float = 1e-11, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix (or a stack of them) by cyclic Jacobi rotations.

    Each rotation first phase-shifts column/row ``q`` so that ``A[p, q]`` is
    real, then applies a real Jacobi rotation. Sweeps until the off-diagonal
    Frobenius norm is below ``tol`` times the Frobenius norm of ``H``.
    Eigenvalues are returned in ascending order along the last axis.
    """
    A = np.array(H, dtype=complex)
    n = A.shape[-1]
    if n == 1:
        return A.real[..., 0, :].copy()
    scale = np.maximum(np.linalg.norm(A, axis=(-2, -1)), 1e-300)
    for _ in range(max_sweeps):
        if np.all(_off_norm(A) <= tol * scale):
            return np.sort(A.real.diagonal(axis1=-2, axis2=-1), axis=-1)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[..., p, q]
                mag = np.abs(apq)
                safe = np.where(mag > 1e-300, mag, 1.0)
                phase = np.where(mag > 1e-300, apq / safe, 1.0)
                A[..., :, q] *= phase.conj()[..., None]
                A[..., q, :] *= phase[..., None]
                theta = (A[..., q, q].real - A[..., p, p].real) / (2 * safe)
                with np.errstate(over="ignore"):
                    # huge theta overflows to inf, giving t = 0 as it should
                    t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1))
                t = np.where(mag > 1e-300, t, 0.0)
                c = (1 / np.sqrt(t * t + 1))[..., None]
                s = (t * c[..., 0])[..., None]
                col_p = A[..., :, p].copy()
                A[..., :, p] = c * col_p - s * A[..., :, q]
                A[..., :, q] = s * col_p + c * A[..., :, q]
                row_p = A[..., p, :].copy()
                A[..., p, :] = c * row_p - s * A[..., q, :]
                A[..., q, :] = s * row_p + c * A[..., q, :]
                A[..., p, q] = 0
                A[..., q, p] = 0
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", float(np.max(_off_norm(A))))


def largest_eigenvalue(
    H,
    rtol: float = 1e-10,
    max_iter: int = 100_000,
    seed: int = 0,
    restarts: int = 3,
    squarings: int = 3,
) -> float | np.ndarray:
    """Largest eigenvalue of a PSD Hermitian matrix (or stack) by power iteration.

    Iterates with ``H^(2^squarings)`` (trace-normalized) so each step contracts
    the subdominant components faster; the Rayleigh quotient is always taken
    with ``H`` itself. Convergence is declared on the Rayleigh quotient, which
    is harmless under a degenerate top eigenvalue: it must change by at most
    ``rtol`` (relative) on two consecutive steps. A start vector that
    collapses is replaced by a fresh random one, up to ``restarts`` times.
    """
    H = np.asarray(H, dtype=complex)
    single = H.ndim == 2
    H = H.reshape((-1,) + H.shape[-2:])
    K = H.copy()
    for _ in range(squarings):
        K = K @ K
        tr = np.abs(np.trace(K, axis1=-2, axis2=-1))
        K /= np.where(tr > 0, tr, 1.0)[:, None, None]
    m, n = H.shape[0], H.shape[-1]
    rng = np.random.default_rng(seed)
    theta = np.zeros(m)
    todo = np.flatnonzero(np.any(H != 0, axis=(-2, -1)))
    residual = np.inf
    for _ in range(restarts + 1):
        if todo.size == 0:
            return float(theta[0]) if single else theta
        Hs, Ks = H[todo], K[todo]
        v = rng.standard_normal((todo.size, n)) + 1j * rng.standard_normal((todo.size, n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        prev = np.full(todo.size, np.nan)
        hits = np.zeros(todo.size, dtype=int)
        active = np.ones(todo.size, dtype=bool)
        collapsed = np.zeros(todo.size, dtype=bool)
        for _ in range(max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            hv = np.einsum("kij,kj->ki", Hs[idx], v[idx])
            th = np.einsum("ki,ki->k", v[idx].conj(), hv).real
            w = np.einsum("kij,kj->ki", Ks[idx], v[idx])
            norm = np.linalg.norm(w, axis=1)
            dead = norm < 1e-200
            collapsed[idx[dead]] = True
            active[idx[dead]] = False
            close = np.abs(th - prev[idx]) <= rtol * np.abs(th)
            hits[idx] = np.where(close, hits[idx] + 1, 0)
            done = (hits[idx] >= 2) & ~dead
            theta[todo[idx[done]]] = th[done]
            active[idx[done]] = False
            residual = float(np.max(np.linalg.norm(hv - th[:, None] * v[idx], axis=1), initial=0.0))
            prev[idx] = th
            v[idx] = w / np.where(dead, 1.0, norm)[:, None]
        else:
            raise ConvergenceError(f"power iteration did not converge in {max_iter} steps", residual)
        todo = todo[collapsed]
    if todo.size:
        raise ConvergenceError("power iteration start vectors kept collapsing", residual)
    return float(theta[0]) if single else theta


# ---------------------------------------------------------------- states


def choi_state(U) -> PureState:
    """Choi state ``(1/sqrt d) sum_ij U_ji |i>_in |j>_out`` with dims ``(d, d)``."""
    U = check_unitary(U)
    d = U.shape[0]
    return PureState(U.T.reshape(-1) / math.sqrt(d), (d, d))


def _as_mask(keep, n: int) -> list[int]:
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("must keep at least one subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"subsystem index out of range for {n} subsystems: {keep}")
    return keep


def reduced_density(state: State, keep, dims: Sequence[int] | None = None) -> DensityMatrix:
    """Partial trace onto the subsystems listed in ``keep``.

    ``dims`` overrides the state's own factorization (it must multiply out to
    the same total dimension).
    """
    dims = _check_dims(dims if dims is not None else state.dims, state.dim)
    keep = _as_mask(keep, len(dims))
    rest = [k for k in range(len(dims)) if k not in keep]
    dk = math.prod(dims[k] for k in keep)
    if isinstance(state, PureState):
        psi = state.amplitudes.reshape(dims).transpose(keep + rest).reshape(dk, -1)
        rho = psi @ psi.conj().T
    else:
        n = len(dims)
        t = state.matrix.reshape(dims + dims)
        t = t.transpose(keep + rest + [n + k for k in keep] + [n + k for k in rest])
        dr = state.dim // dk
        t = t.reshape(dk, dr, dk, dr)
        rho = np.einsum("ajbj->ab", t)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, [dims[k] for k in keep])


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, PureState):
        return rho.density().matrix
    return np.asarray(rho, dtype=complex)


def trace_power(rho, alpha: int) -> float:
    """``tr rho^alpha`` by repeated squaring of the matrix."""
    if alpha < 1 or int(alpha) != alpha:
        raise ValueError("alpha must be a positive integer")
    M = _matrix(rho)
    return float(np.trace(np.linalg.matrix_power(M, int(alpha))).real)


def renyi_entropy(rho, alpha: int) -> float:
    if alpha < 2:
        raise ValueError("Renyi order must be >= 2 here; use von_neumann for alpha = 1")
    return math.log2(trace_power(rho, alpha)) / (1 - alpha)


def generalized_entropy(rho, alpha: int, s: float | str = "renyi") -> float:
    """Unified entropy ``((tr rho^alpha)^s - 1) / (s (1 - alpha))``.

    ``s="renyi"`` is the ``s -> 0`` limit and is reported in bits. Any numeric
    ``s`` (``"tsallis"`` means ``s=1``) returns the dimensionless unified
    value, whose natural-log scaling is what the ``s -> 0`` limit reproduces.
    """
    if alpha < 2:
        raise ValueError("alpha must be >= 2; alpha = 1 belongs to von_neumann")
    if s == "renyi":
        return renyi_entropy(rho, alpha)
    if s == "tsallis":
        s = 1.0
    s = float(s)
    if s == 0:
        raise ValueError("s = 0 is the Renyi limit; pass s='renyi'")
    return (trace_power(rho, alpha) ** s - 1) / (s * (1 - alpha))


def tsallis_entropy(rho, alpha: int) -> float:
    return generalized_entropy(rho, alpha, "tsallis")


def min_entropy(rho, rtol: float = 1e-10) -> float:
    lam = largest_eigenvalue(_matrix(rho), rtol=rtol)
    return -math.log2(min(lam, 1.0)) + 0.0


def min_entropies(rhos: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """:func:`min_entropy` over a stack of density matrices."""
    lam = largest_eigenvalue(np.asarray(rhos), rtol=rtol)
    return -np.log2(np.minimum(np.atleast_1d(lam), 1.0))


def von_neumann_entropies(rhos: np.ndarray) -> np.ndarray:
    """:func:`von_neumann` over a stack of density matrices."""
    lam = eigvalsh(rhos)
    if lam.min() < -NEGATIVE_EIG_TOL:
        raise ValueError(f"negative eigenvalue {lam.min():.3e}")
    lam = np.clip(lam, 0.0, 1.0)
    safe = np.where(lam > ZERO_EIG, lam, 1.0)
    return -(np.where(lam > ZERO_EIG, lam * np.log2(safe), 0.0)).sum(axis=-1) + 0.0


def von_neumann(rho) -> float:
    lam = eigvalsh(_matrix(rho))
    if lam.min() < -NEGATIVE_EIG_TOL:
        raise ValueError(f"negative eigenvalue {lam.min():.3e}")
    lam = np.clip(lam, 0.0, 1.0)
    lam = lam[lam > ZERO_EIG]
    return float(-(lam * np.log2(lam)).sum()) + 0.0


def entropy(rho, kind: int | str) -> float:
    """Dispatch: integer Renyi order >= 2, ``"vn"`` or ``"min"``."""
    if kind == "vn":
        return von_neumann(rho)
    if kind == "min":
        return min_entropy(rho)
    return renyi_entropy(rho, int(kind))


def mutual_information(state: State, a, b, kind: int | str = "vn", dims=None) -> float:
    """``S(a) + S(b) - S(ab)`` for disjoint subsystem groups ``a`` and ``b``."""
    a, b = list(np.atleast_1d(a)), list(np.atleast_1d(b))

    def S(keep):
        return entropy(reduced_density(state, keep, dims), kind)

    return S(a) + S(b) - S(a + b)


class TripartiteReport(NamedTuple):
    value: float
    marginal_shortcut: float
    I_A_CD: float
    I_A_C: float
    I_A_D: float


A, B, C, D = 0, 1, 2, 3


def negative_tripartite_report(U, p, kind: int | str = "vn") -> TripartiteReport:
    """``-I3(A:C:D) = I(A:CD) - I(A:C) - I(A:D)`` on the Choi state of ``U``.

    ``p`` is a :class:`~renyidesign.moments.ChoiPartitionSpec`. The shortcut
    ``S(AC) + S(AD) - log2 d`` uses only that every single-region marginal is
    maximally mixed.
    """
    U = check_unitary(U)
    if U.shape[0] != p.d_A * p.d_B:
        raise ValueError(f"partition {p} does not match unitary dimension {U.shape[0]}")
    psi = choi_state(U)
    dims = (p.d_A, p.d_B, p.d_C, p.d_D)

    def S(keep):
        return entropy(reduced_density(psi, keep, dims), kind)

    s_a = S([A])
    i_a_cd = s_a + S([C, D]) - S([A, C, D])
    s_ac, s_ad = S([A, C]), S([A, D])
    i_a_c = s_a + S([C]) - s_ac
    i_a_d = s_a + S([D]) - s_ad
    shortcut = s_ac + s_ad - math.log2(U.shape[0])
    return TripartiteReport(i_a_cd - i_a_c - i_a_d, shortcut, i_a_cd, i_a_c, i_a_d)


def negative_tripartite(U, p, kind: int | str = "vn") -> float:
    return negative_tripartite_report(U, p, kind).value
