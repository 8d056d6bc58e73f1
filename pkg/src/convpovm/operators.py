"""Dense finite-dimensional operators: spectral decomposition, functional calculus, traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

MAX_DIM = 256
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-12
TRACE_TOL = 1e-12
DEGENERACY_TOL = 1e-8


class OperatorError(ValueError):
    pass


def as_operator(m) -> np.ndarray:
    """Validate a square finite complex matrix within the dimension cap."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise OperatorError(f"operator must be a nonempty square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise OperatorError(f"dimension {a.shape[0]} exceeds cap {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise OperatorError("operator has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Check ``max|M - M^dag| <= tol * max(1, max|M|)``."""
    a = as_operator(m)
    scale = max(1.0, float(np.abs(a).max()))
    err = float(np.abs(a - dagger(a)).max())
    if err > tol * scale:
        raise OperatorError(f"operator is not Hermitian (asymmetry {err:.3g})")
    return a


def as_density(m, psd_tol: float = PSD_TOL, trace_tol: float = TRACE_TOL) -> np.ndarray:
    a = as_hermitian(m)
    tr = np.trace(a)
    if abs(tr - 1) > trace_tol:
        raise OperatorError(f"density operator has trace {tr:.15g}")
    lo = float(np.linalg.eigvalsh(hermitian_part(a)).min())
    if lo < -psd_tol:
        raise OperatorError(f"density operator has eigenvalue {lo:.3g}")
    return a


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Distinct eigenvalues in increasing order and their eigenprojections."""

    eigenvalues: np.ndarray
    projections: np.ndarray  # shape (k, d, d)

    @property
    def dim(self) -> int:
        return self.projections.shape[-1]

    def reconstruct(self) -> np.ndarray:
        return np.einsum("j,jab->ab", self.eigenvalues, self.projections)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def decompose(a, degeneracy_tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    """Eigendecomposition with eigenvalues closer than ``degeneracy_tol`` merged.

    Clusters are chained: consecutive sorted eigenvalues within the tolerance
    share one projection, and the cluster's eigenvalue is their mean.
    """
    a = as_hermitian(a)
    try:
        lam, vecs = np.linalg.eigh(hermitian_part(a))
    except np.linalg.LinAlgError as exc:
        raise OperatorError(f"eigensolver failed: {exc}") from exc
    breaks = np.flatnonzero(np.diff(lam) > degeneracy_tol) + 1
    groups = np.split(np.arange(len(lam)), breaks)
    eig = np.array([lam[g].mean() for g in groups])
    proj = np.stack([vecs[:, g] @ dagger(vecs[:, g]) for g in groups])
    return SpectralDecomposition(eig, proj)


def apply_function(a, f: Callable[[np.ndarray], np.ndarray],
                   degeneracy_tol: float = DEGENERACY_TOL) -> np.ndarray:
    """``sum_j f(lambda_j) P_j`` over the spectral decomposition of ``a``."""
    dec = a if isinstance(a, SpectralDecomposition) else decompose(a, degeneracy_tol)
    vals = np.asarray(f(dec.eigenvalues), dtype=complex)
    vals = np.broadcast_to(vals, dec.eigenvalues.shape)
    if not np.all(np.isfinite(vals)):
        bad = dec.eigenvalues[~np.isfinite(vals)][0]
        raise OperatorError(f"function is not finite at eigenvalue {bad}")
    return np.einsum("j,jab->ab", vals, dec.projections)


def sqrt_psd(t) -> np.ndarray:
    """Square root of a positive operator; eigenvalues above ``-PSD_TOL`` are clipped to zero."""
    t = as_hermitian(t)
    lam, v = np.linalg.eigh(hermitian_part(t))
    if lam.min() < -PSD_TOL:
        raise OperatorError(f"operator is not positive (eigenvalue {lam.min():.3g})")
    return (v * np.sqrt(np.clip(lam, 0, None))) @ dagger(v)


def hs_norm(b) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(b)) ** 2)))


def trace_pairing(t, a) -> complex:
    """``Tr(T A)``."""
    t = np.asarray(t)
    a = np.asarray(a)
    if t.shape != a.shape:
        raise OperatorError(f"dimension mismatch: {t.shape} vs {a.shape}")
    # Tr(TA) = sum_ij T_ij A_ji
    return complex(np.sum(t * a.T))


def matrix_powers(a: np.ndarray, k: int) -> list[np.ndarray]:
    """``[I, A, A^2, ..., A^k]``."""
    out = [np.eye(a.shape[0], dtype=complex)]
    for _ in range(k):
        out.append(out[-1] @ a)
    return out


def max_entry(m) -> float:
    return float(np.abs(np.asarray(m)).max())


# random instances for property checks and CLI demos

def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * hermitian_part(g) / np.sqrt(dim)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    t = g @ dagger(g)
    t = hermitian_part(t)
    return t / np.trace(t).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))
