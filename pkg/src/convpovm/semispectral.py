"""Finite-dimensional semispectral measures, smearing, and moment operators.

Moment operators of a smeared spectral measure can be obtained two ways:
directly, by integrating ``x**k`` against a binned POVM
(:func:`moment_operator_direct`), or from the binomial polynomial in the
sharp observable (:func:`moment_operator_binomial`).  The two routes share no
code beyond the measures themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .measures import (
    ATOM_TOL,
    DEFAULT_RULE,
    ProbabilityMeasure,
    ScalarMeasure,
    VerdictRule,
    checked_moments,
    merge_atoms,
)
from .operators import (
    DEGENERACY_TOL,
    OperatorError,
    SpectralDecomposition,
    apply_function,
    as_density,
    as_hermitian,
    dagger,
    decompose,
    hermitian_part,
    hs_norm,
    matrix_powers,
    sqrt_psd,
    trace_pairing,
)

EFFECT_TOL = 1e-9
NORMALIZATION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralMeasureFD:
    """Projection-valued measure of a Hermitian matrix: atoms at its eigenvalues."""

    decomposition: SpectralDecomposition

    @property
    def points(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    @property
    def projections(self) -> np.ndarray:
        return self.decomposition.projections

    @property
    def dim(self) -> int:
        return self.decomposition.dim


@dataclass(frozen=True, eq=False)
class DiscretizedPOVM:
    """Effects on the bins ``(-inf, e0], (e0, e1], ..., (e_last, inf)``."""

    edges: np.ndarray
    effects: np.ndarray  # shape (len(edges) + 1, d, d)
    reps: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=float)
        effects = np.asarray(self.effects, dtype=complex)
        reps = np.asarray(self.reps, dtype=float)
        if edges.ndim != 1 or len(edges) == 0 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be a nonempty strictly increasing list")
        nb = len(edges) + 1
        if effects.ndim != 3 or effects.shape[0] != nb or effects.shape[1] != effects.shape[2]:
            raise ValueError(f"expected {nb} square effects, got array of shape {effects.shape}")
        if reps.shape != (nb,):
            raise ValueError(f"expected {nb} representative points, got {reps.shape}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "reps", reps)

    @property
    def dim(self) -> int:
        return self.effects.shape[-1]

    @property
    def n_bins(self) -> int:
        return self.effects.shape[0]

    def total(self) -> np.ndarray:
        return self.effects.sum(axis=0)

    def normalization_error(self) -> float:
        return float(np.abs(self.total() - np.eye(self.dim)).max())

    def min_effect_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(hermitian_part(self.effects)).min())

    def max_effect_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(hermitian_part(self.effects)).max())

    def validate(self, effect_tol: float = EFFECT_TOL,
                 normalization_tol: float = NORMALIZATION_TOL) -> "DiscretizedPOVM":
        asym = float(np.abs(self.effects - dagger(self.effects)).max())
        if asym > effect_tol:
            raise OperatorError(f"effects are not Hermitian (asymmetry {asym:.3g})")
        lo, hi = self.min_effect_eigenvalue(), self.max_effect_eigenvalue()
        if lo < -effect_tol or hi > 1 + effect_tol:
            raise OperatorError(f"effect eigenvalues span [{lo:.3g}, {hi:.3g}]")
        err = self.normalization_error()
        if err > normalization_tol:
            raise OperatorError(f"effects sum to identity only within {err:.3g}")
        return self

    def probabilities(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        return np.einsum("ij,bji->b", rho, self.effects).real

    def bin_of(self, x) -> np.ndarray:
        return np.searchsorted(self.edges, x, side="left")


Measure = Union[SpectralMeasureFD, DiscretizedPOVM]


def spectral_measure_of(a, degeneracy_tol: float = DEGENERACY_TOL) -> SpectralMeasureFD:
    return SpectralMeasureFD(decompose(a, degeneracy_tol))


def _points_and_effects(e: Measure) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(e, SpectralMeasureFD):
        return e.points, e.projections
    return e.reps, e.effects


def bilinear_measure(e: Measure, psi, phi) -> ScalarMeasure:
    """``X -> <psi | E(X) phi>`` as an atomic measure on the points of ``e``."""
    pts, effs = _points_and_effects(e)
    psi = np.asarray(psi, dtype=complex).ravel()
    phi = np.asarray(phi, dtype=complex).ravel()
    d = effs.shape[-1]
    if psi.shape != (d,) or phi.shape != (d,):
        raise OperatorError(f"vectors must have dimension {d}")
    w = np.einsum("i,bij,j->b", psi.conj(), effs, phi)
    return ScalarMeasure.from_atoms(pts, w)


def _reps_for(edges: np.ndarray, atom_sets: list[np.ndarray], continuous: np.ndarray,
              tol: float = ATOM_TOL) -> np.ndarray:
    nb = len(edges) + 1
    reps = np.empty(nb)
    reps[0], reps[-1] = edges[0], edges[-1]
    reps[1:-1] = 0.5 * (edges[:-1] + edges[1:])
    locs = np.concatenate(atom_sets) if atom_sets else np.zeros(0)
    if len(locs) == 0:
        return reps
    locs, _ = merge_atoms(locs, np.ones(len(locs)), tol)
    idx = np.searchsorted(edges, locs, side="left")
    counts = np.bincount(idx, minlength=nb)
    for b in np.flatnonzero((counts == 1) & ~continuous):
        reps[b] = locs[idx == b][0]
    return reps


def smear(mu: ProbabilityMeasure, e: SpectralMeasureFD, edges, label: str = "") -> DiscretizedPOVM:
    """Bin the convolution ``mu * E``: effect of ``X`` is ``sum_j mu(X - a_j) P_j``.

    Masses of ``mu`` are exact for atoms and use cell overlaps for the density
    part; the outer bins take whatever lies beyond the outermost edges, so the
    effects sum to the identity.  A bin containing exactly one smeared atom
    (and no density mass) is represented by that atom's location.
    """
    if not isinstance(mu, ProbabilityMeasure):
        raise TypeError("smearing needs a ProbabilityMeasure")
    if not isinstance(e, SpectralMeasureFD):
        raise TypeError("smearing acts on a SpectralMeasureFD")
    edges = np.asarray(edges, dtype=float)
    nb = len(edges) + 1
    d = e.dim
    effects = np.zeros((nb, d, d), dtype=complex)
    continuous = np.zeros(nb, dtype=bool)
    atom_sets = []
    live = np.abs(mu.weights) > 0
    for a_j, p_j in zip(e.points, e.projections):
        masses = mu.bin_masses(edges - a_j).real
        effects += masses[:, None, None] * p_j
        atom_sets.append(mu.locations[live] + a_j)
        if mu.density is not None:
            dens_only = ScalarMeasure(density=mu.density).bin_masses(edges - a_j)
            continuous |= np.abs(dens_only) > 0
    effects = hermitian_part(effects)
    reps = _reps_for(edges, atom_sets, continuous)
    return DiscretizedPOVM(edges, effects, reps, label or "smeared")


def binned_spectral_measure(e: SpectralMeasureFD, edges, label: str = "") -> DiscretizedPOVM:
    """Spectral measure collected into bins; a single eigenvalue in a bin is its representative."""
    return smear(ProbabilityMeasure.point(0.0), e, edges, label or "spectral")


def moment_operator_direct(e: Measure, k: int) -> np.ndarray:
    """Discretized ``L(x**k, E)``: ``sum_bins rep**k * effect``."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    pts, effs = _points_and_effects(e)
    return np.einsum("b,bij->ij", pts.astype(complex) ** k, effs)


def moment_operator_binomial(mu: ScalarMeasure, a, k: int, radii=None,
                             rule: VerdictRule = DEFAULT_RULE) -> np.ndarray:
    """``sum_n C(k, n) mu[k-n] A**n``.

    Raises :class:`~convpovm.measures.DivergentMomentError` when a moment of
    ``mu`` up to order ``k`` is not judged convergent on ``radii``.
    """
    a = as_hermitian(a)
    m = checked_moments(mu, k, radii, rule, "smearing")
    pw = matrix_powers(a, k)
    out = np.zeros_like(pw[0])
    for n in range(k + 1):
        out += math.comb(k, n) * m[k - n] * pw[n]
    return out


def state_distribution(t, a, degeneracy_tol: float = DEGENERACY_TOL) -> ProbabilityMeasure:
    """Outcome distribution ``X -> Tr[T E^A(X)]`` as atoms at the eigenvalues of ``A``."""
    t = as_density(t)
    dec = decompose(a, degeneracy_tol)
    w = np.array([trace_pairing(t, p).real for p in dec.projections])
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return ProbabilityMeasure.from_atoms(dec.eigenvalues, w)


def hs_moment_diagnostic(t, a, k: int) -> tuple[float, float]:
    """``(||  |A|^(k/2) sqrt(T) ||_HS^2,  int |x|^k dp_T^A)``; equal in finite dimension."""
    t = as_density(t)
    dec = decompose(a)
    b = apply_function(dec, lambda x: np.abs(x) ** (k / 2)) @ sqrt_psd(t)
    hs = hs_norm(b) ** 2
    p = state_distribution(t, a)
    mom = float(np.sum(np.abs(p.locations) ** k * p.weights.real))
    return hs, mom


def trace_moment(t, a, m: int, imag_tol: float = 1e-10) -> float:
    """``Tr[A**m T]``; the imaginary residue must be below ``imag_tol`` (relative)."""
    t = as_density(t)
    a = as_hermitian(a)
    val = trace_pairing(np.linalg.matrix_power(a, m), t)
    if abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise OperatorError(f"Tr[A^{m} T] has imaginary part {val.imag:.3g}")
    return float(val.real)
