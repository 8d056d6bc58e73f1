"""Covariant phase-space observables in a truncated number basis.

Conventions: hbar = 1, ``Q = (a + a^dag)/sqrt(2)``, ``P = (a - a^dag)/(i sqrt(2))``
and ``W(q, p) = exp(i(pQ - qP))``, so that ``W(q, p)|0>`` is the coherent state
with amplitude ``(q + ip)/sqrt(2)`` and ``W^dag Q W = Q + q``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .measures import ProbabilityMeasure
from .operators import (
    as_density,
    as_hermitian,
    dagger,
    hermitian_part,
    matrix_powers,
    max_entry,
    trace_pairing,
)
from .semispectral import DiscretizedPOVM, smear, spectral_measure_of, trace_moment


class TruncationWarning(UserWarning):
    """Displacements or cells too large for the chosen truncation or grid."""


def lowering(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError(f"Fock truncation needs N >= 2, got {n}")
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


@dataclass(frozen=True)
class FockTruncation:
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"Fock truncation needs N >= 2, got {self.n}")

    @property
    def a(self) -> np.ndarray:
        return lowering(self.n)

    def vacuum(self) -> np.ndarray:
        return fock_state(0, self.n)


def position_operator(n: int) -> np.ndarray:
    a = lowering(n)
    return (a + dagger(a)) / math.sqrt(2)


def momentum_operator(n: int) -> np.ndarray:
    a = lowering(n)
    return (a - dagger(a)) / (1j * math.sqrt(2))


def quadrature(n: int, axis: str) -> np.ndarray:
    if axis == "x":
        return position_operator(n)
    if axis == "y":
        return momentum_operator(n)
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def fourier_operator(n: int) -> np.ndarray:
    """``exp(i pi/2 a^dag a)``: conjugation maps ``Q -> P`` and ``P -> -Q``."""
    return np.diag(1j ** np.arange(n))


def weyl(q: float, p: float, n: int) -> np.ndarray:
    """``exp(i(pQ - qP))`` by dense matrix exponential."""
    amp2 = 0.5 * (q * q + p * p)
    if amp2 > n / 2:
        warnings.warn(f"|alpha|^2 = {amp2:.3g} is not small against N = {n}", TruncationWarning,
                      stacklevel=2)
    gen = 1j * (p * position_operator(n) - q * momentum_operator(n))
    return scipy.linalg.expm(gen)


def fock_state(k: int, n: int) -> np.ndarray:
    v = np.zeros((n, n), dtype=complex)
    v[k, k] = 1.0
    return v


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def coherent_vector(q: float, p: float, n: int) -> np.ndarray:
    """Truncated, renormalized coherent state with amplitude ``(q + ip)/sqrt(2)``."""
    alpha = (q + 1j * p) / math.sqrt(2)
    k = np.arange(n)
    logfact = np.array([math.lgamma(j + 1) for j in k])
    v = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * logfact) * alpha ** k
    return v / np.linalg.norm(v)


def squeezed_vacuum_vector(r: float, n: int) -> np.ndarray:
    """``S(r)|0>`` with position variance ``exp(-2r)/2``, truncated and renormalized."""
    v = np.zeros(n, dtype=complex)
    t = math.tanh(r)
    for j in range(0, n, 2):
        m = j // 2
        v[j] = (-t) ** m * math.exp(0.5 * math.lgamma(j + 1) - math.lgamma(m + 1)) / 2 ** m
    v /= math.sqrt(math.cosh(r))
    return v / np.linalg.norm(v)


def embed(t: np.ndarray, n: int) -> np.ndarray:
    """Pad a density matrix with zeros to dimension ``n``."""
    d = t.shape[0]
    if d > n:
        if np.abs(t[n:, :]).max() > 0 or np.abs(t[:, n:]).max() > 0:
            raise ValueError(f"state does not fit in {n} levels")
        return t[:n, :n].copy()
    out = np.zeros((n, n), dtype=complex)
    out[:d, :d] = t
    return out


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Square window ``[-L, L]^2`` split into ``m x m`` cells."""

    half_width: float
    points: int

    def __post_init__(self) -> None:
        if not self.half_width > 0:
            raise ValueError("half-width must be positive")
        if self.points < 2:
            raise ValueError("need at least 2 points per axis")

    @property
    def step(self) -> float:
        return 2 * self.half_width / self.points

    @property
    def cell_area(self) -> float:
        return self.step ** 2

    @property
    def edges(self) -> np.ndarray:
        return -self.half_width + self.step * np.arange(self.points + 1)

    @property
    def centers(self) -> np.ndarray:
        return -self.half_width + self.step * (np.arange(self.points) + 0.5)

    def nodes(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Tensor Gauss-Legendre nodes along one axis: ``(points*order,)`` nodes and weights."""
        g, w = np.polynomial.legendre.leggauss(order)
        h = self.step
        x = (self.edges[:-1, None] + h * (g + 1) / 2).ravel()
        wx = np.tile(w * h / 2, self.points)
        return x, wx


@dataclass(frozen=True, eq=False)
class PhaseSpacePOVM:
    """Cell effects ``(1/2pi) int_cell W T W^dag`` stored as factors.

    ``factors[i, j]`` is a ``(N, K)`` matrix ``F`` with ``effect(i, j) = F F^dag``;
    ``i`` indexes position cells and ``j`` momentum cells.
    """

    grid: PhaseSpaceGrid
    factors: np.ndarray
    order: int = 3
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.factors.shape[2]

    def effect(self, i: int, j: int) -> np.ndarray:
        f = self.factors[i, j]
        return f @ dagger(f)

    def effects(self) -> np.ndarray:
        """All cell effects, shape ``(m, m, N, N)``."""
        return np.einsum("ijak,ijbk->ijab", self.factors, self.factors.conj())

    def _strips(self, axis: str) -> np.ndarray:
        f = self.factors if axis == "x" else np.swapaxes(self.factors, 0, 1)
        m = f.shape[0]
        flat = np.swapaxes(f, 1, 2).reshape(m, self.dim, -1)
        return np.einsum("iak,ibk->iab", flat, flat.conj())

    def total(self) -> np.ndarray:
        return self._strips("x").sum(axis=0)

    def deficiency(self) -> np.ndarray:
        """``I - sum of effects``; nonzero from the finite window and the truncation."""
        return np.eye(self.dim) - self.total()

    def captured_mass(self) -> float:
        """``Tr(sum of effects) / N``."""
        return float(np.trace(self.total()).real / self.dim)

    def captured_mass_in(self, rho) -> float:
        return float(trace_pairing(rho, self.total()).real)

    def excess(self) -> float:
        """How far the summed effects exceed the identity (0 when ``sum <= I``)."""
        return max(0.0, -float(np.linalg.eigvalsh(hermitian_part(self.deficiency())).min()))

    def marginal(self, axis: str = "x") -> DiscretizedPOVM:
        """Strip sums as a binned POVM on the grid lines; the outer bins share the deficiency."""
        strips = self._strips(axis)
        d = hermitian_part(np.eye(self.dim) - strips.sum(axis=0))
        effects = np.concatenate([d[None] / 2, strips, d[None] / 2])
        effects = hermitian_part(effects)
        e = self.grid.edges
        reps = np.concatenate([[e[0]], self.grid.centers, [e[-1]]])
        return DiscretizedPOVM(e, effects, reps, f"marginal_{axis}")


def marginal_x(e: PhaseSpacePOVM) -> DiscretizedPOVM:
    return e.marginal("x")


def marginal_y(e: PhaseSpacePOVM) -> DiscretizedPOVM:
    return e.marginal("y")


def build_phase_space_povm(t, grid: PhaseSpaceGrid, order: int = 3) -> PhaseSpacePOVM:
    """Integrate ``W(q, p) T W(q, p)^dag / 2pi`` over every cell by tensor Gauss-Legendre.

    Every displacement is the exponential of the same truncated generator that
    :func:`weyl` uses, evaluated through the eigenbasis of ``Q``: the
    generator ``pQ - qP`` is ``r U Q U^dag`` with ``U`` a diagonal phase
    rotation, so ``W = U V exp(i r x) V^dag U^dag``.
    """
    t = as_density(t)
    n = t.shape[0]
    if grid.cell_area > 1:
        warnings.warn(f"cell area {grid.cell_area:.3g} > 1; grid is coarse", TruncationWarning,
                      stacklevel=2)
    amp2 = grid.half_width ** 2
    if amp2 > n:
        warnings.warn(f"window reaches |alpha|^2 = {amp2:.3g} > N = {n}", TruncationWarning,
                      stacklevel=2)
    lam, u = np.linalg.eigh(hermitian_part(t))
    keep = lam > 1e-14
    b0 = u[:, keep] * np.sqrt(lam[keep])  # T = b0 b0^dag
    x, v = np.linalg.eigh(position_operator(n))
    levels = np.arange(n)
    nodes, wts = grid.nodes(order)
    m, rank = grid.points, b0.shape[1]
    factors = np.empty((m, m, n, order * order * rank), dtype=complex)
    vd = dagger(v)
    for i in range(m):
        qs = nodes[i * order:(i + 1) * order]
        cols = []
        for a in range(order):
            q = qs[a]
            r = np.hypot(q, nodes)
            th = np.arctan2(-q, nodes)
            ph = np.exp(1j * th[:, None] * levels)  # U_theta diagonal, per p node
            y = np.einsum("kn,sn,nr->skr", vd, ph.conj(), b0)
            y *= np.exp(1j * r[:, None] * x)[:, :, None]
            z = np.einsum("nk,skr->snr", v, y) * ph[:, :, None]
            scale = np.sqrt(wts[i * order + a] * wts / (2 * math.pi))
            cols.append(z * scale[:, None, None])
        # cols[a]: (m*order, n, rank) indexed by p node; regroup per momentum cell
        stack = np.stack(cols)  # (order_q, m*order_p, n, rank)
        stack = stack.reshape(order, m, order, n, rank)
        factors[i] = np.transpose(stack, (1, 3, 0, 2, 4)).reshape(m, n, -1)
    return PhaseSpacePOVM(grid, factors, order, {"N": n, "rank": int(rank)})


# ---------------------------------------------------------------- continuous quadrature laws


def hermite_functions(n: int, x) -> np.ndarray:
    """Orthonormal oscillator eigenfunctions ``psi_0..psi_{n-1}`` at ``x``, shape ``(n, *x.shape)``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((n,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-x * x / 2)
    if n > 1:
        out[1] = math.sqrt(2) * x * out[0]
    for k in range(2, n):
        out[k] = math.sqrt(2 / k) * x * out[k - 1] - math.sqrt((k - 1) / k) * out[k - 2]
    return out


def quadrature_distribution(t, axis: str = "x", sign: int = 1, half_width: float = 14.0,
                            step: float = 0.005, order: int = 8) -> ProbabilityMeasure:
    """Schrodinger-representation law of ``sign * Q`` (or ``sign * P``) in state ``T``.

    Returned as a gridded density on ``[-half_width, half_width]`` with cell
    masses from Gauss-Legendre quadrature of ``<x|T|x>``, renormalized to one.
    """
    t = as_density(t)
    n = t.shape[0]
    if axis == "y":
        f = fourier_operator(n)
        t = dagger(f) @ t @ f  # law of P in T is the law of Q in F^dag T F
    elif axis != "x":
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    cells = int(round(2 * half_width / step))
    edges = -half_width + step * np.arange(cells + 1)
    g, w = np.polynomial.legendre.leggauss(order)
    pts = edges[:-1, None] + step * (g + 1) / 2
    psi = hermite_functions(n, sign * pts)
    dens = np.einsum("mn,m...,n...->...", t, psi, psi).real
    masses = (dens * w * step / 2).sum(axis=-1)
    return ProbabilityMeasure.from_cell_masses(-half_width, step, masses)


# ---------------------------------------------------------------- checks of the marginal theorem


def marginal_moment_operator(t, k: int, n: int | None = None, axis: str = "x") -> np.ndarray:
    """``sum_n C(k, n) (-1)^(k-n) Tr[Q^(k-n) T] Q^n`` (``P`` for ``axis='y'``)."""
    t = as_density(t)
    if n is not None and n != t.shape[0]:
        t = embed(t, n)
    n = t.shape[0]
    a = quadrature(n, axis)
    pw = matrix_powers(a, k)
    out = np.zeros_like(pw[0])
    for j in range(k + 1):
        out += math.comb(k, j) * (-1) ** (k - j) * trace_moment(t, a, k - j) * pw[j]
    return out


def block_distance(a: np.ndarray, b: np.ndarray, block: int | None = None) -> float:
    """Max-entry distance on the leading ``block x block`` corner."""
    if block is None:
        return max_entry(a - b)
    return max_entry(a[..., :block, :block] - b[..., :block, :block])


@dataclass
class ConvolutionCheckRow:
    n: int
    block: int
    bin_distances: np.ndarray
    max_distance: float
    vacuum_mass_distance: float
    captured_mass: float

    def as_dict(self) -> dict:
        return {"N": self.n, "block": self.block, "max_distance": self.max_distance,
                "vacuum_mass_distance": self.vacuum_mass_distance,
                "captured_mass": self.captured_mass}


@dataclass
class ConvolutionCheckReport:
    rows: list[ConvolutionCheckRow]
    axis: str

    @property
    def distances(self) -> list[float]:
        return [r.max_distance for r in self.rows]

    @property
    def monotone(self) -> bool:
        d = self.distances
        return all(b <= a for a, b in zip(d, d[1:]))


def smeared_quadrature_povm(t, grid: PhaseSpaceGrid, axis: str = "x",
                            law_step: float = 0.005) -> DiscretizedPOVM:
    """``p_T^{-Q} * E^Q`` (or the ``P`` analogue) binned on the grid lines."""
    t = as_density(t)
    n = t.shape[0]
    law = quadrature_distribution(t, axis, sign=-1,
                                  half_width=max(14.0, 2 * grid.half_width), step=law_step)
    return smear(law, spectral_measure_of(quadrature(n, axis)), grid.edges, f"smeared_{axis}")


def marginal_convolution_check(state, grid: PhaseSpaceGrid, n_values: Sequence[int],
                               block: int | None = None, axis: str = "x",
                               order: int = 3) -> ConvolutionCheckReport:
    """Compare the marginal of ``E^T`` with ``p_T^{-Q} * E^Q`` bin by bin for each truncation.

    ``state`` is a density matrix (zero-padded to each ``N``) or a callable
    ``N -> density matrix``.  Distances are max-entry norms over the interior
    bins, restricted to the leading ``block`` levels; by default the block is
    half the smallest truncation so all ``N`` are compared on one subspace.
    """
    n_values = list(n_values)
    if block is None:
        block = min(n_values) // 2
    rows = []
    for n in n_values:
        t = state(n) if callable(state) else embed(np.asarray(state, dtype=complex), n)
        povm = build_phase_space_povm(t, grid, order)
        marg = povm.marginal(axis)
        ref = smeared_quadrature_povm(t, grid, axis)
        diff = marg.effects[1:-1] - ref.effects[1:-1]
        per_bin = np.abs(diff[:, :block, :block]).max(axis=(1, 2))
        vac = np.abs(diff[:, 0, 0]).max()
        rows.append(ConvolutionCheckRow(n, block, per_bin, float(per_bin.max()), float(vac),
                                        povm.captured_mass()))
    return ConvolutionCheckReport(rows, axis)
