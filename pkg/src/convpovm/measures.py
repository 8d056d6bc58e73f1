"""Complex measures on the real line: atoms plus a piecewise-constant density.

A :class:`ScalarMeasure` is a finite list of point masses together with an
optional density that is constant on the cells of a uniform grid.  Integrals
against the density part use the midpoint rule, which makes the convolution of
two gridded densities an exact discrete convolution of cell values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

ATOM_TOL = 1e-12
MAX_CELLS = 10_000_000


class MeasureError(ValueError):
    """Raised for malformed measures or incompatible operands."""


class GridError(MeasureError):
    """Density grids that cannot be combined without resampling."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Density:
    """Piecewise-constant density; cell ``i`` is ``[origin + i*step, origin + (i+1)*step)``."""

    origin: float
    step: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if not (self.step > 0 and math.isfinite(self.step)):
            raise MeasureError(f"density step must be positive, got {self.step}")
        if not math.isfinite(self.origin):
            raise MeasureError("density origin must be finite")
        values = np.array(self.values, dtype=complex).ravel()
        if not np.all(np.isfinite(values)):
            raise MeasureError("density values must be finite")
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "values", _frozen(values))

    @property
    def edges(self) -> np.ndarray:
        return self.origin + self.step * np.arange(len(self.values) + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.origin + self.step * (np.arange(len(self.values)) + 0.5)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        """Mass of the density on ``(-inf, x]`` (piecewise linear in ``x``)."""
        cum = np.concatenate([[0.0], np.cumsum(self.values * self.step)])
        x = np.asarray(x, dtype=float)
        e = self.edges
        # np.interp is real-only
        re = np.interp(x, e, cum.real, left=0.0, right=cum[-1].real)
        im = np.interp(x, e, cum.imag, left=0.0, right=cum[-1].imag)
        return re + 1j * im


@dataclass(frozen=True, eq=False)
class ScalarMeasure:
    """Complex Borel measure made of point masses and an optional gridded density."""

    locations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    density: Density | None = None

    def __post_init__(self) -> None:
        locs = np.array(self.locations, dtype=float).ravel()
        w = np.array(self.weights, dtype=complex).ravel()
        if locs.shape != w.shape:
            raise MeasureError("atom locations and weights differ in length")
        if not (np.all(np.isfinite(locs)) and np.all(np.isfinite(w))):
            raise MeasureError("atoms must be finite")
        if len(locs) > 1 and np.any(np.diff(locs) <= 0):
            raise MeasureError("atom locations must be strictly increasing")
        object.__setattr__(self, "locations", _frozen(locs))
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def from_atoms(cls, locations, weights, density: Density | None = None,
                   tol: float = ATOM_TOL) -> "ScalarMeasure":
        """Build a measure from unsorted atoms, merging locations that agree within ``tol``."""
        locs, w = merge_atoms(locations, weights, tol)
        return cls(locs, w, density)

    @classmethod
    def point(cls, x: float, weight: complex = 1.0) -> "ScalarMeasure":
        return cls(np.array([x]), np.array([weight]))

    @classmethod
    def from_density(cls, origin: float, step: float, values) -> "ScalarMeasure":
        return cls(density=Density(origin, step, values))

    @property
    def atoms(self) -> list[tuple[float, complex]]:
        return list(zip(self.locations.tolist(), self.weights.tolist()))

    def mass(self) -> complex:
        total = complex(self.weights.sum())
        if self.density is not None:
            total += complex(self.density.values.sum() * self.density.step)
        return total

    def extent(self) -> float:
        """Largest ``|x|`` carrying atoms or density cells."""
        ext = float(np.abs(self.locations).max()) if len(self.locations) else 0.0
        if self.density is not None and len(self.density.values):
            e = self.density.edges
            ext = max(ext, abs(float(e[0])), abs(float(e[-1])))
        return ext

    def support_points(self) -> np.ndarray:
        """Atom locations followed by density cell midpoints."""
        if self.density is None:
            return self.locations.copy()
        return np.concatenate([self.locations, self.density.midpoints])

    def point_weights(self) -> np.ndarray:
        """Weights matching :meth:`support_points` (cell values scaled by the step)."""
        if self.density is None:
            return self.weights.copy()
        return np.concatenate([self.weights, self.density.values * self.density.step])

    def bin_masses(self, edges) -> np.ndarray:
        """Masses of ``(-inf, e0], (e0, e1], ..., (e_last, inf)``."""
        edges = np.asarray(edges, dtype=float)
        out = np.zeros(len(edges) + 1, dtype=complex)
        if len(self.locations):
            idx = np.searchsorted(edges, self.locations, side="left")
            np.add.at(out, idx, self.weights)
        if self.density is not None:
            cum = np.concatenate([[0.0], self.density.cdf(edges),
                                  [self.density.values.sum() * self.density.step]])
            out += np.diff(cum)
        return out

    def shifted(self, c: float) -> "ScalarMeasure":
        d = self.density
        if d is not None:
            d = Density(d.origin + c, d.step, d.values)
        return ScalarMeasure(self.locations + c, self.weights, d)

    def reflected(self) -> "ScalarMeasure":
        """Image measure under ``x -> -x``."""
        d = self.density
        if d is not None:
            d = Density(-(d.origin + d.step * len(d.values)), d.step, d.values[::-1])
        return ScalarMeasure(-self.locations[::-1], self.weights[::-1], d)


class ProbabilityMeasure(ScalarMeasure):
    """A :class:`ScalarMeasure` with nonnegative real weights of total mass one."""

    MASS_TOL = 1e-12

    def __post_init__(self) -> None:
        super().__post_init__()
        parts = [self.weights]
        if self.density is not None:
            parts.append(self.density.values)
        for p in parts:
            if np.any(np.abs(p.imag) > 0) or np.any(p.real < 0):
                raise MeasureError("probability measure needs real nonnegative weights")
        if abs(self.mass() - 1) > self.MASS_TOL:
            raise MeasureError(f"probability measure has mass {self.mass().real!r}")

    @classmethod
    def from_cell_masses(cls, origin: float, step: float, masses) -> "ProbabilityMeasure":
        """Gridded density whose cell masses are ``masses`` renormalized to one."""
        masses = np.clip(np.asarray(masses, dtype=float), 0.0, None)
        total = masses.sum()
        if not total > 0:
            raise MeasureError("cell masses sum to zero")
        return cls(density=Density(origin, step, masses / total / step))

    @classmethod
    def from_cdf(cls, cdf: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                 step: float) -> "ProbabilityMeasure":
        """Discretize a distribution function on ``[lo, hi]`` by exact cell masses."""
        n = int(round((hi - lo) / step))
        if n < 1 or n > MAX_CELLS:
            raise GridError(f"grid of {n} cells is out of range")
        edges = lo + step * np.arange(n + 1)
        return cls.from_cell_masses(lo, step, np.diff(cdf(edges)))

    @classmethod
    def from_atoms(cls, locations, weights, density=None, tol=ATOM_TOL):
        locs, w = merge_atoms(locations, weights, tol)
        w = np.asarray(w).real.astype(complex)
        return cls(locs, w, density)


def merge_atoms(locations, weights, tol: float = ATOM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Sort atoms and add the weights of locations closer than ``tol * max(1, |x|)``."""
    locs = np.asarray(locations, dtype=float).ravel()
    w = np.asarray(weights, dtype=complex).ravel()
    if locs.shape != w.shape:
        raise MeasureError("atom locations and weights differ in length")
    if len(locs) == 0:
        return locs, w
    order = np.argsort(locs, kind="stable")
    locs, w = locs[order], w[order]
    gap = np.diff(locs) > tol * np.maximum(1.0, np.abs(locs[1:]))
    group = np.concatenate([[0], np.cumsum(gap)])
    starts = np.flatnonzero(np.concatenate([[True], gap]))
    merged = np.zeros(len(starts), dtype=complex)
    np.add.at(merged, group, w)
    return locs[starts], merged


def total_variation(mu: ScalarMeasure) -> float:
    tv = float(np.abs(mu.weights).sum())
    if mu.density is not None:
        tv += mu.density.step * float(np.abs(mu.density.values).sum())
    return tv


def _place_pieces(pieces: list[tuple[float, float, np.ndarray]], max_cells: int) -> Density | None:
    if not pieces:
        return None
    step = pieces[0][1]
    ref = min(p[0] for p in pieces)
    offsets = []
    for origin, _, values in pieces:
        off = (origin - ref) / step
        k = int(round(off))
        if abs(off - k) > 1e-6:
            raise GridError(
                f"density piece at origin {origin} is not aligned with the grid of step {step}")
        offsets.append(k)
    length = max(k + len(v) for k, (_, _, v) in zip(offsets, pieces))
    if length > max_cells:
        raise GridError(f"convolved grid needs {length} cells (max {max_cells})")
    values = np.zeros(length, dtype=complex)
    for k, (_, _, v) in zip(offsets, pieces):
        values[k:k + len(v)] += v
    return Density(ref, step, values)


def convolve(mu: ScalarMeasure, nu: ScalarMeasure, max_cells: int = MAX_CELLS,
             tol: float = ATOM_TOL) -> ScalarMeasure:
    """Push the product measure forward under addition.

    Atoms combine pairwise; an atom against a density gives a shifted copy of
    the density; two densities (which must share a step) give the discrete
    convolution of their cell values, placed so that each result midpoint is
    the sum of the contributing midpoints.
    """
    locs = np.add.outer(mu.locations, nu.locations).ravel()
    w = np.multiply.outer(mu.weights, nu.weights).ravel()

    pieces: list[tuple[float, float, np.ndarray]] = []
    dm, dn = mu.density, nu.density
    if dm is not None and dn is not None:
        if abs(dm.step - dn.step) > 1e-12 * max(dm.step, dn.step):
            raise GridError(f"density steps differ: {dm.step} vs {dn.step}")
        pieces.append((dm.origin + dn.origin + dm.step / 2, dm.step,
                       dm.step * np.convolve(dm.values, dn.values)))
    if dn is not None:
        for x, wx in zip(mu.locations, mu.weights):
            pieces.append((dn.origin + x, dn.step, wx * dn.values))
    if dm is not None:
        for y, wy in zip(nu.locations, nu.weights):
            pieces.append((dm.origin + y, dm.step, wy * dm.values))
    if pieces:
        step = pieces[0][1]
        pieces = [(o, step, v) for o, _, v in pieces]
    density = _place_pieces(pieces, max_cells)
    cls = ProbabilityMeasure if isinstance(mu, ProbabilityMeasure) and isinstance(nu, ProbabilityMeasure) else ScalarMeasure
    if cls is ProbabilityMeasure:
        try:
            return ProbabilityMeasure.from_atoms(locs, w, density, tol)
        except MeasureError:
            pass
    return ScalarMeasure.from_atoms(locs, w, density, tol)


def _evaluate(f: Callable, points: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(points), dtype=complex)
        if vals.shape != points.shape:
            vals = np.broadcast_to(vals, points.shape)
    except (TypeError, ValueError):
        vals = np.array([f(float(x)) for x in points], dtype=complex)
    return vals


def integrate(f: Callable, mu: ScalarMeasure) -> complex:
    """``sum f(x_i) w_i + step * sum f(midpoint) * value``."""
    pts = mu.support_points()
    vals = _evaluate(f, pts)
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise MeasureError(f"integrand is not finite at support point {bad}")
    return complex(np.sum(vals * mu.point_weights()))


# ---------------------------------------------------------------- moments


class Verdict(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGING = "diverging"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class VerdictRule:
    """Heuristic thresholds for judging windowed moment integrals.

    ``rel_tol``: last two windows agree to this relative tolerance.
    ``growth``: relative growth per window over the last three windows.
    ``decay_ratio`` / ``tail_tol``: geometric extrapolation of the window
    increments; the estimated remaining tail must be below ``tail_tol``
    relative to the last partial absolute moment.
    """

    rel_tol: float = 1e-9
    growth: float = 0.05
    decay_ratio: float = 0.5
    tail_tol: float = 1e-3

    def judge(self, partial_abs: Sequence[float]) -> Verdict:
        a = np.asarray(partial_abs, dtype=float)
        if len(a) < 2:
            return Verdict.UNDETERMINED
        last = a[-1]
        d_last = a[-1] - a[-2]
        if d_last <= self.rel_tol * last:
            return Verdict.CONVERGED
        if len(a) < 3:
            return Verdict.UNDETERMINED
        d_prev = a[-2] - a[-3]
        if d_prev > 0:
            r = d_last / d_prev
            if r <= self.decay_ratio and d_last * r / (1 - r) <= self.tail_tol * last:
                return Verdict.CONVERGED
        if a[-3] > 0 and a[-2] >= (1 + self.growth) * a[-3] and a[-1] >= (1 + self.growth) * a[-2]:
            return Verdict.DIVERGING
        return Verdict.UNDETERMINED


DEFAULT_RULE = VerdictRule()


@dataclass(frozen=True, eq=False)
class MomentReport:
    order: int
    radii: np.ndarray
    partial: np.ndarray
    partial_abs: np.ndarray
    verdict: Verdict

    @property
    def value(self) -> complex:
        """Partial moment over the largest window."""
        return complex(self.partial[-1])

    @property
    def converged(self) -> bool:
        return self.verdict is Verdict.CONVERGED

    def rows(self) -> list[tuple[float, float, float, float, str]]:
        return [(float(r), float(p.real), float(p.imag), float(a), self.verdict.value)
                for r, p, a in zip(self.radii, self.partial, self.partial_abs)]

    def __str__(self) -> str:
        return (f"moment k={self.order}: {self.value:.6g} over R<={self.radii[-1]:g} "
                f"({self.verdict.value})")


def moment(mu: ScalarMeasure, k: int, radii: Sequence[float],
           rule: VerdictRule = DEFAULT_RULE) -> MomentReport:
    """Windowed moment integrals ``int_{|x|<=R} x**k dmu`` and their absolute counterparts."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) == 0:
        raise ValueError("radii must be a nonempty list")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    x = mu.support_points()
    w = mu.point_weights()
    xk = x ** k
    ax = np.abs(x)
    # running sums over |x|-sorted support so every window costs one lookup
    order = np.argsort(ax, kind="stable")
    cs = np.concatenate([[0], np.cumsum((xk * w)[order])])
    cs_abs = np.concatenate([[0.0], np.cumsum((np.abs(xk) * np.abs(w))[order])])
    idx = np.searchsorted(ax[order], radii, side="right")
    partial = cs[idx]
    partial_abs = np.maximum.accumulate(cs_abs[idx])
    return MomentReport(k, _frozen(radii.copy()), _frozen(partial), _frozen(partial_abs),
                        rule.judge(partial_abs))


def full_support_radii(mu: ScalarMeasure) -> np.ndarray:
    """Two windows that both contain the whole stored support."""
    ext = max(mu.extent(), 1.0)
    return np.array([ext, 2 * ext])


class DivergentMomentError(MeasureError):
    """A moment needed by a closed formula was not judged convergent."""

    def __init__(self, report: MomentReport, which: str = "measure"):
        self.report = report
        super().__init__(f"{which} moment of order {report.order} is {report.verdict.value}; "
                         f"partial absolute moments {report.partial_abs.tolist()} "
                         f"over radii {report.radii.tolist()}")


def checked_moments(mu: ScalarMeasure, k: int, radii=None, rule: VerdictRule = DEFAULT_RULE,
                    which: str = "measure") -> np.ndarray:
    """Moments of orders ``0..k``; raises :class:`DivergentMomentError` on the first non-converged one."""
    if radii is None:
        radii = full_support_radii(mu)
    out = np.zeros(k + 1, dtype=complex)
    for n in range(k + 1):
        rep = moment(mu, n, radii, rule)
        if not rep.converged:
            raise DivergentMomentError(rep, which)
        out[n] = rep.value
    return out


def binomial_convolution_moment(mu: ScalarMeasure, nu: ScalarMeasure, k: int, radii=None,
                                rule: VerdictRule = DEFAULT_RULE) -> complex:
    """``sum_n C(k, n) mu[k-n] nu[n]``, refusing if any needed moment is not convergent.

    With ``radii=None`` the windows cover the whole stored support, so every
    moment of a stored measure exists; pass explicit windows to test tails.
    """
    m = checked_moments(mu, k, radii, rule, "first")
    n_ = checked_moments(nu, k, radii, rule, "second")
    return complex(sum(math.comb(k, n) * m[k - n] * n_[n] for n in range(k + 1)))


# ---------------------------------------------------------------- the one-sided integrability example


def _sequence(a, cutoff: int) -> np.ndarray:
    if a is None:
        vals = [2.0 ** (-k - 1) for k in range(cutoff + 1)]
    elif callable(a):
        vals = [float(a(k)) for k in range(cutoff + 1)]
    else:
        vals = [float(v) for v in a][: cutoff + 1]
        if len(vals) < cutoff + 1:
            raise ValueError(f"sequence needs {cutoff + 1} terms, got {len(vals)}")
    vals = np.asarray(vals)
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise ValueError("sequence terms must be positive and finite")
    return vals


class SliceIntegrand:
    """``f(n) = 1 / c_n`` on even integers of the support, zero elsewhere."""

    def __init__(self, b: np.ndarray):
        self.b = b
        top = len(b) - 1
        self.c = {n: float(np.sum(np.abs(b[max(0, n):top + 1 + min(0, n)]
                                          * b[max(0, -n):top + 1 - max(0, n)])))
                  for n in range(-top, top + 1)}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        n = np.rint(x)
        out = np.zeros(x.shape)
        flat_n, flat_x = n.ravel(), x.ravel()
        res = out.ravel()
        for i, (ni, xi) in enumerate(zip(flat_n, flat_x)):
            ni = int(ni)
            if abs(xi - ni) <= ATOM_TOL * max(1.0, abs(xi)) and ni % 2 == 0 and self.c.get(ni, 0) > 0:
                res[i] = 1.0 / self.c[ni]
        out = res.reshape(x.shape)
        return out if out.ndim else float(out)


class Example1(NamedTuple):
    mu: ScalarMeasure
    nu: ScalarMeasure
    f: SliceIntegrand


def example1_build(a=None, cutoff: int = 20) -> Example1:
    """Two atomic measures on the integers whose convolution vanishes on even integers.

    ``b_{2k} = b_{2k+1} = a_k`` for ``k <= cutoff``; ``mu({n}) = b_n`` and
    ``nu({n}) = (-1)**n b_{-n}``.  ``a`` is a callable ``k -> a_k``, a
    sequence, or ``None`` for ``a_k = 2**(-k-1)``.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be a positive integer")
    av = _sequence(a, cutoff)
    b = np.repeat(av, 2)
    n = np.arange(len(b))
    mu = ScalarMeasure(n.astype(float), b.astype(complex))
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    nu = ScalarMeasure(-n[::-1].astype(float), (sign * b)[::-1].astype(complex))
    return Example1(mu, nu, SliceIntegrand(b))


def example1_slice_absolute_integral(mu: ScalarMeasure, nu: ScalarMeasure, n: int,
                                     f: Callable | None = None) -> float:
    """Integral of ``|f(x + y)|`` against ``|mu x nu|`` over the line ``x + y = n``."""
    if int(n) != n or int(n) % 2:
        raise ValueError(f"slice index must be an even integer, got {n}")
    n = int(n)
    sums = np.add.outer(mu.locations, nu.locations)
    on_line = np.abs(sums - n) <= ATOM_TOL * max(1.0, abs(n))
    if not on_line.any():
        raise ValueError(f"slice x + y = {n} carries no atoms")
    slice_mass = float(np.abs(np.multiply.outer(mu.weights, nu.weights))[on_line].sum())
    if f is None:
        f = SliceIntegrand(mu.weights.real.copy())
    return abs(complex(f(float(n)))) * slice_mass
