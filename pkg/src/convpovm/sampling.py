"""Monte-Carlo outcome sampling from a binned POVM and a state."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import as_density
from .semispectral import DiscretizedPOVM, moment_operator_direct

GENERATOR = "numpy.random.PCG64"
NEG_TOL = 1e-9
SUM_TOL = 1e-6


class SamplingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OutcomeSample:
    seed: int
    outcomes: np.ndarray
    source: str = ""
    generator: str = GENERATOR
    shards: int = 1
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.outcomes)


def outcome_probabilities(e: DiscretizedPOVM, rho) -> np.ndarray:
    """``Tr[rho E_i]`` with small negatives clipped; raises if the POVM is visibly broken."""
    rho = as_density(rho)
    p = e.probabilities(rho)
    if p.min() < -NEG_TOL:
        raise SamplingError(f"negative outcome probability {p.min():.3g}")
    total = p.sum()
    if abs(total - 1) >= SUM_TOL:
        raise SamplingError(f"outcome probabilities sum to {total:.12g}")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _shard_sizes(n: int, shards: int) -> list[int]:
    base, extra = divmod(n, shards)
    return [base + (i < extra) for i in range(shards)]


def sample(e: DiscretizedPOVM, rho, n: int, seed: int, shards: int = 1) -> OutcomeSample:
    """Draw ``n`` i.i.d. outcomes (bin representatives).

    Shard ``s`` uses a generator seeded from ``(seed, s)``; shards are
    concatenated in index order, so the result depends only on ``seed`` and
    ``shards``.
    """
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    if shards < 1:
        raise ValueError("need at least one shard")
    p = outcome_probabilities(e, rho)
    parts = []
    for s, size in enumerate(_shard_sizes(n, shards)):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, s])))
        parts.append(rng.choice(len(p), size=size, p=p))
    idx = np.concatenate(parts) if parts else np.zeros(0, dtype=int)
    return OutcomeSample(int(seed), e.reps[idx], e.label, GENERATOR, shards)


def empirical_moment(s: OutcomeSample, k: int) -> float:
    if len(s.outcomes) == 0:
        raise SamplingError("empty sample")
    return float(np.mean(s.outcomes ** k))


def empirical_moment_stderr(s: OutcomeSample, k: int) -> float:
    """Standard error of :func:`empirical_moment` from the sample standard deviation."""
    if len(s.outcomes) < 2:
        raise SamplingError("need at least two outcomes for a standard error")
    return float(np.std(s.outcomes ** k, ddof=1) / np.sqrt(len(s.outcomes)))


def predicted_moment(e: DiscretizedPOVM, rho, k: int) -> float:
    """``Tr[rho L(x^k, E)]`` with the discretized moment operator."""
    rho = as_density(rho)
    return float(np.einsum("ij,ji->", rho, moment_operator_direct(e, k)).real)


def z_score(s: OutcomeSample, e: DiscretizedPOVM, rho, k: int) -> float:
    se = empirical_moment_stderr(s, k)
    diff = empirical_moment(s, k) - predicted_moment(e, rho, k)
    if se == 0:
        return 0.0 if abs(diff) < 1e-12 else float("inf")
    return diff / se
