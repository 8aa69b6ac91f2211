"""Unbounded private quantile search over a geometric grid.

The search scans the data-independent grid beta**i + lower - 1 for
i = 1, 2, ... and releases the first grid point whose noisy empirical CDF
exceeds a noisy target level. Upper quantiles (q >= 1/2) are searched
directly; lower quantiles negate the data and search for 1 - q with the
grid anchored at -upper, then negate the released point. Pure DP budgets
use exponential noise at scales 1/(n*b1) and 1/(n*b2); zCDP budgets use
Gaussian noise at scales 1/(n*sqrt(b1)) and 1/(n*sqrt(b2)).

Because the grid never depends on the data, the support of the output is
fixed; only the stopping index is data driven.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .empirical import Dataset
from .noise import NoiseKind, PrivacyKind, RandomStream, sample, sample_vector

_SCAN_CHUNK_FIRST = 64
_SCAN_CHUNK_MAX = 4096


class GridExhaustedError(RuntimeError):
    """The scan reached its step cap without the stopping rule firing."""


def default_max_steps(beta: float, lower: float, upper: float, slack: int = 64) -> int:
    """Step cap with `slack` extra steps past where the grid first spans [lower, upper]."""
    span = max(upper - lower + 1.0, 1.0)
    return math.ceil(math.log(span) / math.log(beta)) + slack


@dataclass(frozen=True)
class GeometricGrid:
    """Grid parameters: points beta**i + lower - 1 for i = 1, 2, ...

    `lower` anchors the grid used by upper-quantile searches; `upper`
    anchors the negated grid used by lower-quantile searches. The scan
    is capped at max_steps so degenerate targets cannot loop forever;
    the default cap leaves 64 steps of headroom past the stated bounds.
    """

    beta: float
    lower: float
    upper: float
    max_steps: int | None = None

    def __post_init__(self):
        if not self.beta > 1.0:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if not self.upper > self.lower:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        floor = default_max_steps(self.beta, self.lower, self.upper)
        if self.max_steps is None:
            object.__setattr__(self, "max_steps", floor)
        elif self.max_steps < floor:
            raise ValueError(f"max_steps={self.max_steps} is below the required minimum {floor}")


@dataclass(frozen=True)
class QuantileBudget:
    """Per-search budget pair: b1 scales the target noise, b2 the scan noise."""

    b1: float
    b2: float
    kind: PrivacyKind = PrivacyKind.ZCDP

    def __post_init__(self):
        if self.b1 <= 0 or self.b2 <= 0:
            raise ValueError("budget components must be positive")

    @property
    def scales(self) -> tuple[float, float]:
        if self.kind is PrivacyKind.PDP:
            return self.b1, self.b2
        return math.sqrt(self.b1), math.sqrt(self.b2)

    @property
    def total(self) -> float:
        return self.b1 + self.b2


@dataclass(frozen=True)
class PrivateQuantileResult:
    """Released grid point plus scan metadata (all post-processing of the release)."""

    value: float
    steps_taken: int
    hit_cap: bool
    negated: bool


def _scan_noise_kind(kind: PrivacyKind) -> NoiseKind:
    return NoiseKind.EXPONENTIAL if kind is PrivacyKind.PDP else NoiseKind.GAUSSIAN


def private_upper_quantile(
    data: Dataset,
    q: float,
    budget: QuantileBudget,
    grid: GeometricGrid,
    stream: RandomStream,
    noise: NoiseKind | None = None,
) -> PrivateQuantileResult:
    """Release a private upper quantile (1/2 <= q <= 1).

    Draws a noisy target q + V/(n*s1), then stops at the first grid point
    g_i with ecdf(g_i) + V_i/(n*s2) strictly above the target. One noise
    draw is consumed per grid point visited (drawn in chunks). If no grid
    point fires within max_steps, the last grid point is returned with
    hit_cap set and the caller decides whether to reject.
    """
    if not 0.5 <= q <= 1.0:
        raise ValueError(f"upper-quantile search needs 1/2 <= q <= 1, got {q}")
    kind = noise if noise is not None else _scan_noise_kind(budget.kind)
    n = len(data)
    s1, s2 = budget.scales
    target = q + sample(kind, stream) / (n * s1)
    start = 1
    chunk = _SCAN_CHUNK_FIRST
    while start <= grid.max_steps:
        stop = min(start + chunk - 1, grid.max_steps)
        chunk = min(chunk * 4, _SCAN_CHUNK_MAX)
        idx = np.arange(start, stop + 1)
        with np.errstate(over="ignore"):
            points = np.power(grid.beta, idx.astype(float)) + grid.lower - 1.0
        cdf = np.searchsorted(data.sorted_values, points, side="right") / n
        noisy = cdf + sample_vector(kind, stream, idx.size) / (n * s2)
        hits = np.nonzero(noisy > target)[0]
        if hits.size:
            j = int(hits[0])
            return PrivateQuantileResult(
                value=float(points[j]), steps_taken=int(idx[j]), hit_cap=False, negated=False
            )
        start = stop + 1
    with np.errstate(over="ignore"):
        last = float(grid.beta ** float(grid.max_steps) + grid.lower - 1.0)
    return PrivateQuantileResult(value=last, steps_taken=grid.max_steps, hit_cap=True, negated=False)


def private_quantile(
    data: Dataset,
    q: float,
    budget: QuantileBudget,
    grid: GeometricGrid,
    stream: RandomStream,
    noise: NoiseKind | None = None,
) -> PrivateQuantileResult:
    """Release a private qth quantile for any 0 < q <= 1.

    Levels below 1/2 negate the data and run the upper search at 1 - q
    with the grid anchored at -upper; the released point is negated back
    and flagged as such.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile level must be in (0, 1], got {q}")
    if q >= 0.5:
        return private_upper_quantile(data, q, budget, grid, stream, noise)
    negated = Dataset(-data.values)
    negated_grid = replace(grid, lower=-grid.upper, upper=-grid.lower)
    result = private_upper_quantile(negated, 1.0 - q, budget, negated_grid, stream, noise)
    return PrivateQuantileResult(
        value=-result.value,
        steps_taken=result.steps_taken,
        hit_cap=result.hit_cap,
        negated=True,
    )
