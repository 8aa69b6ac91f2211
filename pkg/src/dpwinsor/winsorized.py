"""Differentially private winsorized means with privately estimated clipping quantiles.

The estimator privately locates the level-p and level-(1-p) quantiles of a
sample, projects the data onto that interval, averages, and adds noise
calibrated to interval_width/n. Two clipping policies set p: a theoretical
one derived from (n, eta, delta) and the grid geometry, and a practical one
using max(C/n, eta) with C capped at 0.025*n. The sample can either be
split (one half for quantiles, the other for the mean) or reused in full
for both steps; reuse does not change the budget accounting, which always
reports 2*b1 + 2*b2 + b3 as the strict composed total.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .empirical import ClipInterval, Dataset, clip
from .noise import NoiseKind, PrivacyKind, RandomStream, sample
from .quantile import (
    GeometricGrid,
    GridExhaustedError,
    PrivateQuantileResult,
    QuantileBudget,
    private_quantile,
)

# Smallest per-search quantile budget for which the deviation bound is
# established; the theoretical policy rejects smaller values, the
# practical policy only warns.
BUDGET_FLOOR = 3.0 / 56.0


@dataclass(frozen=True)
class PrivacyBudget:
    """Three-way budget: b1, b2 for each quantile search, b3 for the mean release."""

    kind: PrivacyKind
    b1: float
    b2: float
    b3: float

    def __post_init__(self):
        if min(self.b1, self.b2, self.b3) <= 0:
            raise ValueError("budget components must be positive")

    @property
    def strict_total(self) -> float:
        # two quantile searches at (b1 + b2) each, plus the mean release
        return 2.0 * self.b1 + 2.0 * self.b2 + self.b3


def split_budget(total: float, kind: PrivacyKind, mode: str = "strict") -> PrivacyBudget:
    """Derive (b1, b2, b3) from a scalar budget.

    'literal' uses (total/4, total/4, total/2), whose composed total is
    1.5x the advertised scalar. 'strict' halves the quantile shares so
    the composed total equals `total` exactly.
    """
    if total <= 0:
        raise ValueError("total budget must be positive")
    if mode == "literal":
        return PrivacyBudget(kind, total / 4.0, total / 4.0, total / 2.0)
    if mode == "strict":
        return PrivacyBudget(kind, total / 8.0, total / 8.0, total / 2.0)
    raise ValueError(f"unknown budget split mode: {mode!r} (expected 'strict' or 'literal')")


@dataclass(frozen=True)
class TheoreticalPolicy:
    """Clip level from the deviation analysis; requires wide, valid data bounds.

    delta defaults to 1/n at estimation time and must lie in (4*exp(-n), 1).
    """

    eta: float = 0.0
    delta: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 0.5:
            raise ValueError(f"eta must be in [0, 1/2], got {self.eta}")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class PracticalPolicy:
    """Clip about clip_count points from each end, or an eta fraction if larger."""

    clip_count: float = 5.0
    eta: float = 0.0

    def __post_init__(self):
        if self.clip_count <= 0:
            raise ValueError(f"clip_count must be positive, got {self.clip_count}")
        if not 0.0 <= self.eta < 0.5:
            raise ValueError(f"eta must be in [0, 1/2), got {self.eta}")


ClipPolicy = TheoreticalPolicy | PracticalPolicy


@dataclass(frozen=True)
class PrivateEstimate:
    """Released value plus audit metadata.

    noise_term is the additive noise actually drawn (released value minus
    the clipped mean); it is bookkeeping for simulation studies and is not
    itself a private quantity.
    """

    value: float
    clip_interval: ClipInterval
    clip_level: float
    noise_scale: float
    noise_term: float
    total_budget_strict: float
    total_budget_literal: float
    quantile_results: tuple[PrivateQuantileResult, PrivateQuantileResult] | None = None


def theoretical_clip_level(
    n: int, eta: float, delta: float, lower: float, upper: float, beta: float
) -> float:
    """Clip level 16*eta + (112/3) * log(32 * max(beta*(u-l)/(beta-1), 1) / delta) / n."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if not 0.0 <= eta <= 0.5:
        raise ValueError(f"eta must be in [0, 1/2], got {eta}")
    if beta <= 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    if not upper > lower:
        raise ValueError(f"need lower < upper, got [{lower}, {upper}]")
    delta_floor = 4.0 * math.exp(-n)
    if not delta_floor < delta < 1.0:
        raise ValueError(f"delta must lie in ({delta_floor:.3g}, 1), got {delta}")
    inner = max(beta * (upper - lower) / (beta - 1.0), 1.0)
    return 16.0 * eta + (112.0 / 3.0) * math.log(32.0 * inner / delta) / n


def practical_clip_level(n: int, clip_count: float, eta: float = 0.0) -> float:
    """max(min(clip_count, 0.025*n) / n, eta); the cap keeps tiny samples sane."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if clip_count <= 0:
        raise ValueError(f"clip_count must be positive, got {clip_count}")
    if not 0.0 <= eta < 0.5:
        raise ValueError(f"eta must be in [0, 1/2), got {eta}")
    return max(min(clip_count, 0.025 * n) / n, eta)


def split_halves(data: Dataset, stream: RandomStream) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then alternate assignment.

    Even shuffle positions form the estimation half, odd positions the
    quantile half.
    """
    if len(data) < 2:
        raise ValueError("splitting needs at least 2 observations")
    perm = stream.generator.permutation(len(data))
    shuffled = data.values[perm]
    return Dataset(shuffled[0::2]), Dataset(shuffled[1::2])


def _resolve_clip_level(
    policy: ClipPolicy, n: int, grid: GeometricGrid, budget: PrivacyBudget
) -> float:
    if isinstance(policy, TheoreticalPolicy):
        if budget.b1 <= BUDGET_FLOOR or budget.b2 <= BUDGET_FLOOR:
            raise ValueError(
                f"quantile budgets must exceed {BUDGET_FLOOR:.4f} under the theoretical policy"
            )
        delta = policy.delta if policy.delta is not None else 1.0 / n
        level = theoretical_clip_level(n, policy.eta, delta, grid.lower, grid.upper, grid.beta)
        if level >= 0.5:
            raise ValueError(
                f"theoretical clip level {level:.4f} is not below 1/2; "
                "widen the data bounds, lower delta, or increase n"
            )
        return level
    if isinstance(policy, PracticalPolicy):
        if budget.b1 <= BUDGET_FLOOR or budget.b2 <= BUDGET_FLOOR:
            warnings.warn(
                f"quantile budgets at or below {BUDGET_FLOOR:.4f} are outside the regime "
                "with a supported deviation bound",
                RuntimeWarning,
                stacklevel=3,
            )
        return practical_clip_level(n, policy.clip_count, policy.eta)
    raise TypeError(f"unknown clip policy: {policy!r}")


def private_winsorized_mean(
    estimation_data: Dataset,
    quantile_data: Dataset,
    policy: ClipPolicy,
    grid: GeometricGrid,
    budget: PrivacyBudget,
    stream: RandomStream,
    noise: NoiseKind | None = None,
    total_budget_literal: float | None = None,
) -> PrivateEstimate:
    """Clip to privately estimated extreme quantiles, average, add calibrated noise.

    The level-p search runs first, then the level-(1-p) search, then the
    mean release; all three consume `stream` in that order. If the two
    released quantiles come out crossed under heavy noise they are
    swapped, which is post-processing and costs no budget. Either search
    hitting its step cap raises GridExhaustedError.
    """
    n = len(estimation_data)
    level = _resolve_clip_level(policy, n, grid, budget)
    quantile_budget = QuantileBudget(budget.b1, budget.b2, budget.kind)
    lo_result = private_quantile(quantile_data, level, quantile_budget, grid, stream, noise)
    hi_result = private_quantile(quantile_data, 1.0 - level, quantile_budget, grid, stream, noise)
    if lo_result.hit_cap or hi_result.hit_cap:
        raise GridExhaustedError(
            "quantile grid exhausted; raise max_steps or widen the search bounds"
        )
    lo, hi = lo_result.value, hi_result.value
    if lo > hi:
        lo, hi = hi, lo
    interval = ClipInterval(lo, hi)
    if budget.kind is PrivacyKind.PDP:
        scale = interval.width / (n * budget.b3)
        noise_kind = NoiseKind.LAPLACE
    else:
        scale = interval.width / (n * math.sqrt(2.0 * budget.b3))
        noise_kind = NoiseKind.GAUSSIAN
    if noise is not None:
        noise_kind = noise
    draw = sample(noise_kind, stream)
    clipped_mean = float(np.mean(clip(estimation_data.values, interval)))
    literal = budget.strict_total if total_budget_literal is None else total_budget_literal
    return PrivateEstimate(
        value=clipped_mean + draw * scale,
        clip_interval=interval,
        clip_level=level,
        noise_scale=scale,
        noise_term=draw * scale,
        total_budget_strict=budget.strict_total,
        total_budget_literal=literal,
        quantile_results=(lo_result, hi_result),
    )


def practical_winsorized_mean(
    data: Dataset,
    clip_count: float,
    eta: float,
    grid: GeometricGrid,
    budget: PrivacyBudget | float,
    stream: RandomStream,
    kind: PrivacyKind = PrivacyKind.ZCDP,
    budget_split: str = "strict",
    noise: NoiseKind | None = None,
) -> PrivateEstimate:
    """Full-data variant: the whole sample feeds both the quantile searches and the mean.

    `budget` is either a ready PrivacyBudget or a scalar total that is
    split per `budget_split`. With a scalar, total_budget_literal records
    the scalar as advertised while total_budget_strict reports the
    composed 2*b1 + 2*b2 + b3.
    """
    policy = PracticalPolicy(clip_count=clip_count, eta=eta)
    if isinstance(budget, PrivacyBudget):
        parts = budget
        literal = budget.strict_total
    else:
        parts = split_budget(float(budget), kind, budget_split)
        literal = float(budget)
    return private_winsorized_mean(
        data, data, policy, grid, parts, stream, noise=noise, total_budget_literal=literal
    )
