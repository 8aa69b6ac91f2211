"""Fixed-bounds differentially private clipped mean, the standard comparison baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .empirical import ClipInterval, Dataset, clip
from .noise import NoiseKind, PrivacyKind, RandomStream, sample
from .winsorized import PrivateEstimate


@dataclass(frozen=True)
class FixedBoundsConfig:
    """A priori clipping bounds plus the whole budget spent on one noisy mean."""

    lower: float
    upper: float
    budget: float
    kind: PrivacyKind = PrivacyKind.ZCDP

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if self.budget <= 0:
            raise ValueError("budget must be positive")


def dp_clipped_mean(
    data: Dataset,
    config: FixedBoundsConfig,
    stream: RandomStream,
    noise: NoiseKind | None = None,
) -> PrivateEstimate:
    """Mean of the sample projected onto fixed bounds, plus width-calibrated noise.

    The clipped mean has global sensitivity (upper - lower)/n exactly, so the
    noise scale is width/(n*eps) for pure DP (Laplace) and
    width/(n*sqrt(2*rho)) for zCDP (Gaussian).
    """
    n = len(data)
    interval = ClipInterval(config.lower, config.upper)
    if config.kind is PrivacyKind.PDP:
        scale = interval.width / (n * config.budget)
        noise_kind = NoiseKind.LAPLACE
    else:
        scale = interval.width / (n * math.sqrt(2.0 * config.budget))
        noise_kind = NoiseKind.GAUSSIAN
    if noise is not None:
        noise_kind = noise
    draw = sample(noise_kind, stream)
    clipped_mean = float(np.mean(clip(data.values, interval)))
    return PrivateEstimate(
        value=clipped_mean + draw * scale,
        clip_interval=interval,
        clip_level=0.0,
        noise_scale=scale,
        noise_term=draw * scale,
        total_budget_strict=config.budget,
        total_budget_literal=config.budget,
        quantile_results=None,
    )
