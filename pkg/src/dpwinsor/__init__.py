"""Differentially private robust mean estimation via private quantile clipping.

The core estimator privately locates a pair of extreme quantiles on a
data-independent geometric grid, winsorizes the sample to that interval,
and releases the mean with width-calibrated noise. Around it sit the
nonprivate estimators it generalizes, a fixed-bounds baseline, a generic
subsample-and-aggregate driver, closed-form diagnostics, and a simulation
harness with a CLI.
"""

from .baselines import FixedBoundsConfig, dp_clipped_mean
from .empirical import (
    ClipInterval,
    Dataset,
    clip,
    empirical_cdf,
    empirical_quantile,
    load_values,
    trimmed_mean,
    winsorized_mean,
)
from .noise import NoiseKind, PrivacyKind, RandomStream, sample, sample_vector
from .quantile import (
    GeometricGrid,
    GridExhaustedError,
    PrivateQuantileResult,
    QuantileBudget,
    default_max_steps,
    private_quantile,
    private_upper_quantile,
)
from .winsorized import (
    BUDGET_FLOOR,
    PracticalPolicy,
    PrivacyBudget,
    PrivateEstimate,
    TheoreticalPolicy,
    practical_clip_level,
    practical_winsorized_mean,
    private_winsorized_mean,
    split_budget,
    split_halves,
    theoretical_clip_level,
)

__all__ = [
    "BUDGET_FLOOR",
    "ClipInterval",
    "Dataset",
    "FixedBoundsConfig",
    "GeometricGrid",
    "GridExhaustedError",
    "NoiseKind",
    "PracticalPolicy",
    "PrivacyBudget",
    "PrivacyKind",
    "PrivateEstimate",
    "PrivateQuantileResult",
    "QuantileBudget",
    "RandomStream",
    "TheoreticalPolicy",
    "clip",
    "default_max_steps",
    "dp_clipped_mean",
    "empirical_cdf",
    "empirical_quantile",
    "load_values",
    "practical_clip_level",
    "practical_winsorized_mean",
    "private_quantile",
    "private_upper_quantile",
    "private_winsorized_mean",
    "sample",
    "sample_vector",
    "split_budget",
    "split_halves",
    "theoretical_clip_level",
    "trimmed_mean",
    "winsorized_mean",
]
