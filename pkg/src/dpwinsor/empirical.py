"""Datasets, the empirical CDF, order-statistic quantiles, clipping, and the
nonprivate estimators (winsorized mean and symmetric trimmed mean)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClipInterval:
    """Closed interval [lo, hi] that observations are projected onto."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid clip interval: lo={self.lo} > hi={self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


class Dataset:
    """Immutable collection of finite reals with a cached ascending sort."""

    def __init__(self, values):
        arr = np.asarray(values, dtype=float).reshape(-1).copy()
        if arr.size == 0:
            raise ValueError("empty input")
        if not np.all(np.isfinite(arr)):
            raise ValueError("values must be finite (no NaN or infinity)")
        arr.flags.writeable = False
        self.values = arr
        sorted_view = np.sort(arr)
        sorted_view.flags.writeable = False
        self.sorted_values = sorted_view

    def __len__(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)})"


def empirical_cdf(data: Dataset, x):
    """Fraction of observations <= x. Accepts a scalar or an array of points."""
    counts = np.searchsorted(data.sorted_values, x, side="right")
    out = counts / len(data)
    if np.ndim(x) == 0:
        return float(out)
    return out


def empirical_quantile(data: Dataset, q: float) -> float:
    """Left-continuous qth empirical quantile: the ceil(q*n)-th order statistic."""
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile level must be in (0, 1], got {q}")
    n = len(data)
    # small slack so q*n landing on an integer is not pushed up by float error
    k = math.ceil(q * n - 1e-9)
    return float(data.sorted_values[max(k, 1) - 1])


def clip(x, interval: ClipInterval):
    """Project x (scalar or array) onto the interval."""
    return np.clip(x, interval.lo, interval.hi)


def winsorized_mean(estimation_half: Dataset, quantile_half: Dataset, p: float) -> float:
    """Mean of one sample clipped to empirical quantiles of another.

    The clipping interval [q_p, q_{1-p}] is computed on quantile_half and
    applied to estimation_half, so the interval never depends on the
    values being averaged.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"clip proportion must be in (0, 1/2), got {p}")
    interval = ClipInterval(
        empirical_quantile(quantile_half, p),
        empirical_quantile(quantile_half, 1.0 - p),
    )
    return float(np.mean(clip(estimation_half.values, interval)))


def trimmed_mean(data: Dataset, m: int) -> float:
    """Mean after deleting the m smallest and m largest observations."""
    n = len(data)
    if m < 0 or 2 * m >= n:
        raise ValueError(f"need 0 <= 2m < n, got m={m} with n={n}")
    if m == 0:
        return float(np.mean(data.values))
    return float(np.mean(data.sorted_values[m : n - m]))


def load_values(source) -> Dataset:
    """Read a dataset from text: one float per line.

    Lines starting with '#' are comments and blank lines are skipped.
    A malformed line raises ValueError naming its line number. `source`
    is a path or an open text stream.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    out = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            out.append(float(text))
        except ValueError:
            raise ValueError(f"line {lineno}: not a number: {text!r}") from None
    if not out:
        raise ValueError("empty input")
    return Dataset(out)
