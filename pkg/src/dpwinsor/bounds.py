"""Closed-form bounds, envelopes, and limits used as diagnostics and test oracles.

Every universal constant left unspecified by the underlying analysis is
exposed as a parameter with default 1 (or an explicit margin); callers
should treat the outputs as rates and shapes, not calibrated levels.
All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy import stats


@dataclass(frozen=True)
class DistributionOracle:
    """Population quantile function plus the first two moments."""

    quantile: Callable[[float], float]
    mean: float
    std: float


def uniform_oracle(lo: float = 0.0, hi: float = 1.0) -> DistributionOracle:
    if not hi > lo:
        raise ValueError("need lo < hi")
    return DistributionOracle(
        quantile=lambda q: lo + q * (hi - lo),
        mean=(lo + hi) / 2.0,
        std=(hi - lo) / math.sqrt(12.0),
    )


def gaussian_oracle(mu: float = 0.0, sigma: float = 1.0) -> DistributionOracle:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return DistributionOracle(
        quantile=lambda q: float(stats.norm.ppf(q, loc=mu, scale=sigma)),
        mean=mu,
        std=sigma,
    )


def exponential_oracle(rate: float = 1.0) -> DistributionOracle:
    if rate <= 0:
        raise ValueError("rate must be positive")
    return DistributionOracle(
        quantile=lambda q: -math.log1p(-q) / rate,
        mean=1.0 / rate,
        std=1.0 / rate,
    )


def student_t_oracle(df: float = 3.0) -> DistributionOracle:
    if df <= 2:
        raise ValueError("degrees of freedom must exceed 2 for a finite variance")
    return DistributionOracle(
        quantile=lambda q: float(stats.t.ppf(q, df)),
        mean=0.0,
        std=math.sqrt(df / (df - 2.0)),
    )


def grid_coarseness_bound(
    oracle: DistributionOracle, clip_level: float, lower: float, upper: float
) -> float:
    """Largest admissible beta - 1 for the quantile grid, from population quantile gaps.

    With z the clip level, returns
    min((xi_{5z/4} - xi_{3z/4}) / (upper - xi_{5z/4} + 1),
        (xi_{1-3z/4} - xi_{1-5z/4}) / (xi_{1-5z/4} - lower + 1)).
    """
    hi_level = 1.25 * clip_level
    lo_level = 0.75 * clip_level
    if not 0.0 < hi_level < 0.5:
        raise ValueError(f"need 0 < 5*clip_level/4 < 1/2, got {hi_level}")
    q_lo = oracle.quantile(lo_level)
    q_hi = oracle.quantile(hi_level)
    q_upper_lo = oracle.quantile(1.0 - hi_level)
    q_upper_hi = oracle.quantile(1.0 - lo_level)
    if lower > q_hi:
        raise ValueError(f"lower={lower} exceeds the level-{hi_level:g} quantile {q_hi:g}")
    if upper < q_upper_lo:
        raise ValueError(f"upper={upper} is below the level-{1 - hi_level:g} quantile {q_upper_lo:g}")
    return min(
        (q_hi - q_lo) / (upper - q_hi + 1.0),
        (q_upper_hi - q_upper_lo) / (q_upper_lo - lower + 1.0),
    )


def aggregation_envelope(
    m: int, eta: float, delta: float, beta: float, upper: float, lower: float, e3: float
) -> float:
    """Error envelope for aggregating m subsample statistics.

    Returns max(sqrt(eta), sqrt(log(max(beta*(u-l)/(beta-1), 4)/delta)/m),
    1/(sqrt(m)*e3)). Under zCDP pass sqrt(rho3) as e3.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if beta <= 1.0:
        raise ValueError("beta must exceed 1")
    if not upper > lower:
        raise ValueError("need lower < upper")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    if e3 <= 0:
        raise ValueError("e3 must be positive")
    inner = max(beta * (upper - lower) / (beta - 1.0), 4.0)
    return max(
        math.sqrt(eta),
        math.sqrt(math.log(inner / delta) / m),
        1.0 / (math.sqrt(m) * e3),
    )


def required_sample_size(
    t: float,
    sigma: float,
    delta: float,
    lower: float,
    upper: float,
    beta: float,
    e3: float,
    constant: float = 1.0,
) -> int:
    """Sample size sufficient for deviation <= t at confidence 1 - delta, up to `constant`.

    Returns ceil(constant * max(sigma^2 * (log(u-l) - log((beta-1)/beta)
    + log(4/delta)) / t^2, 1/(t^2 * e3))), clamped to at least 1. The
    leading constant is not pinned down by the analysis; default 1.
    """
    if t <= 0 or sigma <= 0 or e3 <= 0 or constant <= 0:
        raise ValueError("t, sigma, e3 and constant must be positive")
    if beta <= 1.0 or not upper > lower or not 0.0 < delta < 1.0:
        raise ValueError("need beta > 1, lower < upper, and delta in (0, 1)")
    logs = math.log(upper - lower) - math.log((beta - 1.0) / beta) + math.log(4.0 / delta)
    bound = constant * max(sigma**2 * logs / t**2, 1.0 / (t**2 * e3))
    return max(1, math.ceil(bound))


def trimmed_mean_limit_exp(p: float) -> float:
    """In-probability limit of the symmetric trimmed mean on the unit-rate exponential.

    Trimming a p fraction from each tail keeps the mass between the
    quantiles a = -log(1-p) and b = -log(p); the kept mean converges to
    the integral of x*exp(-x) over [a, b], which is
    (a+1)e^-a - (b+1)e^-b = (1 - log(1-p))(1-p) - (1 - log p)p,
    normalized by the kept mass 1 - 2p. Strictly below 1 for any p > 0,
    so trimming a constant fraction is inconsistent for the mean here.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"p must be in (0, 1/2), got {p}")
    a = -math.log1p(-p)
    b = -math.log(p)
    integral = (a + 1.0) * math.exp(-a) - (b + 1.0) * math.exp(-b)
    return integral / (1.0 - 2.0 * p)


def recommend_bounds(n: int, mu0: float, sigma0: float, margin: float = 2.0) -> tuple[float, float]:
    """Symmetric search bounds (-u, u) with u = margin * max(sqrt(n*sigma0), |mu0|).

    mu0 and sigma0 are loose a priori bounds on the population mean and
    standard deviation; the sqrt(n) growth keeps extreme-quantile targets
    inside the bounds while the width stays polynomial in n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    if margin <= 0:
        raise ValueError("margin must be positive")
    u = margin * max(math.sqrt(n * sigma0), abs(mu0))
    return (-u, u)
