"""Seeded random primitives behind every randomized routine in the package.

All mechanisms draw through a RandomStream, so any run is replayable from
its (seed, stream_id) pair, and estimators can be traced by hand with the
ZERO noise kind. Laplace and exponential draws use inverse-CDF transforms
of uniforms, which keeps single draws checkable against closed forms.

Randomness here is statistical, not cryptographic, and the floating-point
noise is not hardened against precision side channels.
"""

from __future__ import annotations

import enum

import numpy as np

_TINY = np.finfo(float).tiny


class NoiseKind(enum.Enum):
    """Standard noise distributions used by the mechanisms.

    ZERO always returns 0.0 and exists only so deterministic hand traces
    can be tested; it is never legal on a releasing code path.
    """

    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"
    ZERO = "zero"


class PrivacyKind(enum.Enum):
    """Flavour of differential privacy a budget is expressed in."""

    PDP = "pdp"  # pure epsilon-DP
    ZCDP = "zcdp"  # zero-concentrated rho-DP


class RandomStream:
    """Replayable random source identified by (seed, stream_id).

    Equal (seed, stream_id) pairs produce identical draw sequences.
    Distinct stream_id values yield statistically independent streams,
    so replications can be split as (base_seed, replication_index).
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if stream_id < 0:
            raise ValueError("stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def uniform(self, size=None):
        return self.generator.random(size)


def laplace_from_uniform(u):
    """Inverse CDF of the standard Laplace distribution, for u in (0, 1)."""
    u = np.clip(u, _TINY, 1.0)
    return np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))


def exponential_from_uniform(u):
    """Inverse CDF of the standard exponential distribution, for u in [0, 1)."""
    return -np.log1p(-np.asarray(u, dtype=float))


def sample(kind: NoiseKind, stream: RandomStream) -> float:
    """Draw one value from the named standard distribution, advancing the stream."""
    if kind is NoiseKind.ZERO:
        return 0.0
    if kind is NoiseKind.GAUSSIAN:
        return float(stream.generator.standard_normal())
    u = stream.uniform()
    if kind is NoiseKind.LAPLACE:
        return float(laplace_from_uniform(u))
    if kind is NoiseKind.EXPONENTIAL:
        return float(exponential_from_uniform(u))
    raise ValueError(f"unknown noise kind: {kind!r}")


def sample_vector(kind: NoiseKind, stream: RandomStream, size: int) -> np.ndarray:
    """Draw `size` values at once; ZERO returns zeros without consuming the stream."""
    if kind is NoiseKind.ZERO:
        return np.zeros(size)
    if kind is NoiseKind.GAUSSIAN:
        return stream.generator.standard_normal(size)
    u = stream.uniform(size)
    if kind is NoiseKind.LAPLACE:
        return laplace_from_uniform(u)
    if kind is NoiseKind.EXPONENTIAL:
        return exponential_from_uniform(u)
    raise ValueError(f"unknown noise kind: {kind!r}")
