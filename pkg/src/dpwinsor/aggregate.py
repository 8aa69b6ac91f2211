"""Generic subsample-and-aggregate with a private mean aggregator per coordinate.

The records are opaque to this module: a plan partitions record indices
into disjoint groups, a user-supplied statistic maps each group to a
fixed-length vector, and every coordinate of the stacked statistics is
aggregated with either the winsorized private mean or the fixed-bounds
clipped mean, splitting the total budget uniformly across coordinates.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .baselines import FixedBoundsConfig, dp_clipped_mean
from .empirical import Dataset
from .noise import NoiseKind, PrivacyKind, RandomStream
from .quantile import GeometricGrid
from .winsorized import (
    PracticalPolicy,
    PrivateEstimate,
    practical_winsorized_mean,
    private_winsorized_mean,
    split_budget,
    split_halves,
)


@dataclass(frozen=True)
class GroupPlan:
    """Disjoint partition of record indices into m groups of size k = N // m."""

    m: int
    k: int
    assignment: tuple[np.ndarray, ...]
    dropped: int


def make_plan(n_records: int, m: int, stream: RandomStream) -> GroupPlan:
    """Shuffle indices and cut the first m*k into contiguous blocks of size k.

    The N - m*k leftover indices are dropped; the count is recorded so
    callers can warn about discarded records.
    """
    if not 1 <= m <= n_records:
        raise ValueError(f"need 1 <= m <= {n_records}, got m={m}")
    k = n_records // m
    perm = stream.generator.permutation(n_records)
    used = perm[: m * k]
    groups = tuple(used[i * k : (i + 1) * k] for i in range(m))
    return GroupPlan(m=m, k=k, assignment=groups, dropped=n_records - m * k)


def plan_for_group_size(n_records: int, k: int, stream: RandomStream) -> GroupPlan:
    """Convenience wrapper: choose m = N // k groups, then plan as usual.

    Group sizes come out as N // m, which can exceed the requested k when
    k does not divide N.
    """
    if not 1 <= k <= n_records:
        raise ValueError(f"need 1 <= k <= {n_records}, got k={k}")
    return make_plan(n_records, n_records // k, stream)


@dataclass(frozen=True)
class Statistic:
    """Deterministic per-group statistic with a declared output dimension.

    `columns` documents which table columns the statistic consumes when
    records are tabular; `labels` names the output coordinates.
    """

    name: str
    dim: int
    fn: Callable[[object], np.ndarray]
    columns: tuple[str, ...] | None = None
    labels: tuple[str, ...] | None = None


@dataclass(frozen=True)
class SsaResult:
    estimates: np.ndarray
    per_coordinate: tuple[PrivateEstimate, ...]
    plan: GroupPlan

    @property
    def total_budget_strict(self) -> float:
        return float(sum(e.total_budget_strict for e in self.per_coordinate))


@dataclass(frozen=True)
class WinsorizedAggregator:
    """Aggregate each coordinate with the private winsorized mean."""

    grid: GeometricGrid
    clip_count: float = 1.0
    eta: float = 0.0
    kind: PrivacyKind = PrivacyKind.ZCDP
    budget_split: str = "strict"
    reuse_data: bool = True


@dataclass(frozen=True)
class ClippedAggregator:
    """Aggregate each coordinate with the fixed-bounds clipped mean."""

    lower: float
    upper: float
    kind: PrivacyKind = PrivacyKind.ZCDP


class Table:
    """Column-named numeric records; groups are row subsets."""

    def __init__(self, columns: Sequence[str], rows):
        self.columns = tuple(columns)
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != len(self.columns):
            raise ValueError("rows must be a 2-D array matching the column names")
        self.rows = arr

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no such column: {name!r} (have {', '.join(self.columns)})") from None
        return self.rows[:, j]

    def take(self, indices) -> "Table":
        return Table(self.columns, self.rows[np.asarray(indices, dtype=int)])

    @classmethod
    def from_csv(cls, source) -> "Table":
        """Load a numeric CSV with a header row."""
        if hasattr(source, "read"):
            reader = csv.reader(source)
            rows = list(reader)
        else:
            with open(source, "r", encoding="utf-8", newline="") as handle:
                rows = list(csv.reader(handle))
        if not rows:
            raise ValueError("empty input")
        header, body = rows[0], rows[1:]
        if not body:
            raise ValueError("no data rows")
        parsed = []
        for lineno, row in enumerate(body, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                parsed.append([float(cell) for cell in row])
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric row: {row!r}") from None
        return cls([name.strip() for name in header], parsed)


def _take(records, indices):
    if isinstance(records, Table):
        return records.take(indices)
    if isinstance(records, np.ndarray):
        return records[np.asarray(indices, dtype=int)]
    return [records[int(i)] for i in indices]


def mean_statistic(column: str | None = None) -> Statistic:
    """Sample mean of a Table column, or of raw numeric records when column is None."""
    if column is None:
        fn = lambda group: np.atleast_1d(np.mean(np.asarray(group, dtype=float)))
        return Statistic("mean", 1, fn, labels=("mean",))
    fn = lambda table: np.atleast_1d(np.mean(table.column(column)))
    return Statistic("mean", 1, fn, columns=(column,), labels=(f"mean_{column}",))


def ols_statistic(response: str, features: Sequence[str]) -> Statistic:
    """Least-squares coefficients (intercept first) plus the residual variance."""
    feats = tuple(features)
    if not feats:
        raise ValueError("at least one feature column is required")

    def fn(table: Table) -> np.ndarray:
        y = table.column(response)
        design = np.column_stack([np.ones(len(y))] + [table.column(f) for f in feats])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ coef
        dof = max(len(y) - design.shape[1], 1)
        return np.append(coef, float(resid @ resid) / dof)

    labels = ("intercept", *feats, "resid_var")
    return Statistic("ols", len(feats) + 2, fn, columns=(response, *feats), labels=labels)


def synthetic_panel(
    n_subjects: int, obs_per_subject: int, stream: RandomStream
) -> Table:
    """Synthetic longitudinal-style records for the aggregation demo.

    Each subject contributes obs_per_subject rows of
    y = 1 + 0.5*t - 0.8*x1 + 0.3*x2 + subject_effect + noise.
    """
    gen = stream.generator
    total = n_subjects * obs_per_subject
    subject = np.repeat(np.arange(n_subjects, dtype=float), obs_per_subject)
    t = np.tile(np.arange(obs_per_subject, dtype=float) / obs_per_subject, n_subjects)
    x1 = gen.standard_normal(total)
    x2 = gen.standard_normal(total)
    effects = np.repeat(gen.normal(0.0, 0.5, n_subjects), obs_per_subject)
    y = 1.0 + 0.5 * t - 0.8 * x1 + 0.3 * x2 + effects + gen.normal(0.0, 0.3, total)
    return Table(("subject", "t", "x1", "x2", "y"), np.column_stack([subject, t, x1, x2, y]))


def run_ssa(
    records,
    stat: Statistic,
    m: int,
    aggregator: WinsorizedAggregator | ClippedAggregator,
    total_budget: float,
    stream: RandomStream,
    noise: NoiseKind | None = None,
) -> SsaResult:
    """Partition, evaluate the statistic per group, aggregate each coordinate privately.

    The total budget is split uniformly across the stat's coordinates.
    Planning, group evaluation, and the per-coordinate aggregations all
    consume the single stream in a fixed order, so one (seed, stream_id)
    reproduces the result exactly regardless of scheduling.
    """
    if total_budget <= 0:
        raise ValueError("total_budget must be positive")
    n_records = len(records)
    if isinstance(aggregator, WinsorizedAggregator) and m < 2:
        raise ValueError("the winsorized aggregator needs at least 2 groups")
    plan = make_plan(n_records, m, stream)

    values = np.empty((plan.m, stat.dim))
    for gi, idx in enumerate(plan.assignment):
        try:
            out = np.asarray(stat.fn(_take(records, idx)), dtype=float).reshape(-1)
        except Exception as exc:
            raise RuntimeError(f"statistic {stat.name!r} failed on group {gi}: {exc}") from exc
        if out.size != stat.dim:
            raise ValueError(
                f"statistic {stat.name!r} returned {out.size} values on group {gi}, "
                f"expected {stat.dim}"
            )
        values[gi] = out

    if isinstance(aggregator, WinsorizedAggregator):
        outside = np.count_nonzero(
            (values <= aggregator.grid.lower) | (values >= aggregator.grid.upper)
        )
        if outside:
            warnings.warn(
                f"{outside} subsample statistic values fall outside the search bounds "
                f"({aggregator.grid.lower}, {aggregator.grid.upper}); the aggregate may be biased",
                RuntimeWarning,
                stacklevel=2,
            )

    coordinate_budget = total_budget / stat.dim
    estimates = []
    for j in range(stat.dim):
        coordinate = Dataset(values[:, j])
        if isinstance(aggregator, WinsorizedAggregator):
            if aggregator.reuse_data:
                est = practical_winsorized_mean(
                    coordinate,
                    aggregator.clip_count,
                    aggregator.eta,
                    aggregator.grid,
                    coordinate_budget,
                    stream,
                    kind=aggregator.kind,
                    budget_split=aggregator.budget_split,
                    noise=noise,
                )
            else:
                est_half, quant_half = split_halves(coordinate, stream)
                parts = split_budget(coordinate_budget, aggregator.kind, aggregator.budget_split)
                est = private_winsorized_mean(
                    est_half,
                    quant_half,
                    PracticalPolicy(aggregator.clip_count, aggregator.eta),
                    aggregator.grid,
                    parts,
                    stream,
                    noise=noise,
                    total_budget_literal=coordinate_budget,
                )
        else:
            config = FixedBoundsConfig(
                aggregator.lower, aggregator.upper, coordinate_budget, aggregator.kind
            )
            est = dp_clipped_mean(coordinate, config, stream, noise=noise)
        estimates.append(est)

    return SsaResult(
        estimates=np.array([e.value for e in estimates]),
        per_coordinate=tuple(estimates),
        plan=plan,
    )
