"""Replicated simulation harness: populations, contamination, and MSE tables.

A grid names populations, sample sizes, budgets, and estimator
configurations; every cell runs a fixed number of independent seeded
trials and reports mean squared error against the population target,
the empirical variance of the additive noise terms, and mean absolute
error. Trial streams derive from (base_seed, cell_index * reps + rep),
so results are identical regardless of scheduling or worker count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .baselines import FixedBoundsConfig, dp_clipped_mean
from .empirical import Dataset
from .noise import NoiseKind, PrivacyKind, RandomStream
from .quantile import GeometricGrid, GridExhaustedError, default_max_steps
from .winsorized import (
    PracticalPolicy,
    practical_winsorized_mean,
    private_winsorized_mean,
    split_budget,
    split_halves,
)

CSV_COLUMNS = [
    "population",
    "n",
    "rho",
    "policy",
    "estimator",
    "C",
    "eta",
    "mse",
    "noise_var",
    "mae",
    "reps",
    "failed",
]


# ---------------------------------------------------------------------------
# populations


@dataclass(frozen=True)
class Constant:
    """Degenerate population; every draw equals `value`. Test hook."""

    value: float = 7.0

    @property
    def mean(self) -> float:
        return self.value

    @property
    def target(self) -> float:
        return self.value

    def sample(self, n: int, stream: RandomStream) -> Dataset:
        return Dataset(np.full(n, self.value))


@dataclass(frozen=True)
class Gaussian:
    mu: float = 0.0
    sigma: float = 1.0

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def target(self) -> float:
        return self.mu

    def sample(self, n: int, stream: RandomStream) -> Dataset:
        return Dataset(stream.generator.normal(self.mu, self.sigma, n))


@dataclass(frozen=True)
class GaussianMixture:
    weight: float = 0.5
    mu1: float = -5.0
    sigma1: float = 1.0
    mu2: float = 5.0
    sigma2: float = 1.0

    @property
    def mean(self) -> float:
        return self.weight * self.mu1 + (1.0 - self.weight) * self.mu2

    @property
    def target(self) -> float:
        return self.mean

    def sample(self, n: int, stream: RandomStream) -> Dataset:
        gen = stream.generator
        first = gen.random(n) < self.weight
        draws = np.where(
            first,
            gen.normal(self.mu1, self.sigma1, n),
            gen.normal(self.mu2, self.sigma2, n),
        )
        return Dataset(draws)


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def target(self) -> float:
        return self.mean

    def sample(self, n: int, stream: RandomStream) -> Dataset:
        return Dataset(stream.generator.exponential(1.0 / self.rate, n))


@dataclass(frozen=True)
class StudentT:
    df: float = 3.0

    def __post_init__(self):
        if self.df <= 2:
            raise ValueError("degrees of freedom must exceed 2 for a finite variance")

    @property
    def mean(self) -> float:
        return 0.0

    @property
    def target(self) -> float:
        return 0.0

    def sample(self, n: int, stream: RandomStream) -> Dataset:
        return Dataset(stream.generator.standard_t(self.df, n))


@dataclass(frozen=True)
class ContaminatedGaussian:
    """Standard Gaussian with a `weight` fraction replaced by a shifted component.

    The mixture mean is weight*mu_cont, but estimation is scored against
    the clean component's mean 0: the shifted mass plays the role of
    contamination, so a robust estimator should ignore it.
    """

    weight: float = 0.2
    mu_cont: float = 10.0
    sigma_cont: float = 1.0

    @property
    def mean(self) -> float:
        return self.weight * self.mu_cont

    @property
    def target(self) -> float:
        return 0.0

    def sample(self, n: int, stream: RandomStream) -> Dataset:
        gen = stream.generator
        contaminated = gen.random(n) < self.weight
        draws = np.where(
            contaminated,
            gen.normal(self.mu_cont, self.sigma_cont, n),
            gen.normal(0.0, 1.0, n),
        )
        return Dataset(draws)


Population = (
    Constant | Gaussian | GaussianMixture | Exponential | StudentT | ContaminatedGaussian
)

POPULATION_LABELS = ("gaussian", "mixture", "skewed", "heavy_tails", "contaminated", "constant")


def make_population(label: str) -> Population:
    """Named defaults: gaussian N(0,1), mixture of N(-5,1)/N(5,1), unit-rate
    exponential ('skewed'), t with 3 degrees of freedom ('heavy_tails'), and a
    20% contaminated Gaussian."""
    table = {
        "constant": Constant(),
        "gaussian": Gaussian(),
        "mixture": GaussianMixture(),
        "skewed": Exponential(),
        "heavy_tails": StudentT(),
        "contaminated": ContaminatedGaussian(),
    }
    try:
        return table[label]
    except KeyError:
        raise ValueError(
            f"unknown population {label!r} (expected one of {', '.join(POPULATION_LABELS)})"
        ) from None


def sample_population(pop: Population, n: int, stream: RandomStream) -> Dataset:
    if n < 1:
        raise ValueError("n must be at least 1")
    return pop.sample(n, stream)


# ---------------------------------------------------------------------------
# adversarial contamination


@dataclass(frozen=True)
class PointMass:
    value: float


@dataclass(frozen=True)
class Shift:
    delta: float


def contaminate(
    data: Dataset, eta: float, adversary: PointMass | Shift, stream: RandomStream
) -> Dataset:
    """Corrupt floor(eta*n) uniformly chosen points; the count is exact, never random."""
    if not 0.0 <= eta <= 0.5:
        raise ValueError(f"eta must be in [0, 1/2], got {eta}")
    count = int(np.floor(eta * len(data)))
    if count == 0:
        return Dataset(data.values)
    values = data.values.copy()
    chosen = stream.generator.choice(len(data), size=count, replace=False)
    if isinstance(adversary, PointMass):
        values[chosen] = adversary.value
    elif isinstance(adversary, Shift):
        values[chosen] += adversary.delta
    else:
        raise TypeError(f"unknown adversary: {adversary!r}")
    return Dataset(values)


# ---------------------------------------------------------------------------
# experiment grid


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator configuration swept by the grid.

    estimator is 'winsorized' or 'clipped'. For the winsorized estimator,
    policy 'full' reuses the whole sample for quantiles and mean while
    'split' halves it; clip_count None draws C uniformly from {1,...,100}
    each trial.
    """

    estimator: str
    policy: str = "full"
    clip_count: float | None = 5.0
    eta: float = 0.0

    def __post_init__(self):
        if self.estimator not in ("winsorized", "clipped"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "winsorized" and self.policy not in ("full", "split"):
            raise ValueError(f"unknown policy {self.policy!r} (expected 'full' or 'split')")


@dataclass(frozen=True)
class ExperimentGrid:
    populations: tuple[str, ...]
    n_values: tuple[int, ...]
    budgets: tuple[float, ...]
    estimators: tuple[EstimatorSpec, ...]
    replications: int = 250
    base_seed: int = 0
    kind: PrivacyKind = PrivacyKind.ZCDP
    beta: float = 1.001
    lower: float = -50.0
    upper: float = 50.0
    budget_split: str = "literal"
    scan_slack: int = 4096
    contamination: tuple[float, PointMass | Shift] | None = None
    # test hook only: replaces every noise draw with 0, voiding privacy;
    # deliberately not reachable from config files
    zero_noise: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.populations or not self.n_values or not self.budgets or not self.estimators:
            raise ValueError("populations, n_values, budgets and estimators must be non-empty")


@dataclass(frozen=True)
class ResultRow:
    population: str
    n: int
    rho: float
    policy: str
    estimator: str
    C: str
    eta: str
    mse: float
    noise_var: float
    mae: float
    reps: int
    failed: int

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in CSV_COLUMNS}


def _format_number(x: float) -> str:
    return f"{x:g}"


def _cells(grid: ExperimentGrid):
    index = 0
    for population in grid.populations:
        for n in grid.n_values:
            for rho in grid.budgets:
                for spec in grid.estimators:
                    yield index, population, n, rho, spec
                    index += 1


def run_cell(
    grid: ExperimentGrid, population_label: str, n: int, rho: float, spec: EstimatorSpec,
    cell_index: int,
) -> ResultRow:
    """Run one grid cell: `replications` seeded trials of one estimator config."""
    population = make_population(population_label)
    search_grid = GeometricGrid(
        grid.beta,
        grid.lower,
        grid.upper,
        default_max_steps(grid.beta, grid.lower, grid.upper, grid.scan_slack),
    )
    noise_override = NoiseKind.ZERO if grid.zero_noise else None
    squared, absolute, noise_terms = [], [], []
    failed = 0
    for rep in range(grid.replications):
        stream = RandomStream(grid.base_seed, cell_index * grid.replications + rep)
        if spec.estimator == "winsorized" and spec.clip_count is None:
            clip_count = float(stream.generator.integers(1, 101))
        else:
            clip_count = spec.clip_count
        data = sample_population(population, n, stream)
        if grid.contamination is not None:
            eta_adv, adversary = grid.contamination
            data = contaminate(data, eta_adv, adversary, stream)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                if spec.estimator == "winsorized":
                    if spec.policy == "split":
                        est_half, quant_half = split_halves(data, stream)
                        parts = split_budget(rho, grid.kind, grid.budget_split)
                        estimate = private_winsorized_mean(
                            est_half,
                            quant_half,
                            PracticalPolicy(clip_count, spec.eta),
                            search_grid,
                            parts,
                            stream,
                            noise=noise_override,
                            total_budget_literal=rho,
                        )
                    else:
                        estimate = practical_winsorized_mean(
                            data,
                            clip_count,
                            spec.eta,
                            search_grid,
                            rho,
                            stream,
                            kind=grid.kind,
                            budget_split=grid.budget_split,
                            noise=noise_override,
                        )
                else:
                    config = FixedBoundsConfig(grid.lower, grid.upper, rho, grid.kind)
                    estimate = dp_clipped_mean(data, config, stream, noise=noise_override)
        except (ValueError, GridExhaustedError):
            failed += 1
            continue
        error = estimate.value - population.target
        squared.append(error * error)
        absolute.append(abs(error))
        noise_terms.append(estimate.noise_term)

    if failed > 0.05 * grid.replications:
        warnings.warn(
            f"cell ({population_label}, n={n}, rho={rho:g}, {spec.estimator}): "
            f"{failed} of {grid.replications} trials failed",
            RuntimeWarning,
            stacklevel=2,
        )
    mse = float(np.mean(squared)) if squared else float("nan")
    mae = float(np.mean(absolute)) if absolute else float("nan")
    noise_var = float(np.var(noise_terms, ddof=1)) if len(noise_terms) > 1 else 0.0
    if spec.estimator == "winsorized":
        c_label = "random" if spec.clip_count is None else _format_number(spec.clip_count)
        eta_label = _format_number(spec.eta)
        policy_label = spec.policy
    else:
        c_label, eta_label, policy_label = "", "", ""
    return ResultRow(
        population=population_label,
        n=n,
        rho=rho,
        policy=policy_label,
        estimator=spec.estimator,
        C=c_label,
        eta=eta_label,
        mse=mse,
        noise_var=noise_var,
        mae=mae,
        reps=grid.replications,
        failed=failed,
    )


def _run_cell_args(args) -> ResultRow:
    grid, population, n, rho, spec, index = args
    return run_cell(grid, population, n, rho, spec, index)


def run_grid(grid: ExperimentGrid, jobs: int = 1) -> list[ResultRow]:
    """Run every cell and return rows sorted by their canonical key.

    With jobs > 1 the cells run in a process pool; trial streams are
    pre-assigned, so the rows are identical to a sequential run.
    """
    tasks = [
        (grid, population, n, rho, spec, index)
        for index, population, n, rho, spec in _cells(grid)
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell_args, tasks))
    else:
        rows = [_run_cell_args(task) for task in tasks]
    rows.sort(key=lambda r: (r.population, r.n, r.rho, r.policy, r.estimator, r.C, r.eta))
    return rows


# ---------------------------------------------------------------------------
# output and configuration


def write_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            record = row.as_dict()
            writer.writerow([record[name] for name in CSV_COLUMNS])


def write_jsonl(rows: list[ResultRow], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row.as_dict(), sort_keys=True))
            handle.write("\n")


_LIST_KEYS = {"populations", "n", "rho", "estimators", "policies", "eta"}
_KNOWN_KEYS = _LIST_KEYS | {
    "C",
    "replications",
    "seed",
    "kind",
    "beta",
    "lower",
    "upper",
    "split",
    "slack",
    "contaminate_eta",
    "contaminate_kind",
    "contaminate_value",
}


def load_grid_config(source) -> ExperimentGrid:
    """Parse a declarative key-value grid description.

    One `key = value` per line; '#' starts a comment; list values are
    comma separated. Keys: populations, n, rho, estimators, policies,
    eta, C (a number or 'random'), replications, seed, kind, beta,
    lower, upper, split, slack, and optionally contaminate_eta,
    contaminate_kind ('pointmass' or 'shift'), contaminate_value.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    values: dict[str, list[str] | str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in _LIST_KEYS:
            values[key] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            values[key] = value.strip()

    def required(key: str):
        if key not in values:
            raise ValueError(f"missing required config key: {key}")
        return values[key]

    populations = tuple(required("populations"))
    n_values = tuple(int(v) for v in required("n"))
    budgets = tuple(float(v) for v in required("rho"))
    estimator_names = list(values.get("estimators", ["winsorized"]))
    policies = list(values.get("policies", ["full"]))
    etas = [float(v) for v in values.get("eta", ["0"])]
    c_raw = values.get("C", "random")
    clip_count = None if c_raw == "random" else float(c_raw)

    specs: list[EstimatorSpec] = []
    for name in estimator_names:
        if name == "winsorized":
            for policy in policies:
                for eta in etas:
                    specs.append(EstimatorSpec("winsorized", policy, clip_count, eta))
        elif name == "clipped":
            specs.append(EstimatorSpec("clipped"))
        else:
            raise ValueError(f"unknown estimator in config: {name!r}")

    contamination = None
    if "contaminate_eta" in values:
        eta_adv = float(values["contaminate_eta"])
        kind_adv = values.get("contaminate_kind", "pointmass")
        value_adv = float(values.get("contaminate_value", "0"))
        adversary = PointMass(value_adv) if kind_adv == "pointmass" else Shift(value_adv)
        contamination = (eta_adv, adversary)

    kind = PrivacyKind(values.get("kind", "zcdp"))
    return ExperimentGrid(
        populations=populations,
        n_values=n_values,
        budgets=budgets,
        estimators=tuple(specs),
        replications=int(values.get("replications", "250")),
        base_seed=int(required("seed")),
        kind=kind,
        beta=float(values.get("beta", "1.001")),
        lower=float(values.get("lower", "-50")),
        upper=float(values.get("upper", "50")),
        budget_split=values.get("split", "literal"),
        scan_slack=int(values.get("slack", "4096")),
        contamination=contamination,
    )


def with_seed(grid: ExperimentGrid, seed: int) -> ExperimentGrid:
    return replace(grid, base_seed=seed)
