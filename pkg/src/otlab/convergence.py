"""Monte Carlo estimation of the empirical transport cost's mean deviation.

For a setting, cost, and estimator, the lab repeatedly samples empirical
measures, solves the transport problem exactly, and records the absolute
deviation from the population cost.  Repetitions run on deterministic
substreams keyed by (master seed, setting, n, repetition), so results are
bit-identical no matter how many worker threads execute them.  Tables
serialize to CSV plus a JSON metadata sidecar.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import benchmarks as bench
from .benchmarks import (
    CubeConfig,
    OracleParams,
    PopulationCost,
    SemiDiscreteConfig,
    SphereConfig,
)
from .costs import CostSpec, cost_matrix, cost_string, parse_cost
from .measures import DiscreteMeasure, push_forward_projection, residual_cost_functional
from .rates import TheoryRate, theory_rate_family
from .solver import optimal_cost, solve_exact

__all__ = [
    "ONE_SAMPLE_MU",
    "ONE_SAMPLE_NU",
    "TWO_SAMPLE",
    "ESTIMATORS",
    "CombinationError",
    "TableRow",
    "ConvergenceTable",
    "RateFit",
    "empirical_deviation",
    "run_convergence",
    "fit_rate",
    "decomposition_residual",
    "dependent_coupling_check",
    "theory_rate_for",
]

ONE_SAMPLE_MU = "one-sample-mu"
ONE_SAMPLE_NU = "one-sample-nu"
TWO_SAMPLE = "two-sample"
ESTIMATORS = (ONE_SAMPLE_MU, ONE_SAMPLE_NU, TWO_SAMPLE)

_MASK64 = (1 << 64) - 1


class CombinationError(ValueError):
    """Setting, cost, and estimator do not form a runnable experiment."""


@dataclass(frozen=True)
class TableRow:
    n: int
    delta_hat: float
    std_err: float
    reps: int


@dataclass(frozen=True)
class ConvergenceTable:
    """Per-n mean absolute deviations with standard errors plus metadata."""

    rows: tuple[TableRow, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("sample sizes must be strictly increasing")
        for r in self.rows:
            if r.reps < 2:
                raise ValueError("each row needs at least 2 repetitions")
            if r.std_err < 0:
                raise ValueError("standard errors must be nonnegative")

    def sizes(self) -> np.ndarray:
        return np.array([r.n for r in self.rows], dtype=np.int64)

    def deviations(self) -> np.ndarray:
        return np.array([r.delta_hat for r in self.rows])

    def csv_text(self) -> str:
        lines = ["n,delta_hat,std_err,reps"]
        for r in self.rows:
            lines.append(f"{r.n},{r.delta_hat!r},{r.std_err!r},{r.reps}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | os.PathLike) -> None:
        """Write the CSV table and a JSON metadata sidecar next to it."""
        path = os.fspath(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())
        with open(_sidecar_path(path), "w", encoding="utf-8", newline="") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read_csv(cls, path: str | os.PathLike) -> "ConvergenceTable":
        path = os.fspath(path)
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "n,delta_hat,std_err,reps":
                raise ValueError(f"unexpected CSV header {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                n_s, d_s, s_s, r_s = line.split(",")
                rows.append(TableRow(int(n_s), float(d_s), float(s_s), int(r_s)))
        metadata = {}
        side = _sidecar_path(path)
        if os.path.exists(side):
            with open(side, "r", encoding="utf-8") as fh:
                metadata = json.load(fh)
        return cls(tuple(rows), metadata)


def _sidecar_path(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root + ".json"


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(deviation) against log(n)."""

    slope: float
    intercept: float
    slope_std_err: float
    n_used: tuple[int, ...]
    dropped_zero_rows: bool = False


def _digest64(text: str) -> int:
    return int.from_bytes(hashlib.blake2s(text.encode(), digest_size=8).digest(), "big")


def _rep_stream(master_seed: int, setting: str, n: int, rep: int) -> np.random.Generator:
    ss = np.random.SeedSequence(
        [master_seed & _MASK64, _digest64(setting), n, rep]
    )
    return np.random.default_rng(ss)


def _resolve_config(setting):
    if isinstance(setting, (CubeConfig, SphereConfig, SemiDiscreteConfig)):
        return setting
    return bench.parse_setting(str(setting))


def _resolve_cost(cost) -> CostSpec:
    if isinstance(cost, CostSpec):
        return cost
    return parse_cost(str(cost))


def validate_combination(config, cost: CostSpec, estimator: str) -> None:
    """Reject estimators whose fixed side is not finitely supported."""
    if estimator not in ESTIMATORS:
        raise CombinationError(f"unknown estimator {estimator!r}")
    if estimator == ONE_SAMPLE_MU:
        # The fixed side would be the target distribution, which is
        # continuous in every setting here.
        raise CombinationError(
            "one-sample-mu requires a finitely supported target; "
            f"{bench.setting_string(config)} has a continuous one"
        )
    if estimator == ONE_SAMPLE_NU and not isinstance(config, SemiDiscreteConfig):
        raise CombinationError(
            "one-sample-nu requires a finitely supported source; "
            f"{bench.setting_string(config)} has a continuous one"
        )


def _sample_nu(config, n: int, rng: np.random.Generator) -> DiscreteMeasure:
    if isinstance(config, CubeConfig):
        return bench.sample_cube(config, bench.NU, n, rng)
    if isinstance(config, SphereConfig):
        return bench.sample_sphere(config, bench.NU, n, rng)
    return bench.sample_semidiscrete_nu(config, n, rng)


def _sample_mu(config, n: int, rng: np.random.Generator,
               fixed_mu: DiscreteMeasure | None) -> DiscreteMeasure:
    if isinstance(config, CubeConfig):
        return bench.sample_cube(config, bench.MU, n, rng)
    if isinstance(config, SphereConfig):
        return bench.sample_sphere(config, bench.MU, n, rng)
    return bench.sample_semidiscrete_mu(fixed_mu, n, rng)


def _rep_estimate(config, cost: CostSpec, estimator: str, n: int,
                  rng: np.random.Generator,
                  fixed_mu: DiscreteMeasure | None) -> float:
    if estimator == TWO_SAMPLE:
        mu = _sample_mu(config, n, rng, fixed_mu)
        nu = _sample_nu(config, n, rng)
    else:  # one-sample-nu; one-sample-mu was rejected during validation
        mu = fixed_mu
        nu = _sample_nu(config, n, rng)
    C = cost_matrix(cost, mu.points, nu.points)
    return optimal_cost(mu, nu, C)


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _prepare(config, cost: CostSpec, estimator: str,
             oracle: OracleParams | None,
             population: PopulationCost | None,
             fixed_mu: DiscreteMeasure | None):
    validate_combination(config, cost, estimator)
    oracle = oracle or OracleParams()
    if fixed_mu is None and isinstance(config, SemiDiscreteConfig):
        fixed_mu = bench.semidiscrete_mu_weights(config, cost, oracle)
    if population is None:
        population = bench.population_cost(config, cost, oracle)
    return oracle, population, fixed_mu


def empirical_deviation(setting, cost, estimator: str, n: int, reps: int,
                        master_seed: int, *, threads: int = 1,
                        oracle: OracleParams | None = None,
                        population: PopulationCost | None = None,
                        fixed_mu: DiscreteMeasure | None = None) -> tuple[float, float]:
    """Mean absolute deviation of the empirical cost at sample size n.

    Every repetition samples on its own substream derived from
    (master_seed, setting, n, repetition index), so the result does not
    depend on thread count or scheduling.  Returns (mean, standard error).
    """
    if reps < 2:
        raise ValueError("need at least 2 repetitions")
    config = _resolve_config(setting)
    cost = _resolve_cost(cost)
    oracle, population, fixed_mu = _prepare(
        config, cost, estimator, oracle, population, fixed_mu
    )
    setting_str = bench.setting_string(config)

    def one_rep(rep: int) -> float:
        rng = _rep_stream(master_seed, setting_str, n, rep)
        value = _rep_estimate(config, cost, estimator, n, rng, fixed_mu)
        return abs(value - population.value)

    deltas = np.array(_map_ordered(one_rep, range(reps), threads))
    return float(deltas.mean()), float(deltas.std(ddof=1) / math.sqrt(reps))


def run_convergence(setting, cost, estimator: str, n_grid, reps: int,
                    master_seed: int, *, threads: int = 1,
                    oracle: OracleParams | None = None) -> ConvergenceTable:
    """One :func:`empirical_deviation` row per sample size in ``n_grid``."""
    config = _resolve_config(setting)
    cost = _resolve_cost(cost)
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be nonempty and strictly increasing")
    oracle, population, fixed_mu = _prepare(config, cost, estimator, oracle, None, None)
    rows = []
    for n in n_grid:
        delta, se = empirical_deviation(
            config, cost, estimator, n, reps, master_seed,
            threads=threads, oracle=oracle, population=population, fixed_mu=fixed_mu,
        )
        rows.append(TableRow(n, delta, se, reps))
    metadata = {
        "setting": bench.setting_string(config),
        "cost": cost_string(cost),
        "estimator": estimator,
        "masterSeed": int(master_seed),
        "populationCost": population.value,
        "populationCostSE": population.std_error,
        "oracleM": population.mc_samples,
        "oracleSeed": int(oracle.seed),
    }
    if population.note:
        metadata["oracleNote"] = population.note
    return ConvergenceTable(tuple(rows), metadata)


def fit_rate(table: ConvergenceTable, n_min: int = 64) -> RateFit:
    """Ordinary least squares of log(delta_hat) on log(n) for rows n >= n_min.

    Rows with zero deviation cannot enter the log fit and are dropped with
    a flag; at least 3 usable rows are required.
    """
    kept = [r for r in table.rows if r.n >= n_min]
    usable = [r for r in kept if r.delta_hat > 0.0]
    dropped = len(usable) < len(kept)
    if len(usable) < 3:
        raise ValueError("rate fit needs at least 3 rows with n >= n_min and delta > 0")
    x = np.log(np.array([r.n for r in usable], dtype=np.float64))
    y = np.log(np.array([r.delta_hat for r in usable]))
    xbar = x.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * (y - y.mean())).sum() / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    dof = len(usable) - 2
    s2 = float((resid**2).sum() / dof)
    return RateFit(
        slope=slope,
        intercept=intercept,
        slope_std_err=math.sqrt(s2 / sxx),
        n_used=tuple(int(r.n) for r in usable),
        dropped_zero_rows=dropped,
    )


def decomposition_residual(mu: DiscreteMeasure, nu: DiscreteMeasure,
                           cost: CostSpec) -> float:
    """Gap in the additive-cost split T(mu, nu) = T_inner(mu, proj nu) + R(nu).

    The full cost couples mu (living on the leading block) with nu; the
    inner cost couples mu with the projection of nu onto that block; R is
    the linear residual functional.  Exact solves on both sides make the
    gap vanish up to solver tolerance.
    """
    cost = _resolve_cost(cost)
    if cost.kind != "additive":
        raise ValueError("decomposition requires an additive cost")
    s = cost.split
    if mu.dim != s:
        raise ValueError(f"source dimension {mu.dim} must equal the split {s}")
    if nu.dim < s:
        raise ValueError(f"target dimension {nu.dim} is smaller than the split {s}")
    full = solve_exact(mu, nu, cost_matrix(cost, mu.points, nu.points))
    proj = push_forward_projection(nu, s)
    inner = solve_exact(mu, proj, cost_matrix(cost.inner, mu.points, proj.points))
    residual = residual_cost_functional(nu, s, cost.residual)
    return abs(full.cost - inner.cost - residual)


def dependent_coupling_check(cost: CostSpec, dim: int, n: int,
                             rng: np.random.Generator) -> float:
    """Exact identity for projection-coupled empirical measures.

    Samples n uniform points in [0,1]^dim, takes the source sample to be
    their projection onto the leading block, and returns
    |T(mu_n, nu_n) - R(nu_n)|: the inner transport is free because the
    inner cost vanishes on the diagonal, so only the residual term remains.
    """
    cost = _resolve_cost(cost)
    if cost.kind != "additive":
        raise ValueError("dependent-coupling check requires an additive cost")
    s = cost.split
    if not 1 <= s < dim:
        raise ValueError(f"need 1 <= split < dim, got split={s}, dim={dim}")
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = rng.random((n, dim))
    nu = DiscreteMeasure(pts, np.full(n, 1.0 / n))
    mu = push_forward_projection(nu, s)
    sol = solve_exact(mu, nu, cost_matrix(cost, mu.points, nu.points))
    residual = residual_cost_functional(nu, s, cost.residual)
    return abs(sol.cost - residual)


def theory_rate_for(setting, cost) -> TheoryRate:
    """Rate table entry matching a benchmark setting and cost smoothness."""
    config = _resolve_config(setting)
    cost = _resolve_cost(cost)
    if isinstance(config, SemiDiscreteConfig):
        return theory_rate_family("semidiscrete")
    if cost.kind == "additive":
        raise ValueError("additive costs have no benchmark rate entry")
    d = config.d1
    if cost.kind == "sql2" or (cost.p is not None and cost.p >= 2):
        return theory_rate_family("semiconcave", d=d)
    if cost.kind == "l1" or cost.p == 1:
        return theory_rate_family("lipschitz", k=d)
    return theory_rate_family("hoelder", alpha=cost.p, d=d)
