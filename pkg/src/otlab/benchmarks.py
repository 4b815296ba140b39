"""Experiment families: cube, sphere, and semi-discrete settings.

Each setting pairs a low-complexity source measure with a higher-dimensional
target, provides deterministic samplers driven by an explicit RNG stream,
and exposes a population-cost oracle (closed form for the cube, Monte Carlo
for sphere and semi-discrete).  Configs and site sets are immutable; a
sampler stream must be used by one thread at a time.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from . import costs as _costs
from .costs import CostError, CostSpec, pairwise_cost
from .measures import DiscreteMeasure

__all__ = [
    "CubeConfig",
    "SphereConfig",
    "SemiDiscreteConfig",
    "OracleParams",
    "PopulationCost",
    "sample_cube",
    "sample_sphere",
    "semidiscrete_sites",
    "sample_semidiscrete_nu",
    "sample_semidiscrete_mu",
    "c_projection",
    "c_projection_batch",
    "semidiscrete_mu_weights",
    "population_cost",
    "sphere_symmetry_map",
    "parse_setting",
    "setting_string",
]

MU = "mu"
NU = "nu"

_CHUNK = 1 << 19
_POPULATION_M_DEFAULT = 10**7
_WEIGHTS_M_PER_SITE = 10**6
_ORACLE_M_MIN = 10**4


@dataclass(frozen=True)
class CubeConfig:
    """Uniform cube pair: source on [0,1]^d1 x {0}^(d2-d1), target on [0,1]^d2."""

    d1: int
    d2: int

    def __post_init__(self) -> None:
        if not 1 <= self.d1 <= self.d2:
            raise ValueError("cube requires 1 <= d1 <= d2")


@dataclass(frozen=True)
class SphereConfig:
    """Uniform sphere pair: source on S^d1 x {0}^(d2-d1), target on S^d2.

    Points live in R^(d2+1).
    """

    d1: int
    d2: int

    def __post_init__(self) -> None:
        if not 1 <= self.d1 <= self.d2:
            raise ValueError("sphere requires 1 <= d1 <= d2")


@dataclass(frozen=True, eq=False)
class SemiDiscreteConfig:
    """Finitely supported source (sites in [0,1]^d) vs uniform target on [0,1]^d.

    Sites are generated once from ``site_seed``; pass ``sites`` explicitly
    to pin the support by hand (the seed is then ignored).
    """

    sites_count: int
    dim: int
    site_seed: int = 0
    sites: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.sites_count < 1 or self.dim < 1:
            raise ValueError("semidiscrete requires sites_count >= 1 and dim >= 1")
        if self.sites is not None:
            pts = np.ascontiguousarray(self.sites, dtype=np.float64)
            if pts.ndim == 1:
                pts = pts[:, None]
            if pts.shape != (self.sites_count, self.dim):
                raise ValueError(
                    f"explicit sites must have shape ({self.sites_count}, {self.dim})"
                )
            if pts.min() < 0.0 or pts.max() > 1.0:
                raise ValueError("sites must lie in the unit cube")
            pts.setflags(write=False)
            object.__setattr__(self, "sites", pts)


@dataclass(frozen=True)
class OracleParams:
    """Monte Carlo budget and seed for the ground-truth oracles.

    ``mc_samples=None`` selects the per-operation default: 10^7 draws for
    population costs, 10^6 * min(sites, 10) for semi-discrete site weights.
    """

    mc_samples: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mc_samples is not None and self.mc_samples < _ORACLE_M_MIN:
            raise ValueError(f"oracle needs at least {_ORACLE_M_MIN} samples")


@dataclass(frozen=True)
class PopulationCost:
    """Oracle value with its Monte Carlo standard error (0 for closed forms)."""

    value: float
    std_error: float
    mc_samples: int = 0
    note: str | None = None


def sample_cube(config: CubeConfig, side: str, n: int, rng: np.random.Generator) -> DiscreteMeasure:
    """n i.i.d. uniform points with weights 1/n.

    The source side pads coordinates d1+1..d2 with exact zeros.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if side == MU:
        pts = np.zeros((n, config.d2))
        pts[:, : config.d1] = rng.random((n, config.d1))
    elif side == NU:
        pts = rng.random((n, config.d2))
    else:
        raise ValueError(f"side must be {MU!r} or {NU!r}")
    return DiscreteMeasure(pts, np.full(n, 1.0 / n))


def _unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Uniform points on S^(d-1) via normalized Gaussians; zero draws are redrawn."""
    z = rng.standard_normal((n, d))
    norms = np.sqrt((z * z).sum(axis=1))
    while True:
        bad = np.flatnonzero(norms < 1e-12)
        if bad.size == 0:
            break
        z[bad] = rng.standard_normal((bad.size, d))
        norms[bad] = np.sqrt((z[bad] * z[bad]).sum(axis=1))
    return z / norms[:, None]


def sample_sphere(config: SphereConfig, side: str, n: int, rng: np.random.Generator) -> DiscreteMeasure:
    """n uniform points on the configured sphere, embedded in R^(d2+1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if side == MU:
        pts = np.zeros((n, config.d2 + 1))
        pts[:, : config.d1 + 1] = _unit_rows(rng, n, config.d1 + 1)
    elif side == NU:
        pts = _unit_rows(rng, n, config.d2 + 1)
    else:
        raise ValueError(f"side must be {MU!r} or {NU!r}")
    return DiscreteMeasure(pts, np.full(n, 1.0 / n))


def semidiscrete_sites(config: SemiDiscreteConfig) -> np.ndarray:
    """Site coordinates in [0,1]^d, fixed once per (count, dim, seed)."""
    if config.sites is not None:
        return config.sites
    rng = np.random.default_rng(np.random.SeedSequence(config.site_seed))
    pts = rng.random((config.sites_count, config.dim))
    pts.setflags(write=False)
    return pts


def c_projection(y, sites, cost: CostSpec) -> int:
    """Index of the cost-nearest site; ties break to the lowest index."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    return int(c_projection_batch(y[None, :], sites, cost)[0])


def c_projection_batch(Y, sites, cost: CostSpec) -> np.ndarray:
    """Vectorized c-projection of each row of Y onto the site set."""
    sites = np.asarray(sites, dtype=np.float64)
    if sites.ndim == 1:
        sites = sites[:, None]
    if sites.shape[0] < 1:
        raise ValueError("need at least one site")
    D = pairwise_cost(cost, sites, Y)
    return np.argmin(D, axis=0)


def _weights_samples(config: SemiDiscreteConfig, oracle: OracleParams) -> int:
    if oracle.mc_samples is not None:
        return oracle.mc_samples
    return _WEIGHTS_M_PER_SITE * min(config.sites_count, 10)


def semidiscrete_mu_weights(config: SemiDiscreteConfig, cost: CostSpec,
                            oracle: OracleParams) -> DiscreteMeasure:
    """Source measure on the sites with Monte Carlo cell masses.

    Each site's weight is the fraction of uniform draws whose c-projection
    lands on it, renormalized to sum to one exactly.
    """
    sites = semidiscrete_sites(config)
    total = _weights_samples(config, oracle)
    rng = np.random.default_rng(np.random.SeedSequence([oracle.seed & _MASK64, 1]))
    counts = np.zeros(config.sites_count, dtype=np.int64)
    left = total
    while left > 0:
        take = min(left, _CHUNK)
        Y = rng.random((take, config.dim))
        idx = c_projection_batch(Y, sites, cost)
        counts += np.bincount(idx, minlength=config.sites_count)
        left -= take
    w = counts.astype(np.float64) / total
    w = w / w.sum()
    return DiscreteMeasure(sites, w)


def sample_semidiscrete_nu(config: SemiDiscreteConfig, n: int,
                           rng: np.random.Generator) -> DiscreteMeasure:
    """n uniform draws from the target distribution on [0,1]^d."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return DiscreteMeasure(rng.random((n, config.dim)), np.full(n, 1.0 / n))


def sample_semidiscrete_mu(mu: DiscreteMeasure, n: int,
                           rng: np.random.Generator) -> DiscreteMeasure:
    """Empirical measure of n i.i.d. draws from a finitely supported source."""
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = rng.multinomial(n, mu.weights)
    keep = counts > 0
    return DiscreteMeasure(mu.points[keep], counts[keep] / n)


_MASK64 = (1 << 64) - 1


def _mc_mean(sample_values, total: int) -> tuple[float, float]:
    """Chunked Monte Carlo mean and standard error of a cost functional."""
    s = 0.0
    s2 = 0.0
    left = total
    while left > 0:
        take = min(left, _CHUNK)
        vals = sample_values(take)
        s += float(vals.sum())
        s2 += float((vals * vals).sum())
        left -= take
    mean = s / total
    var = max(s2 - total * mean * mean, 0.0) / (total - 1)
    return mean, float(np.sqrt(var / total))


def _cube_denominator(cost: CostSpec) -> float:
    """Reciprocal of E[c per coordinate(0, U)], U ~ Unif[0,1]: p + 1 for |.|^p."""
    if cost.kind == _costs.L1:
        return 2.0
    if cost.kind == _costs.SQL2 or (cost.kind == _costs.POW_EUCLID and cost.p == 2):
        return 3.0
    if cost.kind == _costs.POW_COORD:
        return cost.p + 1.0
    raise CostError(
        f"cube oracle needs a coordinatewise-separable cost, got {_costs.cost_string(cost)}"
    )


def population_cost(config, cost: CostSpec, oracle: OracleParams | None = None) -> PopulationCost:
    """Ground-truth transport cost between the setting's population measures.

    Cube: exact closed form (standard error 0).  Sphere: Monte Carlo over
    the symmetry map that normalizes the leading block and zero-pads.
    Semi-discrete: Monte Carlo over the c-projection map.
    """
    oracle = oracle or OracleParams()
    if isinstance(config, CubeConfig):
        denom = _cube_denominator(cost)
        extra = config.d2 - config.d1
        return PopulationCost(value=extra / denom if extra else 0.0, std_error=0.0)
    if isinstance(config, SphereConfig):
        return _sphere_population(config, cost, oracle)
    if isinstance(config, SemiDiscreteConfig):
        return _semidiscrete_population(config, cost, oracle)
    raise TypeError(f"unknown setting config {type(config).__name__}")


def _require_l1_or_sql2(cost: CostSpec, setting: str) -> None:
    if cost.kind not in (_costs.L1, _costs.SQL2):
        raise CostError(f"{setting} oracle supports l1 and sql2 costs only")


def sphere_symmetry_map(config: SphereConfig, Y) -> np.ndarray:
    """Map target-sphere points onto the source sphere: normalize the leading
    d1+1 coordinates and zero out the rest."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[1] != config.d2 + 1:
        raise ValueError(f"points must have shape (n, {config.d2 + 1})")
    lead = config.d1 + 1
    U = Y[:, :lead]
    norms = np.sqrt((U * U).sum(axis=1))
    out = np.zeros_like(Y)
    out[:, :lead] = U / norms[:, None]
    return out


def _sphere_population(config: SphereConfig, cost: CostSpec,
                       oracle: OracleParams) -> PopulationCost:
    _require_l1_or_sql2(cost, "sphere")
    total = oracle.mc_samples or _POPULATION_M_DEFAULT
    rng = np.random.default_rng(np.random.SeedSequence([oracle.seed & _MASK64, 2]))

    def draw(take: int) -> np.ndarray:
        Y = _unit_rows(rng, take, config.d2 + 1)
        T = sphere_symmetry_map(config, Y)
        if cost.kind == _costs.SQL2:
            return ((T - Y) ** 2).sum(axis=1)
        return np.abs(T - Y).sum(axis=1)

    mean, se = _mc_mean(draw, total)
    # The symmetry map is provably optimal only for rotation-invariant costs;
    # for l1 we flag the oracle as uncertified.
    note = None
    if cost.kind == _costs.L1:
        note = "symmetry map assumed optimal (not independently certified)"
    return PopulationCost(mean, se, mc_samples=total, note=note)


def _semidiscrete_population(config: SemiDiscreteConfig, cost: CostSpec,
                             oracle: OracleParams) -> PopulationCost:
    _require_l1_or_sql2(cost, "semidiscrete")
    sites = semidiscrete_sites(config)
    total = oracle.mc_samples or _POPULATION_M_DEFAULT
    rng = np.random.default_rng(np.random.SeedSequence([oracle.seed & _MASK64, 3]))

    def draw(take: int) -> np.ndarray:
        Y = rng.random((take, config.dim))
        D = pairwise_cost(cost, sites, Y)
        return D.min(axis=0)

    mean, se = _mc_mean(draw, total)
    return PopulationCost(mean, se, mc_samples=total)


def parse_setting(text: str):
    """Parse "cube:d1:d2", "sphere:d1:d2", or "semidiscrete:I:d:siteSeed"."""
    parts = text.strip().lower().split(":")
    name = parts[0]
    try:
        if name == "cube" and len(parts) == 3:
            return CubeConfig(int(parts[1]), int(parts[2]))
        if name == "sphere" and len(parts) == 3:
            return SphereConfig(int(parts[1]), int(parts[2]))
        if name == "semidiscrete" and len(parts) in (3, 4):
            seed = int(parts[3]) if len(parts) == 4 else 0
            return SemiDiscreteConfig(int(parts[1]), int(parts[2]), seed)
    except ValueError as exc:
        raise ValueError(f"bad setting string {text!r}: {exc}") from exc
    raise ValueError(
        f"bad setting string {text!r}; expected cube:d1:d2, sphere:d1:d2, "
        "or semidiscrete:I:d:siteSeed"
    )


def setting_string(config) -> str:
    """Canonical string form of a setting config."""
    if isinstance(config, CubeConfig):
        return f"cube:{config.d1}:{config.d2}"
    if isinstance(config, SphereConfig):
        return f"sphere:{config.d1}:{config.d2}"
    if isinstance(config, SemiDiscreteConfig):
        if config.sites is not None:
            digest = zlib.crc32(config.sites.tobytes()) & 0xFFFF
            return f"semidiscrete:{config.sites_count}:{config.dim}:explicit{digest:04x}"
        return f"semidiscrete:{config.sites_count}:{config.dim}:{config.site_seed}"
    raise TypeError(f"unknown setting config {type(config).__name__}")
