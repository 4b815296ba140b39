"""Randomized verification suites behind the CLI's verify command.

Each suite draws seeded random instances, checks the corresponding exact
identity or contract, and returns a list of counterexample records (empty
means the suite passed).  Records carry the suite seed and trial index so
failures can be replayed.
"""

from __future__ import annotations

import numpy as np

from . import convergence, costs, ctransform, solver
from .costs import CostMatrix
from .measures import DiscreteMeasure

__all__ = ["SUITES", "run_suite", "suite_names"]

_CONTRACTION_TOL = 1e-12
_IDENTITY_TOL = 1e-9


def _stream(seed: int, tag: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), tag, trial]))


def _uniform_measure(n: int) -> DiscreteMeasure:
    return DiscreteMeasure(np.arange(n, dtype=np.float64)[:, None], np.full(n, 1.0 / n))


def _random_measure(rng: np.random.Generator, n: int, d: int = 1) -> DiscreteMeasure:
    w = rng.random(n) + 1e-3
    return DiscreteMeasure(rng.random((n, d)), w / w.sum())


def solver_oracle_suite(trials: int, seed: int) -> list[dict]:
    """solve_exact equals the permutation brute force on tiny uniform instances."""
    failures = []
    for trial in range(trials):
        rng = _stream(seed, 101, trial)
        n = int(rng.integers(1, 8))
        C = CostMatrix(rng.random((n, n)))
        mu = _uniform_measure(n)
        err = abs(solver.solve_exact(mu, mu, C).cost - solver.brute_force_uniform(C))
        if err > _IDENTITY_TOL:
            failures.append({"suite": "solver-oracle", "seed": seed, "trial": trial,
                             "n": n, "error": err})
    return failures


def certificates_suite(trials: int, seed: int) -> list[dict]:
    """Certificates pass at 1e-9 on random rectangular weighted instances."""
    failures = []
    for trial in range(trials):
        rng = _stream(seed, 102, trial)
        m = int(rng.integers(1, 51))
        n = int(rng.integers(1, 51))
        C = CostMatrix(rng.random((m, n)))
        mu = _random_measure(rng, m)
        nu = _random_measure(rng, n)
        sol = solver.solve_exact(mu, nu, C)
        rep = solver.verify_certificate(sol, mu, nu, C, _IDENTITY_TOL)
        marg = max(rep.max_row_residual, rep.max_col_residual)
        if not rep.passed or marg > 1e-12 * max(m, n) or len(sol.plan) > m + n - 1:
            failures.append({"suite": "certificates", "seed": seed, "trial": trial,
                             "m": m, "n": n, "report": rep})
    return failures


def ctransform_suite(trials: int, seed: int) -> list[dict]:
    """Contraction, triple-transform idempotence, monotone envelope, order reversal."""
    failures = []
    for trial in range(trials):
        rng = _stream(seed, 103, trial)
        m = int(rng.integers(1, 13))
        n = int(rng.integers(1, 13))
        C = CostMatrix(rng.random((m, n)))
        f1 = rng.uniform(-1.0, 1.0, m)
        f2 = rng.uniform(-1.0, 1.0, m)
        problems = []
        if ctransform.contraction_gap(f1, f2, C) < -_CONTRACTION_TOL:
            problems.append("contraction")
        fc = ctransform.c_transform_xy(f1, C)
        fcc = ctransform.c_transform_yx(fc, C)
        fccc = ctransform.c_transform_xy(fcc, C)
        if np.abs(fccc - fc).max() > _CONTRACTION_TOL:
            problems.append("triple-transform")
        if (fcc - f1).min() < -_CONTRACTION_TOL:
            problems.append("monotone-envelope")
        lower = f1 - np.abs(rng.uniform(0.0, 0.5, m))
        if (ctransform.c_transform_xy(lower, C) - fc).min() < -_CONTRACTION_TOL:
            problems.append("order-reversal")
        if problems:
            failures.append({"suite": "ctransform", "seed": seed, "trial": trial,
                             "m": m, "n": n, "problems": problems})
    return failures


def decomposition_suite(trials: int, seed: int) -> list[dict]:
    """Additive-cost split identity on random instances."""
    kinds = (costs.l1(), costs.sql2(), costs.pow_coordinatewise(1.5))
    failures = []
    for trial in range(trials):
        rng = _stream(seed, 104, trial)
        s = int(rng.integers(1, 4))
        d = s + int(rng.integers(1, 4))
        spec = costs.additive(
            s,
            kinds[int(rng.integers(len(kinds)))],
            kinds[int(rng.integers(len(kinds)))],
        )
        mu = _random_measure(rng, int(rng.integers(1, 21)), s)
        nu = _random_measure(rng, int(rng.integers(1, 21)), d)
        gap = convergence.decomposition_residual(mu, nu, spec)
        if gap > _IDENTITY_TOL:
            failures.append({"suite": "decomposition", "seed": seed, "trial": trial,
                             "split": s, "dim": d, "gap": gap})
    return failures


def dependent_coupling_suite(trials: int, seed: int) -> list[dict]:
    """Projection-coupled samples: the transport cost reduces to the residual."""
    kinds = (costs.l1(), costs.sql2())
    failures = []
    for trial in range(trials):
        rng = _stream(seed, 105, trial)
        s = int(rng.integers(1, 3))
        d = s + int(rng.integers(1, 3))
        n = int(rng.integers(1, 61))
        spec = costs.additive(
            s,
            kinds[int(rng.integers(len(kinds)))],
            kinds[int(rng.integers(len(kinds)))],
        )
        gap = convergence.dependent_coupling_check(spec, d, n, rng)
        if gap > _IDENTITY_TOL:
            failures.append({"suite": "dependent-coupling", "seed": seed,
                             "trial": trial, "split": s, "dim": d, "n": n, "gap": gap})
    return failures


SUITES = {
    "solver-oracle": solver_oracle_suite,
    "certificates": certificates_suite,
    "ctransform": ctransform_suite,
    "decomposition": decomposition_suite,
    "dependent-coupling": dependent_coupling_suite,
}


def suite_names() -> tuple[str, ...]:
    return tuple(SUITES) + ("all",)


def run_suite(name: str, trials: int, seed: int) -> list[dict]:
    """Run one suite (or all of them) and collect counterexamples."""
    if name == "all":
        failures = []
        for suite in SUITES.values():
            failures.extend(suite(trials, seed))
        return failures
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {suite_names()}")
    return SUITES[name](trials, seed)
