"""Exact solution of the discrete transport problem.

:func:`solve_exact` returns the optimal cost, a sparse basic plan, and
c-concave dual potentials whose optimality is independently checkable with
:func:`verify_certificate`.  :func:`brute_force_uniform` enumerates
permutations for tiny square instances and serves as the ground-truth
oracle.  A solver call owns only local scratch state, so independent calls
are safe from multiple threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import ctransform
from ._network_simplex import STATUS_OK, solve_transport
from .costs import CostMatrix
from .measures import DiscreteMeasure

__all__ = [
    "SolverError",
    "TransportPlan",
    "TransportSolution",
    "CertificateReport",
    "solve_exact",
    "optimal_cost",
    "verify_certificate",
    "brute_force_uniform",
    "dual_objective",
]

WEIGHT_BALANCE_TOL = 1e-9
BRUTE_FORCE_MAX = 8


class SolverError(RuntimeError):
    """Raised on infeasible input or an internal solver failure."""


@dataclass(frozen=True)
class TransportPlan:
    """Sparse basic coupling: parallel arrays of (source, target, mass > 0)."""

    source: np.ndarray
    target: np.ndarray
    mass: np.ndarray

    def __len__(self) -> int:
        return self.source.shape[0]

    def row_sums(self, m: int) -> np.ndarray:
        return np.bincount(self.source, weights=self.mass, minlength=m)

    def col_sums(self, n: int) -> np.ndarray:
        return np.bincount(self.target, weights=self.mass, minlength=n)

    def entries(self) -> list[tuple[int, int, float]]:
        return [
            (int(i), int(j), float(w))
            for i, j, w in zip(self.source, self.target, self.mass)
        ]


@dataclass(frozen=True)
class TransportSolution:
    """Optimal cost (original units), basic plan, and canonical duals.

    ``dual_f`` / ``dual_g`` are in original cost units; ``dual_f_values`` /
    ``dual_g_values`` are the same potentials in the cost matrix's stored
    value units (the c-concave pair, so ``dual_g_values`` is the transform
    of ``dual_f_values``).
    """

    cost: float
    plan: TransportPlan
    dual_f: np.ndarray
    dual_g: np.ndarray
    dual_f_values: np.ndarray
    dual_g_values: np.ndarray


@dataclass(frozen=True)
class CertificateReport:
    """Optimality diagnostics; ``passed`` means every figure is within tol."""

    max_row_residual: float
    max_col_residual: float
    max_dual_violation: float
    max_slackness_violation: float
    duality_gap: float
    tol: float
    passed: bool


def _check_instance(mu: DiscreteMeasure, nu: DiscreteMeasure, C: CostMatrix) -> None:
    if C.shape != (mu.size, nu.size):
        raise SolverError(
            f"cost matrix shape {C.shape} does not match supports "
            f"({mu.size}, {nu.size})"
        )
    if abs(float(mu.weights.sum()) - float(nu.weights.sum())) > WEIGHT_BALANCE_TOL:
        raise SolverError("weight sums differ by more than 1e-9; instance infeasible")


def _price_tol(values: np.ndarray) -> float:
    return 1e-11 * max(1.0, float(values.max()))


def _run_kernel(mu, nu, C):
    V = C.values
    m, n = V.shape
    tol = _price_tol(V)
    w = mu.weights
    v = nu.weights
    hint = np.zeros(m)
    if n >= 2048 and 8 * m <= n:
        # Coarse-to-fine warm start: solve on a thinned column subset and
        # seed the greedy basis with the resulting row potentials.
        k = max(256, n // 16)
        idx = np.unique(np.linspace(0, n - 1, num=k).astype(np.int64))
        v_sub = v[idx] * (float(w.sum()) / float(v[idx].sum()))
        status, _, _, _, pot_sub, _ = solve_transport(
            np.ascontiguousarray(V[:, idx]), w, v_sub, tol, 200 * (m + idx.size), hint
        )
        if status == STATUS_OK:
            hint = pot_sub[:m].copy()
    status, arow, acol, aflow, pot, _ = solve_transport(
        V, w, v, tol, 200 * (m + n), hint
    )
    if status != STATUS_OK:
        raise SolverError("pivot limit exceeded; solver cannot certify optimality")
    return arow, acol, aflow, pot


def solve_exact(mu: DiscreteMeasure, nu: DiscreteMeasure, C: CostMatrix) -> TransportSolution:
    """Solve the transport problem exactly by network simplex.

    The reported cost is in original units (``scale * lp + offset``).  Dual
    potentials are the c-concave canonical representative computed on the
    matrix's stored values and then mapped to original units with the
    offset split evenly between the two sides.
    """
    _check_instance(mu, nu, C)
    arow, acol, aflow, pot = _run_kernel(mu, nu, C)
    m, n = C.shape

    keep = aflow > 0.0
    src = arow[keep]
    tgt = acol[keep]
    mass = aflow[keep]
    order = np.lexsort((tgt, src))
    plan = TransportPlan(src[order], tgt[order], mass[order])

    lp_cost = float(np.sum(aflow * C.values[arow, acol]))
    cost = C.scale * lp_cost + C.offset

    f_vals, g_vals = ctransform.canonical_potentials(pot[:m], C)
    half = 0.5 * C.offset
    return TransportSolution(
        cost=cost,
        plan=plan,
        dual_f=C.scale * f_vals + half,
        dual_g=C.scale * g_vals + half,
        dual_f_values=f_vals,
        dual_g_values=g_vals,
    )


def optimal_cost(mu: DiscreteMeasure, nu: DiscreteMeasure, C: CostMatrix) -> float:
    """Optimal cost only, in original units.

    Uniform same-size instances reduce to the assignment problem and are
    dispatched to a combinatorial assignment solver; everything else runs
    the network simplex.  Both routes are exact.
    """
    _check_instance(mu, nu, C)
    m, n = C.shape
    if m == n and _is_exactly_uniform(mu) and _is_exactly_uniform(nu):
        rows, cols = linear_sum_assignment(C.values)
        return C.scale * float(C.values[rows, cols].sum()) / n + C.offset
    arow, acol, aflow, _ = _run_kernel(mu, nu, C)
    lp_cost = float(np.sum(aflow * C.values[arow, acol]))
    return C.scale * lp_cost + C.offset


def _is_exactly_uniform(measure: DiscreteMeasure) -> bool:
    w = measure.weights
    return bool((w == 1.0 / w.shape[0]).all())


def verify_certificate(sol: TransportSolution, mu: DiscreteMeasure,
                       nu: DiscreteMeasure, C: CostMatrix,
                       tol: float = 1e-9) -> CertificateReport:
    """Check marginals, dual feasibility, slackness, and the duality gap."""
    m, n = C.shape
    original = C.original()
    plan = sol.plan
    row_res = float(np.abs(plan.row_sums(m) - mu.weights).max())
    col_res = float(np.abs(plan.col_sums(n) - nu.weights).max())
    spread = sol.dual_f[:, None] + sol.dual_g[None, :] - original
    dual_violation = max(float(spread.max()), 0.0)
    if len(plan):
        slack = float(np.abs(spread[plan.source, plan.target]).max())
    else:
        slack = 0.0
    gap = abs(dual_objective(sol.dual_f, sol.dual_g, mu, nu) - sol.cost)
    passed = max(row_res, col_res, dual_violation, slack, gap) <= tol
    return CertificateReport(row_res, col_res, dual_violation, slack, gap, tol, passed)


def brute_force_uniform(C: CostMatrix) -> float:
    """Exact cost for uniform-weight square instances by permutation search.

    Only instances with at most ``BRUTE_FORCE_MAX`` points are accepted;
    the search is exhaustive, so this is the trusted oracle for the solver.
    """
    m, n = C.shape
    if m != n:
        raise SolverError("brute force requires a square cost matrix")
    if n > BRUTE_FORCE_MAX:
        raise SolverError(f"brute force limited to n <= {BRUTE_FORCE_MAX}")
    original = C.original()
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    totals = original[np.arange(n)[None, :], perms].sum(axis=1)
    return float(totals.min()) / n


def dual_objective(f, g, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Value of a dual pair: sum_i w_i f_i + sum_j v_j g_j."""
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != (mu.size,):
        raise ValueError(f"f has shape {f.shape}, expected ({mu.size},)")
    if g.shape != (nu.size,):
        raise ValueError(f"g has shape {g.shape}, expected ({nu.size},)")
    return float(mu.weights @ f + nu.weights @ g)
