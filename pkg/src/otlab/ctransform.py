"""Discrete c-transform calculus on cost matrices.

Potentials are plain 1-D float arrays indexed by the source rows or target
columns of a :class:`~otlab.costs.CostMatrix`.  Transforms take the minimum
over the given support only.  When the matrix is normalized its stored
values live in [0, 1] and the transforms operate on those values; callers
convert back to original units with the matrix's scale/offset if needed.
"""

from __future__ import annotations

import numpy as np

from .costs import CostMatrix

__all__ = [
    "c_transform_xy",
    "c_transform_yx",
    "double_transform",
    "feasibility_check",
    "contraction_gap",
    "canonical_potentials",
]


def _as_potential(f, length: int, side: str) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (length,):
        raise ValueError(f"{side} potential has shape {f.shape}, expected ({length},)")
    if not np.isfinite(f).all():
        raise ValueError(f"{side} potential must be finite")
    return f


def c_transform_xy(f, C: CostMatrix) -> np.ndarray:
    """Target-side conjugate: result[j] = min_i (C[i, j] - f[i])."""
    V = C.values
    f = _as_potential(f, V.shape[0], "source")
    return (V - f[:, None]).min(axis=0)


def c_transform_yx(g, C: CostMatrix) -> np.ndarray:
    """Source-side conjugate: result[i] = min_j (C[i, j] - g[j])."""
    V = C.values
    g = _as_potential(g, V.shape[1], "target")
    return (V - g[None, :]).min(axis=1)


def double_transform(f, C: CostMatrix) -> np.ndarray:
    """(f^c)^c; dominates f pointwise, with equality iff f is c-concave."""
    return c_transform_yx(c_transform_xy(f, C), C)


def feasibility_check(f, C: CostMatrix, tol: float = 1e-9) -> bool:
    """Membership test for the feasible potential class on a normalized matrix.

    True iff ||f||_inf <= 1 + tol, ||f^c||_inf <= 1 + tol, and
    ||(f^c)^c - f||_inf <= tol.  Requires cost values in [0, 1].
    """
    if not C.is_unit_range():
        raise ValueError("feasibility_check requires a normalized cost matrix")
    f = _as_potential(f, C.values.shape[0], "source")
    if np.abs(f).max() > 1.0 + tol:
        return False
    fc = c_transform_xy(f, C)
    if np.abs(fc).max() > 1.0 + tol:
        return False
    fcc = c_transform_yx(fc, C)
    return bool(np.abs(fcc - f).max() <= tol)


def contraction_gap(f1, f2, C: CostMatrix) -> float:
    """||f1 - f2||_inf - ||f1^c - f2^c||_inf; nonnegative up to rounding.

    The c-transform is a sup-norm contraction, so the gap never drops below
    -1e-12 on finite matrices.
    """
    V = C.values
    f1 = _as_potential(f1, V.shape[0], "source")
    f2 = _as_potential(f2, V.shape[0], "source")
    d0 = float(np.abs(f1 - f2).max())
    d1 = float(np.abs(c_transform_xy(f1, C) - c_transform_xy(f2, C)).max())
    return d0 - d1


def canonical_potentials(u, C: CostMatrix) -> tuple[np.ndarray, np.ndarray]:
    """c-concave representative of a dual solution, in matrix-value units.

    Given any source potential ``u`` that is optimal up to an additive
    gauge, returns the pair ``(f, g) = (u^cc + t, u^c - t)`` with the shift
    ``t = (max g - max f) / 2``.  The pair satisfies ``g = f^c`` and
    ``f = g^c``; for values in [0, 1] both components land in [-1/2, 1/2].
    """
    g = c_transform_xy(u, C)
    f = c_transform_yx(g, C)
    t = 0.5 * (float(g.max()) - float(f.max()))
    return f + t, g - t
