"""Finitely supported measures on Euclidean space.

A measure is a weighted point cloud: an ``(n, d)`` array of support points
and an ``(n,)`` array of nonnegative weights summing to one.  All objects
are immutable after construction and all operations are pure functions, so
everything here can be shared freely across threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MeasureError",
    "DiscreteMeasure",
    "validate_measure",
    "push_forward_projection",
    "residual_cost_functional",
    "read_measure",
]

# Input weight sums may be off by rounding; anything worse is the caller's bug.
WEIGHT_SUM_TOL = 1e-9


class MeasureError(ValueError):
    """Raised when raw support points or weights fail validation."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finite support in R^d.

    ``points`` has shape ``(n, d)`` and ``weights`` shape ``(n,)``.  The
    constructor performs cheap shape/finiteness checks only; use
    :func:`validate_measure` for untrusted data (it also merges duplicate
    support points into canonical form).
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise MeasureError("support must be a nonempty (n, d) array")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (pts.shape[0],):
            raise MeasureError(
                f"got {pts.shape[0]} points but {w.shape} weights"
            )
        if not np.isfinite(pts).all():
            raise MeasureError("support points must be finite")
        if not np.isfinite(w).all():
            raise MeasureError("weights must be finite")
        object.__setattr__(self, "points", _freeze(pts))
        object.__setattr__(self, "weights", _freeze(w))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def is_uniform(self) -> bool:
        w = self.weights
        return bool((w == w[0]).all())


def _merge_duplicates(points: np.ndarray, weights: np.ndarray):
    """Sum weights of exactly equal support points; sorts lexicographically."""
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    if uniq.shape[0] == points.shape[0]:
        order = np.argsort(inverse, kind="stable")
        return points[order], weights[order]
    merged = np.zeros(uniq.shape[0])
    np.add.at(merged, inverse, weights)
    return uniq, merged


def validate_measure(points, weights) -> DiscreteMeasure:
    """Check raw sequences and return a canonical :class:`DiscreteMeasure`.

    Duplicate support points are merged by summing their weights, the
    support is sorted lexicographically, and weights are renormalized to
    sum to one exactly (the input sum must already be within
    ``WEIGHT_SUM_TOL`` of one).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise MeasureError("empty support")
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise MeasureError("points must form an (n, d) array of equal-dimension rows")
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != pts.shape[0]:
        raise MeasureError(
            f"dimension mismatch: {pts.shape[0]} points vs weights of shape {w.shape}"
        )
    if not np.isfinite(pts).all():
        raise MeasureError("support points must be finite")
    if not np.isfinite(w).all():
        raise MeasureError("weights must be finite")
    if (w < 0).any():
        raise MeasureError("negative weight")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise MeasureError(
            f"weights sum to {total!r}; caller must pre-normalize to 1 ± {WEIGHT_SUM_TOL}"
        )
    pts, w = _merge_duplicates(pts, w)
    w = w / w.sum()
    # Push the division residue onto the largest weight so the sum is exact.
    w[int(np.argmax(w))] += 1.0 - w.sum()
    return DiscreteMeasure(pts, w)


def push_forward_projection(measure: DiscreteMeasure, keep: int) -> DiscreteMeasure:
    """Project onto the first ``keep`` coordinates and merge duplicates.

    This is the pushforward under the Cartesian projection; weights are
    preserved (total mass stays one).
    """
    if not 1 <= keep <= measure.dim:
        raise MeasureError(f"keep={keep} out of range for dimension {measure.dim}")
    pts, w = _merge_duplicates(measure.points[:, :keep], measure.weights.copy())
    return DiscreteMeasure(pts, w)


def residual_cost_functional(measure: DiscreteMeasure, split: int, residual,
                             weights: np.ndarray | None = None) -> float:
    """Linear functional sum_j w_j * c2(y_j[split:]) of the trailing coordinates.

    ``residual`` is a cost description evaluated against the origin (see
    :mod:`otlab.costs`).  Passing ``weights`` overrides the measure's own
    weights; signed vectors are allowed, which makes the functional usable
    on differences of measures sharing a support.
    """
    from . import costs  # local import to avoid a cycle

    if not 0 <= split < measure.dim:
        raise MeasureError(f"split={split} must satisfy 0 <= split < dim={measure.dim}")
    w = measure.weights if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (measure.size,):
        raise MeasureError("weights length does not match the support")
    vals = costs.residual_values(residual, measure.points[:, split:])
    return float(w @ vals)


def read_measure(path: str | os.PathLike) -> DiscreteMeasure:
    """Parse a measure file: one point per line, coordinates then weight.

    Blank lines and lines starting with ``#`` are ignored.  All points must
    share one dimension; weights must sum to one.
    """
    pts: list[list[float]] = []
    wts: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) < 2:
                raise MeasureError(
                    f"{path}:{lineno}: need at least one coordinate and a weight"
                )
            try:
                values = [float(tok) for tok in fields]
            except ValueError as exc:
                raise MeasureError(f"{path}:{lineno}: {exc}") from exc
            pts.append(values[:-1])
            wts.append(values[-1])
    if not pts:
        raise MeasureError(f"{path}: no support points")
    width = len(pts[0])
    if any(len(p) != width for p in pts):
        raise MeasureError(f"{path}: inconsistent point dimensions")
    return validate_measure(np.asarray(pts), np.asarray(wts))
