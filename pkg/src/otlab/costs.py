"""Ground cost functions and dense cost matrices.

Costs are declarative: a :class:`CostSpec` names one of the supported
families (coordinatewise l1, squared l2, p-th powers, or an additive split
into an inner block plus a residual on the trailing coordinates) and the
evaluation routines below turn it into numbers.  Normalizing a cost matrix
maps its entries affinely onto [0, 1] while recording scale and offset, so
original costs are always recoverable as ``scale * value + offset``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "CostError",
    "CostSpec",
    "l1",
    "sql2",
    "pow_euclidean",
    "pow_coordinatewise",
    "additive",
    "eval_cost",
    "pairwise_cost",
    "residual_values",
    "CostMatrix",
    "cost_matrix",
    "parse_cost",
    "cost_string",
]

L1 = "l1"
SQL2 = "sql2"
POW_EUCLID = "pow-euclid"
POW_COORD = "pow-coord"
ADDITIVE = "additive"

# Kinds that decompose across coordinate blocks, hence are legal inside an
# additive split.  ||x-y||^p does not decompose unless p = 2.
_SEPARABLE = (L1, SQL2, POW_COORD)


class CostError(ValueError):
    """Raised for malformed cost specifications or evaluation mismatches."""


@dataclass(frozen=True)
class CostSpec:
    kind: str
    p: float | None = None
    split: int | None = None
    inner: "CostSpec | None" = None
    residual: "CostSpec | None" = None

    def __post_init__(self) -> None:
        if self.kind in (L1, SQL2):
            if self.p is not None or self.inner is not None:
                raise CostError(f"{self.kind} takes no parameters")
        elif self.kind == POW_EUCLID:
            if self.p is None or not self.p >= 1:
                raise CostError("pow-euclid requires p >= 1")
        elif self.kind == POW_COORD:
            if self.p is None or not self.p > 0:
                raise CostError("pow-coord requires p > 0")
        elif self.kind == ADDITIVE:
            if self.split is None or self.split < 0 or int(self.split) != self.split:
                raise CostError("additive requires an integer split >= 0")
            for part in (self.inner, self.residual):
                if part is None or not _is_separable(part):
                    raise CostError(
                        "additive inner/residual must be coordinatewise-separable "
                        "non-additive kinds (l1, sql2, pow-coord, or pow-euclid with p=2)"
                    )
        else:
            raise CostError(f"unknown cost kind {self.kind!r}")


def _is_separable(spec: CostSpec) -> bool:
    if spec.kind in _SEPARABLE:
        return True
    return spec.kind == POW_EUCLID and spec.p == 2


def l1() -> CostSpec:
    return CostSpec(L1)


def sql2() -> CostSpec:
    return CostSpec(SQL2)


def pow_euclidean(p: float) -> CostSpec:
    return CostSpec(POW_EUCLID, p=float(p))


def pow_coordinatewise(p: float) -> CostSpec:
    return CostSpec(POW_COORD, p=float(p))


def additive(split: int, inner: CostSpec, residual: CostSpec) -> CostSpec:
    return CostSpec(ADDITIVE, split=int(split), inner=inner, residual=residual)


def _as_points(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise CostError(f"{name} must be an (n, d) array")
    return arr


def pairwise_cost(spec: CostSpec, X, Y) -> np.ndarray:
    """Dense ``(m, n)`` matrix of costs between two supports."""
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    if spec.kind == ADDITIVE:
        s = spec.split
        if X.shape[1] != s:
            raise CostError(f"additive split={s} but source dimension is {X.shape[1]}")
        if Y.shape[1] < s:
            raise CostError(f"additive split={s} exceeds target dimension {Y.shape[1]}")
        inner = pairwise_cost(spec.inner, X, Y[:, :s])
        return inner + residual_values(spec.residual, Y[:, s:])[None, :]
    if X.shape[1] != Y.shape[1]:
        raise CostError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.kind == L1:
        return cdist(X, Y, metric="cityblock")
    if spec.kind == SQL2:
        return cdist(X, Y, metric="sqeuclidean")
    if spec.kind == POW_EUCLID:
        return cdist(X, Y, metric="euclidean") ** spec.p
    if spec.kind == POW_COORD:
        if spec.p == 1:
            return cdist(X, Y, metric="cityblock")
        return (np.abs(X[:, None, :] - Y[None, :, :]) ** spec.p).sum(axis=2)
    raise CostError(f"unknown cost kind {spec.kind!r}")


def eval_cost(spec: CostSpec, x, y) -> float:
    """Cost of moving a unit of mass from point ``x`` to point ``y``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    return float(pairwise_cost(spec, x[None, :], y[None, :])[0, 0])


def residual_values(spec: CostSpec, Z) -> np.ndarray:
    """Per-point cost against the origin, ``c(0, z)`` for each row ``z``.

    An empty coordinate block contributes zero.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.shape[1] == 0:
        return np.zeros(Z.shape[0])
    if spec.kind == L1:
        return np.abs(Z).sum(axis=1)
    if spec.kind == SQL2:
        return (Z * Z).sum(axis=1)
    if spec.kind == POW_EUCLID:
        return np.sqrt((Z * Z).sum(axis=1)) ** spec.p
    if spec.kind == POW_COORD:
        return (np.abs(Z) ** spec.p).sum(axis=1)
    raise CostError(f"cost kind {spec.kind!r} has no residual form")


@dataclass(frozen=True)
class CostMatrix:
    """Dense nonnegative cost values plus the affine map back to original units.

    ``original = scale * values + offset``.  A normalized matrix has values
    in [0, 1]; an unnormalized one has ``scale=1, offset=0``.
    """

    values: np.ndarray
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise CostError("cost matrix must be 2-D and nonempty")
        if not np.isfinite(v).all():
            raise CostError("non-finite cost encountered")
        if v.min() < 0:
            raise CostError("cost matrix values must be nonnegative")
        if not (self.scale > 0):
            raise CostError("scale must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def original(self) -> np.ndarray:
        """Entries in original cost units."""
        return self.scale * self.values + self.offset

    def is_unit_range(self, tol: float = 1e-12) -> bool:
        v = self.values
        return bool(v.min() >= -tol and v.max() <= 1.0 + tol)


def cost_matrix(spec: CostSpec, support_x, support_y, normalize: bool = False) -> CostMatrix:
    """Evaluate ``spec`` on the product of two supports.

    With ``normalize=True`` the entries are mapped affinely onto [0, 1],
    recording ``scale = max - min`` (1 when the matrix is constant) and
    ``offset = min`` so that ``scale * value + offset`` reproduces the raw
    cost.
    """
    raw = pairwise_cost(spec, support_x, support_y)
    if not np.isfinite(raw).all():
        raise CostError("non-finite cost encountered")
    if not normalize:
        return CostMatrix(raw)
    lo = float(raw.min())
    hi = float(raw.max())
    span = hi - lo
    if span == 0.0:
        return CostMatrix(np.zeros_like(raw), scale=1.0, offset=lo)
    return CostMatrix((raw - lo) / span, scale=span, offset=lo)


def parse_cost(text: str) -> CostSpec:
    """Parse the string encoding of a cost.

    Grammar: ``l1``, ``sql2``, ``pow-euclid:p``, ``pow-coord:p``, and
    ``additive:s:inner:residual`` where inner/residual are themselves
    non-additive encodings.
    """
    tokens = text.strip().lower().split(":")
    spec, rest = _parse_tokens(tokens)
    if rest:
        raise CostError(f"trailing tokens {rest!r} in cost string {text!r}")
    return spec


def _parse_tokens(tokens: list[str]) -> tuple[CostSpec, list[str]]:
    if not tokens:
        raise CostError("empty cost string")
    head, rest = tokens[0], tokens[1:]
    if head == L1:
        return l1(), rest
    if head == SQL2:
        return sql2(), rest
    if head in (POW_EUCLID, POW_COORD):
        if not rest:
            raise CostError(f"{head} needs a parameter, e.g. {head}:2")
        try:
            p = float(rest[0])
        except ValueError as exc:
            raise CostError(f"bad exponent {rest[0]!r}") from exc
        spec = pow_euclidean(p) if head == POW_EUCLID else pow_coordinatewise(p)
        return spec, rest[1:]
    if head == ADDITIVE:
        if not rest:
            raise CostError("additive needs a split, e.g. additive:1:sql2:sql2")
        try:
            split = int(rest[0])
        except ValueError as exc:
            raise CostError(f"bad split {rest[0]!r}") from exc
        inner, rest2 = _parse_tokens(rest[1:])
        residual, rest3 = _parse_tokens(rest2)
        return additive(split, inner, residual), rest3
    raise CostError(f"unknown cost kind {head!r}")


def cost_string(spec: CostSpec) -> str:
    """Inverse of :func:`parse_cost`."""
    if spec.kind in (L1, SQL2):
        return spec.kind
    if spec.kind in (POW_EUCLID, POW_COORD):
        return f"{spec.kind}:{spec.p:g}"
    return (
        f"{ADDITIVE}:{spec.split}:{cost_string(spec.inner)}:{cost_string(spec.residual)}"
    )
