"""Theoretical convergence-rate tables and the explicit Dudley bound.

The rate taxonomy has three classes: parametric n^(-1/2), parametric with a
log factor, and polynomial n^(-e) with e in (0, 1/2).  The class is chosen
by the growth exponent k of the dual function class's uniform metric
entropy, or by the per-family case tables (semi-discrete, Lipschitz,
semi-concave, Hoelder).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PARAM",
    "PARAM_LOG",
    "POLY",
    "TheoryRate",
    "theory_rate_general",
    "theory_rate_family",
    "dudley_rademacher_bound",
]

PARAM = "param"
PARAM_LOG = "param-log"
POLY = "poly"


@dataclass(frozen=True)
class TheoryRate:
    """Asymptotic rate class with the exponent it implies on a log-log plot."""

    rate_class: str
    exponent: float | None = None

    def __post_init__(self) -> None:
        if self.rate_class not in (PARAM, PARAM_LOG, POLY):
            raise ValueError(f"unknown rate class {self.rate_class!r}")
        if self.rate_class == POLY:
            if self.exponent is None or not 0.0 < self.exponent < 0.5:
                raise ValueError("polynomial rate exponent must lie in (0, 1/2)")
        elif self.exponent is not None:
            raise ValueError(f"{self.rate_class} takes no exponent")

    @property
    def asymptotic_slope(self) -> float:
        if self.rate_class == POLY:
            return -self.exponent
        return -0.5

    def label(self) -> str:
        if self.rate_class == PARAM:
            return "n^(-1/2)"
        if self.rate_class == PARAM_LOG:
            return "n^(-1/2) log n"
        return f"n^(-{self.exponent:g})"


def theory_rate_general(k: float) -> TheoryRate:
    """Rate implied by a metric-entropy growth exponent k > 0.

    Parametric for k < 2, parametric-with-log at k = 2, and n^(-1/k) above.
    """
    if not k > 0:
        raise ValueError("entropy exponent k must be positive")
    if k < 2:
        return TheoryRate(PARAM)
    if k == 2:
        return TheoryRate(PARAM_LOG)
    return TheoryRate(POLY, exponent=1.0 / k)


def theory_rate_family(family: str, *, k: float | None = None,
                       d: float | None = None,
                       alpha: float | None = None) -> TheoryRate:
    """Per-family rate tables.

    semidiscrete      -> n^(-1/2) always.
    lipschitz(k)      -> same cases as :func:`theory_rate_general`.
    semiconcave(d)    -> n^(-1/2) for d <= 3, log case at d = 4, n^(-2/d) for d >= 5.
    hoelder(alpha, d) -> n^(-1/2) for d < 2a, log case at d = 2a, n^(-a/d) above
                         (alpha in (0, 2]).
    """
    name = family.strip().lower()
    if name == "semidiscrete":
        return TheoryRate(PARAM)
    if name == "lipschitz":
        if k is None:
            raise ValueError("lipschitz family needs k")
        return theory_rate_general(k)
    if name == "semiconcave":
        if d is None or not d > 0:
            raise ValueError("semiconcave family needs d > 0")
        if d <= 3:
            return TheoryRate(PARAM)
        if d == 4:
            return TheoryRate(PARAM_LOG)
        return TheoryRate(POLY, exponent=2.0 / d)
    if name in ("hoelder", "holder"):
        if alpha is None or not 0 < alpha <= 2:
            raise ValueError("hoelder family needs alpha in (0, 2]")
        if d is None or not d > 0:
            raise ValueError("hoelder family needs d > 0")
        if d < 2 * alpha:
            return TheoryRate(PARAM)
        if d == 2 * alpha:
            return TheoryRate(PARAM_LOG)
        return TheoryRate(POLY, exponent=alpha / d)
    raise ValueError(f"unknown rate family {family!r}")


def dudley_rademacher_bound(k: float, K: float, eps0: float, n: int) -> float:
    """Numeric entropy-integral bound on the empirical process complexity.

    Evaluates the three-case closed form obtained from
    inf_delta (2 delta + sqrt(32) n^(-1/2) * integral_{delta/4}^1
    min(eps, eps0)^(-k/2) deps) under the entropy bound K * eps^(-k), with
    delta = 0, 4 n^(-1/2), or 4 n^(-1/k) for k < 2, k = 2, k > 2.  For the
    latter two cases n must be large enough that delta <= eps0; smaller n
    raises rather than extrapolating.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    if not K > 0:
        raise ValueError("K must be positive")
    if not 0 < eps0 <= 1:
        raise ValueError("eps0 must lie in (0, 1]")
    if n < 1:
        raise ValueError("n must be a positive integer")
    kt = math.sqrt(32.0 * K)
    rn = 1.0 / math.sqrt(n)
    if k < 2:
        head = eps0 ** (1.0 - k / 2.0) / (1.0 - k / 2.0)
        return kt * (head + (1.0 - eps0) * eps0 ** (-k / 2.0)) * rn
    if k == 2:
        if 4.0 * rn > eps0:
            raise ValueError(
                f"n={n} is below the validity threshold (4 n^(-1/2) must be <= eps0)"
            )
        return (8.0 + kt * math.log(eps0) + kt * (1.0 - eps0) / eps0) * rn \
            + 0.5 * kt * rn * math.log(n)
    delta4 = n ** (-1.0 / k)
    if 4.0 * delta4 > eps0:
        raise ValueError(
            f"n={n} is below the validity threshold (4 n^(-1/k) must be <= eps0)"
        )
    head = eps0 ** (1.0 - k / 2.0) / (1.0 - k / 2.0)
    return kt * (head + (1.0 - eps0) * eps0 ** (-k / 2.0)) * rn \
        + (8.0 + kt / (k / 2.0 - 1.0)) * delta4
