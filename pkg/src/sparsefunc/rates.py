"""The rate calculus: effective sparsity, psi rate functions and zone logic.

All logarithms are natural.  Branch tests against sqrt(d) are done in exact
integer arithmetic (s*s vs d) so perfect squares are never misclassified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UnsupportedRegime
from .model import ClassTag, SparsityClass


class Zone(str, Enum):
    DENSE = "dense"
    SPARSE = "sparse"
    DEGENERATE = "degenerate"
    VARIANCE_DOMINATED = "variance_dominated"
    ZERO_ESTIMATOR = "zero_estimator"


class Functional(str, Enum):
    LINEAR = "L"
    QUADRATIC = "Q"
    L2_NORM = "sqrtQ"


@dataclass(frozen=True)
class RateValue:
    """A minimax-rate evaluation: the value plus the regime it came from.

    ``alt_value`` carries the equivalent form the rate theory provides in some
    regimes (the min-form for the linear rate, sigma^2 d in the dense zone of
    the l_q linear rate); it agrees with ``value`` up to absolute constants.
    """

    value: float
    zone: Zone
    functional: Functional
    alt_value: float | None = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("rate value must be nonnegative")


def _log_term(d: int, s: int) -> float:
    return math.log1p(d / (s * s))


def effective_sparsity(r: float, sigma: float, q: float, d: int) -> int:
    """Largest integer s in [1, d] with sigma^2 log(1+d/s^2) <= r^2 s^(-2/q), else 0.

    The scan is exhaustive over [1, d] (desk-scale d); the defining set is not
    an interval in general, so no bisection is attempted.  The value is capped
    at d: downstream formulas only distinguish m=0, m <= sqrt(d), m > sqrt(d).
    """
    if r <= 0 or sigma <= 0 or d < 1:
        raise ValueError("r, sigma must be positive and d >= 1")
    if not 0 < q <= 2:
        raise ValueError("q must lie in (0, 2]")
    s = np.arange(1, d + 1, dtype=float)
    lhs = sigma**2 * np.log1p(d / np.square(s))
    rhs = r**2 * s ** (-2.0 / q)
    ok = np.flatnonzero(lhs <= rhs)
    return int(ok[-1] + 1) if ok.size else 0


def rate_linear_b0(s: int, d: int, sigma: float) -> RateValue:
    """sigma^2 s^2 log(1+d/s^2); sparse zone for s < sqrt(d), dense otherwise.

    ``alt_value`` is the equivalent min-form min(value, sigma^2 d).
    """
    _check_sd(s, d, sigma)
    value = sigma**2 * s**2 * _log_term(d, s)
    zone = Zone.SPARSE if s * s < d else Zone.DENSE
    return RateValue(value, zone, Functional.LINEAR, alt_value=min(value, sigma**2 * d))


def rate_linear_bq(r: float, sigma: float, q: float, d: int) -> RateValue:
    """Linear-functional rate on an l_q ball, q in (0, 1], keyed on m."""
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    m = effective_sparsity(r, sigma, q, d)
    if m == 0:
        return RateValue(r**2, Zone.DEGENERATE, Functional.LINEAR)
    value = sigma**2 * m**2 * _log_term(d, m)
    if m * m <= d:
        return RateValue(value, Zone.SPARSE, Functional.LINEAR)
    return RateValue(value, Zone.DENSE, Functional.LINEAR, alt_value=sigma**2 * d)


def quadratic_variance_floor(s: int, d: int, sigma: float) -> float:
    """sigma^4 s^2 log^2(1+d/s^2) for s < sqrt(d), else sigma^4 d."""
    _check_sd(s, d, sigma)
    if s * s < d:
        return sigma**4 * s**2 * _log_term(d, s) ** 2
    return sigma**4 * d


def rate_quadratic(s: int, d: int, sigma: float, kappa: float) -> RateValue:
    """min(kappa^4, max(sigma^2 kappa^2, variance floor)) with four regimes.

    Zone is zero_estimator when the kappa^4 cap is strictly active (the zero
    estimator is rate optimal there), variance_dominated when sigma^2 kappa^2
    dominates the floor, else sparse/dense per the s vs sqrt(d) split.
    """
    _check_sd(s, d, sigma)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    floor = quadratic_variance_floor(s, d, sigma)
    psi = max(sigma**2 * kappa**2, floor)
    value = min(kappa**4, psi)
    if kappa**4 < psi:
        zone = Zone.ZERO_ESTIMATOR
    elif sigma**2 * kappa**2 >= floor:
        zone = Zone.VARIANCE_DOMINATED
    else:
        zone = Zone.SPARSE if s * s < d else Zone.DENSE
    return RateValue(value, zone, Functional.QUADRATIC)


def rate_quadratic_bq(r: float, sigma: float, q: float, d: int) -> RateValue:
    """Quadratic-functional rate on an l_q ball, q in (0, 2), keyed on m."""
    if not 0 < q < 2:
        raise ValueError("q must lie in (0, 2)")
    m = effective_sparsity(r, sigma, q, d)
    if m == 0:
        return RateValue(r**4, Zone.DEGENERATE, Functional.QUADRATIC)
    if m * m > d:
        return RateValue(max(sigma**2 * r**2, sigma**4 * d), Zone.DENSE, Functional.QUADRATIC)
    value = max(sigma**2 * r**2, sigma**4 * m**2 * _log_term(d, m) ** 2)
    return RateValue(value, Zone.SPARSE, Functional.QUADRATIC)


def rate_l2norm(s: int, d: int, sigma: float) -> RateValue:
    """sigma^2 s log(1+d/s^2) for s < sqrt(d), sigma^2 sqrt(d) otherwise."""
    _check_sd(s, d, sigma)
    if s * s < d:
        return RateValue(sigma**2 * s * _log_term(d, s), Zone.SPARSE, Functional.L2_NORM)
    return RateValue(sigma**2 * math.sqrt(d), Zone.DENSE, Functional.L2_NORM)


def rate_l2norm_bq(r: float, sigma: float, q: float, d: int) -> RateValue:
    """l2-norm rate on an l_q ball, q in (0, 2), keyed on m."""
    if not 0 < q < 2:
        raise ValueError("q must lie in (0, 2)")
    m = effective_sparsity(r, sigma, q, d)
    if m == 0:
        return RateValue(r**2, Zone.DEGENERATE, Functional.L2_NORM)
    if m * m > d:
        return RateValue(sigma**2 * math.sqrt(d), Zone.DENSE, Functional.L2_NORM)
    return RateValue(sigma**2 * m * _log_term(d, m), Zone.SPARSE, Functional.L2_NORM)


def testing_rate(cls: SparsityClass, sigma: float, d: int) -> RateValue:
    """Separation scale lambda for testing zero against the alternative.

    For the l2-separated alternatives the value is the square root of the
    corresponding l2-norm estimation rate.  For the amplitude-parameterized
    alternatives the value is the per-coordinate amplitude scale; it is only
    defined on Theta_s for s <= sqrt(d).
    """
    if sigma <= 0 or d < 1:
        raise ValueError("need sigma > 0 and d >= 1")
    tag = cls.tag
    if tag == ClassTag.THETA_QU:
        if cls.q == 0:
            base = rate_l2norm(int(cls.r), d, sigma)
        else:
            base = rate_l2norm_bq(cls.r, sigma, cls.q, d)
        return RateValue(math.sqrt(base.value), base.zone, Functional.L2_NORM)
    if tag == ClassTag.THETA_S:
        s = cls.s
        if s * s > d:
            raise UnsupportedRegime("no testing rate on Theta_s for s > sqrt(d)")
        return RateValue(sigma * math.sqrt(_log_term(d, s)), Zone.SPARSE, Functional.L2_NORM)
    if tag == ClassTag.THETA_S_STAR:
        s = cls.s
        if s * s < d:
            return RateValue(sigma * math.sqrt(_log_term(d, s)), Zone.SPARSE, Functional.L2_NORM)
        return RateValue(sigma * d**0.25 / math.sqrt(s), Zone.DENSE, Functional.L2_NORM)
    raise UnsupportedRegime(f"no testing rate for class tag {tag.value}")


def _check_sd(s: int, d: int, sigma: float):
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
