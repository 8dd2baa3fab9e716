"""Standard-normal tail primitives used by the thresholding estimators.

Everything here is a closed form built on the complementary error function:
two-sided tail probabilities, truncated second/fourth moments, the
conditional-second-moment constants that debias thresholded squares, and the
bias of a hard-thresholded Gaussian mean.  Adaptive quadrature is used only
in the test suite as an independent oracle.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Beyond this point ratios are evaluated in log domain: erfc flushes to zero
# (rather than going subnormal) once the two-sided tail drops below the
# smallest normal double, near x = 37.7.
_LOG_DOMAIN_CUTOFF = 36.0


def _phi(x):
    """Standard normal density."""
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


def tail_prob(x):
    """P(|X| > x) for standard normal X, via erfc.

    Accepts scalars or arrays; x must be >= 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("threshold must be finite and nonnegative")
    out = special.erfc(x / math.sqrt(2.0))
    # erfc flushes to zero below the smallest normal double; recover the
    # subnormal range through the log form.
    flushed = out == 0.0
    if np.any(flushed):
        out = np.where(flushed, np.exp(log_tail_prob(x)), out)
    return float(out) if out.ndim == 0 else out


def log_tail_prob(x):
    """log P(|X| > x), stable for arbitrarily large x."""
    x = np.asarray(x, dtype=float)
    out = math.log(2.0) + special.log_ndtr(-x)
    return float(out) if np.ndim(out) == 0 else out


def tail_prob_sandwich(x):
    """Two-sided closed-form envelope (lower, upper) for P(|X| > x), x > 0.

    lower = 4 / (sqrt(2*pi) (x + sqrt(x^2+4))) * exp(-x^2/2)
    upper = 4 / (sqrt(2*pi) (x + sqrt(x^2+2))) * exp(-x^2/2)
    """
    x = np.asarray(x, dtype=float)
    e = np.exp(-0.5 * np.square(x))
    lower = 4.0 / (SQRT_2PI * (x + np.sqrt(np.square(x) + 4.0))) * e
    upper = 4.0 / (SQRT_2PI * (x + np.sqrt(np.square(x) + 2.0))) * e
    return lower, upper


def log_tail_prob_sandwich(x):
    """Log-domain version of :func:`tail_prob_sandwich` for large x."""
    x = np.asarray(x, dtype=float)
    base = math.log(4.0) - math.log(SQRT_2PI) - 0.5 * np.square(x)
    lower = base - np.log(x + np.sqrt(np.square(x) + 4.0))
    upper = base - np.log(x + np.sqrt(np.square(x) + 2.0))
    return lower, upper


def truncated_second_moment(x):
    """E[X^2 1{|X| > x}] = 2 x phi(x) + P(|X| > x)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("threshold must be nonnegative")
    out = 2.0 * x * _phi(x) + special.erfc(x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def truncated_fourth_moment(x):
    """E[X^4 1{|X| > x}] = 2 (x^3 + 3x) phi(x) + 3 P(|X| > x)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("threshold must be nonnegative")
    out = 2.0 * (x**3 + 3.0 * x) * _phi(x) + 3.0 * special.erfc(x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def truncated_fourth_moment_bound(x):
    """Closed-form upper bound sqrt(2/pi) (x^3 + 3x + 3/x) exp(-x^2/2).

    Follows from the Mills inequality Phi_bar(x) <= phi(x)/x applied to the
    integration-by-parts identity behind :func:`truncated_fourth_moment`;
    holds for every x > 0.
    """
    x = np.asarray(x, dtype=float)
    return math.sqrt(2.0 / math.pi) * (x**3 + 3.0 * x + 3.0 / x) * np.exp(-0.5 * np.square(x))


def truncated_second_moment_bound(x):
    """Closed-form upper bound sqrt(2/pi) (x + 2/x) exp(-x^2/2), x > 0."""
    x = np.asarray(x, dtype=float)
    return math.sqrt(2.0 / math.pi) * (x + 2.0 / x) * np.exp(-0.5 * np.square(x))


def _mills_hazard(x):
    """x * phi(x) / Phi_bar(x), switching to log domain where Phi_bar underflows."""
    x = np.asarray(x, dtype=float)
    small = x <= _LOG_DOMAIN_CUTOFF
    out = np.empty_like(x)
    if np.any(small):
        xs = x[small]
        out[small] = xs * _phi(xs) / (0.5 * special.erfc(xs / math.sqrt(2.0)))
    if np.any(~small):
        xl = x[~small]
        log_phi = -0.5 * np.square(xl) - math.log(SQRT_2PI)
        out[~small] = xl * np.exp(log_phi - special.log_ndtr(-xl))
    return out


def alpha_constant(x):
    """E(X^2 | |X| > x) = 1 + x phi(x) / Phi_bar(x).

    This is the debiasing constant for thresholded squared observations: with
    alpha = alpha_constant(x), E[(X^2 - alpha) 1{|X| > x}] = 0.  The same
    formula serves both threshold scales used by the estimators (the plain
    level sqrt(2 log(1+d/s^2)) and the doubled level 2 sqrt(2 log(1+d/m^2))).
    Monotone nondecreasing in x; equals 1 at x = 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("threshold must be finite and nonnegative")
    out = 1.0 + _mills_hazard(x)
    return float(out) if out.ndim == 0 else out


def threshold_level(d: int, s: int) -> float:
    """sqrt(2 log(1 + d/s^2)), the threshold (in sigma units) for sparsity s."""
    if not 1 <= s:
        raise ValueError("s must be >= 1")
    return math.sqrt(2.0 * math.log1p(d / (s * s)))


def alpha_for_sparsity(d: int, s: int) -> float:
    """Debiasing constant at the plain threshold level for (d, s)."""
    return alpha_constant(threshold_level(d, s))


def alpha_for_effective_sparsity(d: int, m: int) -> float:
    """Debiasing constant at the doubled threshold level for (d, m)."""
    return alpha_constant(2.0 * threshold_level(d, m))


def bias_of_thresholded_mean(a: float, sigma: float, tau: float) -> float:
    """Bias B(a) = E[y 1{|y| > sigma*tau}] - a for y ~ N(a, sigma^2).

    Equals -E[y 1{|y| <= sigma*tau}]; closed form from the normal CDF and
    density.  Satisfies |B(a)| <= min(4|a|, sigma*tau).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    lo = -tau - a / sigma
    hi = tau - a / sigma
    mass = special.ndtr(hi) - special.ndtr(lo)
    return -(a * mass + sigma * (_phi(lo) - _phi(hi)))


def bias_of_thresholded_square(a: float, sigma: float, x: float) -> float:
    """E[(y^2 - alpha sigma^2) 1{|y| > sigma*x}] for y ~ N(a, sigma^2).

    alpha = alpha_constant(x), so the value vanishes at a = 0; for
    |a| <= sigma*x/2 it stays within a constant multiple of a^2, which is what
    keeps the off-peak squared-bias terms of the debiased quadratic
    estimators quadratic in the signal.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    alpha = alpha_constant(x)
    hi = x - a / sigma  # lower edge of the upper tail, in Z units
    lo = -x - a / sigma  # upper edge of the lower tail
    upper_mass = special.ndtr(-hi)
    lower_mass = special.ndtr(lo)
    mass = upper_mass + lower_mass
    second_moment = hi * _phi(hi) + upper_mass + (-lo * _phi(lo) + lower_mass)
    cross = _phi(hi) - _phi(lo)
    return (
        (a**2 - alpha * sigma**2) * mass
        + 2.0 * a * sigma * cross
        + sigma**2 * second_moment
    )
