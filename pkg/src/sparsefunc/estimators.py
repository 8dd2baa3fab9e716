"""Estimators of the linear functional, the quadratic functional and the l2 norm.

Each estimator is a deterministic map from one observation batch to a real
number.  Indicator conditions use strict inequality at the threshold, branch
tests against sqrt(d) are exact integer comparisons (s*s vs d), and the
debiasing constants are computed at call time from :mod:`sparsefunc.gaussian`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import gaussian
from .errors import DimensionTooSmall, UnsupportedRegime
from .model import ClassTag, ObservationBatch, SparsityClass
from .rates import Functional, effective_sparsity, quadratic_variance_floor


def _threshold_sum(y: np.ndarray, level: float) -> float:
    """Sum of entries strictly above the threshold in absolute value."""
    return float(y[np.abs(y) > level].sum())


def _threshold_square_sum(y: np.ndarray, level: float, correction: float) -> float:
    """Sum of (y_j^2 - correction) over entries with |y_j| strictly above level."""
    kept = y[np.abs(y) > level]
    return float(np.sum(kept**2) - kept.size * correction)


# ---------------------------------------------------------------------------
# Known noise level
# ---------------------------------------------------------------------------


def estimate_linear_b0(obs: ObservationBatch, s: int) -> float:
    """Thresholded sum for s < sqrt(d), plain sum for s >= sqrt(d)."""
    d = obs.d
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    if s * s < d:
        level = obs.sigma * gaussian.threshold_level(d, s)
        return _threshold_sum(obs.y, level)
    return float(obs.y.sum())


def estimate_linear_bq(obs: ObservationBatch, r: float, q: float) -> float:
    """Linear estimator on an l_q ball, q in (0, 1], keyed on the effective sparsity.

    The threshold carries an extra factor 2 relative to the l0 estimator.
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    d = obs.d
    m = effective_sparsity(r, obs.sigma, q, d)
    if m == 0:
        return 0.0
    if m * m > d:
        return float(obs.y.sum())
    level = 2.0 * obs.sigma * gaussian.threshold_level(d, m)
    return _threshold_sum(obs.y, level)


def estimate_quadratic_b0(obs: ObservationBatch, s: int, kappa: float) -> float:
    """Debiased quadratic estimator on the l2-capped sparse class.

    Returns 0 when kappa^4 < max(sigma^2 kappa^2, variance floor): there the
    zero estimator already attains the rate.  Otherwise a thresholded
    bias-corrected sum (s < sqrt(d)) or the full debiased sum (s >= sqrt(d)).
    """
    d = obs.d
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    sigma = obs.sigma
    psi = max(sigma**2 * kappa**2, quadratic_variance_floor(s, d, sigma))
    if kappa**4 < psi:
        return 0.0
    if s * s < d:
        x = gaussian.threshold_level(d, s)
        alpha = gaussian.alpha_constant(x)
        return _threshold_square_sum(obs.y, sigma * x, alpha * sigma**2)
    return float(np.sum(obs.y**2) - d * sigma**2)


def estimate_quadratic_positive_part(obs: ObservationBatch, s: int, kappa: float) -> float:
    """max(0, quadratic estimate); same risk bound, never negative."""
    return max(0.0, estimate_quadratic_b0(obs, s, kappa))


def estimate_quadratic_bq(obs: ObservationBatch, r: float, q: float) -> float:
    """Debiased quadratic estimator on an l_q ball, q in (0, 2)."""
    if not 0 < q < 2:
        raise ValueError("q must lie in (0, 2)")
    d = obs.d
    sigma = obs.sigma
    m = effective_sparsity(r, sigma, q, d)
    if m == 0:
        return 0.0
    if m * m > d:
        return float(np.sum(obs.y**2) - d * sigma**2)
    x = 2.0 * gaussian.threshold_level(d, m)
    alpha = gaussian.alpha_constant(x)
    return _threshold_square_sum(obs.y, sigma * x, alpha * sigma**2)


def _quadratic_ungated(obs: ObservationBatch, s: int) -> float:
    """The two non-zero quadratic branches with no kappa gate."""
    d = obs.d
    sigma = obs.sigma
    if s * s < d:
        x = gaussian.threshold_level(d, s)
        alpha = gaussian.alpha_constant(x)
        return _threshold_square_sum(obs.y, sigma * x, alpha * sigma**2)
    return float(np.sum(obs.y**2) - d * sigma**2)


def estimate_l2norm_b0(obs: ObservationBatch, s: int) -> float:
    """sqrt of the positive part of the ungated quadratic estimate."""
    if not 1 <= s <= obs.d:
        raise ValueError("need 1 <= s <= d")
    return math.sqrt(max(0.0, _quadratic_ungated(obs, s)))


def estimate_l2norm_bq(obs: ObservationBatch, r: float, q: float) -> float:
    """sqrt of the positive part of the l_q quadratic estimate."""
    return math.sqrt(max(0.0, estimate_quadratic_bq(obs, r, q)))


# ---------------------------------------------------------------------------
# Unknown noise level
# ---------------------------------------------------------------------------


def trimmed_count(d: int) -> int:
    """floor(d - sqrt(d)), computed in exact integer arithmetic."""
    root = math.isqrt(d)
    if root * root < d:
        root += 1
    return d - root


def estimate_sigma_hat(y) -> float:
    """Noise-level over-estimator: 3 * sqrt(mean over d of the floor(d - sqrt(d))
    smallest squared observations.

    Deliberately biased upward so that plug-in thresholds are conservative.
    Requires d >= 3.
    """
    y = y.y if isinstance(y, ObservationBatch) else np.asarray(y, dtype=float)
    d = y.size
    if d < 3:
        raise DimensionTooSmall("noise estimation needs d >= 3")
    squares = np.sort(y**2)
    k = trimmed_count(d)
    return 3.0 * math.sqrt(float(squares[:k].sum()) / d)


def estimate_linear_unknown_sigma(y, s: int) -> float:
    """Plug-in thresholded sum with the estimated noise level; needs s <= sqrt(d)."""
    y = y.y if isinstance(y, ObservationBatch) else np.asarray(y, dtype=float)
    d = y.size
    if s * s > d:
        raise UnsupportedRegime("plug-in linear estimator is only defined for s <= sqrt(d)")
    if not 1 <= s:
        raise ValueError("s must be >= 1")
    sigma_hat = estimate_sigma_hat(y)
    level = sigma_hat * gaussian.threshold_level(d, s)
    return _threshold_sum(y, level)


def estimate_linear_adaptive(y) -> float:
    """Fully data-driven thresholded sum: level sigma_hat * sqrt(2 log d)."""
    y = y.y if isinstance(y, ObservationBatch) else np.asarray(y, dtype=float)
    d = y.size
    sigma_hat = estimate_sigma_hat(y)
    return _threshold_sum(y, sigma_hat * math.sqrt(2.0 * math.log(d)))


def estimate_quadratic_unknown_sigma(y) -> float:
    """Data-driven quadratic estimator: sum of y_j^2 above the adaptive threshold.

    No debiasing term; nonnegative by construction.
    """
    y = y.y if isinstance(y, ObservationBatch) else np.asarray(y, dtype=float)
    d = y.size
    sigma_hat = estimate_sigma_hat(y)
    level = sigma_hat * math.sqrt(2.0 * math.log(d))
    return float(np.sum(y[np.abs(y) > level] ** 2))


# ---------------------------------------------------------------------------
# Uniform dispatch (used by the harness and the CLI)
# ---------------------------------------------------------------------------


class NoiseModel(str, Enum):
    KNOWN = "known"
    UNKNOWN = "unknown"


class Variant(str, Enum):
    EXACT_RATE = "exact_rate"
    ADAPTIVE_LOGD = "adaptive_logd"


class EstimateDetail(NamedTuple):
    value: float
    branch: str
    threshold: float | None


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run: functional, parameter class, noise model, variant."""

    functional: Functional
    class_params: SparsityClass
    noise: NoiseModel = NoiseModel.KNOWN
    variant: Variant = Variant.EXACT_RATE

    def __post_init__(self):
        tag = self.class_params.tag
        f = self.functional
        if f == Functional.QUADRATIC and tag == ClassTag.B0:
            raise ValueError("the quadratic functional needs an l2 cap: use B2_cap_B0")
        if f == Functional.QUADRATIC and tag == ClassTag.BQ and not self.class_params.q < 2:
            raise ValueError("quadratic estimation on l_q balls needs q < 2")
        if f == Functional.LINEAR and tag == ClassTag.BQ and self.class_params.q > 1:
            raise ValueError("linear estimation on l_q balls needs q <= 1")
        if tag in (ClassTag.THETA_QU, ClassTag.THETA_S, ClassTag.THETA_S_STAR):
            raise ValueError("testing alternatives are not estimation classes")
        if self.noise == NoiseModel.UNKNOWN and tag == ClassTag.BQ:
            raise ValueError("the data-driven rules are defined on the sparse classes, not l_q balls")


def apply_estimator(spec: EstimatorSpec, obs: ObservationBatch) -> EstimateDetail:
    """Run the estimator selected by ``spec`` and report the active branch."""
    cls = spec.class_params
    d = obs.d
    sigma = obs.sigma
    f = spec.functional

    if spec.noise == NoiseModel.UNKNOWN:
        sigma_hat = estimate_sigma_hat(obs.y)
        if f == Functional.LINEAR:
            if spec.variant == Variant.ADAPTIVE_LOGD:
                level = sigma_hat * math.sqrt(2.0 * math.log(d))
                return EstimateDetail(_threshold_sum(obs.y, level), "plugin_adaptive", level)
            s = cls.s
            value = estimate_linear_unknown_sigma(obs.y, s)
            level = sigma_hat * gaussian.threshold_level(d, s)
            return EstimateDetail(value, "plugin_thresholded", level)
        if f == Functional.QUADRATIC:
            level = sigma_hat * math.sqrt(2.0 * math.log(d))
            return EstimateDetail(estimate_quadratic_unknown_sigma(obs.y), "plugin_squares", level)
        raise ValueError("no unknown-noise estimator for this functional")

    if f == Functional.LINEAR:
        if cls.tag == ClassTag.B0:
            s = cls.s
            if s * s < d:
                level = sigma * gaussian.threshold_level(d, s)
                return EstimateDetail(estimate_linear_b0(obs, s), "thresholded_sum", level)
            return EstimateDetail(estimate_linear_b0(obs, s), "full_sum", None)
        m = effective_sparsity(cls.r, sigma, cls.q, d)
        value = estimate_linear_bq(obs, cls.r, cls.q)
        if m == 0:
            return EstimateDetail(value, "zero", None)
        if m * m > d:
            return EstimateDetail(value, "full_sum", None)
        return EstimateDetail(value, "thresholded_sum", 2.0 * sigma * gaussian.threshold_level(d, m))

    if f == Functional.QUADRATIC:
        if cls.tag == ClassTag.B2_CAP_B0:
            s, kappa = cls.s, cls.kappa
            psi = max(sigma**2 * kappa**2, quadratic_variance_floor(s, d, sigma))
            value = estimate_quadratic_b0(obs, s, kappa)
            if kappa**4 < psi:
                return EstimateDetail(value, "zero_gate", None)
            if s * s < d:
                return EstimateDetail(value, "thresholded_debiased", sigma * gaussian.threshold_level(d, s))
            return EstimateDetail(value, "full_debiased", None)
        m = effective_sparsity(cls.r, sigma, cls.q, d)
        value = estimate_quadratic_bq(obs, cls.r, cls.q)
        if m == 0:
            return EstimateDetail(value, "zero", None)
        if m * m > d:
            return EstimateDetail(value, "full_debiased", None)
        return EstimateDetail(value, "thresholded_debiased", 2.0 * sigma * gaussian.threshold_level(d, m))

    if f == Functional.L2_NORM:
        if cls.tag in (ClassTag.B0, ClassTag.B2_CAP_B0):
            s = cls.s
            value = estimate_l2norm_b0(obs, s)
            if s * s < d:
                return EstimateDetail(value, "thresholded_debiased", sigma * gaussian.threshold_level(d, s))
            return EstimateDetail(value, "full_debiased", None)
        m = effective_sparsity(cls.r, sigma, cls.q, d)
        value = estimate_l2norm_bq(obs, cls.r, cls.q)
        if m == 0:
            return EstimateDetail(value, "zero", None)
        if m * m > d:
            return EstimateDetail(value, "full_debiased", None)
        return EstimateDetail(value, "thresholded_debiased", 2.0 * sigma * gaussian.threshold_level(d, m))

    raise ValueError(f"unknown functional {f!r}")
