"""Detection tests against sparse alternatives and their Monte Carlo risk.

The test rejects the zero hypothesis when the l2-norm estimate exceeds half
the target separation.  The supremum over the alternative in the risk is
replaced by a maximum over an explicit witness list (the near-extremal
configurations from :func:`sparsefunc.model.worst_case_configs`); witnesses
are validated for membership before any simulation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import indexed_map
from .errors import WitnessOutsideClass
from .estimators import estimate_l2norm_b0, estimate_l2norm_bq
from .model import (
    ClassTag,
    ObservationBatch,
    ParameterVector,
    SparsityClass,
    generate_observation,
    membership,
)
from .rates import testing_rate


@dataclass(frozen=True)
class TestSpec:
    """A detection problem: alternative class shape, separation multiplier A,
    noise level and dimension.

    The alternative's separation is delta = A * lambda with lambda the
    testing rate of the class.
    """

    alternative: SparsityClass
    amplitude_multiplier: float
    sigma: float
    d: int

    def __post_init__(self):
        if self.amplitude_multiplier <= 0:
            raise ValueError("A must be positive")
        if self.sigma <= 0 or self.d < 1:
            raise ValueError("need sigma > 0 and d >= 1")
        if self.alternative.tag not in (
            ClassTag.THETA_QU,
            ClassTag.THETA_S,
            ClassTag.THETA_S_STAR,
        ):
            raise ValueError("the alternative must be a testing class")

    def rate(self) -> float:
        """lambda, the testing rate of the alternative."""
        return testing_rate(self.alternative, self.sigma, self.d).value

    def separation(self) -> float:
        """delta = A * lambda."""
        return self.amplitude_multiplier * self.rate()

    def concrete_alternative(self) -> SparsityClass:
        """The alternative with its separation parameter filled in."""
        return self.alternative.with_delta(self.separation())

    def cut(self) -> float:
        """The rejection threshold on the l2-norm estimate.

        (A/2) * lambda for l2-separated alternatives; for the
        amplitude-parameterized alternatives (Theta_s, Theta_s_star) the
        amplitude scale converts to l2 scale by sqrt(s), so the cut is
        (A/2) * lambda * sqrt(s).
        """
        half = self.amplitude_multiplier / 2.0 * self.rate()
        if self.alternative.tag in (ClassTag.THETA_S, ClassTag.THETA_S_STAR):
            return half * math.sqrt(self.alternative.s)
        return half


def _norm_estimate(obs: ObservationBatch, alternative: SparsityClass) -> float:
    tag = alternative.tag
    if tag == ClassTag.THETA_QU:
        if alternative.q == 0:
            return estimate_l2norm_b0(obs, int(alternative.r))
        return estimate_l2norm_bq(obs, alternative.r, alternative.q)
    return estimate_l2norm_b0(obs, alternative.s)


def test_statistic(obs: ObservationBatch, spec: TestSpec) -> int:
    """1 if the l2-norm estimate strictly exceeds the cut, else 0."""
    if obs.d != spec.d:
        raise ValueError("observation dimension does not match the test spec")
    return int(_norm_estimate(obs, spec.alternative) > spec.cut())


@dataclass(frozen=True)
class TestRiskReport:
    """Empirical testing risk: type-one error plus worst type-two over witnesses."""

    type_one: float
    max_type_two: float
    total: float
    replications: int
    seed: int
    per_witness: dict = field(default_factory=dict)

    def stderr_total(self) -> float:
        """Joint Monte Carlo standard error of the total (independent binomials)."""
        n = self.replications
        v1 = self.type_one * (1.0 - self.type_one) / n
        v2 = self.max_type_two * (1.0 - self.max_type_two) / n
        return math.sqrt(v1 + v2)


def evaluate_test_risk(
    spec: TestSpec,
    witnesses: list[ParameterVector],
    n_reps: int,
    seed: int,
    workers: int = 1,
) -> TestRiskReport:
    """Monte Carlo risk of the test: P_0(reject) + max over witnesses P_theta(accept).

    Every witness must pass membership in the alternative at separation
    A * lambda.  Replication streams are derived as SeedSequence((seed,
    stream, rep)) with stream 0 for the null and stream w+1 for witness w, so
    results are identical for any worker count or chunking.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    concrete = spec.concrete_alternative()
    for w in witnesses:
        if w.d != spec.d:
            raise WitnessOutsideClass(f"witness {w.label!r} has dimension {w.d}, expected {spec.d}")
        if not membership(w, concrete):
            raise WitnessOutsideClass(f"witness {w.label!r} is outside the alternative")

    def decision(theta: ParameterVector, stream: int, rep: int) -> int:
        obs = generate_observation(theta, spec.sigma, np.random.SeedSequence((seed, stream, rep)))
        return test_statistic(obs, spec)

    null_theta = ParameterVector(np.zeros(spec.d), label="null")
    null_decisions = indexed_map(n_reps, lambda rep: decision(null_theta, 0, rep), workers)
    type_one = float(null_decisions.sum()) / n_reps

    per_witness: dict[str, float] = {}
    for w_idx, w in enumerate(witnesses):
        decisions = indexed_map(n_reps, lambda rep: decision(w, w_idx + 1, rep), workers)
        per_witness[w.label or f"witness_{w_idx}"] = float(n_reps - decisions.sum()) / n_reps

    max_type_two = max(per_witness.values()) if per_witness else 0.0
    return TestRiskReport(
        type_one=type_one,
        max_type_two=max_type_two,
        total=type_one + max_type_two,
        replications=n_reps,
        seed=seed,
        per_witness=per_witness,
    )


def chebyshev_risk_bound(A: float, c_star: float) -> float:
    """Theoretical risk envelope min(1, c_star / A^2)."""
    if A <= 0 or c_star <= 0:
        raise ValueError("A and c_star must be positive")
    return min(1.0, c_star / A**2)
