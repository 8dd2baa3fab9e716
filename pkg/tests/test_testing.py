import math

import numpy as np
import pytest

from sparsefunc.errors import WitnessOutsideClass
from sparsefunc.model import (
    ObservationBatch,
    ParameterVector,
    SparsityClass,
    worst_case_configs,
)
from sparsefunc import testing as detection
from sparsefunc.testing import chebyshev_risk_bound, evaluate_test_risk


def _spec(A, d=64, s=8, sigma=1.0):
    return detection.TestSpec(
        alternative=SparsityClass.theta_qu(0.0, s, delta=1.0),
        amplitude_multiplier=A,
        sigma=sigma,
        d=d,
    )


class TestStatistic:
    def test_zero_observation_never_rejects(self):
        spec = _spec(1.0)
        obs = ObservationBatch(np.zeros(64), 1.0)
        assert detection.test_statistic(obs, spec) == 0

    def test_huge_uniform_signal_rejects(self):
        spec = _spec(1.0)
        obs = ObservationBatch(np.full(64, 100.0), 1.0)
        assert detection.test_statistic(obs, spec) == 1

    def test_strict_inequality_at_the_cut(self):
        # d=16, s=4 (dense branch), sigma=1: lambda = sqrt(sigma^2 sqrt(d)) = 2
        # A=3 puts the cut at exactly 3.0; y=(5,0,...) gives the norm estimate
        # sqrt(25-16) = 3.0 exactly.
        spec = detection.TestSpec(
            alternative=SparsityClass.theta_qu(0.0, 4, delta=1.0),
            amplitude_multiplier=3.0,
            sigma=1.0,
            d=16,
        )
        assert spec.cut() == 3.0
        y = np.zeros(16)
        y[0] = 5.0
        assert detection.test_statistic(ObservationBatch(y, 1.0), spec) == 0
        y[0] = np.nextafter(5.0, np.inf)
        assert detection.test_statistic(ObservationBatch(y, 1.0), spec) == 1

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        y = rng.normal(size=64) * 3.0
        t = 2.0
        for A in (0.5, 1.0, 4.0):
            base = detection.test_statistic(ObservationBatch(y, 1.0), _spec(A, sigma=1.0))
            scaled = detection.test_statistic(ObservationBatch(t * y, t), _spec(A, sigma=t))
            assert base == scaled

    def test_amplitude_class_cut_uses_l2_scale(self):
        # members of Theta_s(A*lambda) have l2 norm A*lambda*sqrt(s); the cut
        # must sit at half that, not at half the amplitude
        s, d = 4, 64
        spec = detection.TestSpec(
            alternative=SparsityClass.theta_s(s, delta=1.0),
            amplitude_multiplier=2.0,
            sigma=1.0,
            d=d,
        )
        lam = spec.rate()
        assert spec.cut() == pytest.approx(lam * math.sqrt(s))


class TestEvaluateRisk:
    def test_large_separation_risk_small(self):
        spec = _spec(1000.0, d=64, s=8)
        witnesses = worst_case_configs(spec.concrete_alternative(), spec.sigma, spec.d)
        report = evaluate_test_risk(spec, witnesses, n_reps=200, seed=77)
        assert report.total <= 0.05

    def test_tiny_separation_risk_large(self):
        spec = _spec(1e-3, d=64, s=8)
        witnesses = worst_case_configs(spec.concrete_alternative(), spec.sigma, spec.d)
        report = evaluate_test_risk(spec, witnesses, n_reps=200, seed=78)
        assert report.total >= 0.9

    def test_rejects_zero_replications(self):
        spec = _spec(1.0)
        with pytest.raises(ValueError):
            evaluate_test_risk(spec, [], n_reps=0, seed=1)

    def test_rejects_witness_outside_class(self):
        spec = _spec(4.0, d=16, s=2)
        too_small = ParameterVector(np.zeros(16), label="null")
        with pytest.raises(WitnessOutsideClass):
            evaluate_test_risk(spec, [too_small], n_reps=10, seed=1)

    def test_deterministic_and_totals_consistent(self):
        spec = _spec(1.0, d=32, s=4)
        witnesses = worst_case_configs(spec.concrete_alternative(), spec.sigma, spec.d)
        first = evaluate_test_risk(spec, witnesses, n_reps=150, seed=5)
        second = evaluate_test_risk(spec, witnesses, n_reps=150, seed=5)
        assert first == second
        assert first.total == first.type_one + first.max_type_two
        assert set(first.per_witness) == {w.label for w in witnesses}

    def test_seed_stability_within_monte_carlo_error(self):
        spec = _spec(1.0, d=32, s=4)
        witnesses = worst_case_configs(spec.concrete_alternative(), spec.sigma, spec.d)
        a = evaluate_test_risk(spec, witnesses, n_reps=800, seed=101)
        b = evaluate_test_risk(spec, witnesses, n_reps=800, seed=202)
        joint_se = math.hypot(a.stderr_total(), b.stderr_total())
        assert abs(a.total - b.total) <= 4 * max(joint_se, 1e-6)

    def test_worker_count_does_not_change_results(self):
        spec = _spec(1.0, d=32, s=4)
        witnesses = worst_case_configs(spec.concrete_alternative(), spec.sigma, spec.d)
        serial = evaluate_test_risk(spec, witnesses, n_reps=200, seed=9, workers=1)
        threaded = evaluate_test_risk(spec, witnesses, n_reps=200, seed=9, workers=4)
        assert serial == threaded

    def test_risk_roughly_monotone_in_separation(self):
        totals = []
        for A in (0.25, 1.0, 4.0):
            spec = _spec(A, d=32, s=4)
            witnesses = worst_case_configs(spec.concrete_alternative(), spec.sigma, spec.d)
            report = evaluate_test_risk(spec, witnesses, n_reps=600, seed=11)
            totals.append((report.total, report.stderr_total()))
        for (hi, se_hi), (lo, se_lo) in zip(totals, totals[1:]):
            assert lo <= hi + 4 * math.hypot(se_hi, se_lo)


class TestChebyshevBound:
    def test_vanishes_at_infinity(self):
        assert chebyshev_risk_bound(1e9, 4.0) == pytest.approx(0.0, abs=1e-12)

    def test_clipped_at_one(self):
        assert chebyshev_risk_bound(2.0, 4.0) == 1.0

    def test_arithmetic(self):
        assert chebyshev_risk_bound(10.0, 4.0) == pytest.approx(0.04)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            chebyshev_risk_bound(0.0, 1.0)
