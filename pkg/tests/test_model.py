import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from sparsefunc.errors import DimensionMismatch
from sparsefunc.model import (
    ClassTag,
    ObservationBatch,
    ParameterVector,
    PriorKind,
    SparsePrior,
    SparsityClass,
    generate_observation,
    membership,
    sample_prior,
    vector_to_csv_line,
    vectors_from_csv,
    worst_case_configs,
)


def _vector_schema() -> dict:
    text = resources.files("sparsefunc").joinpath("data/vector_record.schema.json").read_text()
    return json.loads(text)


class TestParameterVector:
    def test_derived_quantities(self):
        vec = ParameterVector(np.array([1.0, -2.0, 0.0, 3.0]))
        assert vec.d == 4
        assert vec.sparsity == 3
        assert list(vec.support) == [0, 1, 3]
        assert vec.linear_functional() == 2.0
        assert vec.quadratic_functional() == 14.0
        assert vec.l2_norm() == pytest.approx(math.sqrt(14.0))
        assert vec.lq_norm(1.0) == 6.0

    def test_immutable(self):
        vec = ParameterVector(np.zeros(3))
        with pytest.raises(ValueError):
            vec.theta[0] = 1.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            ParameterVector(np.array([1.0, np.inf]))

    def test_json_round_trip_matches_schema(self):
        vec = ParameterVector(np.array([0.5, 0.0, -1.0]))
        record = vec.to_record()
        jsonschema.validate(record, _vector_schema())
        again = ParameterVector.from_record(record)
        assert np.array_equal(again.theta, vec.theta)

    def test_record_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            ParameterVector.from_record({"d": 5, "theta": [1.0, 2.0]})

    def test_csv_round_trip(self):
        vec = ParameterVector(np.array([1.25, -3.5, 0.0]))
        line = vector_to_csv_line(vec.theta)
        (parsed,) = vectors_from_csv(line)
        assert np.array_equal(parsed, vec.theta)


class TestObservationBatch:
    def test_validation(self):
        with pytest.raises(ValueError):
            ObservationBatch(np.zeros(3), 0.0)

    def test_json_round_trip_with_theta(self):
        theta = ParameterVector(np.array([1.0, 0.0]))
        obs = ObservationBatch(np.array([1.1, -0.2]), 0.5)
        record = obs.to_record(theta=theta)
        jsonschema.validate(record, _vector_schema())
        again = ObservationBatch.from_record(record)
        assert np.array_equal(again.y, obs.y)
        assert again.sigma == 0.5


class TestGenerateObservation:
    def test_deterministic_for_fixed_seed(self):
        theta = ParameterVector(np.arange(8, dtype=float))
        first = generate_observation(theta, 1.0, 1234)
        second = generate_observation(theta, 1.0, 1234)
        assert np.array_equal(first.y, second.y)

    def test_degenerate_noise_limit(self):
        theta = ParameterVector(np.array([2.0, -1.0, 0.0]))
        obs = generate_observation(theta, 1e-300, 5)
        assert np.allclose(obs.y, theta.theta, atol=1e-290)

    def test_pure_noise_moments(self):
        d = 10**5
        theta = ParameterVector(np.zeros(d))
        obs = generate_observation(theta, 1.0, 99)
        assert abs(obs.y.mean()) <= 4.0 / math.sqrt(d)
        assert abs(obs.y.var() - 1.0) <= 0.05

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            generate_observation(ParameterVector(np.zeros(2)), -1.0, 0)


class TestMembership:
    def test_zero_vs_b0(self):
        zero = ParameterVector(np.zeros(6))
        assert membership(zero, SparsityClass.b0(1))

    def test_theta_s_exact_value(self):
        vec = ParameterVector(np.array([1.0, 1.0, 0.0, 0.0]))
        assert membership(vec, SparsityClass.theta_s(2, 1.0))
        assert not membership(vec, SparsityClass.theta_s(2, 1.5))
        assert not membership(vec, SparsityClass.theta_s(3, 1.0))

    def test_bq_closed_ball_boundary(self):
        vec = ParameterVector(np.array([2.0, 0.0, 0.0]))
        assert membership(vec, SparsityClass.bq(0.5, 2.0))

    def test_b2_cap_b0(self):
        vec = ParameterVector(np.array([3.0, 4.0, 0.0]))
        assert membership(vec, SparsityClass.b2_cap_b0(5.0, 2))
        assert not membership(vec, SparsityClass.b2_cap_b0(4.9, 2))
        assert not membership(vec, SparsityClass.b2_cap_b0(5.0, 1))

    def test_theta_qu_with_q_zero(self):
        vec = ParameterVector(np.array([1.0, 1.0, 0.0, 0.0]))
        assert membership(vec, SparsityClass.theta_qu(0.0, 2, delta=math.sqrt(2.0)))
        assert not membership(vec, SparsityClass.theta_qu(0.0, 2, delta=1.5))
        assert not membership(vec, SparsityClass.theta_qu(0.0, 1, delta=1.0))

    def test_theta_s_star_minimum_magnitude(self):
        vec = ParameterVector(np.array([2.0, -1.5, 0.0]))
        assert membership(vec, SparsityClass.theta_s_star(2, 1.5))
        assert not membership(vec, SparsityClass.theta_s_star(2, 1.6))


class TestSparsityClassValidation:
    def test_b0_needs_positive_s(self):
        with pytest.raises(ValueError):
            SparsityClass.b0(0)

    def test_bq_range(self):
        with pytest.raises(ValueError):
            SparsityClass.bq(2.5, 1.0)

    def test_theta_qu_integer_sparsity_for_q_zero(self):
        with pytest.raises(ValueError):
            SparsityClass.theta_qu(0.0, 2.5, delta=1.0)


class TestSamplePrior:
    def test_full_support_when_s_equals_d(self):
        prior = SparsePrior(PriorKind.UNIFORM_POSITIVE, s=5, rho=1.0, sigma=1.0, d=5)
        theta = sample_prior(prior, 0)
        assert theta.sparsity == 5

    def test_exact_norms_on_support(self):
        prior = SparsePrior(PriorKind.UNIFORM_POSITIVE, s=4, rho=0.7, sigma=2.0, d=20)
        theta = sample_prior(prior, 3)
        coeff = 2.0 * 0.7
        assert theta.sparsity == 4
        assert theta.linear_functional() == pytest.approx(4 * coeff, rel=1e-14)
        assert theta.l2_norm() == pytest.approx(coeff * 2.0, rel=1e-14)  # sqrt(4) = 2
        assert membership(theta, SparsityClass.b0(4))

    def test_signed_prior_magnitudes(self):
        prior = SparsePrior(PriorKind.UNIFORM_SIGNED, s=6, rho=1.3, sigma=0.5, d=30)
        theta = sample_prior(prior, 11)
        nonzero = theta.theta[theta.theta != 0]
        assert np.all(np.abs(nonzero) == pytest.approx(0.65, rel=1e-14))
        signs = {-1.0, 1.0}
        assert set(np.sign(nonzero)) <= signs

    def test_support_uniformity(self):
        # d=6, s=2: 15 possible supports, each with frequency 1/15 +- 3 SE
        prior = SparsePrior(PriorKind.UNIFORM_POSITIVE, s=2, rho=1.0, sigma=1.0, d=6)
        n = 10**4
        counts: dict[tuple, int] = {}
        for i in range(n):
            theta = sample_prior(prior, np.random.SeedSequence((42, i)))
            key = tuple(theta.support)
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 15
        p = 1.0 / 15.0
        se = math.sqrt(p * (1 - p) / n)
        for count in counts.values():
            assert abs(count / n - p) <= 3 * se


class TestWorstCaseConfigs:
    def test_all_members_pass_membership(self):
        classes = [
            SparsityClass.b0(3),
            SparsityClass.bq(0.5, 2.0),
            SparsityClass.b2_cap_b0(4.0, 2),
            SparsityClass.theta_qu(0.0, 3, delta=1.5),
            SparsityClass.theta_qu(1.0, 5.0, delta=1.0),
            SparsityClass.theta_s(2, 0.8),
            SparsityClass.theta_s_star(3, 0.6),
        ]
        for cls in classes:
            configs = worst_case_configs(cls, sigma=1.0, d=25)
            assert configs, cls
            for vec in configs:
                assert membership(vec, cls), (cls, vec.label)
                assert vec.label

    def test_b0_contains_critical_equal_spikes(self):
        d, s, sigma = 100, 4, 0.5
        configs = {c.label: c for c in worst_case_configs(SparsityClass.b0(s), sigma, d)}
        spike = configs["equal_spikes_critical"]
        expected = sigma * math.sqrt(math.log1p(d / s**2))
        assert np.all(spike.theta[:s] == pytest.approx(expected, rel=1e-14))
        assert np.all(spike.theta[s:] == 0)

    def test_b2_cap_b0_contains_radius_spike(self):
        configs = {c.label: c for c in worst_case_configs(SparsityClass.b2_cap_b0(3.0, 1), 1.0, 10)}
        spike = configs["single_spike_at_radius"]
        assert spike.theta[0] == 3.0
        assert np.count_nonzero(spike.theta) == 1


class TestEmbeddings:
    def _random_member_b1_cap_b0(self, rng, d, s, kappa):
        support = rng.permutation(d)[:s]
        values = rng.uniform(-1.0, 1.0, size=s)
        scale = kappa * rng.uniform(0.2, 1.0) / np.sum(np.abs(values))
        theta = np.zeros(d)
        theta[support] = values * scale
        return ParameterVector(theta)

    def test_l1_embedding_into_lq(self):
        # members of B_1(kappa) & B_0(s) lie in B_q(r) when s^(1-q) kappa^q = r^q
        rng = np.random.default_rng(5)
        for _ in range(50):
            d, s = 30, int(rng.integers(1, 8))
            kappa = float(rng.uniform(0.5, 5.0))
            q = float(rng.uniform(0.1, 0.99))
            r = s ** ((1.0 - q) / q) * kappa
            vec = self._random_member_b1_cap_b0(rng, d, s, kappa)
            assert membership(vec, SparsityClass.bq(q, r))

    def test_l2_embedding_into_lq(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            d, s = 30, int(rng.integers(1, 8))
            kappa = float(rng.uniform(0.5, 5.0))
            q = float(rng.uniform(0.1, 1.9))
            r = s ** ((1.0 - q / 2.0) / q) * kappa
            support = rng.permutation(d)[:s]
            values = rng.uniform(-1.0, 1.0, size=s)
            scale = kappa * float(rng.uniform(0.2, 1.0)) / math.sqrt(float(np.sum(values**2)))
            theta = np.zeros(d)
            theta[support] = values * scale
            assert membership(ParameterVector(theta), SparsityClass.bq(q, r))
