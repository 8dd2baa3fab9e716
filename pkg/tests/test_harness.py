import csv
import io
import json
import math
import pathlib

import jsonschema
import numpy as np
import pytest

from sparsefunc.errors import UnsupportedRegime, WitnessOutsideClass
from sparsefunc.estimators import NoiseModel, Variant
from sparsefunc.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    compare_known_unknown_sigma,
    monte_carlo_risk,
    risk_sweep,
)
from sparsefunc.model import ParameterVector, SparsityClass, worst_case_configs
from sparsefunc.rates import Functional, Zone


def _config(**overrides):
    base = dict(
        functional=Functional.LINEAR,
        class_name="b0",
        d=64,
        s=64,
        sigma=1.0,
        n_reps=400,
        seed=2024,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestMonteCarloRisk:
    def test_noiseless_limit(self):
        config = _config(sigma=1e-12, n_reps=50)
        theta = ParameterVector(np.ones(64), label="ones")
        report = monte_carlo_risk(config, theta)
        assert report.mean_sq_error <= 1e-20

    def test_plain_sum_variance_is_sigma2_d(self):
        # dense branch at theta = 0: the error is sigma * sum(xi), variance sigma^2 d
        config = _config(d=64, s=64, n_reps=2000)
        theta = ParameterVector(np.zeros(64), label="zero")
        report = monte_carlo_risk(config, theta)
        normalized = report.mean_sq_error / 64.0
        assert abs(normalized - 1.0) <= 3 * math.sqrt(2.0 / 2000)

    def test_deterministic(self):
        config = _config(n_reps=100)
        theta = ParameterVector(np.zeros(64), label="zero")
        assert monte_carlo_risk(config, theta) == monte_carlo_risk(config, theta)

    def test_worker_count_does_not_change_results(self):
        config = _config(d=64, s=4, n_reps=300)
        witness = {c.label: c for c in config.witnesses()}["equal_spikes_critical"]
        serial = monte_carlo_risk(config, witness, workers=1)
        threaded = monte_carlo_risk(config, witness, workers=4)
        assert serial == threaded
        sweep_serial = risk_sweep([config])
        sweep_threaded = risk_sweep([config], workers=3)
        assert sweep_serial.rows == sweep_threaded.rows

    def test_ratio_band_for_prior_witness(self):
        config = _config(d=64, s=4, n_reps=500)
        witness = {c.label: c for c in config.witnesses()}["equal_spikes_critical"]
        report = monte_carlo_risk(config, witness)
        assert 0.001 < report.ratio < 30.0
        assert report.zone == Zone.SPARSE

    def test_rejects_witness_outside_class(self):
        config = _config(d=16, s=1, n_reps=10)
        dense_theta = ParameterVector(np.ones(16), label="ones")
        with pytest.raises(WitnessOutsideClass):
            monte_carlo_risk(config, dense_theta)

    def test_std_error_shrinks_like_sqrt_n(self):
        theta = ParameterVector(np.zeros(64), label="zero")
        small = monte_carlo_risk(_config(n_reps=1500), theta)
        large = monte_carlo_risk(_config(n_reps=3000), theta)
        factor = large.std_error / small.std_error
        assert 0.6 <= factor <= 0.82


class TestRiskSweep:
    def test_single_config_matches_direct_call(self):
        config = _config(d=16, s=2, n_reps=80, witness_policy="zero")
        sweep = risk_sweep([config])
        assert len(sweep.rows) == 1
        row = sweep.rows[0]
        direct = monte_carlo_risk(config, config.witnesses()[0])
        assert row["mean_sq_error"] == direct.mean_sq_error
        assert row["config_max_ratio"] == direct.ratio

    def test_reproducible_bit_for_bit(self):
        grid = [_config(d=16, s=2, n_reps=60), _config(d=16, s=4, n_reps=60)]
        first = risk_sweep(grid)
        second = risk_sweep(grid)
        assert first.rows == second.rows

    def test_supremum_monotone_in_witnesses(self):
        config = _config(d=64, s=4, n_reps=120)
        witnesses = config.witnesses()
        partial = max(monte_carlo_risk(config, w).ratio for w in witnesses[:2])
        full = max(monte_carlo_risk(config, w).ratio for w in witnesses)
        assert full >= partial

    def test_sweep_over_sparsity_range_stays_in_frozen_envelope(self):
        # every max ratio from a full s-sweep lies inside the envelope of the
        # calibrated linear-functional bands
        fixtures = json.loads(
            (pathlib.Path(__file__).parent / "fixtures" / "bands.json").read_text()
        )
        linear_bands = [v for k, v in fixtures["risk_rate_bands"].items() if k.startswith("L|")]
        lo = min(b[0] for b in linear_bands)
        hi = max(b[1] for b in linear_bands)
        d = 64
        grid = [
            _config(d=d, s=s, n_reps=500, seed=20250608)
            for s in range(1, math.isqrt(d) + 1)
        ]
        sweep = risk_sweep(grid)
        for ratio in sweep.max_ratio_by_config.values():
            assert lo <= ratio <= hi

    def test_csv_schema_and_quoting(self):
        config = _config(d=16, s=2, n_reps=30)
        sweep = risk_sweep([config])
        buf = io.StringIO()
        sweep.write_csv_file(buf)
        text = buf.getvalue()
        assert "\r" not in text
        rows = list(csv.DictReader(io.StringIO(text)))
        assert list(rows[0]) == CSV_COLUMNS
        assert rows[0]["schema_version"] == "1"
        assert len(rows) == len(sweep.rows)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            risk_sweep([])


class TestExperimentConfigJson:
    def test_round_trip(self):
        config = _config(d=32, s=3, n_reps=50)
        again = ExperimentConfig.from_json(config.to_json())
        assert again == config
        assert again.config_id() == config.config_id()

    def test_unknown_keys_rejected(self):
        record = _config().to_json()
        record["surprise"] = 1
        with pytest.raises(jsonschema.ValidationError):
            ExperimentConfig.from_json(record)

    def test_missing_required_rejected(self):
        record = _config().to_json()
        del record["seed"]
        with pytest.raises(jsonschema.ValidationError):
            ExperimentConfig.from_json(record)

    def test_invalid_combination_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(
                functional=Functional.QUADRATIC,
                class_name="b0",
                d=16,
                s=2,
                sigma=1.0,
                n_reps=10,
                seed=0,
            )

    def test_output_field_round_trips_without_changing_streams(self):
        base = _config(d=16, s=2, n_reps=5)
        with_output = _config(d=16, s=2, n_reps=5, output="here.csv")
        assert with_output.config_id() == base.config_id()
        again = ExperimentConfig.from_json(with_output.to_json())
        assert again.output == "here.csv"

    def test_config_id_distinguishes_seeds(self):
        assert _config(seed=1).config_id() != _config(seed=2).config_id()


class TestCompareKnownUnknown:
    def test_noiseless_limit(self):
        config = _config(d=64, s=4, sigma=1e-12, n_reps=40, kappa=None)
        theta = ParameterVector(np.zeros(64), label="zero")
        pair = compare_known_unknown_sigma(config, theta)
        assert pair.known.mean_sq_error <= 1e-20
        assert pair.plugin.mean_sq_error <= 1e-18
        assert pair.adaptive.mean_sq_error <= 1e-18

    def test_reports_all_ratios(self):
        config = ExperimentConfig(
            functional=Functional.QUADRATIC,
            class_name="b2b0",
            d=256,
            s=4,
            kappa=4.0 * math.log(256),
            sigma=1.0,
            n_reps=300,
            seed=31,
        )
        witness = {c.label: c for c in config.witnesses()}["equal_spikes_capped"]
        pair = compare_known_unknown_sigma(config, witness)
        assert pair.known.rate_value == pytest.approx(16 * math.log1p(256 / 16), rel=1e-12)
        assert pair.adaptive.rate_value == pytest.approx(16 * math.log(256), rel=1e-12)
        assert pair.quadratic_plugin is not None
        assert math.isfinite(pair.plugin.ratio)
        assert math.isfinite(pair.quadratic_plugin.ratio)

    def test_regime_guard(self):
        config = _config(d=16, s=5, n_reps=10)
        theta = ParameterVector(np.zeros(16), label="zero")
        with pytest.raises(UnsupportedRegime):
            compare_known_unknown_sigma(config, theta)


class TestBenchmarkRates:
    def test_unknown_noise_benchmarks(self):
        linear = _config(
            d=256, s=4, noise=NoiseModel.UNKNOWN, variant=Variant.ADAPTIVE_LOGD
        ).benchmark_rate()
        assert linear.value == pytest.approx(16 * math.log(256), rel=1e-12)
        quad = ExperimentConfig(
            functional=Functional.QUADRATIC,
            class_name="b2b0",
            d=256,
            s=4,
            kappa=4.0 * math.log(256),
            sigma=1.0,
            n_reps=10,
            seed=0,
            noise=NoiseModel.UNKNOWN,
            variant=Variant.ADAPTIVE_LOGD,
        ).benchmark_rate()
        expected = max(
            (4.0 * math.log(256)) ** 2, 16 * math.log(256) ** 2
        )
        assert quad.value == pytest.approx(expected, rel=1e-12)

    def test_witness_policies(self):
        zero_only = _config(witness_policy="zero").witnesses()
        assert [w.label for w in zero_only] == ["zero"]
        full = _config(d=64, s=4).witnesses()
        assert {w.label for w in full} >= {"zero", "equal_spikes_critical"}


class TestGoldenFile:
    def test_sweep_csv_bytes_are_frozen(self):
        # schema_version 1: any byte change here is a schema or RNG break
        config = ExperimentConfig(
            functional=Functional.LINEAR,
            class_name="b0",
            d=8,
            s=2,
            sigma=1.0,
            n_reps=5,
            seed=424242,
            witness_policy="zero",
        )
        buf = io.StringIO()
        risk_sweep([config]).write_csv_file(buf)
        golden = (
            pathlib.Path(__file__).parent / "fixtures" / "golden_sweep.csv"
        ).read_text()
        assert buf.getvalue() == golden
