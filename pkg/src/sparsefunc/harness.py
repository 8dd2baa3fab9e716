"""Monte Carlo risk evaluation and experiment orchestration.

Replication streams are derived as ``SeedSequence((seed, config_id, rep))``
where ``config_id`` is a 64-bit digest of the canonical config JSON, so a
sweep is reproducible bit-for-bit regardless of how work is chunked.  Output
rows follow a frozen, versioned CSV schema (RFC-4180 quoting, UTF-8, LF).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from ._parallel import indexed_map
from .errors import UnsupportedRegime, WitnessOutsideClass
from .estimators import (
    EstimatorSpec,
    NoiseModel,
    Variant,
    apply_estimator,
    estimate_linear_adaptive,
    estimate_linear_b0,
    estimate_linear_unknown_sigma,
    estimate_quadratic_unknown_sigma,
)
from .model import (
    ClassTag,
    ObservationBatch,
    ParameterVector,
    SparsityClass,
    generate_observation,
    membership,
    worst_case_configs,
)
from .rates import (
    Functional,
    RateValue,
    Zone,
    rate_l2norm,
    rate_l2norm_bq,
    rate_linear_b0,
    rate_linear_bq,
    rate_quadratic,
    rate_quadratic_bq,
)

SCHEMA_VERSION = "1"

CSV_COLUMNS = [
    "schema_version",
    "config_id",
    "functional",
    "class",
    "variant",
    "noise",
    "d",
    "s",
    "q",
    "r",
    "kappa",
    "sigma",
    "witness",
    "n_reps",
    "seed",
    "true_value",
    "mean_sq_error",
    "std_error",
    "rate_value",
    "zone",
    "ratio",
    "config_max_ratio",
]

_CLASS_NAMES = {"b0": ClassTag.B0, "bq": ClassTag.BQ, "b2b0": ClassTag.B2_CAP_B0}


def load_config_schema() -> dict:
    """The JSON schema shipped with the package for experiment configs."""
    text = resources.files("sparsefunc").joinpath("data/experiment_config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment: estimator, class parameters, budget, seed."""

    functional: Functional
    class_name: str  # b0 | bq | b2b0
    d: int
    sigma: float
    n_reps: int
    seed: int
    s: int | None = None
    q: float | None = None
    r: float | None = None
    kappa: float | None = None
    noise: NoiseModel = NoiseModel.KNOWN
    variant: Variant = Variant.EXACT_RATE
    witness_policy: str = "worst_case"
    output: str | None = None

    def __post_init__(self):
        if self.n_reps < 1:
            raise ValueError("n_reps must be >= 1")
        if self.class_name not in _CLASS_NAMES:
            raise ValueError(f"unknown class name {self.class_name!r}")
        if self.witness_policy not in ("worst_case", "zero"):
            raise ValueError(f"unknown witness policy {self.witness_policy!r}")
        self.estimator_spec()  # validates class parameters and the combination

    def sparsity_class(self) -> SparsityClass:
        tag = _CLASS_NAMES[self.class_name]
        if tag == ClassTag.B0:
            if self.s is None:
                raise ValueError("class b0 needs s")
            return SparsityClass.b0(self.s)
        if tag == ClassTag.BQ:
            if self.q is None or self.r is None:
                raise ValueError("class bq needs q and r")
            return SparsityClass.bq(self.q, self.r)
        if self.kappa is None or self.s is None:
            raise ValueError("class b2b0 needs kappa and s")
        return SparsityClass.b2_cap_b0(self.kappa, self.s)

    def estimator_spec(self) -> EstimatorSpec:
        return EstimatorSpec(
            functional=self.functional,
            class_params=self.sparsity_class(),
            noise=self.noise,
            variant=self.variant,
        )

    def config_id(self) -> int:
        """64-bit digest of the canonical JSON form (stable across runs).

        The output path is excluded: where results land must not change the
        replication streams.
        """
        record = {k: v for k, v in self.to_json().items() if k != "output"}
        digest = hashlib.sha256(json.dumps(record, sort_keys=True).encode()).digest()
        return int.from_bytes(digest[:8], "big")

    def benchmark_rate(self) -> RateValue:
        """The rate the risk is reported against.

        Known-noise estimators are benchmarked against their minimax rate.
        Plug-in estimators use the same rate (exact_rate variant) or the
        log(d)-inflated benchmarks of the data-driven rules.
        """
        f, cls = self.functional, self.sparsity_class()
        if self.noise == NoiseModel.UNKNOWN:
            if f == Functional.LINEAR and self.variant == Variant.ADAPTIVE_LOGD:
                if self.s is None:
                    raise ValueError("benchmark for the adaptive rule needs s")
                return RateValue(
                    self.sigma**2 * self.s**2 * math.log(self.d), Zone.SPARSE, f
                )
            if f == Functional.LINEAR:
                return rate_linear_b0(self.s, self.d, self.sigma)
            if f == Functional.QUADRATIC:
                if self.s is None or self.kappa is None:
                    raise ValueError("benchmark for the data-driven quadratic rule needs s and kappa")
                var_part = self.sigma**2 * self.kappa**2
                sparse_part = self.sigma**4 * self.s**2 * math.log(self.d) ** 2
                zone = Zone.VARIANCE_DOMINATED if var_part >= sparse_part else Zone.SPARSE
                return RateValue(max(var_part, sparse_part), zone, f)
            raise ValueError("no unknown-noise benchmark for this functional")
        if f == Functional.LINEAR:
            if cls.tag == ClassTag.B0:
                return rate_linear_b0(cls.s, self.d, self.sigma)
            return rate_linear_bq(cls.r, self.sigma, cls.q, self.d)
        if f == Functional.QUADRATIC:
            if cls.tag == ClassTag.B2_CAP_B0:
                return rate_quadratic(cls.s, self.d, self.sigma, cls.kappa)
            return rate_quadratic_bq(cls.r, self.sigma, cls.q, self.d)
        if cls.tag in (ClassTag.B0, ClassTag.B2_CAP_B0):
            return rate_l2norm(cls.s, self.d, self.sigma)
        return rate_l2norm_bq(cls.r, self.sigma, cls.q, self.d)

    def witnesses(self) -> list[ParameterVector]:
        if self.witness_policy == "zero":
            return [ParameterVector(np.zeros(self.d), label="zero")]
        return worst_case_configs(self.sparsity_class(), self.sigma, self.d)

    def true_value(self, theta: ParameterVector) -> float:
        if self.functional == Functional.LINEAR:
            return theta.linear_functional()
        if self.functional == Functional.QUADRATIC:
            return theta.quadratic_functional()
        return theta.l2_norm()

    def to_json(self) -> dict:
        out = {
            "functional": self.functional.value,
            "class": self.class_name,
            "d": self.d,
            "sigma": self.sigma,
            "n_reps": self.n_reps,
            "seed": self.seed,
            "noise": self.noise.value,
            "variant": self.variant.value,
            "witness_policy": self.witness_policy,
        }
        for name in ("s", "q", "r", "kappa", "output"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    @classmethod
    def from_json(cls, record: dict) -> "ExperimentConfig":
        import jsonschema

        jsonschema.validate(record, load_config_schema())
        return cls(
            functional=Functional(record["functional"]),
            class_name=record["class"],
            d=int(record["d"]),
            sigma=float(record["sigma"]),
            n_reps=int(record["n_reps"]),
            seed=int(record["seed"]),
            s=int(record["s"]) if "s" in record else None,
            q=float(record["q"]) if "q" in record else None,
            r=float(record["r"]) if "r" in record else None,
            kappa=float(record["kappa"]) if "kappa" in record else None,
            noise=NoiseModel(record.get("noise", "known")),
            variant=Variant(record.get("variant", "exact_rate")),
            witness_policy=record.get("witness_policy", "worst_case"),
            output=record.get("output"),
        )


@dataclass(frozen=True)
class RiskReport:
    """Monte Carlo risk estimate for one (estimator, theta) pair."""

    mean_sq_error: float
    std_error: float
    rate_value: float
    ratio: float
    zone: Zone
    n_reps: int
    seed: int
    theta_label: str


def _replication_errors(
    config: ExperimentConfig, theta: ParameterVector, workers: int = 1
) -> np.ndarray:
    """Squared estimation errors for every replication, in replication order."""
    spec = config.estimator_spec()
    truth = config.true_value(theta)
    cid = config.config_id()

    def one(rep: int) -> float:
        obs = generate_observation(
            theta, config.sigma, np.random.SeedSequence((config.seed, cid, rep))
        )
        return (apply_estimator(spec, obs).value - truth) ** 2

    return indexed_map(config.n_reps, one, workers=workers)


def monte_carlo_risk(
    config: ExperimentConfig, theta: ParameterVector, workers: int = 1
) -> RiskReport:
    """Mean squared error of the configured estimator at theta, with its rate ratio.

    theta must belong to the config's parameter class.  Deterministic for a
    fixed config (seed included) whatever the worker count: each replication
    has its own seed-derived stream and the reduction is in replication order.
    """
    if theta.d != config.d:
        raise WitnessOutsideClass(
            f"theta has dimension {theta.d}, config expects {config.d}"
        )
    if not membership(theta, config.sparsity_class()):
        raise WitnessOutsideClass(f"theta {theta.label!r} is outside the config class")
    errors = _replication_errors(config, theta, workers=workers)
    mse = float(errors.mean())
    stderr = float(errors.std(ddof=1) / math.sqrt(config.n_reps)) if config.n_reps > 1 else 0.0
    rate = config.benchmark_rate()
    ratio = mse / rate.value if rate.value > 0 else math.inf
    return RiskReport(
        mean_sq_error=mse,
        std_error=stderr,
        rate_value=rate.value,
        ratio=ratio,
        zone=rate.zone,
        n_reps=config.n_reps,
        seed=config.seed,
        theta_label=theta.label or "theta",
    )


@dataclass
class SweepResult:
    """Rows of a risk sweep plus per-config aggregated max ratios."""

    rows: list[dict] = field(default_factory=list)
    max_ratio_by_config: dict[int, float] = field(default_factory=dict)

    def write_csv(self, path: str):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            self.write_csv_file(fh)

    def write_csv_file(self, fh):
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)


def risk_sweep(grid: list[ExperimentConfig], workers: int = 1) -> SweepResult:
    """Run every config against its witness list; one row per (config, witness).

    The per-config maximum ratio is the empirical stand-in for the supremum
    over the class; it is repeated on each row of the config for convenience.
    """
    if not grid:
        raise ValueError("the sweep grid is empty")
    result = SweepResult()
    for config in grid:
        cid = config.config_id()
        reports = [
            (theta, monte_carlo_risk(config, theta, workers=workers))
            for theta in config.witnesses()
        ]
        max_ratio = max(rep.ratio for _, rep in reports)
        result.max_ratio_by_config[cid] = max_ratio
        for theta, rep in reports:
            row = {
                "schema_version": SCHEMA_VERSION,
                "config_id": f"{cid:016x}",
                "functional": config.functional.value,
                "class": config.class_name,
                "variant": config.variant.value,
                "noise": config.noise.value,
                "d": config.d,
                "s": config.s if config.s is not None else "",
                "q": config.q if config.q is not None else "",
                "r": config.r if config.r is not None else "",
                "kappa": config.kappa if config.kappa is not None else "",
                "sigma": config.sigma,
                "witness": rep.theta_label,
                "n_reps": rep.n_reps,
                "seed": rep.seed,
                "true_value": config.true_value(theta),
                "mean_sq_error": rep.mean_sq_error,
                "std_error": rep.std_error,
                "rate_value": rep.rate_value,
                "zone": rep.zone.value,
                "ratio": rep.ratio,
                "config_max_ratio": max_ratio,
            }
            result.rows.append(row)
    return result


@dataclass(frozen=True)
class NoiseComparisonReport:
    """Known-sigma vs plug-in estimators on identical observations."""

    known: RiskReport
    plugin: RiskReport
    adaptive: RiskReport
    quadratic_plugin: RiskReport | None = None


def compare_known_unknown_sigma(
    config: ExperimentConfig, theta: ParameterVector
) -> NoiseComparisonReport:
    """Run the same seeds through the known-noise and plug-in linear rules.

    Reports the known-noise ratio against the minimax linear rate, the plug-in
    ratio against the same rate, the adaptive ratio against the log(d)
    benchmark, and (when kappa is set) the data-driven quadratic ratio against
    its benchmark.  Requires s <= sqrt(d) and d >= 3.
    """
    if config.s is None or config.s**2 > config.d:
        raise UnsupportedRegime("the comparison needs s with s <= sqrt(d)")
    if config.d < 3:
        raise UnsupportedRegime("the comparison needs d >= 3")
    if not membership(theta, config.sparsity_class()):
        raise WitnessOutsideClass(f"theta {theta.label!r} is outside the config class")

    s, d, sigma = config.s, config.d, config.sigma
    truth_l = theta.linear_functional()
    truth_q = theta.quadratic_functional()
    cid = config.config_id()

    err_known = np.empty(config.n_reps)
    err_plugin = np.empty(config.n_reps)
    err_adaptive = np.empty(config.n_reps)
    err_quad = np.empty(config.n_reps)
    for rep in range(config.n_reps):
        obs = generate_observation(theta, sigma, np.random.SeedSequence((config.seed, cid, rep)))
        err_known[rep] = (estimate_linear_b0(obs, s) - truth_l) ** 2
        err_plugin[rep] = (estimate_linear_unknown_sigma(obs.y, s) - truth_l) ** 2
        err_adaptive[rep] = (estimate_linear_adaptive(obs.y) - truth_l) ** 2
        err_quad[rep] = (estimate_quadratic_unknown_sigma(obs.y) - truth_q) ** 2

    def report(errors: np.ndarray, rate: RateValue) -> RiskReport:
        mse = float(errors.mean())
        stderr = float(errors.std(ddof=1) / math.sqrt(config.n_reps)) if config.n_reps > 1 else 0.0
        return RiskReport(
            mean_sq_error=mse,
            std_error=stderr,
            rate_value=rate.value,
            ratio=mse / rate.value if rate.value > 0 else math.inf,
            zone=rate.zone,
            n_reps=config.n_reps,
            seed=config.seed,
            theta_label=theta.label or "theta",
        )

    linear_rate = rate_linear_b0(s, d, sigma)
    adaptive_rate = RateValue(sigma**2 * s**2 * math.log(d), Zone.SPARSE, Functional.LINEAR)
    quad_report = None
    if config.kappa is not None:
        var_part = sigma**2 * config.kappa**2
        sparse_part = sigma**4 * s**2 * math.log(d) ** 2
        zone = Zone.VARIANCE_DOMINATED if var_part >= sparse_part else Zone.SPARSE
        quad_rate = RateValue(max(var_part, sparse_part), zone, Functional.QUADRATIC)
        quad_report = report(err_quad, quad_rate)
    return NoiseComparisonReport(
        known=report(err_known, linear_rate),
        plugin=report(err_plugin, linear_rate),
        adaptive=report(err_adaptive, adaptive_rate),
        quadratic_plugin=quad_report,
    )


def risk_report_to_json(rep: RiskReport) -> dict:
    out = asdict(rep)
    out["zone"] = rep.zone.value
    return out
