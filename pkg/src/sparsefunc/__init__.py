"""Estimation and testing of functionals of sparse means in Gaussian noise.

Library layout:

- :mod:`sparsefunc.gaussian` -- standard-normal tail primitives and debiasing
  constants.
- :mod:`sparsefunc.model` -- vectors, sparsity classes, observation
  generation, spiked priors and near-worst-case witness configurations.
- :mod:`sparsefunc.rates` -- effective sparsity and the minimax rate calculus
  with its zone logic.
- :mod:`sparsefunc.estimators` -- thresholding estimators of the linear and
  quadratic functionals and the l2 norm, known and unknown noise level.
- :mod:`sparsefunc.testing` -- detection tests against sparse alternatives
  and their Monte Carlo risk.
- :mod:`sparsefunc.lower_bounds` -- chi-square divergence certificates.
- :mod:`sparsefunc.harness` -- seeded Monte Carlo risk evaluation, sweeps and
  CSV output.
- :mod:`sparsefunc.cli` -- the ``sparsefunc`` command line tool.
"""

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    NonConstantFunctional,
    NumericOverflow,
    SparseFuncError,
    UnsupportedRegime,
    WitnessOutsideClass,
)
from .estimators import EstimatorSpec, NoiseModel, Variant, apply_estimator
from .harness import ExperimentConfig, RiskReport, monte_carlo_risk, risk_sweep
from .model import (
    ObservationBatch,
    ParameterVector,
    PriorKind,
    SparsePrior,
    SparsityClass,
    generate_observation,
    membership,
    sample_prior,
    worst_case_configs,
)
from .rates import Functional, RateValue, Zone, effective_sparsity, testing_rate
from .testing import TestRiskReport, TestSpec, evaluate_test_risk, test_statistic

__version__ = "0.1.0"

__all__ = [
    "DimensionMismatch",
    "DimensionTooSmall",
    "EstimatorSpec",
    "ExperimentConfig",
    "Functional",
    "NoiseModel",
    "NonConstantFunctional",
    "NumericOverflow",
    "ObservationBatch",
    "ParameterVector",
    "PriorKind",
    "RateValue",
    "RiskReport",
    "SparseFuncError",
    "SparsePrior",
    "SparsityClass",
    "TestRiskReport",
    "TestSpec",
    "UnsupportedRegime",
    "Variant",
    "WitnessOutsideClass",
    "Zone",
    "apply_estimator",
    "effective_sparsity",
    "evaluate_test_risk",
    "generate_observation",
    "membership",
    "monte_carlo_risk",
    "risk_sweep",
    "sample_prior",
    "test_statistic",
    "testing_rate",
    "worst_case_configs",
]
