"""Data model: parameter vectors, sparsity classes, observations and priors.

The observation model is y_j = theta_j + sigma * xi_j with i.i.d. standard
normal xi_j.  Every stochastic operation takes an explicit seed (int,
``numpy.random.SeedSequence`` or ``Generator``); the generator is numpy's
PCG64, and independent streams are derived with ``SeedSequence`` so results
do not depend on how work is chunked across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch

# Relative slack for ball-radius / separation comparisons.  Witness
# constructions that mathematically saturate a constraint land O(1e-16) off
# under IEEE arithmetic; this guard absorbs that without changing semantics.
_BOUNDARY_RTOL = 1e-12


def _as_rng(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# Core vector types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterVector:
    """An unknown mean vector theta in R^d with sparsity metadata."""

    theta: np.ndarray
    label: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.theta, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("theta must be a nonempty 1-d vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("theta entries must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "theta", arr)

    @property
    def d(self) -> int:
        return self.theta.size

    @property
    def support(self) -> np.ndarray:
        """Indices j with theta_j != 0."""
        return np.flatnonzero(self.theta)

    @property
    def sparsity(self) -> int:
        """Number of nonzero entries (the l0 norm)."""
        return int(np.count_nonzero(self.theta))

    def lq_norm(self, q: float) -> float:
        """(sum |theta_j|^q)^(1/q) for q > 0."""
        if q <= 0:
            raise ValueError("q must be positive")
        return float(np.sum(np.abs(self.theta) ** q) ** (1.0 / q))

    def linear_functional(self) -> float:
        """L(theta) = sum_j theta_j."""
        return float(np.sum(self.theta))

    def quadratic_functional(self) -> float:
        """Q(theta) = sum_j theta_j^2."""
        return float(np.sum(self.theta**2))

    def l2_norm(self) -> float:
        return math.sqrt(self.quadratic_functional())

    def to_record(self) -> dict:
        return {"d": self.d, "theta": self.theta.tolist()}

    @classmethod
    def from_record(cls, record: dict) -> "ParameterVector":
        vec = cls(np.asarray(record["theta"], dtype=float))
        if "d" in record and int(record["d"]) != vec.d:
            raise DimensionMismatch(f"record d={record['d']} but theta has length {vec.d}")
        return vec


@dataclass(frozen=True)
class ObservationBatch:
    """One realization y = theta + sigma*xi together with the noise level."""

    y: np.ndarray
    sigma: float

    def __post_init__(self):
        arr = np.asarray(self.y, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("y must be a nonempty 1-d vector")
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "y", arr)

    @property
    def d(self) -> int:
        return self.y.size

    def to_record(self, theta: ParameterVector | None = None) -> dict:
        record = {"d": self.d, "sigma": self.sigma, "y": self.y.tolist()}
        if theta is not None:
            if theta.d != self.d:
                raise DimensionMismatch("theta and y have different lengths")
            record["theta"] = theta.theta.tolist()
        return record

    @classmethod
    def from_record(cls, record: dict) -> "ObservationBatch":
        obs = cls(np.asarray(record["y"], dtype=float), float(record["sigma"]))
        if "d" in record and int(record["d"]) != obs.d:
            raise DimensionMismatch(f"record d={record['d']} but y has length {obs.d}")
        return obs


def vector_to_csv_line(values: Sequence[float]) -> str:
    """One-vector-per-line CSV: plain comma-separated entries."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([repr(float(v)) for v in values])
    return buf.getvalue()


def vectors_from_csv(text: str) -> list[np.ndarray]:
    """Parse one vector per CSV line, skipping blank lines."""
    out = []
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        out.append(np.array([float(v) for v in row]))
    return out


def load_vector_schema() -> dict:
    """The JSON schema shipped with the package for vector records."""
    from importlib import resources

    text = resources.files("sparsefunc").joinpath("data/vector_record.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# Sparsity classes
# ---------------------------------------------------------------------------


class ClassTag(str, Enum):
    B0 = "B0"
    BQ = "Bq"
    B2_CAP_B0 = "B2_cap_B0"
    THETA_QU = "Theta_qu"
    THETA_S = "Theta_s"
    THETA_S_STAR = "Theta_s_star"


@dataclass(frozen=True)
class SparsityClass:
    """A tagged parameter class: a ball, an intersection, or a testing alternative.

    Use the classmethod constructors; they validate the parameter combinations
    each tag requires.
    """

    tag: ClassTag
    s: int | None = None
    q: float | None = None
    r: float | None = None
    kappa: float | None = None
    delta: float | None = None

    @classmethod
    def b0(cls, s: int) -> "SparsityClass":
        if s < 1:
            raise ValueError("s must be >= 1")
        return cls(ClassTag.B0, s=int(s))

    @classmethod
    def bq(cls, q: float, r: float) -> "SparsityClass":
        if not 0 < q <= 2:
            raise ValueError("q must lie in (0, 2]")
        if r <= 0:
            raise ValueError("r must be positive")
        return cls(ClassTag.BQ, q=float(q), r=float(r))

    @classmethod
    def b2_cap_b0(cls, kappa: float, s: int) -> "SparsityClass":
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        if s < 1:
            raise ValueError("s must be >= 1")
        return cls(ClassTag.B2_CAP_B0, kappa=float(kappa), s=int(s))

    @classmethod
    def theta_qu(cls, q: float, u: float, delta: float) -> "SparsityClass":
        """Alternative {theta in B_q(u): ||theta||_2 >= delta}; q=0 means B_0(u)."""
        if not 0 <= q < 2:
            raise ValueError("q must lie in [0, 2)")
        if u <= 0 or delta <= 0:
            raise ValueError("u and delta must be positive")
        if q == 0 and int(u) != u:
            raise ValueError("for q=0 the radius u is a sparsity level and must be an integer")
        return cls(ClassTag.THETA_QU, q=float(q), r=float(u), delta=float(delta))

    @classmethod
    def theta_s(cls, s: int, delta: float) -> "SparsityClass":
        """Exactly s nonzero entries, each equal to delta."""
        if s < 1 or delta <= 0:
            raise ValueError("need s >= 1 and delta > 0")
        return cls(ClassTag.THETA_S, s=int(s), delta=float(delta))

    @classmethod
    def theta_s_star(cls, s: int, delta: float) -> "SparsityClass":
        """Exactly s nonzero entries, each of magnitude >= delta."""
        if s < 1 or delta <= 0:
            raise ValueError("need s >= 1 and delta > 0")
        return cls(ClassTag.THETA_S_STAR, s=int(s), delta=float(delta))

    def with_delta(self, delta: float) -> "SparsityClass":
        """Same class shape with a new separation value (testing alternatives)."""
        if self.tag == ClassTag.THETA_QU:
            return SparsityClass.theta_qu(self.q, self.r, delta)
        if self.tag == ClassTag.THETA_S:
            return SparsityClass.theta_s(self.s, delta)
        if self.tag == ClassTag.THETA_S_STAR:
            return SparsityClass.theta_s_star(self.s, delta)
        raise ValueError(f"{self.tag.value} carries no separation parameter")


def membership(theta: ParameterVector, cls: SparsityClass) -> bool:
    """Exact predicate: does theta belong to the class?

    Ball-radius and separation comparisons allow 1e-12 relative slack to
    absorb IEEE roundoff on boundary constructions; set-valued conditions
    (supports, exact coefficient values) are checked exactly.
    """
    tag = cls.tag
    if tag == ClassTag.B0:
        return theta.sparsity <= cls.s
    if tag == ClassTag.BQ:
        return theta.lq_norm(cls.q) <= cls.r * (1.0 + _BOUNDARY_RTOL)
    if tag == ClassTag.B2_CAP_B0:
        return (
            theta.sparsity <= cls.s
            and theta.l2_norm() <= cls.kappa * (1.0 + _BOUNDARY_RTOL)
        )
    if tag == ClassTag.THETA_QU:
        if cls.q == 0:
            in_ball = theta.sparsity <= int(cls.r)
        else:
            in_ball = theta.lq_norm(cls.q) <= cls.r * (1.0 + _BOUNDARY_RTOL)
        return in_ball and theta.l2_norm() >= cls.delta * (1.0 - _BOUNDARY_RTOL)
    if tag == ClassTag.THETA_S:
        if theta.sparsity != cls.s:
            return False
        nonzero = theta.theta[theta.theta != 0]
        return bool(np.all(nonzero == cls.delta))
    if tag == ClassTag.THETA_S_STAR:
        if theta.sparsity != cls.s:
            return False
        nonzero = theta.theta[theta.theta != 0]
        return bool(np.all(np.abs(nonzero) >= cls.delta * (1.0 - _BOUNDARY_RTOL)))
    raise ValueError(f"unknown class tag {tag!r}")


# ---------------------------------------------------------------------------
# Observation generation and priors
# ---------------------------------------------------------------------------


def generate_observation(theta: ParameterVector, sigma: float, rng_seed) -> ObservationBatch:
    """Draw y = theta + sigma * xi with i.i.d. standard normal xi.

    Deterministic for a fixed seed; pass distinct ``SeedSequence`` streams for
    concurrent replications.
    """
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    rng = _as_rng(rng_seed)
    noise = rng.standard_normal(theta.d)
    return ObservationBatch(theta.theta + sigma * noise, sigma)


class PriorKind(str, Enum):
    UNIFORM_POSITIVE = "uniform_positive"
    UNIFORM_SIGNED = "uniform_signed"


@dataclass(frozen=True)
class SparsePrior:
    """Uniform prior on s-sparse vectors with coefficients sigma*rho (or +/-)."""

    kind: PriorKind
    s: int
    rho: float
    sigma: float
    d: int

    def __post_init__(self):
        if not 1 <= self.s <= self.d:
            raise ValueError("need 1 <= s <= d")
        if self.rho <= 0 or self.sigma <= 0:
            raise ValueError("rho and sigma must be positive")

    @property
    def coefficient(self) -> float:
        return self.sigma * self.rho


def sample_prior(prior: SparsePrior, rng_seed) -> ParameterVector:
    """Draw theta from the prior: uniform size-s support, coefficients sigma*rho.

    The support is the first s entries of a full Fisher-Yates permutation of
    the indices, hence exactly uniform over the C(d, s) supports.  For the
    signed prior, each coefficient independently takes value +/- sigma*rho.
    """
    rng = _as_rng(rng_seed)
    support = rng.permutation(prior.d)[: prior.s]
    theta = np.zeros(prior.d)
    if prior.kind == PriorKind.UNIFORM_SIGNED:
        signs = rng.integers(0, 2, size=prior.s) * 2 - 1
        theta[support] = signs * prior.coefficient
    else:
        theta[support] = prior.coefficient
    return ParameterVector(theta, label=f"prior_{prior.kind.value}")


def spike_vector(d: int, n_spikes: int, value: float, label: str) -> ParameterVector:
    """First n_spikes coordinates equal to value, rest zero."""
    theta = np.zeros(d)
    theta[:n_spikes] = value
    return ParameterVector(theta, label=label)


def worst_case_configs(cls: SparsityClass, sigma: float, d: int) -> list[ParameterVector]:
    """Deterministic near-extremal members of the class, labeled by construction.

    The exact supremum over an infinite class is not computable; these are the
    witnesses suggested by the lower-bound priors: equal-spike vectors at the
    critical amplitude sigma*sqrt(log(1+d/s^2)), single spikes at the ball
    radius, and the zero vector.  Every returned vector passes
    :func:`membership` for the class.
    """
    if sigma <= 0 or d < 1:
        raise ValueError("need sigma > 0 and d >= 1")
    configs: list[ParameterVector] = []

    def add(vec: ParameterVector):
        if membership(vec, cls):
            configs.append(vec)

    tag = cls.tag
    if tag == ClassTag.B0:
        s = cls.s
        rho = sigma * math.sqrt(math.log1p(d / (s * s)))
        add(ParameterVector(np.zeros(d), label="zero"))
        add(spike_vector(d, s, rho, "equal_spikes_critical"))
        add(spike_vector(d, s, 2.0 * rho, "equal_spikes_2x"))
        add(spike_vector(d, 1, rho * math.sqrt(s), "single_spike"))
    elif tag == ClassTag.B2_CAP_B0:
        s, kappa = cls.s, cls.kappa
        rho = sigma * math.sqrt(math.log1p(d / (s * s)))
        add(ParameterVector(np.zeros(d), label="zero"))
        add(spike_vector(d, 1, kappa, "single_spike_at_radius"))
        b = math.log(2.0)
        if kappa > b * sigma:
            add(spike_vector(d, 1, kappa - b * sigma / 2.0, "single_spike_off_radius"))
        capped = min(rho, kappa / math.sqrt(s)) * (1.0 - _BOUNDARY_RTOL)
        add(spike_vector(d, s, capped, "equal_spikes_capped"))
    elif tag == ClassTag.BQ:
        from .rates import effective_sparsity  # local import to avoid a cycle

        q, r = cls.q, cls.r
        m = effective_sparsity(r, sigma, q, d)
        add(ParameterVector(np.zeros(d), label="zero"))
        add(spike_vector(d, 1, r, "single_spike_at_radius"))
        if m >= 1:
            value = r * m ** (-1.0 / q) * (1.0 - _BOUNDARY_RTOL)
            add(spike_vector(d, m, value, "effective_spikes"))
    elif tag == ClassTag.THETA_QU:
        delta = cls.delta
        if cls.q == 0:
            s = int(cls.r)
            add(spike_vector(d, s, delta / math.sqrt(s) * (1.0 + _BOUNDARY_RTOL), "equal_spikes_l2"))
            add(spike_vector(d, 1, delta, "single_spike_l2"))
        else:
            from .rates import effective_sparsity

            m = effective_sparsity(cls.r, sigma, cls.q, d)
            if m >= 1:
                add(spike_vector(d, m, delta / math.sqrt(m) * (1.0 + _BOUNDARY_RTOL), "effective_spikes_l2"))
            add(spike_vector(d, 1, delta, "single_spike_l2"))
    elif tag == ClassTag.THETA_S:
        add(spike_vector(d, cls.s, cls.delta, "equal_spikes_exact"))
    elif tag == ClassTag.THETA_S_STAR:
        add(spike_vector(d, cls.s, cls.delta, "equal_spikes_floor"))
        theta = np.zeros(d)
        theta[: cls.s] = cls.delta * np.where(np.arange(cls.s) % 2 == 0, 1.0, -1.0)
        add(ParameterVector(theta, label="alternating_spikes_floor"))
    else:
        raise ValueError(f"unknown class tag {tag!r}")
    return configs
