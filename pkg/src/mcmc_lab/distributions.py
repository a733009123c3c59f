"""One-dimensional base distributions.

Each distribution validates its parameters at construction, evaluates a
normalized log density (``-inf`` outside support), draws exact samples
through numpy's Generator, and knows its own power-tempered form where one
exists in closed form. These are the building blocks for i.i.d. product
targets and for increment proposals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .streams import RngStream

_LOG_2PI = math.log(2.0 * math.pi)


class InvalidParameterError(ValueError):
    """A distribution was constructed with out-of-range parameters."""


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidParameterError(f"uniform requires lo < hi, got [{self.lo}, {self.hi}]")

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, -math.log(self.hi - self.lo), -np.inf)

    def sample(self, rng: RngStream, size=None):
        return rng.generator.uniform(self.lo, self.hi, size=size)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def variance(self) -> float:
        return (self.hi - self.lo) ** 2 / 12.0

    def tempered(self, beta: float) -> "Uniform":
        return self


@dataclass(frozen=True)
class Gaussian:
    loc: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise InvalidParameterError(f"gaussian requires sd > 0, got {self.sd}")

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.loc) / self.sd
        return -0.5 * z * z - math.log(self.sd) - 0.5 * _LOG_2PI

    def sample(self, rng: RngStream, size=None):
        return rng.generator.normal(self.loc, self.sd, size=size)

    def mean(self) -> float:
        return self.loc

    def variance(self) -> float:
        return self.sd**2

    def tempered(self, beta: float) -> "Gaussian":
        return Gaussian(self.loc, self.sd / math.sqrt(beta))


@dataclass(frozen=True)
class Gamma:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise InvalidParameterError(
                f"gamma requires shape > 0 and scale > 0, got ({self.shape}, {self.scale})"
            )

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        const = -math.lgamma(self.shape) - self.shape * math.log(self.scale)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (self.shape - 1.0) * np.log(x) - x / self.scale + const
        return np.where(x > 0, val, -np.inf)

    def sample(self, rng: RngStream, size=None):
        return rng.generator.gamma(self.shape, self.scale, size=size)

    def mean(self) -> float:
        return self.shape * self.scale

    def variance(self) -> float:
        return self.shape * self.scale**2

    def tempered(self, beta: float) -> "Gamma":
        # pi^beta propto x^{beta(k-1)} e^{-beta x/theta}
        shape = beta * (self.shape - 1.0) + 1.0
        if shape <= 0:
            raise InvalidParameterError(f"gamma shape {self.shape} not temperable at beta={beta}")
        return Gamma(shape, self.scale / beta)


@dataclass(frozen=True)
class Beta:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidParameterError(f"beta requires a > 0 and b > 0, got ({self.a}, {self.b})")

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        const = math.lgamma(self.a + self.b) - math.lgamma(self.a) - math.lgamma(self.b)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (self.a - 1.0) * np.log(x) + (self.b - 1.0) * np.log1p(-x) + const
        return np.where((x > 0) & (x < 1), val, -np.inf)

    def sample(self, rng: RngStream, size=None):
        return rng.generator.beta(self.a, self.b, size=size)

    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def variance(self) -> float:
        s = self.a + self.b
        return self.a * self.b / (s * s * (s + 1.0))

    def tempered(self, beta: float) -> "Beta":
        a = beta * (self.a - 1.0) + 1.0
        b = beta * (self.b - 1.0) + 1.0
        if a <= 0 or b <= 0:
            raise InvalidParameterError(f"beta({self.a},{self.b}) not temperable at beta={beta}")
        return Beta(a, b)


@dataclass(frozen=True)
class Laplace:
    """Double exponential parameterized by its standard deviation.

    ``sd`` is the distribution's standard deviation; the classical scale
    parameter is ``sd / sqrt(2)``.
    """

    location: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise InvalidParameterError(f"laplace requires sd > 0, got {self.sd}")

    @property
    def b(self) -> float:
        return self.sd / math.sqrt(2.0)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        return -np.abs(x - self.location) / self.b - math.log(2.0 * self.b)

    def sample(self, rng: RngStream, size=None):
        return rng.generator.laplace(self.location, self.b, size=size)

    def mean(self) -> float:
        return self.location

    def variance(self) -> float:
        return self.sd**2

    def tempered(self, beta: float) -> "Laplace":
        # exp(-|x-m|/b)^beta is Laplace with scale b/beta, i.e. sd/beta.
        return Laplace(self.location, self.sd / beta)


# config key -> constructor field, per kind
_KINDS = {
    "uniform": (Uniform, {"lo": "lo", "hi": "hi"}),
    "gaussian": (Gaussian, {"mean": "loc", "sd": "sd"}),
    "gamma": (Gamma, {"shape": "shape", "scale": "scale"}),
    "beta": (Beta, {"a": "a", "b": "b"}),
    "laplace": (Laplace, {"location": "location", "sd": "sd"}),
}


def make_dist(spec: dict):
    """Build a distribution from a tagged config record.

    Examples: ``{"kind": "gamma", "shape": 3, "scale": 2}``,
    ``{"kind": "beta", "a": 3, "b": 2}``, ``{"kind": "uniform", "lo": 0, "hi": 1}``.
    """
    if "kind" not in spec:
        raise InvalidParameterError("distribution spec needs a 'kind' field")
    kind = spec["kind"]
    if kind not in _KINDS:
        raise InvalidParameterError(f"unknown distribution kind {kind!r}")
    cls, params = _KINDS[kind]
    missing = [p for p in params if p not in spec]
    if missing:
        raise InvalidParameterError(f"{kind} spec missing parameters: {missing}")
    extra = set(spec) - set(params) - {"kind"}
    if extra:
        raise InvalidParameterError(f"{kind} spec has unknown parameters: {sorted(extra)}")
    return cls(**{field: float(spec[key]) for key, field in params.items()})


def dist_spec(dist) -> dict:
    """Inverse of :func:`make_dist`, for config echoes."""
    for kind, (cls, params) in _KINDS.items():
        if isinstance(dist, cls):
            return {"kind": kind, **{key: float(getattr(dist, field)) for key, field in params.items()}}
    raise TypeError(f"not a known distribution: {dist!r}")


def sample(dist, rng: RngStream):
    """Draw one value from ``dist`` using ``rng``."""
    return float(dist.sample(rng))
