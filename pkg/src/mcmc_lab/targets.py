"""Target densities: evaluation in log space, tempering, and direct sampling.

All families evaluate a normalized log density where the constant is cheap to
carry, return exactly ``-inf`` outside support, and vectorize over batches of
points. Density evaluation for a batch row never depends on the other rows,
which is what makes sweep results independent of how work is partitioned.

Direct tempered sampling (draws from ``density proportional to pi^beta``) is
exact for product and Gaussian families. For the mixture families it uses a
well-separated-mode approximation: pick a mode with probability proportional
to ``w^beta``, then draw a Gaussian around it with variance divided by
``beta``. The temperature-ladder builder only needs representative draws, and
the mixture targets used here keep their modes many deviations apart.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .distributions import InvalidParameterError, dist_spec, make_dist
from .streams import RngStream, derive_stream

_LOG_2PI = math.log(2.0 * math.pi)


class UnsupportedFamilyError(ValueError):
    """Operation not available for this target family."""


def _check_beta(beta: float):
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"inverse temperature must be in (0, 1], got {beta}")


class Target(ABC):
    """A target density on R^d, immutable after construction."""

    dim: int

    def log_density(self, x) -> float:
        """Log target density at a single point (``-inf`` outside support)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected point of dimension {self.dim}, got shape {x.shape}")
        return float(self.log_density_batch(x[None, :])[0])

    @abstractmethod
    def log_density_batch(self, points: np.ndarray) -> np.ndarray:
        """Log density for an ``(n, d)`` batch of points, returned as ``(n,)``."""

    def tempered_log_density(self, x, beta: float) -> float:
        """``beta * log_density(x)``; ``-inf`` stays ``-inf``."""
        _check_beta(beta)
        return beta * self.log_density(x)

    def tempered_log_density_batch(self, points, beta: float) -> np.ndarray:
        _check_beta(beta)
        return beta * self.log_density_batch(points)

    @abstractmethod
    def direct_tempered_sample(self, beta: float, rng: RngStream, size=None) -> np.ndarray:
        """Draw from the density proportional to ``pi^beta``.

        Returns shape ``(d,)`` for ``size=None``, else ``(size, d)``.
        """

    @abstractmethod
    def central_point(self) -> np.ndarray:
        """A canonical in-support starting point (mean or midpoint)."""

    @abstractmethod
    def spec(self) -> dict:
        """Tagged config record that reconstructs this target exactly."""

    def _sample_shape(self, size):
        return (self.dim,) if size is None else (int(size), self.dim)


class IIDProduct(Target):
    """``pi(x) = prod_i f(x_i)`` with an identical 1-d component ``f``."""

    def __init__(self, component, dim: int):
        if dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {dim}")
        self.component = component
        self.dim = int(dim)

    def log_density_batch(self, points):
        points = np.asarray(points, dtype=float)
        return np.sum(self.component.log_pdf(points), axis=-1)

    def direct_tempered_sample(self, beta, rng, size=None):
        _check_beta(beta)
        return np.asarray(self.component.tempered(beta).sample(rng, self._sample_shape(size)))

    def central_point(self):
        return np.full(self.dim, self.component.mean())

    def spec(self):
        return {"family": "iid_product", "dimension": self.dim, "component": dist_spec(self.component)}


class Hypercube(Target):
    """Uniform density on ``[lo, hi]^d``; zero outside, so flat inside."""

    def __init__(self, dim: int, lo: float = 0.0, hi: float = 1.0):
        if dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {dim}")
        if not lo < hi:
            raise InvalidParameterError(f"hypercube requires lo < hi, got [{lo}, {hi}]")
        self.dim = int(dim)
        self.lo = float(lo)
        self.hi = float(hi)
        self._log_inside = -self.dim * math.log(self.hi - self.lo)

    def log_density_batch(self, points):
        points = np.asarray(points, dtype=float)
        inside = np.all((points >= self.lo) & (points <= self.hi), axis=-1)
        return np.where(inside, self._log_inside, -np.inf)

    def direct_tempered_sample(self, beta, rng, size=None):
        _check_beta(beta)
        return rng.generator.uniform(self.lo, self.hi, size=self._sample_shape(size))

    def central_point(self):
        return np.full(self.dim, 0.5 * (self.lo + self.hi))

    def spec(self):
        return {"family": "hypercube", "dimension": self.dim, "lo": self.lo, "hi": self.hi}


class StdGaussian(Target):
    """Standard multivariate Gaussian N(0, I_d)."""

    def __init__(self, dim: int):
        if dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {dim}")
        self.dim = int(dim)

    def log_density_batch(self, points):
        points = np.asarray(points, dtype=float)
        return -0.5 * np.sum(points * points, axis=-1) - 0.5 * self.dim * _LOG_2PI

    def direct_tempered_sample(self, beta, rng, size=None):
        _check_beta(beta)
        # pi^beta is N(0, I/beta)
        return rng.generator.normal(0.0, 1.0 / math.sqrt(beta), size=self._sample_shape(size))

    def central_point(self):
        return np.zeros(self.dim)

    def spec(self):
        return {"family": "std_gaussian", "dimension": self.dim}


def _check_mixture_weights(weights) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (3,):
        raise InvalidParameterError(f"expected 3 mixture weights, got {weights.shape}")
    if np.any(weights < 0) or not math.isclose(float(weights.sum()), 1.0, rel_tol=0, abs_tol=1e-12):
        raise InvalidParameterError(f"mixture weights must be >= 0 and sum to 1, got {weights}")
    return weights


def _check_scaling(scaling, dim) -> np.ndarray:
    scaling = np.asarray(scaling, dtype=float)
    if scaling.shape != (dim,):
        raise InvalidParameterError(f"scaling vector must have shape ({dim},), got {scaling.shape}")
    if np.any(scaling <= 0):
        raise InvalidParameterError("scaling factors must all be positive")
    return scaling


def draw_scaling_factors(dim: int, scaling_seed: int) -> np.ndarray:
    """Per-component factors ``C_i ~ Uniform[0, 2]``, frozen by ``scaling_seed``."""
    stream = derive_stream(scaling_seed, ["component-scaling"])
    return stream.generator.uniform(0.0, 2.0, size=dim)


class RoughCarpet(Target):
    """Product target whose 1-d component is a three-mode Gaussian mixture.

    Without scaling: ``pi(x) = prod_i f(x_i)`` with
    ``f(u) = sum_k w_k N(u | m_k, 1)``. With per-component factors ``C_i``:
    ``pi(x) = prod_i C_i f(C_i x_i)``.
    """

    def __init__(self, dim: int, modes=(-5.0, 0.0, 5.0), weights=(0.5, 0.3, 0.2), scaling=None,
                 scaling_seed=None):
        if dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {dim}")
        modes = np.asarray(modes, dtype=float)
        if modes.shape != (3,):
            raise InvalidParameterError(f"expected 3 modes, got shape {modes.shape}")
        self.dim = int(dim)
        self.modes = modes
        self.weights = _check_mixture_weights(weights)
        self.scaling = None if scaling is None else _check_scaling(scaling, dim)
        self.scaling_seed = scaling_seed
        # log f(u) = -u^2/2 + logsumexp_k(logw_k + m_k u - m_k^2/2) - log(2 pi)/2
        self._coef = np.log(self.weights) - 0.5 * self.modes**2

    def _component_log_pdf(self, u):
        c = self._coef
        m = self.modes
        lse = np.logaddexp(np.logaddexp(c[0] + m[0] * u, c[1] + m[1] * u), c[2] + m[2] * u)
        return lse - 0.5 * u * u - 0.5 * _LOG_2PI

    def log_density_batch(self, points):
        points = np.asarray(points, dtype=float)
        if self.scaling is None:
            return np.sum(self._component_log_pdf(points), axis=-1)
        u = points * self.scaling
        log_jac = float(np.sum(np.log(self.scaling)))
        return np.sum(self._component_log_pdf(u), axis=-1) + log_jac

    def direct_tempered_sample(self, beta, rng, size=None):
        _check_beta(beta)
        shape = self._sample_shape(size)
        probs = self.weights**beta
        probs = probs / probs.sum()
        picks = rng.generator.choice(3, size=shape, p=probs)
        u = self.modes[picks] + rng.generator.normal(0.0, 1.0 / math.sqrt(beta), size=shape)
        return u if self.scaling is None else u / self.scaling

    def central_point(self):
        mean_u = float(np.dot(self.weights, self.modes))
        point = np.full(self.dim, mean_u)
        return point if self.scaling is None else point / self.scaling

    def spec(self):
        out = {
            "family": "rough_carpet",
            "dimension": self.dim,
            "modes": [float(v) for v in self.modes],
            "weights": [float(v) for v in self.weights],
        }
        if self.scaling_seed is not None:
            out["scaling_seed"] = int(self.scaling_seed)
        if self.scaling is not None:
            out["scaling_factors"] = [float(v) for v in self.scaling]
        return out


class ThreeMixture(Target):
    """Weighted sum of three d-dimensional Gaussians (not a product density).

    All three components share the same diagonal covariance, the identity by
    default or ``diag(C)`` when per-component factors are supplied.
    """

    def __init__(self, dim: int, means, weights=(1 / 3, 1 / 3, 1 / 3), covariance_diagonal=None,
                 scaling_seed=None):
        if dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {dim}")
        means = np.asarray(means, dtype=float)
        if means.shape != (3, dim):
            raise InvalidParameterError(f"means must have shape (3, {dim}), got {means.shape}")
        self.dim = int(dim)
        self.means = means
        self.weights = _check_mixture_weights(weights)
        if covariance_diagonal is None:
            self.covariance_diagonal = None
            self._inv_c = np.ones(dim)
            logdet = 0.0
        else:
            self.covariance_diagonal = _check_scaling(covariance_diagonal, dim)
            self._inv_c = 1.0 / self.covariance_diagonal
            logdet = float(np.sum(np.log(self.covariance_diagonal)))
        self.scaling_seed = scaling_seed
        self._log_norm = -0.5 * (self.dim * _LOG_2PI + logdet)
        self._logw = np.log(self.weights)

    @classmethod
    def symmetric(cls, dim: int, separation: float, **kwargs) -> "ThreeMixture":
        """Means ``(+eps, 0, ..)``, ``(0, ..)``, ``(-eps, 0, ..)``."""
        means = np.zeros((3, dim))
        means[0, 0] = separation
        means[2, 0] = -separation
        return cls(dim, means, **kwargs)

    def _mode_log_terms(self, points):
        terms = []
        for k in range(3):
            z = points - self.means[k]
            terms.append(self._logw[k] - 0.5 * np.sum(z * z * self._inv_c, axis=-1))
        return terms

    def log_density_batch(self, points):
        points = np.asarray(points, dtype=float)
        t0, t1, t2 = self._mode_log_terms(points)
        return np.logaddexp(np.logaddexp(t0, t1), t2) + self._log_norm

    def direct_tempered_sample(self, beta, rng, size=None):
        _check_beta(beta)
        n = 1 if size is None else int(size)
        probs = self.weights**beta
        probs = probs / probs.sum()
        picks = rng.generator.choice(3, size=n, p=probs)
        sd = np.sqrt(self.covariance_diagonal / beta) if self.covariance_diagonal is not None \
            else np.full(self.dim, 1.0 / math.sqrt(beta))
        draws = self.means[picks] + rng.generator.normal(0.0, 1.0, size=(n, self.dim)) * sd
        return draws[0] if size is None else draws

    def central_point(self):
        return self.weights @ self.means

    def spec(self):
        out = {
            "family": "three_mixture",
            "dimension": self.dim,
            "means": [[float(v) for v in row] for row in self.means],
            "weights": [float(v) for v in self.weights],
        }
        if self.scaling_seed is not None:
            out["scaling_seed"] = int(self.scaling_seed)
        if self.covariance_diagonal is not None:
            out["covariance_diagonal"] = [float(v) for v in self.covariance_diagonal]
        return out


def make_target(spec: dict) -> Target:
    """Build a target from a tagged config record.

    Families and their fields (``dimension`` is always required):

    - ``iid_product``: ``component`` (a distribution record)
    - ``hypercube``: optional ``lo``/``hi`` (default unit cube)
    - ``std_gaussian``
    - ``rough_carpet``: optional ``modes`` (default ``[-5, 0, 5]``), ``weights``
      (default ``[0.5, 0.3, 0.2]``), ``scaling_seed`` or explicit
      ``scaling_factors`` for the inhomogeneous variant
    - ``three_mixture``: ``epsilon`` (symmetric means along the first axis) or
      explicit ``means``; optional ``weights`` (default equal), ``scaling_seed``
      or explicit ``covariance_diagonal``

    When ``scaling_seed`` is given and no explicit factors are, the factors are
    drawn once as ``Uniform[0, 2]`` i.i.d. from a stream derived from the seed
    and frozen into the target (and into its ``spec()`` echo).
    """
    if "family" not in spec:
        raise InvalidParameterError("target spec needs a 'family' field")
    family = spec["family"]
    if "dimension" not in spec:
        raise InvalidParameterError("target spec needs a 'dimension' field")
    dim = int(spec["dimension"])

    if family == "iid_product":
        if "component" not in spec:
            raise InvalidParameterError("iid_product spec needs a 'component' record")
        return IIDProduct(make_dist(spec["component"]), dim)

    if family == "hypercube":
        return Hypercube(dim, lo=float(spec.get("lo", 0.0)), hi=float(spec.get("hi", 1.0)))

    if family == "std_gaussian":
        return StdGaussian(dim)

    if family == "rough_carpet":
        scaling, seed = _resolve_scaling(spec, "scaling_factors", dim)
        return RoughCarpet(
            dim,
            modes=spec.get("modes", (-5.0, 0.0, 5.0)),
            weights=spec.get("weights", (0.5, 0.3, 0.2)),
            scaling=scaling,
            scaling_seed=seed,
        )

    if family == "three_mixture":
        if "means" in spec:
            means = spec["means"]
        elif "epsilon" in spec:
            eps = float(spec["epsilon"])
            means = np.zeros((3, dim))
            means[0, 0] = eps
            means[2, 0] = -eps
        else:
            raise InvalidParameterError("three_mixture spec needs 'means' or 'epsilon'")
        scaling, seed = _resolve_scaling(spec, "covariance_diagonal", dim)
        return ThreeMixture(
            dim,
            means,
            weights=spec.get("weights", (1 / 3, 1 / 3, 1 / 3)),
            covariance_diagonal=scaling,
            scaling_seed=seed,
        )

    raise InvalidParameterError(f"unknown target family {family!r}")


def _resolve_scaling(spec, explicit_key, dim):
    seed = spec.get("scaling_seed")
    if explicit_key in spec:
        return np.asarray(spec[explicit_key], dtype=float), seed
    if seed is not None:
        return draw_scaling_factors(dim, int(seed)), int(seed)
    return None, None
