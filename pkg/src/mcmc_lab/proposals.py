"""Symmetric increment proposals: Gaussian, Laplace, and Uniform.

Increments have i.i.d. components and an exactly symmetric density,
``Q(eps) = Q(-eps)``. ``scale`` means the per-component standard deviation
(sigma) for the gaussian and laplace kinds, and the interval length ``b`` for
the uniform kind (components are uniform on ``[-b/2, b/2]``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .streams import RngStream

KINDS = ("gaussian", "laplace", "uniform")

# Uniform on [-b/2, b/2] has sd b/sqrt(12); used to express b via a target sd.
_UNIFORM_SD_FACTOR = math.sqrt(12.0)


def scale_from_ell(kind: str, ell: float, dim: int) -> float:
    """Map the dimension-free scaling constant ``ell`` to a proposal scale.

    The convention is that the per-component increment standard deviation is
    ``ell / sqrt(dim)`` for every kind, which for the uniform kind means an
    interval length ``b = sqrt(12) * ell / sqrt(dim)``.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown proposal kind {kind!r}")
    if ell <= 0:
        raise ValueError(f"ell must be positive, got {ell}")
    sd = ell / math.sqrt(dim)
    return _UNIFORM_SD_FACTOR * sd if kind == "uniform" else sd


@dataclass(frozen=True)
class Proposal:
    kind: str
    scale: float
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown proposal kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError(f"proposal scale must be positive, got {self.scale}")
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")

    @classmethod
    def from_config(cls, spec: dict) -> "Proposal":
        """Build from ``{kind, scale | ell, dimension}``.

        Exactly one of ``scale`` and ``ell`` may be given; ``ell`` is mapped
        through :func:`scale_from_ell` exactly once.
        """
        kind = spec.get("kind", "gaussian")
        if "dimension" not in spec:
            raise ValueError("proposal spec needs a 'dimension' field")
        dim = int(spec["dimension"])
        has_scale, has_ell = "scale" in spec, "ell" in spec
        if has_scale == has_ell:
            raise ValueError("give exactly one of 'scale' or 'ell'")
        scale = float(spec["scale"]) if has_scale else scale_from_ell(kind, float(spec["ell"]), dim)
        return cls(kind=kind, scale=scale, dim=dim)

    def sample_increment(self, rng: RngStream) -> np.ndarray:
        return self.sample_increment_block(rng, 1)[0]

    def sample_increment_block(self, rng: RngStream, count: int) -> np.ndarray:
        """Draw ``count`` increments at once, shape ``(count, dim)``."""
        gen = rng.generator
        shape = (count, self.dim)
        if self.kind == "gaussian":
            return gen.normal(0.0, self.scale, size=shape)
        if self.kind == "laplace":
            # per-component variance scale^2 => classical scale parameter scale/sqrt(2)
            return gen.laplace(0.0, self.scale / math.sqrt(2.0), size=shape)
        half = 0.5 * self.scale
        return gen.uniform(-half, half, size=shape)

    def increment_log_density(self, eps) -> float:
        """Log Q(eps) up to the family constant; exactly symmetric in eps."""
        eps = np.asarray(eps, dtype=float)
        if eps.shape != (self.dim,):
            raise ValueError(f"expected increment of dimension {self.dim}, got shape {eps.shape}")
        if self.kind == "gaussian":
            return float(-0.5 * np.sum(eps * eps) / self.scale**2)
        if self.kind == "laplace":
            return float(-math.sqrt(2.0) * np.sum(np.abs(eps)) / self.scale)
        half = 0.5 * self.scale
        return 0.0 if bool(np.all(np.abs(eps) <= half)) else -math.inf
