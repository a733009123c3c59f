"""Deterministic, splittable random streams.

Every simulation in this package owns exactly one stream, derived up front
from a base seed and a lineage of labels. Streams with distinct lineages are
statistically independent, and the same ``(base_seed, lineage)`` always
reproduces the same draw sequence, so sweeps can be partitioned across any
number of workers without changing a single bit of output.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

# Philox is counter-based: child streams are independent without jumping.
_BIT_GENERATOR = np.random.Philox


def _encode_label(label) -> int:
    """Map a lineage label to a stable non-negative integer.

    Integers in [0, 2**63) pass through so lineages stay human-readable in
    entropy terms; everything else is hashed with a keyed-independent stable
    hash (Python's builtin ``hash`` is salted per process and unusable here).
    """
    if isinstance(label, bool):
        raise TypeError("bool labels are ambiguous; use int or str")
    if isinstance(label, (int, np.integer)):
        value = int(label)
        if 0 <= value < 2**63:
            return value
        data = f"int:{value}".encode()
    elif isinstance(label, str):
        data = f"str:{label}".encode()
    else:
        raise TypeError(f"stream labels must be int or str, got {type(label).__name__}")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


@dataclass
class RngStream:
    """A single-owner random stream with a recorded derivation lineage."""

    base_seed: int
    lineage: tuple
    generator: np.random.Generator = field(repr=False)

    def split(self, *labels) -> "RngStream":
        """Derive an independent child stream; self is left untouched."""
        return derive_stream(self.base_seed, list(self.lineage) + list(labels))


def derive_stream(base_seed: int, labels=()) -> RngStream:
    """Derive the stream identified by ``(base_seed, labels)``.

    The derivation is a pure function of its arguments: calling it twice, in
    any order relative to other derivations, yields generators that produce
    identical sequences.
    """
    lineage = tuple(labels)
    entropy = [_encode_label(base_seed)] + [_encode_label(lab) for lab in lineage]
    seq = np.random.SeedSequence(entropy)
    return RngStream(
        base_seed=int(base_seed),
        lineage=lineage,
        generator=np.random.Generator(_BIT_GENERATOR(seq)),
    )
