"""Seeded families of test sequences.

``harmonic_spiral``, ``power_decay`` and ``collinear`` have norms
``i**-p`` and so tend to zero; ``constant_rotation`` keeps every norm at
``c`` and can never be signed into a convergent series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import uniform_sphere

FAMILIES = (
    "harmonic_spiral",
    "power_decay",
    "constant_rotation",
    "collinear",
    "uniform_random_ball",
)
DECAYING = ("harmonic_spiral", "power_decay", "collinear")


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class SequenceSpec:
    family: str
    length: int
    p: float = 1.0
    theta: float = 1.0
    c: float = 1.0
    seed: int = 0
    dim: int = 2

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise GeneratorError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.length < 1:
            raise GeneratorError("length must be >= 1")
        if self.dim < 2:
            raise GeneratorError("dim must be >= 2")
        if self.family in DECAYING and self.p <= 0:
            raise GeneratorError(f"{self.family} needs a positive decay exponent")
        if self.family == "uniform_random_ball" and self.p < 0:
            raise GeneratorError("uniform_random_ball needs p >= 0")
        if self.family == "constant_rotation" and self.c <= 0:
            raise GeneratorError("constant_rotation needs a positive norm c")
        if self.family in ("harmonic_spiral", "constant_rotation") and self.dim != 2:
            raise GeneratorError(f"{self.family} is planar")


def _at_least(vecs: np.ndarray, c: float) -> np.ndarray:
    # rounding can leave a computed norm a hair under c, which would let the
    # term escape the non-decaying prefix; nudge such rows up by one ulp at a time
    low = np.linalg.norm(vecs, axis=1) < c
    while np.any(low):
        vecs[low] *= 1.0 + 2.0**-52
        low = np.linalg.norm(vecs, axis=1) < c
    return vecs


def generate(spec: SequenceSpec) -> np.ndarray:
    """Return an ``(length, dim)`` array of terms."""
    spec.validate()
    i = np.arange(1, spec.length + 1, dtype=float)
    rng = np.random.default_rng(spec.seed)
    if spec.family in ("harmonic_spiral", "constant_rotation"):
        angle = i * spec.theta
        unit = np.column_stack([np.cos(angle), np.sin(angle)])
        if spec.family == "harmonic_spiral":
            return unit * (i ** -spec.p)[:, None]
        return _at_least(unit * spec.c, spec.c)
    if spec.family == "collinear":
        out = np.zeros((spec.length, spec.dim))
        out[:, 0] = i ** -spec.p
        return out
    if spec.family == "power_decay":
        return uniform_sphere(rng, spec.length, spec.dim) * (i ** -spec.p)[:, None]
    # uniform_random_ball: uniform in the ball of radius c, optionally decayed
    r = spec.c * rng.random(spec.length) ** (1.0 / spec.dim)
    return uniform_sphere(rng, spec.length, spec.dim) * (r * i ** -spec.p)[:, None]
