"""Polarization qubit amplitudes (H = logical 0, V = logical 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10


@dataclass(frozen=True)
class QubitState:
    """Normalized amplitude pair ``alpha|H> + beta|V>`` in one spatial path."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if not math.isfinite(norm) or abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"qubit amplitudes are not normalized (norm^2 = {norm!r})")

    @classmethod
    def normalized(cls, alpha: complex, beta: complex) -> "QubitState":
        norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm == 0.0:
            raise ValueError("cannot normalize a zero qubit")
        return cls(alpha / norm, beta / norm)

    @classmethod
    def from_angle(cls, angle_deg: float, phase_deg: float = 0.0) -> "QubitState":
        """Linear polarization at ``angle_deg`` from H, with relative phase on V."""
        theta = math.radians(angle_deg)
        phase = np.exp(1j * math.radians(phase_deg))
        return cls(math.cos(theta), phase * math.sin(theta))

    @classmethod
    def zero(cls) -> "QubitState":
        return cls(1.0, 0.0)

    @classmethod
    def one(cls) -> "QubitState":
        return cls(0.0, 1.0)

    @classmethod
    def plus(cls) -> "QubitState":
        return cls(1 / math.sqrt(2), 1 / math.sqrt(2))

    @classmethod
    def basis(cls, bit: int) -> "QubitState":
        if bit not in (0, 1):
            raise ValueError(f"logical value must be 0 or 1, got {bit!r}")
        return cls.one() if bit else cls.zero()

    @classmethod
    def random(cls, rng: np.random.Generator) -> "QubitState":
        """Haar-distributed pure qubit."""
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        return cls.normalized(z[0], z[1])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def angle_deg(self) -> float:
        """Polarization angle for real-amplitude (linear) states, in [0, 180)."""
        sign = 1.0 if (self.alpha * self.beta.conjugate()).real >= 0 else -1.0
        return math.degrees(math.atan2(sign * abs(self.beta), abs(self.alpha))) % 180.0
