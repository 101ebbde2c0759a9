"""Random amplitude models for the classical field approximation.

Each vacuum mode gets one complex amplitude a_i per realization, held fixed
for that realization, with <a_i* a_i> = 1/2:

  gaussian     real and imaginary parts independent normals of variance 1/4
  fixed_phase  |a_i| = 1/sqrt(2), phase uniform on [0, 2 pi)
  zero         every a_i = 0; degenerate hook with second moment 0
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

SECOND_MOMENT = 0.5


class AmplitudeKind(str, Enum):
    GAUSSIAN = "gaussian"
    FIXED_PHASE = "fixed_phase"
    ZERO = "zero"


@dataclass(frozen=True)
class AmplitudeModel:
    kind: AmplitudeKind = AmplitudeKind.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "kind", AmplitudeKind(self.kind))

    @property
    def second_moment(self) -> float:
        return 0.0 if self.kind is AmplitudeKind.ZERO else SECOND_MOMENT

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind is AmplitudeKind.GAUSSIAN:
            scale = np.sqrt(SECOND_MOMENT / 2)
            return rng.normal(scale=scale, size=shape) + 1j * rng.normal(scale=scale, size=shape)
        if self.kind is AmplitudeKind.FIXED_PHASE:
            phases = rng.uniform(0.0, 2 * np.pi, size=shape)
            return np.sqrt(SECOND_MOMENT) * np.exp(1j * phases)
        return np.zeros(shape, dtype=complex)
