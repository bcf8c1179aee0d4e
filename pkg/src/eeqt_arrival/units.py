"""Natural units hbar = m = eta = 1.

Every module below this one works in dimensionless numbers; physical values
only appear at the command line boundary.  For a point detector the coupling
kappa carries dimension of velocity (F^2 = kappa |u><u| with <x|u> = delta(x-a)),
which is why alpha = m eta kappa / hbar is dimensionless.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Dimension(str, enum.Enum):
    TIME = "time"
    LENGTH = "length"
    VELOCITY = "velocity"
    COUPLING = "coupling"


@dataclass(frozen=True)
class PhysicalScale:
    hbar: float = 1.0
    mass: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "eta"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def time_unit(self) -> float:
        return self.mass * self.eta**2 / self.hbar

    @property
    def length_unit(self) -> float:
        return self.eta

    @property
    def velocity_unit(self) -> float:
        return self.hbar / (self.mass * self.eta)

    # kappa -> alpha = m eta kappa / hbar
    @property
    def coupling_unit(self) -> float:
        return self.hbar / (self.mass * self.eta)

    def unit(self, dim: Dimension | str) -> float:
        try:
            dim = Dimension(dim)
        except ValueError:
            supported = ", ".join(d.value for d in Dimension)
            raise ValueError(f"unsupported dimension {dim!r}; expected one of: {supported}") from None
        return {
            Dimension.TIME: self.time_unit,
            Dimension.LENGTH: self.length_unit,
            Dimension.VELOCITY: self.velocity_unit,
            Dimension.COUPLING: self.coupling_unit,
        }[dim]


def to_natural(scale: PhysicalScale, value: float, dim: Dimension | str) -> float:
    """Express a dimensioned ``value`` in units of hbar = m = eta = 1."""
    return value / scale.unit(dim)


def from_natural(scale: PhysicalScale, value: float, dim: Dimension | str) -> float:
    return value * scale.unit(dim)


def alpha_from_kappa(scale: PhysicalScale, kappa: float) -> float:
    return to_natural(scale, kappa, Dimension.COUPLING)


def kappa_from_alpha(scale: PhysicalScale, alpha: float) -> float:
    return from_natural(scale, alpha, Dimension.COUPLING)
