"""Parameters, unit conversions and the Z4 parity algebra of the two-photon Rabi model.

The rescaled Hamiltonian is

    K = 2x a^dag a + mu sigma_x + [(a^dag)^2 + a^2] sigma_z,

with x = omega/(4g) and mu = omega0/(4g).  Everything downstream works with the
pair (kappa, chi), where x = (kappa + 1/kappa)/2 and

    E = 2 (1/kappa - kappa) (chi - 1) - kappa.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

__all__ = [
    "ConditioningWarning",
    "PhysicalParams",
    "ModelParams",
    "Parity",
    "to_model_params",
    "kappa_from_x",
    "x_from_kappa",
    "energy_from_chi",
    "chi_from_energy",
    "parity_initial_conditions",
]

# x - 1 below this makes kappa sensitive to the last few bits of x
NEAR_BOUNDARY = 1e-6


class ConditioningWarning(UserWarning):
    """Input is valid but close to a point where the parametrisation degenerates."""


@dataclass(frozen=True)
class PhysicalParams:
    omega: float
    omega0: float
    g: float

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        if not self.omega > 0:
            raise ValueError(f"mode frequency omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters (kappa, mu).

    Field types are left open so that ``fractions.Fraction`` or ``mpmath.mpf``
    values pass straight through to the exact and extended-precision paths.
    """

    kappa: float
    mu: float

    def __post_init__(self):
        if not 0 < self.kappa < 1:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")

    @property
    def x(self):
        return (self.kappa + 1 / self.kappa) / 2

    def energy(self, chi):
        return energy_from_chi(chi, self)

    def chi(self, energy):
        return chi_from_energy(energy, self)


def kappa_from_x(x: float) -> float:
    """Root in (0, 1) of x = (kappa + 1/kappa)/2, written without cancellation."""
    if not x > 1:
        raise ValueError(f"x = omega/(4g) must exceed 1, got {x}")
    if x - 1 < NEAR_BOUNDARY:
        warnings.warn(
            f"x - 1 = {x - 1:.3g}: kappa is close to 1 and poorly conditioned",
            ConditioningWarning,
            stacklevel=2,
        )
    return 1.0 / (x + math.sqrt((x - 1) * (x + 1)))


def x_from_kappa(kappa: float) -> float:
    return (kappa + 1 / kappa) / 2


def to_model_params(p: PhysicalParams) -> ModelParams:
    x = p.omega / (4 * p.g)
    return ModelParams(kappa=kappa_from_x(x), mu=p.omega0 / (4 * p.g))


def energy_from_chi(chi, m: ModelParams):
    k = m.kappa
    return 2 * (1 / k - k) * (chi - 1) - k


def chi_from_energy(energy, m: ModelParams):
    k = m.kappa
    return 1 + (energy + k) / (2 * (1 / k - k))


class Parity(enum.Enum):
    """Eigenvalue s of tau psi(z) = sigma_x psi(i z)."""

    PLUS_ONE = 1
    MINUS_ONE = -1
    PLUS_I = 1j
    MINUS_I = -1j

    @classmethod
    def from_value(cls, s) -> "Parity":
        s = complex(s)
        for p in cls:
            if abs(p.value - s) < 1e-12:
                return p
        raise ValueError(f"{s} is not a fourth root of unity")

    @classmethod
    def from_label(cls, label: str) -> "Parity":
        for p in cls:
            if p.label == label:
                return p
        raise ValueError(f"unknown parity label {label!r}")

    @property
    def label(self) -> str:
        return {1: "+1", -1: "-1", 1j: "+i", -1j: "-i"}[self.value]

    @property
    def is_even(self) -> bool:
        """True for s = +-1, whose states are even functions of z."""
        return self in (Parity.PLUS_ONE, Parity.MINUS_ONE)

    @property
    def conjugate(self) -> "Parity":
        return Parity.from_value(complex(self.value).conjugate())

    def __mul__(self, other: "Parity") -> "Parity":
        return Parity.from_value(complex(self.value) * complex(other.value))

    def __pow__(self, k: int) -> "Parity":
        return Parity.from_value(complex(self.value) ** (k % 4))

    def __str__(self):
        return self.label


# fixed output order for every sector loop
SECTOR_ORDER = (Parity.PLUS_ONE, Parity.MINUS_ONE, Parity.PLUS_I, Parity.MINUS_I)


def parity_initial_conditions(s: Parity):
    """(psi(0), psi'(0)) that single out the solution of parity s.

    Even sectors start from psi(0) = (1, s) with vanishing slope; odd sectors
    from psi(0) = 0 with psi'(0) = (1, -i s).
    """
    v = complex(s.value)
    if s.is_even:
        return (complex(1), v), (complex(0), complex(0))
    return (complex(0), complex(0)), (complex(1), -1j * v)


def nearest_quarter(chi: float):
    """Closest lattice point m/4 and the distance to it."""
    m = int(round(4 * chi))
    return m, abs(chi - m / 4)

