"""Kinetic-term normalizations for one-dimensional Hamiltonians.

Every Schrodinger problem in this package is written as

    H = -c d^2/dx^2 + V(x),   c = hbar^2 / (2 m).

Three conventions cover everything that appears in practice:

* ``natural(m)``   : hbar = 1, explicit mass, c = 1/(2m).
* ``UNIT_KINETIC`` : hbar = 2m = 1, c = 1.  The solvable wells used for
  gate calibration (Poschl-Teller, the quasi-exactly-solvable double
  well) quote their closed-form energies in this convention.
* ``HALF_KINETIC`` : hbar = m = 1, c = 1/2.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class UnitsConvention:
    name: str
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0 or self.mass <= 0:
            raise ValueError("hbar and mass must be positive")

    @property
    def kinetic_coefficient(self) -> float:
        return self.hbar ** 2 / (2.0 * self.mass)


UNIT_KINETIC = UnitsConvention("unit_kinetic", hbar=1.0, mass=0.5)
HALF_KINETIC = UnitsConvention("half_kinetic", hbar=1.0, mass=1.0)


def natural(m: float) -> UnitsConvention:
    """hbar = 1 with an explicit particle mass."""
    return UnitsConvention("natural", hbar=1.0, mass=m)
