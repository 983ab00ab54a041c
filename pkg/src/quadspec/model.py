"""Physical parameters, their dimensionless reduction, and energies.

Units are natural (hbar = c = 1).  The radial problem is fixed by the
effective angular momentum ``gamma = l + phi1/(2*pi)`` through ``s = |gamma|``
and by the Coulomb-like coupling ``alpha = M*B0/sqrt(m*omega)``.  An
eigenvalue ``W`` of the radial operator maps back to an energy through
``E = omega*W/2 + k**2/(2*m)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .errors import InvalidParameter
from .precision import pi, to_big


@dataclass(frozen=True)
class PhysicalParams:
    m: mpfr
    omega: mpfr
    M: mpfr
    B0: mpfr
    k: mpfr = mpfr(0)
    l: int = 0
    phi1: mpfr = mpfr(0)

    def __post_init__(self):
        for name in ("m", "omega", "M", "B0", "k", "phi1"):
            object.__setattr__(self, name, to_big(getattr(self, name)))
        if int(self.l) != self.l:
            raise InvalidParameter(f"l must be an integer, got {self.l!r}")
        object.__setattr__(self, "l", int(self.l))
        if self.m <= 0:
            raise InvalidParameter(f"mass must be positive, got {self.m}")
        if self.omega <= 0:
            raise InvalidParameter(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class DimensionlessProblem:
    gamma: mpfr
    s: mpfr
    alpha: mpfr

    @classmethod
    def from_gamma(cls, gamma, alpha) -> "DimensionlessProblem":
        g = to_big(gamma)
        return cls(g, abs(g), to_big(alpha))


@dataclass(frozen=True)
class EnergyResult:
    W: mpfr
    zeta_sq: mpfr
    energy: mpfr


def dimensionless_from_physical(p: PhysicalParams) -> DimensionlessProblem:
    if p.omega <= 0:
        raise InvalidParameter(f"omega must be positive, got {p.omega}")
    gamma = p.l + p.phi1 / (2 * pi())
    return DimensionlessProblem(gamma, abs(gamma), p.M * p.B0 / gmpy2.sqrt(p.m * p.omega))


def energy_from_W(W, p: PhysicalParams) -> EnergyResult:
    W = to_big(W)
    return EnergyResult(W, p.m * p.omega * W, p.omega * W / 2 + p.k * p.k / (2 * p.m))


def allowed_frequency_n1(s, M, B0, m) -> mpfr:
    """Frequency at which the degree-one polynomial solution exists.

    This is the value of omega that puts alpha on the root sqrt(4s+2); it is
    a property of the truncated series, not a restriction on the spectrum.
    """
    s, M, B0, m = (to_big(x) for x in (s, M, B0, m))
    if s < 0:
        raise InvalidParameter("s must be non-negative")
    if m <= 0:
        raise InvalidParameter("mass must be positive")
    return M * M * B0 * B0 / (2 * m * (2 * s + 1))
