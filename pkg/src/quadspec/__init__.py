"""High-precision spectra of the radial Coulomb-plus-oscillator eigenproblem."""

from .errors import (EmptyResult, InternalError, InvalidArgument, InvalidParameter, IterationLimit,
                     NotPositiveDefinite, NumericalError, QuadratureFailure, QuadspecError)
from .model import (DimensionlessProblem, EnergyResult, PhysicalParams, allowed_frequency_n1,
                    dimensionless_from_physical, energy_from_W)
from .precision import get_precision, parse_real, set_precision, working_precision
from .ritz import RitzResult, ritz_converged, ritz_spectrum
from .rpm import riccati_series, rpm_converged, rpm_roots
from .truncation import TruncationSolution, truncation_solutions

__version__ = "0.1.0"
