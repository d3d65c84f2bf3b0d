"""diraclab: numerical laboratory for free and perturbed first-order
relativistic resolvents on weighted L2 spaces.

Subpackages
-----------
dirac           exact 4x4 matrix layer (symbols, projections, resolvent)
grid            periodic-box transforms, weighted norms, dump I/O
plemelj         boundary values of 1D singular integrals
counterexample  the annulus sequence and its +-i/(4 pi) quadratic-form limit
resolvent       multiplier application, cutoff decomposition, norm sweeps
perturbed       decaying potentials and the geometric-series resolvent
cli             reproduction harness (``diraclab`` console command)
"""

from ._multiplier import backend_name
from .errors import (
    AnnulusOutOfRange,
    BandLimitViolated,
    DiraclabError,
    DomainError,
    InvariantViolated,
    NotConverged,
    OnSpectrum,
    QuadratureNotConverged,
    SeriesDiverging,
    SpectralOverlap,
)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "DiraclabError",
    "OnSpectrum",
    "DomainError",
    "QuadratureNotConverged",
    "AnnulusOutOfRange",
    "BandLimitViolated",
    "SpectralOverlap",
    "NotConverged",
    "InvariantViolated",
    "SeriesDiverging",
    "__version__",
]
