"""Exception types shared across the package."""


class DiraclabError(Exception):
    """Base class for all package-specific errors."""


class OnSpectrum(DiraclabError):
    """Spectral parameter too close to the continuous spectrum for a direct
    multiplier evaluation; boundary-value machinery is required instead."""


class DomainError(DiraclabError):
    """Arguments violate a documented precondition."""


class QuadratureNotConverged(DiraclabError):
    """Successive quadrature refinements disagree beyond tolerance."""


class AnnulusOutOfRange(DiraclabError):
    """Frequency support of a profile does not fit inside the grid's box."""


class BandLimitViolated(DiraclabError):
    """Input carries more frequency mass outside the declared band than
    allowed."""


class SpectralOverlap(DiraclabError):
    """Declared band limit overlaps the resolvent's singular shell."""


class NotConverged(DiraclabError):
    """Iterative estimate failed to stagnate within the iteration cap."""


class InvariantViolated(DiraclabError):
    """A sampled structural invariant (Hermiticity, decay bound, ...) fails."""


class SeriesDiverging(DiraclabError):
    """Neumann-series term norms grow; the coupling is too large for the
    series inversion."""
