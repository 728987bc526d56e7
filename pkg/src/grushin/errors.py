"""Exception types shared across the package."""


class GrushinError(Exception):
    """Base class for all package-specific errors."""


class QuadratureError(GrushinError):
    """An adaptive quadrature failed to reach the requested tolerance."""


class GridResolutionError(GrushinError):
    """A grid violates a sampling condition (extent or node density)."""


class FieldSupportError(GrushinError):
    """A sampled field is not effectively supported inside its grid."""


class AdmissibilityError(GrushinError):
    """Norm parameters violate the admissible (p, q, r) range."""


class UsageError(GrushinError):
    """Invalid scenario configuration or CLI arguments."""
