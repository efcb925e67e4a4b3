"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid domain, grid or experiment parameters."""


class AdmissibilityError(ValueError):
    """Coefficient data outside the admissible class."""


class GeometryError(ValueError):
    """A probe or bump violates the support requirements."""


class AliasingError(ValueError):
    """Carrier frequency too high for the grid."""


class ResolutionError(ValueError):
    """Too few samples for a transform or quadrature."""


class BranchAmbiguityError(ArithmeticError):
    """Logarithm requested too close to the branch cut."""


class InstabilityError(RuntimeError):
    """Time stepping produced non-finite values."""


class SolverError(RuntimeError):
    """An iterative linear solve failed to converge."""


class BranchSafetyError(ConfigurationError):
    """Parameters allow the ray-datum logarithm to reach its branch cut (M*T >= 3)."""
