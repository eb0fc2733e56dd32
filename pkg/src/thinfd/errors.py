"""Exception types shared across the package."""


class ThinfdError(Exception):
    """Base class for all package-specific errors."""


class NotUnimodularError(ThinfdError, ValueError):
    """A matrix expected to have determinant 1 does not, beyond tolerance."""

    def __init__(self, det: float, tol: float):
        self.det = det
        self.tol = tol
        super().__init__(f"matrix determinant {det!r} differs from 1 by more than {tol!r}")


class NotIntegralError(ThinfdError, ValueError):
    """A matrix expected to be integral has an entry too far from an integer."""


class EnumerationError(ThinfdError, RuntimeError):
    """A lattice enumeration exhausted its search bound without an answer."""


class NotAdmissibleError(ThinfdError, ValueError):
    """A shear parameter lies outside the admissible set for its (a, theta)."""


class ReductionError(ThinfdError, RuntimeError):
    """Reduction produced inconsistent outputs (reported with residuals)."""

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")


class SupportError(ThinfdError, ValueError):
    """A test function does not vanish at the edges of the integration window."""
