"""Exception types raised across the package."""


class DiracExtensionError(Exception):
    """Base class for all package errors."""


class RegimeMismatch(DiracExtensionError, ValueError):
    """Operation called for a regime it does not apply to."""


class NoDistinguishedExtension(DiracExtensionError):
    """Critical channel with nu = mu = 0: no distinguished extension exists."""


class NotInAnyThetaSubspace(DiracExtensionError, ValueError):
    """Boundary coefficients fail the membership test of every theta-subspace."""


class GridTooSmall(DiracExtensionError, ValueError):
    pass


class IllConditionedFit(DiracExtensionError):
    pass


class StepSizeUnderflow(DiracExtensionError, ArithmeticError):
    pass


class DomainError(DiracExtensionError, ValueError):
    pass


class ExponentForbidden(DiracExtensionError, ValueError):
    pass


class VariantMismatch(DiracExtensionError, ValueError):
    pass


class QuadratureUnderresolved(DiracExtensionError, ValueError):
    pass
