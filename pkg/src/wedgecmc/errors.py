"""Exception types shared across the package."""


class WedgeCMCError(Exception):
    """Base class for all package errors."""


class BadDimension(WedgeCMCError):
    """Spatial dimension below 2."""


class AdjacencyError(WedgeCMCError):
    """Two wedge segments meet without an intervening collar."""


class JunctionMismatch(WedgeCMCError):
    """Cross-section volumes disagree at a segment junction."""


class ChartError(WedgeCMCError):
    """Point has no flat (Minkowski) chart of the requested kind."""


class NonNegativeTau(WedgeCMCError):
    """Mean curvature parameter must be strictly negative."""


class NotSpacelike(WedgeCMCError):
    """Graph data violates the spacelike condition (induced metric not positive)."""


class NoConvergence(WedgeCMCError):
    """Newton iteration stalled; diagnostics carried on the exception."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StepTooLarge(WedgeCMCError):
    """Finite-difference step destroys spacelikeness of the embedded stencil."""


class InsufficientLadder(WedgeCMCError):
    """Too few ladder points for the requested fit or check."""


class UnknownLabel(WedgeCMCError):
    """Curve class refers to a wedge label absent from the model/multicurve."""


class ClassNotRealizable(WedgeCMCError):
    """Crossing pattern incompatible with the chain topology."""


class MethodDisagreement(WedgeCMCError):
    """Independent distance methods disagree beyond tolerance."""


class PatchTooCoarse(WedgeCMCError):
    """Curvature-diagnostic patch resolution too low."""


class DegenerateFit(WedgeCMCError):
    """Convergence fit on constant data; limit is the constant, rate undefined."""


class ParseError(WedgeCMCError):
    """Config file could not be parsed; carries line information."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(WedgeCMCError):
    """Config value failed validation; names the offending field."""

    def __init__(self, field, message=""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field
