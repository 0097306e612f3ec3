"""Exception hierarchy shared by every module."""


class VeroneseError(Exception):
    """Base class for all library errors."""


class ExpressionSyntaxError(VeroneseError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionSyntaxError):
    def __init__(self, token, offset):
        super().__init__(f"unknown identifier {token!r}", offset)
        self.token = token


class EvaluationError(VeroneseError):
    pass


class SingularityError(EvaluationError):
    """Division by zero, logarithm or root of a non-positive number, overflow."""


class OutOfDomainError(EvaluationError):
    pass


class TransversalityError(VeroneseError):
    def __init__(self, message, point):
        super().__init__(f"{message} at (x, y) = ({point[0]:.6g}, {point[1]:.6g})")
        self.point = point


class IntegrationError(VeroneseError):
    pass


class DomainExitError(IntegrationError):
    """A leaf, geodesic or transport path left the domain rectangle."""


class StepUnderflowError(IntegrationError):
    pass


class SolverError(VeroneseError):
    """Newton divergence, bracketing failure or an ill-conditioned system."""


class NonSkewRicciError(VeroneseError):
    pass


class ConsistencyError(VeroneseError):
    """Two independent evaluation paths disagree: an implementation bug."""


class ConfigError(VeroneseError):
    pass
