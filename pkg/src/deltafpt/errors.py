"""Exception hierarchy shared by every solver module."""


class DeltaFptError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(DeltaFptError, ValueError):
    pass


class StructureError(DeltaFptError, ValueError):
    """Input does not have the required rank or shape."""


class RankError(StructureError):
    pass


class SingularMatrixError(StructureError):
    pass


class ParameterError(DeltaFptError, ValueError):
    pass


class UnsupportedNormError(ParameterError):
    pass


class UnsupportedShapeError(StructureError):
    """The instance is valid but outside the shapes a solver handles."""


class ResourceLimitError(DeltaFptError, RuntimeError):
    def __init__(self, message: str, states: int | None = None):
        super().__init__(message)
        self.states = states


class GenerationError(DeltaFptError, RuntimeError):
    pass


class InfeasibleError(DeltaFptError):
    pass


class UnboundedError(DeltaFptError):
    pass


class InternalInconsistencyError(DeltaFptError, AssertionError):
    """A certificate check failed; signals a bug in a reduction."""


class CrossCheckError(DeltaFptError, AssertionError):
    def __init__(self, message: str, primary=None, oracle=None):
        super().__init__(message)
        self.primary = primary
        self.oracle = oracle
