"""Errors raised by the FCSA coding library."""


class FcsaError(Exception):
    """Base class for all library errors."""


class InvalidParams(FcsaError):
    """Error to indicate that a parameter is outside its allowed range."""


class InvalidDocument(FcsaError):
    """Error to indicate that an instance, plan or result document is malformed."""


class ZeroInverse(FcsaError):
    """Error to indicate that zero has no multiplicative inverse."""


class ShapeMismatch(FcsaError):
    """Error to indicate that matrix shapes are incompatible."""


class SingularMatrix(FcsaError):
    """Error to indicate that a linear system has no unique solution."""


class EmptyGraph(FcsaError):
    """Error to indicate that a computation graph has no edges."""


class InvalidDegree(FcsaError):
    """Error to indicate that a degree bound cannot be realised."""


class InvalidAssignment(FcsaError):
    """Error to indicate that a task or power assignment is not valid."""


class InvalidRho(FcsaError):
    """Error to indicate that the batching parameter does not divide the tensor rank."""


class FieldTooSmall(FcsaError):
    """Error to indicate that the field cannot host all roots and evaluation points."""


class DivisibilityViolation(FcsaError):
    """Error to indicate that matrix dimensions are not divisible by the partition."""


class TooFewWorkers(FcsaError):
    """Error to indicate that fewer workers than the recovery threshold were requested."""


class TooFewResults(FcsaError):
    """Error to indicate that fewer worker results than the recovery threshold arrived."""


class SubsetBudgetExceeded(FcsaError):
    """Error to indicate that exhaustive subset verification is too large."""


class CoefficientAuditFailed(FcsaError):
    """Error to indicate that a plan's term counts do not add up to its recovery threshold."""
