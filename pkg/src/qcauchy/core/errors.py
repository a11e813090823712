class QCauchyError(Exception):
    """Base class for all library errors"""


class ParameterError(QCauchyError, ValueError):
    """Input outside the domain of an operation, or a violated hypothesis"""


class ConvergenceError(QCauchyError, RuntimeError):
    """A tail, window or quadrature budget could not be met"""
