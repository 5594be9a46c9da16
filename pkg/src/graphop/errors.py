"""Exception hierarchy shared across the package."""


class GraphOpError(Exception):
    """Base class for all package errors."""


class ParseError(GraphOpError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(GraphOpError):
    def __init__(self, message, iterations):
        self.iterations = iterations
        super().__init__(f"{message} (after {iterations} iterations)")


class InfeasibleQuotaError(GraphOpError):
    """A per-cluster sampling quota cannot be met."""

    def __init__(self, message, cluster=None):
        self.cluster = cluster
        super().__init__(message)


class ConfigError(GraphOpError, ValueError):
    pass
