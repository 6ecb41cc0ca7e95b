"""
Exception types for fractrans
Every failure raised by the library derives from FractransError
"""


class FractransError(Exception):
    """Base class; `model` is attached by the model runners when known"""

    def __init__(self, message, model=None):
        super().__init__(message)
        self.model = model

    @property
    def error_class(self):
        return type(self).__name__

    def __str__(self):
        base = super().__str__()
        if self.model:
            return f"[{self.model}] {base}"
        return base


class DomainError(FractransError, ValueError):
    """Argument outside the admissible range (s, r, alpha, x...)"""


class CapacityError(FractransError):
    """Requested mesh or matrix exceeds the configured limits"""


class ConfigurationError(FractransError):
    """Inconsistent inputs: b not on the mesh, empty model list, bad config file"""


class CriticalContrastError(FractransError):
    """sigma2/sigma1 sits on the critical ratio -(1-b)/b; the local operator has a kernel"""


class SingularSystemError(FractransError):
    """A pivot fell below tolerance during factorization"""


class SolvabilityError(FractransError):
    """The interface equation c* u(b) = G_M cannot be solved (c* degenerate)"""


class ConvergenceFailure(FractransError):
    """Adaptive quadrature ran out of budget before meeting its tolerance"""

    def __init__(self, message, estimate=None, error_bound=None, model=None):
        super().__init__(message, model=model)
        self.estimate = estimate
        self.error_bound = error_bound
