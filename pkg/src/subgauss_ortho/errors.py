"""Exception hierarchy shared by all modules."""


class SubgaussOrthoError(Exception):
    """Base class for every error raised by this package."""


class NonConvergent(SubgaussOrthoError):
    """Adaptive quadrature exhausted its subdivision budget."""


class TailTooHeavy(SubgaussOrthoError):
    """A real-line integrand is not negligible at the truncation radius."""


class TailNotNegligible(SubgaussOrthoError):
    """The truncated series remainder is too large relative to the value."""


class IndexTooLarge(SubgaussOrthoError, ValueError):
    """Polynomial index beyond the overflow guard."""


class DomainError(SubgaussOrthoError, ValueError):
    """Argument outside the mathematical domain of a function."""


class UnknownKernel(SubgaussOrthoError, KeyError):
    """Kernel id not present in the registry."""


class ParseError(SubgaussOrthoError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class ValidationError(SubgaussOrthoError, ValueError):
    def __init__(self, field: str, reason: str, line: int | None = None):
        self.field = field
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}: {reason}{where}")


class Infeasible(SubgaussOrthoError):
    """No truncation order in the search range meets the thresholds."""
