"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands disagree on qubit count or matrix shape."""


class PauliParseError(ValueError):
    """Malformed Pauli word or Pauli-sum text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CircuitParseError(ValueError):
    """Malformed circuit text."""


class NumericalConsistencyError(ArithmeticError):
    """A numerical invariant (Hermiticity, positivity, convergence) was violated."""


class UndefinedCorrelationError(ValueError):
    """Correlation requested on data with zero variance."""


class ConfigError(ValueError):
    """Invalid run configuration. ``errors`` holds every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
