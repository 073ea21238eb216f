"""Exception types shared across the package."""


class IntegrationError(RuntimeError):
    """A trajectory left the finite floating-point range."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class SaturationError(RuntimeError):
    """Threshold search reached its energy cap without a division."""


class BracketError(RuntimeError):
    """A scalar equation showed no sign change on the bracket searched."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach its residual target."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(ValueError):
    """Invalid scenario configuration (parse or validation)."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key
