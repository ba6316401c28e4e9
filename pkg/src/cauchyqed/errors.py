"""Exception types shared across the library."""


class DomainError(ValueError):
    """Argument lies outside the analytic domain (e.g. -w.w on the branch cut)."""


class ConvergenceError(RuntimeError):
    """A quadrature or iterative routine failed to reach its tolerance."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class GridMismatch(ValueError):
    """Two operators built on different grids were combined."""


class NotSkewAdjoint(ValueError):
    """exp_unitary received an operator whose skew-adjoint defect is too large."""


class FitError(RuntimeError):
    """A scaling fit received degenerate samples."""
