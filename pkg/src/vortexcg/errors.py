"""Exception types shared across the package."""


class MeanNotZero(ValueError):
    """Raised when a Poisson right-hand side has a nonzero grid average."""

    def __init__(self, mean: float, tol: float):
        super().__init__(f"grid mean {mean:.3e} exceeds mean_tol {tol:.1e}; re-center first")
        self.mean = mean
        self.tol = tol


class NonContractive(RuntimeError):
    """The midpoint fixed-point map is not certified to contract."""

    def __init__(self, t: float, margin: float):
        super().__init__(f"contraction margin {margin:.4g} <= 0 at t={t:g}")
        self.t = t
        self.margin = margin


class NoConvergence(RuntimeError):
    """Picard iteration hit max_iter without meeting fp_tol."""

    def __init__(self, residual: float, iterations: int, where=None):
        msg = f"fixed point not converged after {iterations} iterations (residual {residual:.3e})"
        if where is not None:
            msg += f"; worst node {where}"
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations
        self.where = where


class StepRejected(RuntimeError):
    """A scheme step could not be taken; wraps the numerical cause."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"step {step_index} rejected: {cause}")
        self.step_index = step_index
        self.cause = cause


class BlowUp(RuntimeError):
    """Reference solver detected growth signalling under-resolution."""


class ConfigError(ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
