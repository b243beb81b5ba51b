"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """An iterative evaluation (series, continued fraction, root bracket) failed to converge."""


class ShootingError(RuntimeError):
    """The wetting-front search failed (bracketing or iteration budget exhausted)."""


class ModelSpecError(ValueError):
    """A diffusivity specification string could not be parsed; carries the failing position."""

    def __init__(self, spec: str, position: int, reason: str):
        self.spec = spec
        self.position = position
        self.reason = reason
        super().__init__(f"invalid diffusivity spec {spec!r} at position {position}: {reason}")
