"""Exception types raised by the solvers."""


class HeliodropError(Exception):
    """Base class for all package errors."""


class ConfigError(HeliodropError, ValueError):
    pass


class SolverError(HeliodropError):
    """Raised when the stationary profile cannot be constructed."""


class TurningPointStall(SolverError):
    pass


class NonDecaying(SolverError):
    pass


class ProfileClipped(HeliodropError, ValueError):
    pass


class StepDiverged(HeliodropError):
    def __init__(self, step, message="non-finite values in the wave field"):
        super().__init__(f"step {step}: {message}")
        self.step = step


class ConservationBreach(HeliodropError):
    """An invariant drifted past the configured tolerance.

    ``quantity`` is ``"norm"`` or ``"energy"``; ``drift`` is the signed
    relative change with respect to t = 0.
    """

    def __init__(self, quantity, step, drift, tolerance):
        super().__init__(
            f"{quantity} drift {drift:+.3e} exceeds {tolerance:.1e} at step {step}"
        )
        self.quantity = quantity
        self.step = step
        self.drift = drift
        self.tolerance = tolerance


class ZeroNorm(HeliodropError, ValueError):
    pass


class PhaseGap(HeliodropError, ValueError):
    pass


class GridMismatch(HeliodropError, ValueError):
    pass
