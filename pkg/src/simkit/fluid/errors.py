"""Simulation error types."""


class SimError(Exception):
    pass


class ConsistencyError(SimError):
    """Internal state violated an invariant (e.g. particle left the domain)."""


class CflViolationError(SimError):
    def __init__(self, cfl, cfl_max, dt):
        super().__init__(
            f"CFL number {cfl:.3f} exceeds limit {cfl_max:.3f}; "
            f"reduce dt below {dt * cfl_max / cfl:.3e} s")
        self.cfl = cfl
        self.cfl_max = cfl_max
