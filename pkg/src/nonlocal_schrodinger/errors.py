"""Exception types raised by the solver stack."""


class SolverError(Exception):
    """Base class for all package errors."""


class SpectralProximityError(SolverError):
    """A resolvent was requested at a point inside or too close to the spectral envelope."""

    def __init__(self, zeta, message=None, node=None):
        self.zeta = zeta
        self.node = node
        if message is None:
            message = f"resolvent point {zeta!r} lies inside or on the spectral envelope"
        if node is not None:
            message = f"{message} (quadrature node m={node})"
        super().__init__(message)


class SingularSolveError(SolverError):
    """A stationary solve broke down numerically."""


class SeparationError(SolverError):
    """A zero of the nonlocal characteristic function is not separated from the spectrum."""

    def __init__(self, message, zero=None):
        self.zero = zero
        super().__init__(message)


class NearZeroCharacteristic(SeparationError):
    """b_N evaluated to (almost) zero on a quadrature node."""


class RootFindError(SolverError):
    """Zero search or contour reparametrization did not converge."""


class DivergenceError(SolverError):
    """The fixed-point iteration is growing; the contraction premise is likely violated."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class ConfigError(SolverError):
    """Malformed or out-of-range run configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
