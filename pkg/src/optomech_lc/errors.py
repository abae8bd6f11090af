"""Exception hierarchy shared by all engines."""


class OptomechError(Exception):
    """Base class for every error raised by this package."""


# -- parameter validation -------------------------------------------------

class ParameterViolation(OptomechError, ValueError):
    """A single violated parameter invariant, naming the offending field."""

    def __init__(self, field, value, message):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r}: {message}")


class NonPositiveFrequency(ParameterViolation):
    pass


class NegativeOccupation(ParameterViolation):
    pass


class NegativeDrive(ParameterViolation):
    pass


class ValidationError(OptomechError, ValueError):
    """Aggregate of every :class:`ParameterViolation` found in one pass."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} invalid parameter(s):\n{lines}")


# -- configuration --------------------------------------------------------

class ConfigError(OptomechError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class UnknownField(ParseError):
    pass


# -- semiclassical --------------------------------------------------------

class NoConvergence(OptomechError, RuntimeError):
    pass


class GridTooCoarse(OptomechError, RuntimeError):
    pass


class BoundaryMass(OptomechError, RuntimeError):
    pass


class SingularBracket(OptomechError, ArithmeticError):
    pass


class DegenerateState(OptomechError, ArithmeticError):
    pass


# -- langevin -------------------------------------------------------------

class NonFiniteState(OptomechError, FloatingPointError):
    def __init__(self, message, trajectory=None):
        self.trajectory = trajectory
        if trajectory is not None:
            message = f"trajectory {trajectory}: {message}"
        super().__init__(message)


class WindowTooShort(OptomechError, ValueError):
    pass


class DurationTooShort(OptomechError, ValueError):
    pass


# -- lindblad -------------------------------------------------------------

class DimensionOverflow(OptomechError, MemoryError):
    pass


class SolverStalled(OptomechError, RuntimeError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class NegativeWeight(OptomechError, RuntimeError):
    pass


class FitFailed(OptomechError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


# -- sweeps ---------------------------------------------------------------

class NoOverlap(OptomechError, ValueError):
    pass
