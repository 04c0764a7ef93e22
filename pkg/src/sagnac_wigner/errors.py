"""Exception hierarchy.

Each family carries the CLI exit code it maps to: 2 for configuration and
parameter errors, 3 for physics preconditions, 4 for analysis failures.
"""


class SagnacWignerError(Exception):
    exit_code = 1


class ConfigError(SagnacWignerError):
    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidParam(SagnacWignerError, ValueError):
    exit_code = 2


class LengthMismatch(InvalidParam):
    pass


class PhysicsError(SagnacWignerError):
    exit_code = 3


class GridTooNarrow(PhysicsError):
    pass


class GridMismatch(PhysicsError):
    pass


class OffGrid(PhysicsError):
    pass


class ClippedBeam(PhysicsError):
    def __init__(self, message, setting=None):
        self.setting = setting
        super().__init__(message)


class ZeroPower(PhysicsError):
    pass


class RemapOutOfRange(PhysicsError):
    pass


class PhaseNull(PhysicsError):
    pass


class NonRectangularScan(PhysicsError):
    pass


class AnalysisError(SagnacWignerError):
    exit_code = 4


class UnderSampled(AnalysisError):
    pass


class DegenerateMap(AnalysisError):
    pass


class NoPeak(AnalysisError):
    pass


class BadInit(AnalysisError):
    pass


class NoConvergence(AnalysisError):
    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)
