"""Exception hierarchy shared by all projquasi modules."""


class ProjQuasiError(Exception):
    """Base class for library errors."""


class NotPositiveDefinite(ProjQuasiError, ArithmeticError):
    pass


class DimensionMismatch(ProjQuasiError, ValueError):
    pass


class SingularMatrix(ProjQuasiError, ArithmeticError):
    pass


class CurvatureViolation(ProjQuasiError, ValueError):
    """The secant pair fails ``y's > eps_c * |y| |s|``."""


class BlockCurvatureViolation(ProjQuasiError, ValueError):
    """``S'Y`` is not symmetric positive definite."""


class ZeroVector(ProjQuasiError, ValueError):
    pass


class DegenerateDirection(ProjQuasiError, ValueError):
    """Oblique direction ``v`` is (numerically) orthogonal to ``y``."""


class RankDeficientSketch(ProjQuasiError, ValueError):
    pass


class NotDescentDirection(ProjQuasiError, ValueError):
    pass


class MaxEvalsExceeded(ProjQuasiError, RuntimeError):
    pass


class EmptyBatch(ProjQuasiError, ValueError):
    pass


class FailedToConverge(ProjQuasiError, RuntimeError):
    pass


class SecantCheckFailed(ProjQuasiError, AssertionError):
    """An applied update violated the secant residual bound."""
