"""Exception hierarchy.  Every module error carries a short ``kind`` tag that the
CLI reports verbatim."""


class ResurgenceError(Exception):
    kind = "error"

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class RingMismatchError(ResurgenceError, TypeError):
    kind = "ring-mismatch"


class NormalizationError(ResurgenceError, ValueError):
    kind = "normalization"


class DomainError(ResurgenceError, ValueError):
    kind = "domain"


class UnsupportedError(ResurgenceError, ValueError):
    kind = "unsupported"


class UnsupportedLevelError(UnsupportedError):
    kind = "unsupported-level"


class MultipleRootError(UnsupportedError):
    kind = "multiple-root-unsupported"


class ShapeError(UnsupportedError):
    kind = "polygon-shape"


class NoFormalSolutionError(ResurgenceError, ValueError):
    kind = "no-formal-solution"


class ResonanceError(ResurgenceError, ValueError):
    kind = "resonance"


class InsufficientDataError(ResurgenceError, ValueError):
    kind = "insufficient-data"


class DegeneratePadeError(ResurgenceError, ArithmeticError):
    kind = "degenerate-pade"


class RayHitsPoleError(ResurgenceError, ValueError):
    kind = "ray-hits-pole"


class NonconvergentLaplaceError(ResurgenceError, ValueError):
    kind = "nonconvergent-laplace"


class DivergentDomainError(DomainError):
    kind = "divergent-domain"


class ParseError(ResurgenceError, ValueError):
    kind = "parse"
