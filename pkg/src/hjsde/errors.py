"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class HJSDEError(ValueError):
    """Base class for every error raised by :mod:`hjsde`."""


class InvalidQuotient(HJSDEError):
    pass


class InadmissibleSequence(HJSDEError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ZeroDenominator(HJSDEError):
    pass


class IndexOutOfRange(HJSDEError, IndexError):
    pass


class PoleAtPoint(HJSDEError):
    pass


class OriginSingular(HJSDEError):
    pass


class DegenerateSpacing(HJSDEError):
    pass


class NoSignChange(HJSDEError):
    pass


class NotCanonical(HJSDEError):
    pass


class OnSupport(HJSDEError):
    pass


class NoZeroOnArc(HJSDEError):
    pass


class BisectionStall(HJSDEError):
    pass


class SupportTouchesCanonicalRegion(HJSDEError):
    pass


class QuadratureTolExceeded(HJSDEError):
    pass


class NotLocallyAffine(HJSDEError):
    pass


class DegeneratePhi(HJSDEError):
    pass


class NonDecreasingYs(HJSDEError):
    pass


class OnZeroSet(HJSDEError):
    pass


class ConformalDegeneracy(HJSDEError):
    pass


class OutOfChart(HJSDEError):
    pass


class WrongSide(HJSDEError):
    pass


class FitFailure(HJSDEError):
    pass


class SingularMetric(HJSDEError):
    pass


class PreconditionError(HJSDEError):
    pass
