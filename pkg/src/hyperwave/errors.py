"""Exception hierarchy.

Every error carries the module that raised it, the mathematical object
involved (a hyperplane, a gamma argument, a chamber wall) and the offending
index data, so the command-line front end can emit a machine-readable record.
"""

from __future__ import annotations


class HyperwaveError(Exception):
    """Base class for all evaluation errors."""

    module = "hyperwave"

    def __init__(self, message: str, *, obj: str = "", **detail):
        super().__init__(message)
        self.obj = obj
        self.detail = detail

    def record(self) -> dict:
        return {
            "error": type(self).__name__,
            "module": self.module,
            "object": self.obj,
            "message": str(self),
            "detail": {k: _plain(v) for k, v in self.detail.items()},
        }


def _plain(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_plain(u) for u in v]
    if hasattr(v, "tolist"):
        return _plain(v.tolist())
    return v


class ChamberViolation(HyperwaveError, ValueError):
    module = "core"


class SpectralPlaneSingularity(HyperwaveError, ZeroDivisionError):
    module = "hcseries"


class PoleOfGamma(HyperwaveError, ValueError):
    module = "special"


class NearSingularSpectral(HyperwaveError, ValueError):
    module = "wavefn"


class ExtrapolationDivergence(HyperwaveError, ArithmeticError):
    module = "wavefn"


class RationalPole(HyperwaveError, ZeroDivisionError):
    module = "bispectral"
