"""Primitives on the hyperbolic half-plane ``{(rho, eta) : rho > 0}``.

Points carry the metric ``(d rho^2 + d eta^2) / rho^2``.  The Laplacian is
``rho^2 (d_rho^2 + d_eta^2)``.  Boundary points are reals or ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OriginSingular, PoleAtPoint, PreconditionError
from .jet import DEFAULT_ORDER, Jet

__all__ = [
    "RHO_MIN",
    "INF",
    "HalfPlanePoint",
    "MoebiusMap",
    "BoundaryImage",
    "is_infinite",
    "basic_F_jet",
    "basic_f_jet",
    "basic_F",
    "basic_phi",
    "basic_phi_jet",
    "laplacian_residual",
    "moebius_apply",
    "invert_point",
    "hyperboloid_point",
    "grid",
]

RHO_MIN = 1e-8
INF = math.inf


@dataclass(frozen=True)
class HalfPlanePoint:
    rho: float
    eta: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.eta))):
            raise PreconditionError("point coordinates must be finite")
        if np.any(np.asarray(self.rho) <= 0):
            raise PreconditionError(f"rho must be positive, got {self.rho}")

    def as_arrays(self):
        return np.asarray(self.rho, dtype=float), np.asarray(self.eta, dtype=float)


def _coords(pt):
    if isinstance(pt, HalfPlanePoint):
        rho, eta = pt.as_arrays()
    else:
        rho, eta = pt
        rho, eta = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(eta, dtype=float))
    if np.any(rho < RHO_MIN):
        raise PreconditionError(f"rho below the evaluation floor {RHO_MIN}")
    return rho, eta


def is_infinite(y) -> bool:
    return y is None or (isinstance(y, float) and math.isinf(y))


def grid(rho_range, eta_range, n_rho, n_eta=None):
    """Tensor grid as flattened ``(rho, eta)`` arrays."""
    n_eta = n_rho if n_eta is None else n_eta
    r = np.linspace(rho_range[0], rho_range[1], n_rho)
    e = np.linspace(eta_range[0], eta_range[1], n_eta)
    R, E = np.meshgrid(r, e, indexing="ij")
    return R.ravel(), E.ravel()


def basic_f_jet(pt, y, order: int = DEFAULT_ORDER) -> Jet:
    """Jet of ``sqrt(rho) F(.; y)``: ``sqrt(rho^2 + (eta - y)^2)``, or 1 at y = inf."""
    rho, eta = _coords(pt)
    if is_infinite(y):
        return Jet.constant(1.0, rho, eta, order)
    r, e = Jet.variables(rho, eta, order)
    d = e - float(y)
    return (r * r + d * d).sqrt()


def basic_F_jet(pt, y, order: int = DEFAULT_ORDER) -> Jet:
    """Jet of the basic eigenfunction ``sqrt(rho^2 + (eta - y)^2) / sqrt(rho)``.

    For ``y = inf`` this is ``1 / sqrt(rho)``.
    """
    rho, eta = _coords(pt)
    r = Jet.var_rho(rho, eta, order)
    return basic_f_jet((rho, eta), y, order) * r ** -0.5


def basic_F(pt, y):
    rho, eta = _coords(pt)
    if is_infinite(y):
        return 1.0 / np.sqrt(rho)
    return np.hypot(rho, eta - y) / np.sqrt(rho)


def basic_phi(pt, y):
    """Unit vector ``(rho, eta - y) / sqrt(rho^2 + (eta - y)^2)`` (components stacked first)."""
    if is_infinite(y):
        raise PreconditionError("basic_phi needs a finite boundary point")
    rho, eta = _coords(pt)
    d = eta - y
    n = np.hypot(rho, d)
    return np.stack([rho / n, d / n])


def basic_phi_jet(pt, y, order: int = DEFAULT_ORDER) -> tuple[Jet, Jet]:
    if is_infinite(y):
        raise PreconditionError("basic_phi needs a finite boundary point")
    rho, eta = _coords(pt)
    r, e = Jet.variables(rho, eta, order)
    d = e - float(y)
    inv = (r * r + d * d) ** -0.5
    return r * inv, d * inv


def laplacian_residual(jet: Jet):
    """``rho^2 (F_rho_rho + F_eta_eta) - (3/4) F`` at the jet's base points."""
    if jet.order < 2:
        raise PreconditionError("laplacian needs a jet of order >= 2")
    return jet.rho ** 2 * (jet.deriv(2, 0) + jet.deriv(0, 2)) - 0.75 * jet.value


@dataclass(frozen=True)
class MoebiusMap:
    """``z -> (a z + b) / (c z + d)`` on ``z = eta + i rho``, normalized to ``ad - bc = 1``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det <= 0:
            raise PreconditionError(f"need ad - bc > 0 to preserve the half-plane, got {det}")
        s = 1.0 / math.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) * s)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def inversion(cls):
        return cls(0.0, -1.0, 1.0, 0.0)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)


@dataclass(frozen=True)
class BoundaryImage:
    """Image of a point and the factor relating basic solutions.

    For a boundary point ``y``: ``F(z; y) = factor * F(M z; M y)``.  For an
    interior point the factor is ``|c z + d|^2 = rho / rho~``.
    """

    value: object
    factor: float


def moebius_apply(m: MoebiusMap, target, finite: bool = False) -> BoundaryImage:
    if isinstance(target, HalfPlanePoint) or (isinstance(target, tuple) and len(target) == 2):
        rho, eta = target.as_arrays() if isinstance(target, HalfPlanePoint) else map(np.asarray, target)
        z = eta + 1j * rho
        den = m.c * z + m.d
        w = (m.a * z + m.b) / den
        fac = np.abs(den) ** 2
        if np.ndim(rho) == 0:
            return BoundaryImage(HalfPlanePoint(float(w.imag), float(w.real)), float(fac))
        return BoundaryImage((w.imag, w.real), fac)
    y = target
    if is_infinite(y):
        if m.c == 0:
            return BoundaryImage(INF, 1.0 / abs(m.d))
        return BoundaryImage(m.a / m.c, abs(m.c))
    y = float(y)
    den = m.c * y + m.d
    if den == 0:
        if finite:
            raise PoleAtPoint(f"y = {y} is sent to infinity")
        return BoundaryImage(INF, 1.0 / abs(m.c))
    return BoundaryImage((m.a * y + m.b) / den, abs(den))


def invert_point(pt: HalfPlanePoint) -> HalfPlanePoint:
    """``(rho, eta) -> (rho, -eta) / (rho^2 + eta^2)``; an involution."""
    rho, eta = (pt.rho, pt.eta) if isinstance(pt, HalfPlanePoint) else pt
    r2 = np.asarray(rho) ** 2 + np.asarray(eta) ** 2
    if np.any(r2 == 0):
        raise OriginSingular("inversion is undefined at the origin")
    out = (rho / r2, -eta / r2)
    if isinstance(pt, HalfPlanePoint):
        return HalfPlanePoint(float(out[0]), float(out[1]))
    return out


def hyperboloid_point(pt) -> np.ndarray:
    """Symmetric 2x2 matrix of unit determinant representing the point."""
    rho, eta = _coords(pt)
    x = np.empty(rho.shape + (2, 2))
    x[..., 0, 0] = 1.0 / rho
    x[..., 0, 1] = x[..., 1, 0] = eta / rho
    x[..., 1, 1] = (rho ** 2 + eta ** 2) / rho
    return x
