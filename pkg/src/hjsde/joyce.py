"""Eigenfunctions ``F`` and Joyce matrices ``Phi`` on the half-plane.

Normalization: ``F = (1/2) sum_j w_j F(.; y_j)`` over the atoms of ``f0''``
(plus the Poisson integral of any smooth patch), so that
``f = sqrt(rho) F -> f0`` at the boundary.

``Phi = lambda_1 (x) v1 + lambda_2 (x) v2`` is stored through the pair
``(v1, v2)`` of vectors in ``R^2``; ``det Phi = -<v1, v2>`` with
``<(a, b), (c, d)> = ad - bc``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NotLocallyAffine, PreconditionError, QuadratureTolExceeded
from .halfplane import RHO_MIN, basic_phi_jet, is_infinite
from .jet import DEFAULT_ORDER, Jet
from .profiles import BoundaryProfile, affine_pieces, boundary_value

__all__ = [
    "FJet",
    "PhiValue",
    "AsymptoticsReport",
    "eval_F_jet",
    "eval_f",
    "eval_atoms_F_jet",
    "phi_from_potential",
    "phi_from_weights",
    "det_phi",
    "det_identity_residual",
    "joyce_residual",
    "joyce_scale",
    "fit_order",
    "local_piece",
    "monotonicity_check",
    "boundary_asymptotics",
    "pair",
]

QUAD_TOL = 1e-10
_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)


def pair(u, v):
    """Symplectic pairing ``u_0 v_1 - u_1 v_0`` (leading axis holds components)."""
    return u[0] * v[1] - u[1] * v[0]


@dataclass
class FJet:
    F: Jet
    f: Jet

    @property
    def rho(self):
        return self.F.rho

    @property
    def eta(self):
        return self.F.eta

    def scaled(self, c: float) -> "FJet":
        return FJet(self.F * c, self.f * c)

    @property
    def dF_norm2(self):
        """``|dF|^2 = rho^2 (F_rho^2 + F_eta^2)`` in the hyperbolic metric."""
        return self.rho ** 2 * (self.F.deriv(1, 0) ** 2 + self.F.deriv(0, 1) ** 2)


@dataclass
class PhiValue:
    v1: np.ndarray  # shape (2, ...)
    v2: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    jets: tuple | None = None  # ((v1_0, v1_1), (v2_0, v2_1)) as Jets when available

    @property
    def det(self):
        return -pair(self.v1, self.v2)

    def scaled(self, c: float) -> "PhiValue":
        jets = None
        if self.jets is not None:
            jets = tuple(tuple(j * c for j in v) for v in self.jets)
        return PhiValue(self.v1 * c, self.v2 * c, self.rho, self.eta, jets)


# -- evaluation of F -----------------------------------------------------------

def _coords(pt):
    if hasattr(pt, "rho") and hasattr(pt, "eta") and not isinstance(pt, tuple):
        rho, eta = pt.rho, pt.eta
    else:
        rho, eta = pt
    rho, eta = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(eta, dtype=float))
    if np.any(rho < RHO_MIN):
        raise PreconditionError(f"rho below the evaluation floor {RHO_MIN}")
    return rho, eta


def _skeleton_arrays(profile: BoundaryProfile):
    A, B, atoms = profile.skeleton()
    bp = np.array([float(y) for y in profile.breakpoints])
    vals = np.array([float(v) for v in profile.values])
    slopes = np.array([float(s) for s in profile.chord_slopes()])
    ys = np.array([float(y) for y, _ in atoms])
    ws = np.array([float(w) for _, w in atoms])
    keep = ws != 0
    return bp, vals, slopes, ys[keep], ws[keep]


def _sum_last(j: Jet, rho, eta) -> Jet:
    return Jet(j.c.sum(axis=-1), j.order, rho, eta)


def _patch_chords(profile):
    out = []
    for c in profile.smooth_pieces:
        a, b = float(c.a), float(c.b)
        co = [float(x) for x in c.coeffs]
        va, vb = float(c(c.a)), float(c(c.b))
        slope = (vb - va) / (b - a)
        # d(t) = cubic - chord in t = y - a; vanishes at both ends
        out.append((a, b, np.array([co[0] - va, co[1] - slope, co[2], co[3]])))
    return out


def _patch_kernel_jet(rho, eta, y, order):
    r, e = Jet.variables(rho, eta, order)
    d = e - y
    return (r * r) * ((r * r + d * d) ** -1.5) * 0.5


def _panel(rho, eta, lo, hi, a, dco, order):
    """Gauss-Legendre estimate on panels; rho, eta, lo, hi are 1-d arrays."""
    half = (hi - lo) / 2
    mid = (hi + lo) / 2
    y = mid[:, None] + half[:, None] * _GL_X[None, :]
    t = y - a
    dv = dco[0] + t * (dco[1] + t * (dco[2] + t * dco[3]))
    wts = half[:, None] * _GL_W[None, :] * dv
    K = _patch_kernel_jet(rho[:, None] + 0 * y, eta[:, None] + 0 * y, y, order)
    return (K.c * wts).sum(axis=-1)


def _patch_jet(rho, eta, a, b, dco, order, tol=QUAD_TOL, max_depth=40):
    """Adaptive panel quadrature of ``(rho^2/2) int_a^b d(y) (rho^2 + (eta-y)^2)^(-3/2) dy``."""
    n = rho.size
    r_flat, e_flat = rho.ravel(), eta.ravel()
    total = np.zeros((order + 1, order + 1, n))
    idx = np.arange(n)
    lo = np.full(n, a)
    hi = np.full(n, b)
    whole = _panel(r_flat, e_flat, lo, hi, a, dco, order)
    depth = 0
    while idx.size:
        if depth > max_depth:
            raise QuadratureTolExceeded(
                f"patch quadrature on [{a}, {b}] did not reach {tol} after {max_depth} bisections")
        mid = (lo + hi) / 2
        rr, ee = r_flat[idx], e_flat[idx]
        left = _panel(rr, ee, lo, mid, a, dco, order)
        right = _panel(rr, ee, mid, hi, a, dco, order)
        fine = left + right
        err = np.abs(fine - whole).reshape(-1, fine.shape[-1]).max(axis=0)
        scale = np.maximum(1.0, np.abs(fine).reshape(-1, fine.shape[-1]).max(axis=0))
        # panel tolerance shrinks with its share of the interval
        share = (hi - lo) / (b - a)
        ok = err <= tol * scale * share
        np.add.at(total, (slice(None), slice(None), idx[ok]), fine[..., ok])
        bad = ~ok
        idx = np.concatenate([idx[bad], idx[bad]])
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
        whole = np.concatenate([left[..., bad], right[..., bad]], axis=-1)
        depth += 1
    return Jet(total.reshape((order + 1, order + 1) + rho.shape), order, rho, eta)


def _eval_f_jet(profile: BoundaryProfile, rho, eta, order) -> Jet:
    bp, vals, slopes, ys, ws = _skeleton_arrays(profile)
    # exact local linear piece of the chord polygon at the base point
    i = np.searchsorted(bp, eta, side="right")
    mu = slopes[i]
    anchor = bp[np.maximum(i - 1, 0)]
    base = vals[np.maximum(i - 1, 0)]
    e = Jet.var_eta(rho, eta, order)
    f = (e - anchor) * mu + base
    if ys.size:
        R = rho[..., None] + 0 * ys
        E = eta[..., None] + 0 * ys
        r, ev = Jet.variables(R, E, order)
        d = ev - ys
        s = np.where(E >= ys, 1.0, -1.0)
        term = (r * r) / ((r * r + d * d).sqrt() + d * s) * (0.5 * ws)
        f = f + _sum_last(term, rho, eta)
    for a, b, dco in _patch_chords(profile):
        f = f + _patch_jet(rho, eta, a, b, dco, order)
    return f


def eval_F_jet(profile: BoundaryProfile, pt, order: int = DEFAULT_ORDER) -> FJet:
    """Jets of ``F`` and ``f = sqrt(rho) F`` generated by ``profile``.

    Every atom term is written as ``rho^2 / (R + |eta0 - y|)`` around the
    base point so no cancellation occurs near the boundary.
    """
    rho, eta = _coords(pt)
    f = _eval_f_jet(profile, rho, eta, order)
    r = Jet.var_rho(rho, eta, order)
    return FJet(f * r ** -0.5, f)


def eval_f(profile: BoundaryProfile, rho, eta) -> np.ndarray:
    """Values of ``f = sqrt(rho) F`` only."""
    rho, eta = _coords((rho, eta))
    return _eval_f_jet(profile, rho, eta, 0).value


def eval_atoms_F_jet(atoms, pt, linear: float = 0.0, order: int = DEFAULT_ORDER) -> FJet:
    """Direct sum ``(1/2) sum w_j F(.; y_j) + linear * eta / sqrt(rho)``.

    ``atoms`` is a list of ``(y, w)`` with ``y`` possibly infinite.  No
    cancellation control; used for transformed data and as a cross-check.
    """
    rho, eta = _coords(pt)
    r, e = Jet.variables(rho, eta, order)
    f = e * float(linear)
    for y, w in atoms:
        if is_infinite(y):
            f = f + 0.5 * float(w)
        else:
            d = e - float(y)
            f = f + (r * r + d * d).sqrt() * (0.5 * float(w))
    return FJet(f * r ** -0.5, f)


# -- Joyce matrices ------------------------------------------------------------

def phi_from_potential(fjet: FJet) -> PhiValue:
    """``v1 = (f_rho, eta f_rho - rho f_eta)``, ``v2 = (f_eta, rho f_rho + eta f_eta - f)``."""
    f = fjet.f
    fr, fe = f.d_rho(), f.d_eta()
    n = fr.order
    r, e = Jet.variables(f.rho, f.eta, n)
    f_ = f.truncate(n)
    v1 = (fr, e * fr - r * fe)
    v2 = (fe, r * fr + e * fe - f_)
    return PhiValue(np.stack([v1[0].value, v1[1].value]), np.stack([v2[0].value, v2[1].value]),
                    f.rho, f.eta, (v1, v2))


def phi_from_weights(atoms, pt, order: int = 2) -> PhiValue:
    """``Phi = (1/2) sum_j phi(.; y_j) (x) u_j`` for finite ``y_j`` and vectors ``u_j``."""
    rho, eta = _coords(pt)
    zero = Jet.constant(0.0, rho, eta, order)
    v1 = [zero, zero]
    v2 = [zero, zero]
    for y, u in atoms:
        p1, p2 = basic_phi_jet((rho, eta), float(y), order)
        for i in range(2):
            v1[i] = v1[i] + p1 * (0.5 * float(u[i]))
            v2[i] = v2[i] + p2 * (0.5 * float(u[i]))
    return PhiValue(np.stack([v1[0].value, v1[1].value]), np.stack([v2[0].value, v2[1].value]),
                    rho, eta, (tuple(v1), tuple(v2)))


def det_phi(phi: PhiValue, fjet: FJet | None = None):
    """``det Phi = -<v1, v2>``; with a potential also the identity residual.

    Returns ``det`` or ``(det, |det - (F^2/4 - |dF|^2)|)``.
    """
    det = phi.det
    if fjet is None:
        return det
    return det, det_identity_residual(phi, fjet)


def det_identity_residual(phi: PhiValue, fjet: FJet):
    F = fjet.F.value
    return np.abs(phi.det - (0.25 * F ** 2 - fjet.dF_norm2))


def joyce_residual(phi: PhiValue):
    """Max-abs of ``rho d_rho v1 + rho d_eta v2 - v1`` and ``rho d_eta v1 - rho d_rho v2``.

    Returns an array over points, with both equations and components combined.
    """
    if phi.jets is None:
        raise PreconditionError("Joyce residual needs jet-valued Phi")
    (a1, a2), (b1, b2) = phi.jets
    rho = phi.rho
    out = []
    for v1, v2 in ((a1, b1), (a2, b2)):
        out.append(rho * v1.deriv(1, 0) + rho * v2.deriv(0, 1) - v1.value)
        out.append(rho * v1.deriv(0, 1) - rho * v2.deriv(1, 0))
    return np.max(np.abs(np.stack(out)), axis=0)


def joyce_scale(phi: PhiValue):
    """Magnitude used to make Joyce residuals relative."""
    (a1, a2), (b1, b2) = phi.jets
    terms = [a1.value, a2.value, b1.value, b2.value]
    rho = phi.rho
    for j in (a1, a2, b1, b2):
        terms += [rho * j.deriv(1, 0), rho * j.deriv(0, 1)]
    return np.max(np.abs(np.stack(terms)), axis=0)


# -- monotonicity ----------------------------------------------------------------

def _mu_nu_steps(data):
    if isinstance(data, BoundaryProfile):
        steps = [(p.mu, p.nu) for p in affine_pieces(data)]
        # patches: sample (f0', y f0' - f0) inside each
        if data.smooth_pieces:
            rows = []
            for piece in affine_pieces(data):
                rows.append((piece.lo, piece.mu, piece.nu))
            for c in data.smooth_pieces:
                a, b = float(c.a), float(c.b)
                for y in np.linspace(a, b, 17)[1:-1]:
                    d1 = float(c(y, 1))
                    rows.append((y, d1, y * d1 - float(c(y))))
            rows.sort(key=lambda r: float(r[0]))
            steps = [(m, n) for _, m, n in rows]
        return steps
    return [tuple(x) for x in data]


def monotonicity_check(data) -> bool:
    """``mu(y) nu(z) - mu(z) nu(y) <= 0`` for all ``y <= z``, strictly somewhere.

    ``data`` is a profile or an ordered list of ``(mu, nu)`` step values.
    """
    steps = _mu_nu_steps(data)
    strict = False
    for i in range(len(steps)):
        for j in range(i + 1, len(steps)):
            (m1, n1), (m2, n2) = steps[i], steps[j]
            val = m1 * n2 - m2 * n1
            if isinstance(val, float):
                if val > 1e-13 * (1 + abs(m1 * n2) + abs(m2 * n1)):
                    return False
                strict = strict or val < -1e-13
            else:
                if val > 0:
                    return False
                strict = strict or val < 0
    return strict


# -- boundary asymptotics ----------------------------------------------------------

@dataclass
class AsymptoticsReport:
    eta: float
    mn: tuple
    rho: np.ndarray
    v1_norm: np.ndarray
    v2_defect: np.ndarray
    f_defect: np.ndarray
    orders: dict
    v2_limit: np.ndarray

    def ok(self, slack: float = 0.2) -> bool:
        o = self.orders
        return (abs(o["v1"] - 1) <= slack and o["v2"] >= 2 - slack and o["f"] >= 2 - slack)


def fit_order(rho, values) -> float:
    """Least-squares slope of ``log|values|`` against ``log rho``."""
    v = np.abs(np.asarray(values, dtype=float))
    if np.any(v == 0) or not np.all(np.isfinite(v)):
        from .errors import FitFailure
        raise FitFailure("cannot fit an order to zero or non-finite samples")
    slope, _ = np.polyfit(np.log(rho), np.log(v), 1)
    return float(slope)


def local_piece(profile: BoundaryProfile, eta):
    for piece in affine_pieces(profile):
        lo, hi = piece.lo, piece.hi
        if float(lo) < eta < float(hi):
            return piece
    raise NotLocallyAffine(f"eta = {eta} is a breakpoint or lies on a smooth piece")


def boundary_asymptotics(profile: BoundaryProfile, eta: float, rho_samples=None) -> AsymptoticsReport:
    """Fit orders of ``v1``, ``v2 - (m, n)`` and ``f - f0`` as ``rho -> 0``."""
    piece = local_piece(profile, eta)
    rho = np.geomspace(1e-2, 1e-4, 9) if rho_samples is None else np.asarray(rho_samples, dtype=float)
    eta_arr = np.full_like(rho, float(eta))
    fj = eval_F_jet(profile, (rho, eta_arr))
    phi = phi_from_potential(fj)
    m, n = float(piece.mu), float(piece.nu)
    v1n = np.hypot(phi.v1[0], phi.v1[1])
    v2d = np.hypot(phi.v2[0] - m, phi.v2[1] - n)
    f0 = float(boundary_value(profile, Fraction(eta) if isinstance(eta, Fraction) else eta))
    fd = fj.f.value - f0
    orders = {"v1": fit_order(rho, v1n), "v2": fit_order(rho, v2d), "f": fit_order(rho, fd)}
    k = int(np.argmin(rho))
    return AsymptoticsReport(float(eta), (piece.mu, piece.nu), rho, v1n, v2d, fd, orders,
                             np.array([phi.v2[0][k], phi.v2[1][k]]))
