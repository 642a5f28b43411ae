"""Curvature of metric samples and certification of SDE / SFK properties.

Sign conventions: ``R_abcd = 1/2 (g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac)
+ g_ef (G^e_bc G^f_ad - G^e_bd G^f_ac)``, ``Ric_bd = g^ac R_abcd``; the round
sphere has positive ``R_abab`` and positive scalar curvature.

Relative residuals are divided by the Frobenius norm of the full curvature
operator on 2-forms, so they are invariant under constant rescaling of the
metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, SingularMetric
from .metrics import MetricSample, metric_sde, metric_sfk
from .joyce import eval_F_jet

__all__ = [
    "CurvatureTensors",
    "CurvatureReport",
    "Verdict",
    "curvature_tensors",
    "weyl_split",
    "curvature_report",
    "verify_sde",
    "verify_sfk",
    "GUARD_RHO",
    "GUARD_RATIO",
    "fd_derivatives",
    "fd_defect",
    "conformal_rescale",
]

GUARD_RHO = 1e-2
GUARD_RATIO = 1e-3

_TWO_FORMS = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)]
_S = 1 / np.sqrt(2)
_UPLUS = np.array([[_S, 0, 0], [0, _S, 0], [0, 0, _S], [_S, 0, 0], [0, _S, 0], [0, 0, _S]])
_UMINUS = np.array([[_S, 0, 0], [0, _S, 0], [0, 0, _S], [-_S, 0, 0], [0, -_S, 0], [0, 0, -_S]])


@dataclass
class CurvatureTensors:
    riemann: np.ndarray  # (..., 4, 4, 4, 4) all indices down
    ricci: np.ndarray
    scalar: np.ndarray
    ginv: np.ndarray
    christoffel: np.ndarray  # (..., m, i, j) = G^m_ij

    def bianchi_residual(self):
        R = self.riemann
        b = R + np.einsum("...acdb->...abcd", R) + np.einsum("...adbc->...abcd", R)
        return np.max(np.abs(b), axis=(-1, -2, -3, -4)) / _scale(R)

    def ricci_asymmetry(self):
        r = self.ricci
        return np.max(np.abs(r - np.swapaxes(r, -1, -2)), axis=(-1, -2)) / np.maximum(
            np.max(np.abs(r), axis=(-1, -2)), 1e-300)


def _scale(R):
    return np.maximum(np.max(np.abs(R), axis=(-1, -2, -3, -4)), 1e-300)


def curvature_tensors(sample: MetricSample) -> CurvatureTensors:
    g, dg, ddg = sample.g, sample.dg, sample.ddg
    det = np.linalg.det(g)
    cond = np.linalg.cond(g)
    if np.any(~np.isfinite(det)) or np.any(det == 0) or np.any(cond > 1e15):
        raise SingularMetric("metric coefficient matrix is not invertible at some sample point")
    ginv = np.linalg.inv(g)
    # first kind: G1[k, i, j] = 1/2 (d_i g_kj + d_j g_ki - d_k g_ij)
    G1 = 0.5 * (np.einsum("...ikj->...kij", dg) + np.einsum("...jki->...kij", dg) - dg)
    G2 = np.einsum("...mk,...kij->...mij", ginv, G1)
    # second-derivative part: d_b d_c g_ad etc.
    t1 = np.einsum("...bcad->...abcd", ddg)
    t2 = np.einsum("...adbc->...abcd", ddg)
    t3 = np.einsum("...bdac->...abcd", ddg)
    t4 = np.einsum("...acbd->...abcd", ddg)
    R = 0.5 * (t1 + t2 - t3 - t4)
    R = R + np.einsum("...ef,...ebc,...fad->...abcd", g, G2, G2) \
          - np.einsum("...ef,...ebd,...fac->...abcd", g, G2, G2)
    Ric = np.einsum("...ac,...abcd->...bd", ginv, R)
    s = np.einsum("...bd,...bd->...", ginv, Ric)
    return CurvatureTensors(R, Ric, s, ginv, G2)


def _frame(g):
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("metric is not positive definite at some sample point") from exc
    return np.linalg.inv(np.swapaxes(L, -1, -2))  # E = L^{-T}, columns orthonormal, det > 0


def _kn(h, k):
    """Kulkarni-Nomizu product ``h_ac k_bd + h_bd k_ac - h_ad k_bc - h_bc k_ad``."""
    return (np.einsum("...ac,...bd->...abcd", h, k) + np.einsum("...bd,...ac->...abcd", h, k)
            - np.einsum("...ad,...bc->...abcd", h, k) - np.einsum("...bc,...ad->...abcd", h, k))


def _operator(T):
    """6x6 matrix of a curvature-type tensor on the 2-form basis."""
    M = np.empty(T.shape[:-4] + (6, 6))
    for I, (a, b) in enumerate(_TWO_FORMS):
        for J, (c, d) in enumerate(_TWO_FORMS):
            M[..., I, J] = T[..., a, b, c, d]
    return M


@dataclass
class WeylSplit:
    plus: np.ndarray
    minus: np.ndarray
    total: np.ndarray
    scale: np.ndarray
    frame_riemann: np.ndarray
    frame_ricci: np.ndarray
    scalar: np.ndarray


def weyl_split(sample: MetricSample, tensors: CurvatureTensors | None = None) -> WeylSplit:
    """Norms of the self-dual and anti-self-dual Weyl parts in an oriented orthonormal frame."""
    t = curvature_tensors(sample) if tensors is None else tensors
    E = _frame(sample.g)
    Rh = np.einsum("...abcd,...ai,...bj,...ck,...dl->...ijkl", t.riemann, E, E, E, E)
    Rich = np.einsum("...bd,...bj,...dl->...jl", t.ricci, E, E)
    s = t.scalar
    delta = np.broadcast_to(np.eye(4), Rh.shape[:-4] + (4, 4))
    traceless = Rich - (s[..., None, None] / 4) * delta
    W = Rh - 0.5 * _kn(traceless, delta) - (s[..., None, None, None, None] / 24) * _kn(delta, delta)
    M = _operator(W)
    Wp = np.einsum("ai,...ab,bj->...ij", _UPLUS, M, _UPLUS)
    Wm = np.einsum("ai,...ab,bj->...ij", _UMINUS, M, _UMINUS)
    nplus = np.sqrt(np.sum(Wp ** 2, axis=(-1, -2)))
    nminus = np.sqrt(np.sum(Wm ** 2, axis=(-1, -2)))
    if sample.orientation < 0:
        nplus, nminus = nminus, nplus
    total = np.sqrt(np.sum(M ** 2, axis=(-1, -2)))
    scale = np.sqrt(np.sum(_operator(Rh) ** 2, axis=(-1, -2)))
    return WeylSplit(nplus, nminus, total, scale, Rh, Rich, s)


@dataclass
class CurvatureReport:
    """Per-point curvature summary; residuals are relative to the curvature-operator norm."""

    scalar: np.ndarray
    einstein_residual: np.ndarray
    weyl_plus_norm: np.ndarray
    weyl_minus_norm: np.ndarray
    scale: np.ndarray
    scalar_relative: np.ndarray
    orientation: int = 1

    def point(self, i) -> dict:
        return {
            "scalar": float(self.scalar[i]),
            "scalar_relative": float(self.scalar_relative[i]),
            "einstein_residual": float(self.einstein_residual[i]),
            "weyl_plus": float(self.weyl_plus_norm[i]),
            "weyl_minus": float(self.weyl_minus_norm[i]),
            "scale": float(self.scale[i]),
        }


def curvature_report(sample: MetricSample) -> CurvatureReport:
    t = curvature_tensors(sample)
    ws = weyl_split(sample, t)
    sc = np.where(ws.scale > 0, ws.scale, 1.0)
    delta = np.eye(4)
    # frame Frobenius norm: independent of the choice of orthonormal frame
    ein = np.sqrt(np.sum((ws.frame_ricci - (ws.scalar[..., None, None] / 4) * delta) ** 2, axis=(-1, -2))) / sc
    return CurvatureReport(
        scalar=ws.scalar,
        einstein_residual=ein,
        weyl_plus_norm=ws.plus / sc,
        weyl_minus_norm=ws.minus / sc,
        scale=ws.scale,
        scalar_relative=np.abs(ws.scalar) / sc,
        orientation=sample.orientation,
    )


@dataclass
class Verdict:
    passed: bool
    report: CurvatureReport
    per_point: list
    vanishing_half: str | None
    details: dict = field(default_factory=dict)


def _half(report, tol):
    plus_small = report.weyl_plus_norm <= tol
    minus_small = report.weyl_minus_norm <= tol
    if np.all(plus_small) and np.all(minus_small):
        return "both", plus_small | minus_small
    if np.all(minus_small):
        return "minus", minus_small
    if np.all(plus_small):
        return "plus", plus_small
    return None, plus_small | minus_small


def _points(points):
    rho, eta = points
    return np.atleast_1d(np.asarray(rho, dtype=float)), np.atleast_1d(np.asarray(eta, dtype=float))


def verify_sde(profile, points, tol: float = 1e-6, guard: bool = True) -> Verdict:
    """Einstein, half conformally flat, and scalar sign equal to ``sign(F^2 - 4|dF|^2)``.

    All points must lie on one side of the zero set of ``F``.  A point passes
    when the Einstein residual and at least one Weyl half are below ``tol``.
    """
    rho, eta = _points(points)
    fj = eval_F_jet(profile, (rho, eta))
    F = fj.F.value
    if not (np.all(F > 0) or np.all(F < 0)):
        raise PreconditionError("sample points straddle the zero set of F")
    if guard:
        dF = np.sqrt(fj.dF_norm2)
        if np.any(rho < GUARD_RHO):
            raise PreconditionError(f"points below the guard height rho = {GUARD_RHO}")
        if np.any(np.abs(F) < GUARD_RATIO * dF):
            raise PreconditionError("points inside the guard band around the zero set")
    sample, sign = metric_sde(profile, (rho, eta), fjet=fj)
    rep = curvature_report(sample)
    half, half_ok = _half(rep, tol)
    sign_ok = np.sign(rep.scalar) == sign
    ok = (rep.einstein_residual <= tol) & half_ok & sign_ok
    per = [dict(rep.point(i), rho=float(rho[i]), eta=float(eta[i]), expected_sign=int(sign[i]),
                passed=bool(ok[i])) for i in range(len(rho))]
    return Verdict(bool(np.all(ok)) and half is not None, rep, per, half,
                   {"sign": sign, "sign_ok": sign_ok})


def verify_sfk(seq, ys, points, tol: float = 1e-6, expect_einstein: bool | None = None) -> Verdict:
    """Scalar-flat with one vanishing Weyl half; optionally Einstein (Ricci-flat) too."""
    rho, eta = _points(points)
    if np.any(rho < GUARD_RHO):
        raise PreconditionError(f"points below the guard height rho = {GUARD_RHO}")
    sample = metric_sfk(seq, ys, (rho, eta))
    rep = curvature_report(sample)
    half, half_ok = _half(rep, tol)
    ok = (rep.scalar_relative <= tol) & half_ok
    if expect_einstein is True:
        ok &= rep.einstein_residual <= tol
    elif expect_einstein is False:
        ok &= rep.einstein_residual > tol
    per = [dict(rep.point(i), rho=float(rho[i]), eta=float(eta[i]), passed=bool(ok[i]))
           for i in range(len(rho))]
    return Verdict(bool(np.all(ok)) and half is not None, rep, per, half)


# -- independent checks -------------------------------------------------------

def _g_only(build, rho, eta):
    return build((rho, eta)).g


def fd_derivatives(build, rho, eta, h: float = 1e-4):
    """Richardson-extrapolated central differences of ``build((rho, eta)).g``.

    Returns ``(dg, ddg)`` laid out like :class:`MetricSample`; only the
    ``(rho, eta)`` derivative slots are filled, the torus slots are zero.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    g0 = _g_only(build, rho, eta)

    def at(dr, de):
        return _g_only(build, rho + dr, eta + de)

    def first(step, axis):
        d = (step, 0.0) if axis == 0 else (0.0, step)
        return (at(*d) - at(-d[0], -d[1])) / (2 * step)

    def second(step, a, b):
        if a == b:
            d = (step, 0.0) if a == 0 else (0.0, step)
            return (at(*d) - 2 * g0 + at(-d[0], -d[1])) / step ** 2
        return (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) / (4 * step ** 2)

    dg = np.zeros(g0.shape[:-2] + (4, 4, 4))
    ddg = np.zeros(g0.shape[:-2] + (4, 4, 4, 4))
    for a in range(2):
        dg[..., a, :, :] = (4 * first(h / 2, a) - first(h, a)) / 3
        for b in range(2):
            ddg[..., a, b, :, :] = (4 * second(h / 2, a, b) - second(h, a, b)) / 3
    return dg, ddg


def fd_defect(build, rho, eta, h: float = 1e-4):
    """Relative max difference between jet and finite-difference derivatives."""
    s = build((rho, eta))
    dg, ddg = fd_derivatives(build, rho, eta, h)
    e1 = np.max(np.abs(s.dg - dg)) / max(np.max(np.abs(s.dg)), 1e-300)
    e2 = np.max(np.abs(s.ddg - ddg)) / max(np.max(np.abs(s.ddg)), 1e-300)
    return float(e1), float(e2)


def conformal_rescale(sample: MetricSample, phi) -> MetricSample:
    """``phi * g`` for a jet ``phi`` (order >= 2) in ``(rho, eta)``, derivatives by the product rule."""
    v = phi.value
    d = np.zeros(v.shape + (4,))
    dd = np.zeros(v.shape + (4, 4))
    d[..., 0], d[..., 1] = phi.deriv(1, 0), phi.deriv(0, 1)
    dd[..., 0, 0], dd[..., 1, 1] = phi.deriv(2, 0), phi.deriv(0, 2)
    dd[..., 0, 1] = dd[..., 1, 0] = phi.deriv(1, 1)
    g, dg, ddg = sample.g, sample.dg, sample.ddg
    g2 = v[..., None, None] * g
    dg2 = d[..., :, None, None] * g[..., None, :, :] + v[..., None, None, None] * dg
    ddg2 = (dd[..., :, :, None, None] * g[..., None, None, :, :]
            + d[..., :, None, None, None] * dg[..., None, :, :, :]
            + d[..., None, :, None, None] * dg[..., :, None, :, :]
            + v[..., None, None, None, None] * ddg)
    return MetricSample(g2, dg2, ddg2, sample.rho, sample.eta, sample.coords, sample.orientation)
