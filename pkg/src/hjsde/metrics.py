"""Assembly of torus-invariant 4-metrics from Joyce matrices and potentials.

Coordinates are ``(rho, eta, psi1, psi2)``.  For ``v = (a, b)`` the 1-form
``<v, .>`` is ``a dpsi2 - b dpsi1``.  Every metric here has the block form

    Omega^2 [ (d rho^2 + d eta^2) / rho^2 + (<v1,.>^2 + <v2,.>^2) / <v1,v2>^2 ].

Samples carry exact first and second coordinate derivatives propagated by
jets; derivatives along the torus directions vanish.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    ConformalDegeneracy,
    DegeneratePhi,
    NonDecreasingYs,
    NotLocallyAffine,
    OnZeroSet,
    OutOfChart,
    PreconditionError,
    WrongSide,
)
from .jet import Jet
from .joyce import (
    FJet,
    PhiValue,
    eval_F_jet,
    fit_order,
    local_piece,
    phi_from_potential,
    phi_from_weights,
)
from .profiles import (
    BoundaryProfile,
    boundary_value,
    boundary_zero,
    canonical_weights,
    canonical_ys,
    f1_coefficient,
)
from .resolution import AdmissibleSequence, self_intersections

__all__ = [
    "COORDS",
    "MetricSample",
    "BoundaryStructure",
    "ExtensionReport",
    "metric_g_phi",
    "sfk_conformal_factor",
    "sfk_atoms",
    "metric_sfk",
    "metric_sde",
    "metric_sde_explicit",
    "compactified_sde_metric",
    "closed_form_oracle",
    "ball_coordinates",
    "hyperbolic_ball_native",
    "bergman_metric",
    "HYPERBOLIC_HOMOTHETY",
    "conformal_infinity_odd",
    "odd_lattice_change",
    "cr_infinity",
    "CR_TORUS_SCALE",
    "extension_residuals",
    "canonical_sde_feasible",
]

COORDS = ("rho", "eta", "psi1", "psi2")

# g_F of the two-pole potential is this multiple of the unit-ball form
# (1 - |r|^2)^-2 |dr|^2, i.e. it has sectional curvature -1
HYPERBOLIC_HOMOTHETY = 4.0
# torus rescaling (psi, phi) = mu (psi2, -psi1) matching the CR boundary data
CR_TORUS_SCALE = 4.0

_PAIRS = [(i, j) for i in range(4) for j in range(i, 4)]


@dataclass
class MetricSample:
    """Metric coefficients with coordinate derivatives at a batch of points.

    ``g[..., i, j]``, ``dg[..., k, i, j] = d_k g_ij`` and
    ``ddg[..., k, l, i, j] = d_k d_l g_ij``; batch axes come first.
    """

    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    coords: tuple = COORDS
    orientation: int = 1

    @property
    def shape(self):
        return self.g.shape[:-2]

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return MetricSample(self.g[idx], self.dg[idx], self.ddg[idx], self.rho[idx], self.eta[idx],
                            self.coords, self.orientation)

    def scaled(self, c: float) -> "MetricSample":
        return MetricSample(self.g * c, self.dg * c, self.ddg * c, self.rho, self.eta, self.coords,
                            self.orientation)

    def flipped(self) -> "MetricSample":
        return MetricSample(self.g, self.dg, self.ddg, self.rho, self.eta, self.coords, -self.orientation)

    def positive_definite(self) -> np.ndarray:
        ev = np.linalg.eigvalsh(self.g)
        return ev[..., 0] > 0

    def block_defect(self) -> float:
        """Largest base-fibre cross term (zero by construction)."""
        return float(np.max(np.abs(self.g[..., :2, 2:]), initial=0.0))

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.g - np.swapaxes(self.g, -1, -2)), initial=0.0))

    def to_dict(self, index=None) -> dict:
        s = self if index is None else self[index]
        if s.g.ndim != 2:
            raise PreconditionError("serialize one point at a time")
        return {
            "coords": list(s.coords),
            "orientation": list(s.coords) if s.orientation > 0 else
            [s.coords[1], s.coords[0]] + list(s.coords[2:]),
            "point": [float(s.rho), float(s.eta)],
            "g": {f"{i}{j}": float(s.g[i, j]) for i, j in _PAIRS},
            "dg": {f"{k},{i}{j}": float(s.dg[k, i, j]) for k in range(4) for i, j in _PAIRS},
            "ddg": {f"{k}{l},{i}{j}": float(s.ddg[k, l, i, j])
                    for k, l in _PAIRS for i, j in _PAIRS},
        }

    def to_json(self, index=None, **kw) -> str:
        return json.dumps(self.to_dict(index), **kw)


def sample_from_jets(comps: dict, rho, eta, coords=COORDS) -> MetricSample:
    """Build a sample from jets ``comps[(i, j)]`` (i <= j) of order >= 2."""
    shape = np.shape(rho)
    g = np.zeros(shape + (4, 4))
    dg = np.zeros(shape + (4, 4, 4))
    ddg = np.zeros(shape + (4, 4, 4, 4))
    for (i, j), J in comps.items():
        if not isinstance(J, Jet):
            g[..., i, j] = g[..., j, i] = J
            continue
        vals = {
            (): J.value,
            (0,): J.deriv(1, 0), (1,): J.deriv(0, 1),
            (0, 0): J.deriv(2, 0), (0, 1): J.deriv(1, 1), (1, 1): J.deriv(0, 2),
        }
        for a, b in ((i, j), (j, i)):
            g[..., a, b] = vals[()]
            dg[..., 0, a, b] = vals[(0,)]
            dg[..., 1, a, b] = vals[(1,)]
            ddg[..., 0, 0, a, b] = vals[(0, 0)]
            ddg[..., 0, 1, a, b] = ddg[..., 1, 0, a, b] = vals[(0, 1)]
            ddg[..., 1, 1, a, b] = vals[(1, 1)]
    return MetricSample(g, dg, ddg, np.asarray(rho), np.asarray(eta), coords)


def _fibre_jets(phi: PhiValue):
    (a0, a1), (b0, b1) = phi.jets
    G11 = a1 * a1 + b1 * b1
    G12 = -(a0 * a1 + b0 * b1)
    G22 = a0 * a0 + b0 * b0
    pair = a0 * b1 - a1 * b0
    return G11, G12, G22, pair


def _check_pair(pair: Jet, phi: PhiValue):
    scale = np.maximum(np.abs(phi.v1).max(axis=0) * np.abs(phi.v2).max(axis=0), 1e-300)
    if np.any(np.abs(pair.value) <= 1e-14 * scale):
        raise DegeneratePhi("<v1, v2> vanishes; the conformal class degenerates")


def metric_g_phi(phi: PhiValue, omega2, pt=None) -> MetricSample:
    """``Omega^2 ((d rho^2 + d eta^2)/rho^2 + (<v1,.>^2 + <v2,.>^2)/<v1,v2>^2)``."""
    if phi.jets is None or phi.jets[0][0].order < 2:
        raise PreconditionError("metric assembly needs Phi as jets of order >= 2")
    G11, G12, G22, pair = _fibre_jets(phi)
    _check_pair(pair, phi)
    n = G11.order
    r = Jet.var_rho(phi.rho, phi.eta, n)
    if not isinstance(omega2, Jet):
        om = np.asarray(omega2, dtype=float)
        if np.any(om <= 0):
            raise PreconditionError("conformal factor must be positive")
        omega2 = Jet.constant(om * np.ones(np.shape(phi.rho)), phi.rho, phi.eta, n)
    else:
        omega2 = omega2.truncate(min(n, omega2.order))
    base = omega2 / (r * r)
    fib = omega2 / (pair * pair)
    comps = {(0, 0): base, (1, 1): base, (0, 1): 0.0,
             (2, 2): fib * G11, (2, 3): fib * G12, (3, 3): fib * G22}
    return sample_from_jets(comps, phi.rho, phi.eta)


def _abs_jet(j: Jet) -> Jet:
    return j * np.sign(j.value)


def _det_jet(phi: PhiValue) -> Jet:
    (a0, a1), (b0, b1) = phi.jets
    return -(a0 * b1 - a1 * b0)


def sfk_conformal_factor(phi: PhiValue, y_inf, pt=None) -> Jet:
    """``Omega^2 = rho |det Phi| / (rho^2 + (eta - y_inf)^2)`` as a jet."""
    det = _det_jet(phi)
    n = det.order
    r, e = Jet.variables(phi.rho, phi.eta, n)
    d = e - float(y_inf)
    return r * _abs_jet(det) / (r * r + d * d)


def sfk_atoms(seq: AdmissibleSequence, ys) -> list:
    """Pairs ``(y_j, (m_j - m_{j+1}, n_j - n_{j+1}))`` for ``j = 0 .. k+1``."""
    pr = seq.closed
    ys = list(ys)
    if len(ys) != len(pr) - 1:
        raise PreconditionError(f"need {len(pr) - 1} support points, got {len(ys)}")
    if any(not ys[i] > ys[i + 1] for i in range(len(ys) - 1)):
        raise NonDecreasingYs(f"support points {ys} must be strictly decreasing")
    return [(ys[j], (pr[j][0] - pr[j + 1][0], pr[j][1] - pr[j + 1][1])) for j in range(len(ys))]


def metric_sfk(seq: AdmissibleSequence, ys, pt, order: int = 2) -> MetricSample:
    atoms = sfk_atoms(seq, ys)
    phi = phi_from_weights(atoms, pt, order)
    return metric_g_phi(phi, sfk_conformal_factor(phi, ys[-1]))


def _sde_checks(fj: FJet):
    F = fj.F.value
    dF2 = fj.dF_norm2
    scale = np.sqrt(dF2) + np.abs(F)
    if np.any(np.abs(F) <= 1e-13 * np.maximum(scale, 1e-300)):
        raise OnZeroSet("F vanishes at a sample point; g_F is singular on the zero set")
    q = F ** 2 - 4 * dF2
    if np.any(np.abs(q) <= 1e-12 * (F ** 2 + 4 * dF2)):
        raise ConformalDegeneracy("F^2 = 4|dF|^2 at a sample point")
    return np.sign(q)


def metric_sde(profile: BoundaryProfile, pt, fjet: FJet | None = None):
    """``g_F`` and the sign of ``F^2 - 4|dF|^2`` (which is the sign of the scalar curvature).

    Conformal factor ``|F^2 - 4|dF|^2| / (4 F^2) = rho |det Phi| / f^2``.
    """
    fj = eval_F_jet(profile, pt) if fjet is None else fjet
    sign = _sde_checks(fj)
    phi = phi_from_potential(fj)
    det = _det_jet(phi)
    n = det.order
    r = Jet.var_rho(fj.rho, fj.eta, n)
    f = fj.f.truncate(n)
    omega2 = r * _abs_jet(det) / (f * f)
    return metric_g_phi(phi, omega2), sign


def metric_sde_explicit(profile: BoundaryProfile, pt, fjet: FJet | None = None) -> MetricSample:
    """Second assembly route through the 2x2 matrix ``P`` built from ``f``."""
    fj = eval_F_jet(profile, pt) if fjet is None else fjet
    _sde_checks(fj)
    f3 = fj.f
    fr, fe = f3.d_rho(), f3.d_eta()
    n = fr.order
    r, e = Jet.variables(fj.rho, fj.eta, n)
    f = f3.truncate(n)
    P = [[r * fe - e * fr, fr], [f - r * fr - e * fe, fe]]
    detP = r * (fr * fr + fe * fe) - f * fr
    adet = _abs_jet(detP)
    base = adet / (r * f * f)
    fib = r / (f * f * adet)
    PtP = {(a, b): P[0][a] * P[0][b] + P[1][a] * P[1][b] for a in range(2) for b in range(a, 2)}
    comps = {(0, 0): base, (1, 1): base, (0, 1): 0.0,
             (2, 2): fib * PtP[(0, 0)], (2, 3): fib * PtP[(0, 1)], (3, 3): fib * PtP[(1, 1)]}
    return sample_from_jets(comps, fj.rho, fj.eta)


def compactified_sde_metric(profile: BoundaryProfile, pt) -> MetricSample:
    """``F^2 g_F``, which stays smooth across the zero set of ``F``."""
    fj = eval_F_jet(profile, pt)
    phi = phi_from_potential(fj)
    return metric_g_phi(phi, _abs_jet(_det_jet(phi)))


# -- closed-form oracles ---------------------------------------------------------

def ball_coordinates(rho, eta, order: int = 2):
    """Jets of ``(r1, r2)`` with ``(r1 + i r2)^2 = (eta - 1 + i rho) / (eta + 1 + i rho)``."""
    r, e = Jet.variables(rho, eta, order)
    A = (r * r + (e - 1) * (e - 1)).sqrt()
    B = (r * r + (e + 1) * (e + 1)).sqrt()
    u = (r * r + e * e - 1) / (A * B)
    q = A / B
    r1 = (q * (1 + u) * 0.5).sqrt()
    r2 = (q * (1 - u) * 0.5).sqrt()
    return r1, r2


def hyperbolic_ball_native(r1, r2, order: int = 2) -> MetricSample:
    """``(1 - r1^2 - r2^2)^-2 (dr1^2 + dr2^2 + r1^2 dth1^2 + r2^2 dth2^2)`` in ``(r1, r2, th1, th2)``."""
    a, b = Jet.variables(r1, r2, order)
    s = a * a + b * b
    if np.any(s.value >= 1):
        raise OutOfChart("ball coordinates need r1^2 + r2^2 < 1")
    c = (1 - s) ** -2
    comps = {(0, 0): c, (1, 1): c, (0, 1): 0.0, (2, 2): c * a * a, (3, 3): c * b * b, (2, 3): 0.0}
    return sample_from_jets(comps, np.asarray(r1, dtype=float), np.asarray(r2, dtype=float),
                            ("r1", "r2", "theta1", "theta2"))


def bergman_metric(t, theta, p: int, order: int = 2) -> MetricSample:
    """``2dt^2 + sinh^2 t (dth^2 + (2/p) sin^2 th dphi^2)/2 + sinh^2 2t (dpsi + cos th dphi)^2/(4p)``.

    Coordinates ``(t, theta, phi, psi)``.
    """
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(t <= 0) or np.any(theta <= 0) or np.any(theta >= np.pi):
        raise OutOfChart("Bergman chart needs t > 0 and 0 < theta < pi")
    T, TH = Jet.variables(t, theta, order)
    sh = _sinh(T)
    ch = _cosh(T)
    s2 = sh * sh
    sh2t = (sh * ch) * 2
    A = sh2t * sh2t * (1.0 / (4 * p))
    cth = _cos(TH)
    sth = _sin(TH)
    comps = {
        (0, 0): Jet.constant(2.0, t, theta, order), (1, 1): s2 * 0.5, (0, 1): 0.0,
        (2, 2): s2 * sth * sth * (1.0 / p) + A * cth * cth,
        (2, 3): A * cth,
        (3, 3): A,
    }
    return sample_from_jets(comps, t, theta, ("t", "theta", "phi", "psi"))


def _unary(j: Jet, derivs) -> Jet:
    return j.compose([derivs[k] / math.factorial(k) for k in range(j.order + 1)])


def _sinh(j):
    x = j.value
    return _unary(j, [np.sinh(x), np.cosh(x)] * (j.order // 2 + 1))


def _cosh(j):
    x = j.value
    return _unary(j, [np.cosh(x), np.sinh(x)] * (j.order // 2 + 1))


def _sin(j):
    x = j.value
    return _unary(j, [np.sin(x), np.cos(x), -np.sin(x), -np.cos(x)] * (j.order // 4 + 1))


def _cos(j):
    x = j.value
    return _unary(j, [np.cos(x), -np.sin(x), -np.cos(x), np.sin(x)] * (j.order // 4 + 1))


def closed_form_oracle(kind: str, params=None, pt=None) -> MetricSample:
    """Reference metrics.

    ``"hyperbolic"``: the unit-ball form pulled back to ``(rho, eta, psi1, psi2)``
    with ``psi1 = theta1`` and ``psi2 = theta2``; valid for ``eta > 0``.
    ``"bergman"``: ``pt = (t, theta)``, ``params = {"p": p}``.
    """
    kind = kind.lower()
    if kind in ("hyperbolic", "hyperbolicball", "ball"):
        rho, eta = pt
        rho, eta = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(eta, dtype=float))
        if np.any(eta <= 0):
            raise OutOfChart("the ball chart covers eta > 0 only")
        # derivatives of r1, r2 appear in the base block, so start one order higher
        r1, r2 = ball_coordinates(rho, eta, order=3)
        a_r, a_e = r1.d_rho(), r1.d_eta()
        b_r, b_e = r2.d_rho(), r2.d_eta()
        r1, r2 = r1.truncate(2), r2.truncate(2)
        c = (1 - (r1 * r1 + r2 * r2)) ** -2
        comps = {
            (0, 0): c * (a_r * a_r + b_r * b_r),
            (0, 1): c * (a_r * a_e + b_r * b_e),
            (1, 1): c * (a_e * a_e + b_e * b_e),
            (2, 2): c * r1 * r1,
            (3, 3): c * r2 * r2,
            (2, 3): 0.0,
        }
        return sample_from_jets(comps, rho, eta)
    if kind == "bergman":
        p = (params or {}).get("p", 1) if isinstance(params, dict) else (params or 1)
        t, theta = pt
        return bergman_metric(t, theta, int(p))
    raise PreconditionError(f"unknown oracle kind {kind!r}")


# -- boundary structures ----------------------------------------------------------

@dataclass
class BoundaryStructure:
    kind: str
    components: dict
    extras: dict = field(default_factory=dict)


def odd_lattice_change(p: int, q: int):
    """Reflection ``y -> 2q/p - y`` as ``[[1, 0], [2q/p, -1]] = [[p, 0], [q, -1]] [[p, 0], [q, 1]]^-1``."""
    c = Fraction(q, p)
    M = ((Fraction(1), Fraction(0)), (2 * c, Fraction(-1)))
    A = ((Fraction(p), Fraction(0)), (Fraction(q), Fraction(-1)))
    B = ((Fraction(p), Fraction(0)), (Fraction(q), Fraction(1)))
    det = B[0][0] * B[1][1] - B[0][1] * B[1][0]
    Binv = ((B[1][1] / det, -B[0][1] / det), (-B[1][0] / det, B[0][0] / det))
    prod = tuple(tuple(sum(A[i][k] * Binv[k][j] for k in range(2)) for j in range(2)) for i in range(2))
    return {"matrix": M, "left": A, "right": B, "product": prod, "consistent": prod == M}


def conformal_infinity_odd(seq: AdmissibleSequence, pt_rho) -> BoundaryStructure:
    """Boundary metric of ``F^2 g_F`` on ``eta = q/p`` for the odd extension.

    ``components`` holds the limit in ``(rho, psi1, psi2)``:
    ``S^2 drho^2/rho^2 + rho dpsi1^2 + (dpsi2 - c dpsi1)^2 / rho`` with
    ``S = sum_j w_j (y_j - c) sqrt(rho) / sqrt(rho^2 + (y_j - c)^2)`` over the
    atoms right of ``c``.  ``extras["printed"]`` keeps the variant with unit
    weights doubled and a minus sign on the last square.
    """
    rho = np.asarray(pt_rho, dtype=float)
    if np.any(rho <= 0):
        raise PreconditionError("rho must be positive")
    c = Fraction(seq.q, seq.p)
    ys = canonical_ys(seq)
    ws = canonical_weights(seq)
    right = [(float(y - c), float(w)) for y, w in zip(ys, ws) if y > c]
    S = sum(w * d * np.sqrt(rho) / np.sqrt(rho ** 2 + d ** 2) for d, w in right)
    S_pr = sum(2 * d * np.sqrt(rho) / np.sqrt(rho ** 2 + d ** 2) for d, _ in right)
    cf = float(c)
    comps = {
        "drho2_over_rho2": S ** 2,
        "rho_rho": S ** 2 / rho ** 2,
        "psi1_psi1": rho + cf ** 2 / rho,
        "psi1_psi2": -cf / rho,
        "psi2_psi2": 1 / rho,
    }
    printed = {
        "drho2_over_rho2": S_pr ** 2,
        "rho_rho": S_pr ** 2 / rho ** 2,
        "psi1_psi1": rho - cf ** 2 / rho,
        "psi1_psi2": cf / rho,
        "psi2_psi2": -1 / rho,
    }
    return BoundaryStructure("ConformalInfinityH", comps,
                             {"printed": printed, "center": c,
                              "lattice": odd_lattice_change(seq.p, seq.q)})


def cr_infinity(profile: BoundaryProfile, eta, rho_checks=(1e-2, 1e-3), verify: bool = True) -> BoundaryStructure:
    """Contact form ``2(dpsi + eta dphi)`` and metric ``2 f1 deta^2 + dphi^2 / (2 f1)``.

    With ``verify`` the limit is checked on ``g_F`` samples at the given
    heights: the fibre direction blowing up like ``rho^-4`` is
    ``dpsi2 - eta dpsi1`` and on its kernel
    ``g(X, X) / g(d_eta, d_eta) -> mu^2 / (4 f1^2)`` with ``X = d_psi1 + eta d_psi2``,
    ``mu`` the torus scale relating ``(psi, phi)`` to ``(psi2, -psi1)``.
    """
    c = profile.center if profile.center is not None else boundary_zero(profile)
    if eta >= c:
        raise WrongSide(f"eta = {eta} is not left of the boundary zero {c}")
    f1 = f1_coefficient(profile, eta)
    f1f = float(f1)
    comps = {
        "contact_dpsi": 2.0,
        "contact_dphi": 2.0 * float(eta),
        "h_eta_eta": 2.0 * f1f,
        "h_phi_phi": 1.0 / (2.0 * f1f),
    }
    extras = {"f1": f1, "torus_scale": CR_TORUS_SCALE}
    if verify:
        rhos = np.asarray(rho_checks, dtype=float)
        g, _ = metric_sde(profile, (rhos, np.full_like(rhos, float(eta))))
        e = float(eta)
        X = np.array([0.0, 0.0, 1.0, e])
        ratio = np.einsum("i,nij,j->n", X, g.g, X) / g.g[:, 1, 1]
        target = CR_TORUS_SCALE ** 2 * comps["h_phi_phi"] / comps["h_eta_eta"]
        ratio_def = np.abs(ratio / target - 1)
        # contact direction: rho^4 * fibre block -> K (dpsi2 - eta dpsi1)^2
        fib = g.g[:, 2:, 2:] * rhos[:, None, None] ** 4
        contact_def = np.abs(fib[:, 0, 1] / fib[:, 1, 1] + e)
        contact_def2 = np.abs(fib[:, 0, 0] / fib[:, 1, 1] - e * e)
        extras.update({
            "rho": rhos,
            "ratio": ratio,
            "ratio_target": target,
            "ratio_defect": ratio_def,
            "contact_defect": np.maximum(contact_def, contact_def2),
        })
        if len(rhos) >= 2 and np.all(ratio_def > 0):
            extras["ratio_order"] = fit_order(rhos, ratio_def)
        if len(rhos) >= 2 and np.all(extras["contact_defect"] > 0):
            extras["contact_order"] = fit_order(rhos, extras["contact_defect"])
    return BoundaryStructure("CRContactMetric", comps, extras)


# -- smooth extension -------------------------------------------------------------

@dataclass
class ExtensionReport:
    target: str
    location: object
    values: dict
    orders: dict
    limits: dict
    ok: bool


def _phi_for(seq, data, pt):
    """Joyce matrix and conformal factors for either SFK ``ys`` or an SDE profile."""
    if isinstance(data, BoundaryProfile):
        fj = eval_F_jet(data, pt)
        phi = phi_from_potential(fj)
        return phi, fj
    atoms = sfk_atoms(seq, data)
    return phi_from_weights(atoms, pt), None


def _omega2(seq, data, phi, fj):
    det = np.abs(phi.det)
    if fj is not None:
        return phi.rho * det / fj.f.value ** 2
    ys = list(data)
    return phi.rho * det / (phi.rho ** 2 + (phi.eta - float(ys[-1])) ** 2)


def _edge_mn(seq, data, eta):
    if isinstance(data, BoundaryProfile):
        piece = local_piece(data, eta)
        return float(piece.mu), float(piece.nu)
    ys = [float(y) for y in data]
    pr = seq.closed
    # interval (y_j, y_{j-1}) carries (m_j, n_j); outside: (0,-1) right, (0,1) left
    for j in range(len(ys) + 1):
        lo = ys[j] if j < len(ys) else -np.inf
        hi = ys[j - 1] if j >= 1 else np.inf
        if lo < eta < hi:
            return float(pr[j][0]), float(pr[j][1])
    raise NotLocallyAffine(f"eta = {eta} is a support point")


def extension_residuals(seq: AdmissibleSequence, data, target, rho_ladder=None,
                        angles=(np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3, 5 * np.pi / 6),
                        rel_tol: float = 1e-2) -> ExtensionReport:
    """Numerical smooth-extension checks near the boundary.

    ``target`` is ``("edge", eta)``, ``("corner", j)`` or ``("ratio", eta)``.
    ``data`` is the list of decreasing ``ys`` (SFK) or a profile (SDE).
    """
    kind, where = target
    ladder = np.geomspace(1e-2, 1e-4, 9) if rho_ladder is None else np.asarray(rho_ladder, dtype=float)
    if kind == "edge":
        eta = float(where)
        m, n = _edge_mn(seq, data, eta)
        phi, fj = _phi_for(seq, data, (ladder, np.full_like(ladder, eta)))
        om = _omega2(seq, data, phi, fj)
        v1n = np.hypot(phi.v1[0], phi.v1[1])
        v2d = np.hypot(phi.v2[0] - m, phi.v2[1] - n)
        lim = om / ladder ** 2
        orders = {"v1": fit_order(ladder, v1n), "v2": fit_order(ladder, v2d),
                  "omega2_over_rho2": fit_order(ladder, lim)}
        k = np.argmin(ladder)
        limits = {"v2": (float(phi.v2[0][k]), float(phi.v2[1][k])), "omega2_over_rho2": float(lim[k])}
        ok = (abs(orders["v1"] - 1) <= 0.2 and orders["v2"] >= 1.8 and abs(orders["omega2_over_rho2"]) <= 0.2
              and limits["omega2_over_rho2"] > 0)
        return ExtensionReport("edge", eta, {"mn": (m, n), "v1": v1n, "v2_defect": v2d, "omega2_over_rho2": lim},
                               orders, limits, ok)
    if kind == "corner":
        j = int(where)
        ys = canonical_ys(seq) if isinstance(data, BoundaryProfile) else list(data)
        if not 0 <= j < len(ys) - 1:
            raise PreconditionError(f"corner index {j} outside 0..{len(ys) - 2} (the last point is the ALE end)")
        y0 = float(ys[j])
        vals = {}
        for a in angles:
            rr = ladder
            rho = rr * np.sin(a)
            eta = y0 + rr * np.cos(a)
            phi, fj = _phi_for(seq, data, (rho, eta))
            om = _omega2(seq, data, phi, fj)
            vals[float(a)] = np.sqrt(rho ** 2 + (eta - y0) ** 2) * om / rho ** 2
        finals = np.array([v[np.argmin(ladder)] for v in vals.values()])
        spread = float(np.ptp(finals) / np.mean(np.abs(finals)))
        drift = float(max(abs(v[-1] - v[-2]) / abs(v[-1]) for v in vals.values()))
        limits = {"corner_factor": float(np.mean(finals)), "angular_spread": spread, "drift": drift}
        ok = bool(np.all(finals > 0) and np.all(np.isfinite(finals)) and spread <= rel_tol and drift <= rel_tol)
        return ExtensionReport("corner", y0, vals, {}, limits, ok)
    if kind == "ratio":
        if not isinstance(data, BoundaryProfile):
            raise PreconditionError("the SDE/SFK ratio needs a profile")
        eta = float(where)
        y_inf = float(min(canonical_ys(seq)))
        fj = eval_F_jet(data, (ladder, np.full_like(ladder, eta)))
        ratio = fj.f.value ** 2 / (ladder ** 2 + (eta - y_inf) ** 2)
        k = np.argmin(ladder)
        f0 = float(boundary_value(data, eta))
        expected = f0 ** 2 / (eta - y_inf) ** 2
        drift = float(abs(ratio[k] - expected) / abs(expected)) if expected else np.inf
        ok = bool(ratio[k] > 0 and np.isfinite(ratio[k]) and drift <= rel_tol)
        return ExtensionReport("ratio", eta, {"ratio": ratio}, {},
                               {"ratio": float(ratio[k]), "expected": expected, "drift": drift}, ok)
    raise PreconditionError(f"unknown extension target {kind!r}")


def canonical_sde_feasible(seq: AdmissibleSequence) -> bool:
    """Whether the canonical profile exists: every ``e_j >= 3``."""
    return all(e >= 3 for e in self_intersections(seq))
