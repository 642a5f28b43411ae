"""Acceptance criteria 1-11, one test per criterion (criterion 9 has three parts).

Each test records a pass/fail line that is printed in the terminal summary.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction as Fr

import numpy as np
import pytest

from hjsde.curvature import curvature_report, verify_sde, verify_sfk
from hjsde.errors import DegenerateSpacing
from hjsde.halfplane import MoebiusMap, grid, laplacian_residual, moebius_apply
from hjsde.joyce import (
    FJet,
    det_identity_residual,
    eval_atoms_F_jet,
    eval_F_jet,
    eval_f,
    joyce_residual,
    phi_from_potential,
)
from hjsde.metrics import (
    HYPERBOLIC_HOMOTHETY,
    closed_form_oracle,
    compactified_sde_metric,
    conformal_infinity_odd,
    cr_infinity,
    extension_residuals,
    metric_sde,
    metric_sfk,
)
from hjsde.profiles import (
    BoundaryProfile,
    boundary_zero,
    canonical_atoms,
    canonical_profile,
    canonical_ys,
    ch_profile,
    f1_coefficient,
    odd_extension,
    spectral_weights,
    trace_zero,
    validate_inf1,
)
from hjsde.resolution import (
    AdmissibleSequence,
    QuotientData,
    blow_up,
    blow_up_identity,
    cf_evaluate,
    cf_expand,
    conjugate_q,
    minimal_sequence,
    self_intersections,
    validate_sequence,
)

GRID15 = grid((0.1, 3.0), (-2.0, 2.0), 15)
HYP = BoundaryProfile((-1, 1), (-1, 1))


def _coprime(pmax):
    return [(p, q) for p in range(2, pmax + 1) for q in range(1, p) if math.gcd(p, q) == 1]


@pytest.fixture(scope="module")
def seq83():
    return minimal_sequence(8, 3)


@pytest.fixture(scope="module")
def can83(seq83):
    return canonical_profile(seq83)


@pytest.fixture(scope="module")
def dplus_points(can83):
    """25 interior points of the positive domain, clear of the guard bands."""
    rho, eta = grid((0.05, 1.0), (0.55, 1.5), 5)
    return rho, eta


def _criterion2_potentials():
    out = {}
    for p, q in ((8, 3), (3, 1), (5, 1)):
        out[f"canonical({p},{q})"] = eval_F_jet(canonical_profile(minimal_sequence(p, q)), GRID15)
    # e = [3, 2, 2]: coincident canonical points merge, the potential still exists
    out["canonical(7,3)"] = eval_atoms_F_jet(canonical_atoms(minimal_sequence(7, 3)), GRID15)
    can = canonical_profile(minimal_sequence(8, 3))
    out["odd(8,3)"] = eval_F_jet(odd_extension(can), GRID15)
    out["ch(8,3)"] = eval_F_jet(ch_profile(QuotientData(8, 3)), GRID15)
    return out


def test_criterion_01_combinatorics(record):
    t0 = time.perf_counter()
    bad = []
    for p, q in _coprime(200):
        e = cf_expand(p, q)
        if cf_evaluate(e) != Fr(q, p):
            bad.append(("roundtrip", p, q))
        if cf_evaluate(e[::-1]) != Fr(conjugate_q(p, q), p):
            bad.append(("reversal", p, q))
        seq = minimal_sequence(p, q)
        if not isinstance(validate_sequence(seq.pairs), AdmissibleSequence):
            bad.append(("admissible", p, q))
        for j in range(seq.k + 1):
            if self_intersections(blow_up(seq, j)) != blow_up_identity(e, j):
                bad.append(("blowup", p, q, j))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 5.0
    record("1", ok, f"{len(_coprime(200))} pairs, {len(bad)} failures, {dt:.2f}s")
    assert not bad
    assert dt < 5.0


def test_criterion_02_eigenfunction_and_joyce(record):
    worst_lap, worst_joyce = 0.0, 0.0
    for name, fj in _criterion2_potentials().items():
        lap = np.max(np.abs(laplacian_residual(fj.F)) / np.abs(fj.F.value))
        jr = np.max(joyce_residual(phi_from_potential(fj)))
        worst_lap, worst_joyce = max(worst_lap, lap), max(worst_joyce, jr)
    ok = worst_lap <= 1e-11 and worst_joyce <= 1e-10
    record("2", ok, f"max |dF-3F/4|/|F| = {worst_lap:.2e}, max Joyce residual = {worst_joyce:.2e}")
    assert ok


def test_criterion_03_det_identity(record):
    worst = 0.0
    for fj in _criterion2_potentials().values():
        worst = max(worst, float(np.max(det_identity_residual(phi_from_potential(fj), fj))))
    record("3", worst <= 1e-12, f"max |det Phi - (F^2/4 - |dF|^2)| = {worst:.2e}")
    assert worst <= 1e-12


def test_criterion_04_hyperbolic(record):
    rng = np.random.default_rng(2024)
    rho, eta = rng.uniform(0.1, 3.0, 400), rng.uniform(0.05, 3.0, 400)
    fj = eval_F_jet(HYP, (rho, eta))
    det = phi_from_potential(fj).det
    exact = -rho / (np.sqrt(rho ** 2 + (eta - 1) ** 2) * np.sqrt(rho ** 2 + (eta + 1) ** 2))
    det_err = float(np.max(np.abs(det - exact)))
    g, _ = metric_sde(HYP, (rho, eta), fjet=fj)
    ball = closed_form_oracle("hyperbolic", None, (rho, eta))
    g_err = float(np.max(np.abs(g.g - HYPERBOLIC_HOMOTHETY * ball.g)))
    rep = curvature_report(g)
    ball_scalar = curvature_report(ball).scalar
    expected = float(np.mean(ball_scalar)) / HYPERBOLIC_HOMOTHETY
    ein = float(np.max(rep.einstein_residual))
    wp, wm = float(np.max(rep.weyl_plus_norm)), float(np.max(rep.weyl_minus_norm))
    spread = float(np.ptp(rep.scalar))
    cross = float(np.max(np.abs(rep.scalar - expected)))
    ok = (det_err <= 1e-12 and g_err <= 1e-10 and ein <= 1e-7 and wp <= 1e-7 and wm <= 1e-7
          and spread <= 1e-7 and cross <= 1e-7)
    record("4", ok, f"det err {det_err:.1e}, metric err {g_err:.1e} (g_F = 4 x ball form), "
                    f"Einstein {ein:.1e}, W+ {wp:.1e}, W- {wm:.1e}, scalar {np.mean(rep.scalar):.12g} "
                    f"(ball/4 = {expected:.12g})")
    assert ok


def test_criterion_05_canonical_sde(record, can83, dplus_points):
    v = verify_sde(can83, dplus_points, tol=1e-6)
    r = v.report
    ein = float(np.max(r.einstein_residual))
    small_minus = r.weyl_minus_norm <= 1e-6
    small_plus = r.weyl_plus_norm <= 1e-6
    exactly_one = bool(np.all(small_minus ^ small_plus))
    negative = bool(np.all(r.scalar < 0))
    sign_ok = bool(np.all(v.details["sign_ok"]))
    ok = v.passed and ein <= 1e-6 and exactly_one and negative and sign_ok
    record("5", ok, f"25 points, Einstein {ein:.1e}, vanishing half {v.vanishing_half}, "
                    f"max |W-| {np.max(r.weyl_minus_norm):.1e}, min |W+| {np.min(r.weyl_plus_norm):.1e}, "
                    f"scalar in [{r.scalar.min():.6g}, {r.scalar.max():.6g}]")
    assert ok


def test_criterion_06_sfk(record, seq83):
    rho, eta = grid((0.2, 2.0), (-1.0, 2.0), 5)
    ys = canonical_ys(seq83)
    perturbed = [Fr(6, 5), Fr(1, 2), Fr(3, 10), Fr(-1, 4)]
    details, ok = [], True
    for label, y in (("canonical", ys), ("perturbed", perturbed)):
        v = verify_sfk(seq83, y, (rho, eta), tol=1e-6)
        s = float(np.max(v.report.scalar_relative))
        ok &= v.passed and s <= 1e-6
        details.append(f"{label}: |s| {s:.1e}, half {v.vanishing_half}")
    eh = verify_sfk(minimal_sequence(2, 1), [1, 0, -1], (rho, eta), tol=1e-6, expect_einstein=True)
    ok &= eh.passed
    details.append(f"(2,1) Einstein {np.max(eh.report.einstein_residual):.1e}")
    ne = verify_sfk(seq83, ys, (rho, eta), tol=1e-6)
    min_ein = float(np.min(ne.report.einstein_residual))
    ok &= min_ein > 1e-3
    details.append(f"(8,3) min Einstein {min_ein:.2f}")
    record("6", ok, ", ".join(details))
    assert ok


def test_criterion_07_extension(record, seq83, can83):
    ys = canonical_ys(seq83)
    edge = extension_residuals(seq83, ys, ("edge", 0.45))
    o1, o2 = edge.orders["v1"], edge.orders["v2"]
    ok = abs(o1 - 1) <= 0.2 and abs(o2 - 2) <= 0.2 and edge.limits["v2"] == pytest.approx((3, 1), abs=1e-4)
    corners = [extension_residuals(seq83, ys, ("corner", j)) for j in range(len(ys) - 1)]
    cvals = [c.limits["corner_factor"] for c in corners]
    ok &= all(c.ok and math.isfinite(x) and x > 0 for c, x in zip(corners, cvals))
    ratio = extension_residuals(seq83, can83, ("ratio", 0.6))
    ok &= ratio.ok and 0 < ratio.limits["ratio"] < math.inf
    record("7", ok, f"edge orders v1 {o1:.3f}, v2 {o2:.3f}; corner factors "
                    + ", ".join(f"{x:.4g}" for x in cvals) + f"; SDE/SFK ratio {ratio.limits['ratio']:.6g}")
    assert ok


def test_criterion_08_zero_set(record, can83):
    z = boundary_zero(can83)
    exact = isinstance(z, Fr) and z == Fr(3, 8)
    tr = trace_zero(can83, np.linspace(0.05, 2.0, 20))
    unique = all(c == 1 for c in tr.sign_changes) and len(tr.b) == 20
    odd = odd_extension(can83)
    rho = np.linspace(0.05, 5.0, 50)
    F_odd = float(np.max(np.abs(eval_f(odd, rho, np.full_like(rho, 0.375)) / np.sqrt(rho))))
    small = trace_zero(can83, [1e-2 / 2 ** k for k in range(5)])
    ratios = small.defects[1:] / small.defects[:-1]
    first_order = bool(np.all(np.abs(ratios - 2) < 0.1))
    ok = exact and unique and F_odd <= 1e-12 and first_order
    record("8", ok, f"zero {z}, 20 arcs unique {unique}, max |F_odd(rho, 3/8)| {F_odd:.1e}, "
                    f"defect halving ratios {np.round(ratios, 3).tolist()}")
    assert ok


def test_criterion_09a_cr_infinity(record):
    ch = ch_profile(QuotientData(8, 3))
    eta = Fr(3, 8) - 1
    bs = cr_infinity(ch, eta, rho_checks=(1e-2, 1e-3))
    atoms = spectral_weights(ch).atoms
    f1_direct = sum(float(w) / abs(float(eta) - float(y)) for y, w in atoms)
    f1_err = abs(float(f1_coefficient(ch, eta)) - f1_direct)
    ro, co = bs.extras["ratio_order"], bs.extras["contact_order"]
    ok = f1_err <= 1e-12 and abs(ro - 2) <= 0.2 and abs(co - 2) <= 0.2
    record("9", ok, f"CR: f1 {bs.extras['f1']} (atom-sum err {f1_err:.1e}), orders {ro:.3f}/{co:.3f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the printed boundary form omits the atom weights and has a "
                                         "sign error on the last square; the corrected form is checked below")
def test_criterion_09b_odd_conformal_infinity_printed(record, seq83, can83):
    rho = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
    comp = compactified_sde_metric(odd_extension(can83), (rho, np.full_like(rho, 0.375)))
    bs = conformal_infinity_odd(seq83, rho)
    pr = bs.extras["printed"]
    err = max(float(np.max(np.abs(comp.g[:, 0, 0] / pr["rho_rho"] - 1))),
              float(np.max(np.abs(comp.g[:, 3, 3] / pr["psi2_psi2"] - 1))),
              float(np.max(np.abs(comp.g[:, 2, 2] / pr["psi1_psi1"] - 1))))
    corrected = bs.components
    cerr = max(float(np.max(np.abs(comp.g[:, 0, 0] / corrected["rho_rho"] - 1))),
               float(np.max(np.abs(comp.g[:, 3, 3] / corrected["psi2_psi2"] - 1))),
               float(np.max(np.abs(comp.g[:, 2, 2] / corrected["psi1_psi1"] - 1))),
               float(np.max(np.abs(comp.g[:, 2, 3] / corrected["psi1_psi2"] - 1))))
    record("9", err <= 1e-8, f"odd: printed h rel err {err:.2f} (FAILS); corrected h rel err {cerr:.1e}")
    assert err <= 1e-8


def test_criterion_09c_bergman(record):
    t, th = grid((0.3, 2.0), (0.2, 1.3), 5)
    worst = 0.0
    for p in (1, 2, 3):
        rep = curvature_report(closed_form_oracle("bergman", {"p": p}, (t, th)))
        worst = max(worst, float(np.max(rep.einstein_residual)))
    record("9", worst <= 1e-7, f"Bergman Einstein {worst:.1e}")
    assert worst <= 1e-7


def test_criterion_10_equivariance(record, seq83, can83):
    rho, eta = grid((0.1, 1.0), (0.55, 1.4), 4)
    m = MoebiusMap(2.0, 1.0, 0.5, 0.75)
    atoms = []
    for y, w in spectral_weights(can83).all_atoms():
        img = moebius_apply(m, y)
        atoms.append((img.value, float(w) * img.factor))
    mr, me = moebius_apply(m, (rho, eta)).value
    a = curvature_report(metric_sde(can83, (rho, eta))[0])
    b = curvature_report(metric_sde(None, (mr, me), fjet=eval_atoms_F_jet(atoms, (mr, me)))[0])
    mob = max(float(np.max(np.abs(a.scalar - b.scalar))),
              float(np.max(np.abs(a.scale - b.scale))),
              float(np.max(np.abs(a.weyl_plus_norm * a.scale - b.weyl_plus_norm * b.scale))))

    fj = eval_F_jet(can83, (rho, eta))
    g1, _ = metric_sde(can83, (rho, eta), fjet=fj)
    g2, _ = metric_sde(can83, (rho, eta), fjet=FJet(fj.F * 2.0, fj.f * 2.0))
    T = np.diag([1.0, 1.0, 0.5, 0.5])
    dbl = float(np.max(np.abs(g2.g - T @ g1.g @ T)))

    ys = [float(y) for y in canonical_ys(seq83)]
    pm = MoebiusMap(1.0, 0.3, 0.2, 1.0)
    ys2 = [moebius_apply(pm, y).value for y in ys]
    sr, se = grid((0.2, 1.5), (-0.5, 1.5), 4)
    pr, pe = moebius_apply(pm, (sr, se)).value
    c = curvature_report(metric_sfk(seq83, ys, (sr, se)))
    d = curvature_report(metric_sfk(seq83, ys2, (pr, pe)))
    proj = max(float(np.max(np.abs(c.scalar - d.scalar))),
               float(np.max(np.abs(c.weyl_plus_norm - d.weyl_plus_norm))),
               float(np.max(np.abs(c.weyl_minus_norm - d.weyl_minus_norm))),
               float(np.max(np.abs(c.einstein_residual - d.einstein_residual))))
    ok = mob <= 1e-8 and dbl <= 1e-10 and proj <= 1e-8
    record("10", ok, f"Moebius {mob:.1e}, F->2F vs torus rescaling {dbl:.1e}, "
                     f"projective ys (normalized curvature) {proj:.1e}")
    assert ok


def test_criterion_11_feasibility_gate(record):
    rejected = []
    for seq in (minimal_sequence(3, 2), minimal_sequence(2, 1)):
        try:
            canonical_profile(seq)
        except DegenerateSpacing:
            rejected.append(seq.quotient)
    wrong = []
    n_ok = n_rej = 0
    for p, q in _coprime(50):
        seq = minimal_sequence(p, q)
        feasible = all(e >= 3 for e in self_intersections(seq))
        try:
            prof = canonical_profile(seq)
            built = True
        except DegenerateSpacing:
            built = False
        if built != feasible or (built and validate_inf1(prof)):
            wrong.append((p, q))
        n_ok += built
        n_rej += not built
    ok = len(rejected) == 2 and not wrong
    record("11", ok, f"(3,2) and (2,1) rejected; p <= 50: {n_ok} built, {n_rej} rejected, {len(wrong)} wrong")
    assert ok
