from __future__ import annotations

from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hjsde.errors import FitFailure, NotLocallyAffine, PreconditionError
from hjsde.halfplane import grid, laplacian_residual
from hjsde.joyce import (
    FJet,
    boundary_asymptotics,
    det_identity_residual,
    eval_atoms_F_jet,
    eval_F_jet,
    eval_f,
    fit_order,
    joyce_residual,
    joyce_scale,
    local_piece,
    monotonicity_check,
    phi_from_potential,
    phi_from_weights,
)
from hjsde.profiles import (
    BoundaryProfile,
    CubicPatch,
    canonical_profile,
    ch_profile,
    odd_extension,
    spectral_weights,
)
from hjsde.resolution import QuotientData, minimal_sequence

GRID = grid((0.1, 3.0), (-2.0, 2.0), 15)


@pytest.fixture(scope="module")
def can83():
    return canonical_profile(minimal_sequence(8, 3))


@st.composite
def exact_profiles(draw):
    n = draw(st.integers(1, 5))
    xs = sorted(set(draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n))))
    vals = draw(st.lists(st.integers(-10, 10), min_size=len(xs), max_size=len(xs)))
    ls = draw(st.integers(-2, 2))
    rs = draw(st.integers(-2, 2))
    return BoundaryProfile(tuple(Fr(x, 4) for x in xs), tuple(Fr(v, 3) for v in vals), ls, rs)


@given(exact_profiles())
def test_stable_sum_matches_direct_sum(prof):
    sw = spectral_weights(prof)
    atoms = list(sw.all_atoms())
    stable = eval_F_jet(prof, GRID)
    direct = eval_atoms_F_jet(atoms, GRID, linear=float(sw.linear_coefficient))
    scale = 1.0 + np.max(np.abs(direct.F.value))
    np.testing.assert_allclose(stable.F.value, direct.F.value, atol=1e-11 * scale)


@given(exact_profiles())
def test_potential_is_eigenfunction_and_solves_joyce(prof):
    fj = eval_F_jet(prof, GRID)
    F = fj.F
    lap = np.abs(laplacian_residual(F))
    assert np.all(lap <= 1e-10 * (1.0 + np.abs(F.value) + fj.dF_norm2 ** 0.5))
    phi = phi_from_potential(fj)
    assert np.all(joyce_residual(phi) <= 1e-10 * (1.0 + joyce_scale(phi)))
    assert np.all(det_identity_residual(phi, fj) <= 1e-11 * (1.0 + F.value ** 2 + fj.dF_norm2))


def test_boundary_limit(can83):
    eta = np.array([-1.0, 0.3, 0.45, 0.75, 2.0])
    f = eval_f(can83, np.full_like(eta, 1e-7), eta)
    np.testing.assert_allclose(f, [-1.0, 0.3 * 8 - 3, 0.45 * 3 - 1 + 0.0, 0.75, 1.0], atol=1e-6)


def test_patch_profile_eigenfunction():
    prof = BoundaryProfile((0, 1, 2), (0, 1, 3), 0, 2, (CubicPatch(0, 1, (0, 0.5, 0.25, 0.25)),))
    fj = eval_F_jet(prof, GRID)
    lap = np.abs(laplacian_residual(fj.F))
    assert np.max(lap / (1 + np.abs(fj.F.value))) < 1e-9


def test_weights_route_matches_potential(can83):
    sw = spectral_weights(can83)
    atoms = [(y, (float(w), float(y) * float(w))) for y, w in sw.atoms]
    a = phi_from_weights(atoms, GRID)
    b = phi_from_potential(eval_F_jet(can83, GRID))
    np.testing.assert_allclose(a.v1, b.v1, atol=1e-12)
    np.testing.assert_allclose(a.v2, b.v2, atol=1e-12)


def test_single_atom_has_zero_determinant():
    phi = phi_from_weights([(0.5, (1.0, 2.0))], GRID)
    np.testing.assert_allclose(phi.det, 0.0, atol=1e-14)


def test_scaling():
    fj = eval_F_jet(ch_profile(QuotientData(8, 3)), GRID)
    two = FJet(fj.F * 2.0, fj.f * 2.0)
    np.testing.assert_allclose(phi_from_potential(two).det, 4 * phi_from_potential(fj).det)


def test_monotonicity(can83):
    assert monotonicity_check(can83)
    assert monotonicity_check(odd_extension(can83))
    assert not monotonicity_check([(1, 0), (0, 1), (1, 0)])


def test_boundary_asymptotics_on_edge(can83):
    rep = boundary_asymptotics(can83, 0.45)
    assert rep.mn == (3, 1)
    assert rep.ok()
    assert abs(rep.orders["v1"] - 1) < 0.2
    assert abs(rep.orders["v2"] - 2) < 0.2
    np.testing.assert_allclose(rep.v2_limit, [3.0, 1.0], atol=1e-4)


def test_local_piece_and_fit_errors(can83):
    assert local_piece(can83, 0.3).mu == 8
    with pytest.raises(NotLocallyAffine):
        local_piece(can83, 0.4)
    with pytest.raises(FitFailure):
        fit_order(np.array([1.0, 2.0]), np.array([0.0, 1.0]))
    with pytest.raises(PreconditionError):
        eval_F_jet(can83, (0.0, 1.0))
