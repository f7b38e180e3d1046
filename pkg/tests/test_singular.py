import numpy as np
import pytest

from bergman_lab.errors import DomainError, PreconditionError
from bergman_lab.geometry import sphere_model
from bergman_lab.hilbert import bergman_function, build_frame
from bergman_lab.singular import (Region, SingularModel, admissible_basis, annulus, big_bound_check,
                                  divergence_test, multiplier_frame, multiplier_kernel, singular_expansion_check,
                                  singular_gap, skoda_check)


def test_tau_range_enforced():
    with pytest.raises(PreconditionError):
        SingularModel(1, 1.0)
    with pytest.raises(PreconditionError):
        SingularModel(1, 0.0)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 16])
def test_thresholds_match_closed_form(k):
    adm = admissible_basis(k, 1, 0.5)
    np.testing.assert_array_equal(adm.exponents, adm.closed_form)
    assert adm.m_k == k + 1 - int(np.floor(k * 0.5 - 1)) - 1
    assert not adm.truncation_flag


def test_boundary_exponent_is_excluded():
    # k tau - 1 integer: v = k tau - 1 gives |zeta|^{-2} exactly, which diverges
    adm = admissible_basis(4, 1, 0.5)
    assert 1 not in adm.exponents and 2 in adm.exponents


def test_divergence_test_separates_cases():
    assert divergence_test(-1.0, 4.0).divergent
    assert divergence_test(-1.5, 4.0).divergent
    conv = divergence_test(-0.5, 4.0)
    assert not conv.divergent and conv.refinement_change < 1e-8


def test_multiplier_kernel_refuses_the_pole():
    mf = multiplier_frame(SingularModel(1, 0.5), 4)
    with pytest.raises(DomainError):
        multiplier_kernel(mf, 0, [0.0])


def test_strong_pole_keeps_only_high_orders():
    # tau close to m: only orders v > k tau - 1 survive
    mf = multiplier_frame(SingularModel(1, 0.9), 10)
    np.testing.assert_array_equal(mf.admissible.exponents, [9, 10])
    mf = multiplier_frame(SingularModel(2, 1.9), 1)
    np.testing.assert_array_equal(mf.admissible.exponents, [1, 2])


def test_trace_identity_off_tiny_hole():
    res = big_bound_check(SingularModel(1, 0.5), [8, 16, 24, 32, 40])
    assert res["trace_error"] < 1e-3
    assert res["inequality_holds"]


@pytest.mark.parametrize("k", [1, 4, 9, 16])
def test_skoda_identity(k):
    rep = skoda_check(SingularModel(1, 0.5), k, n_points=50, seed=k)
    assert rep.passed
    assert rep.max_relative_discrepancy < 1e-9
    assert rep.gram_error < 1e-9


def test_skoda_off_center_pole():
    rep = skoda_check(SingularModel(1, 0.5, 0.3 + 0.2j), 6, n_points=20)
    assert rep.max_relative_discrepancy < 1e-9


def test_vanishing_tau_recovers_smooth_model():
    model = SingularModel(1, 1e-9)
    smooth = build_frame(sphere_model(1), 6)
    z = np.array([0.2, 0.7j, -0.5 + 0.1j])
    np.testing.assert_allclose(multiplier_kernel(multiplier_frame(model, 6), 0, z),
                               bergman_function(smooth, 0, z), rtol=1e-7)


def test_expansion_away_from_pole():
    out = singular_expansion_check(SingularModel(1, 0.5), [8, 16, 24, 32, 40, 48], n_points=10)
    assert out["passed"], out["max_relative_deviation"]


def test_expansion_needs_distance_from_pole():
    with pytest.raises(PreconditionError):
        singular_expansion_check(SingularModel(1, 0.5), [8, 16, 24, 32, 40], region=Region(0, 0j, 1.0, 0.1))


def test_big_bound_growth():
    res = big_bound_check(SingularModel(1, 0.5), list(range(8, 49, 8)))
    assert 0.9 <= res["exponent"] <= 1.1
    for r in res["rows"]:
        assert r["integral_K"] <= r["m_k"] <= r["dim"]


def test_singular_gap_on_annulus():
    est = singular_gap(SingularModel(1, 0.5), [8, 12, 16, 24, 32], annulus(0.3, 1.0), count=8)
    assert np.isfinite(est.C_hat) and est.fit_residual < 0.2
