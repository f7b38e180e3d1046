import numpy as np
import pytest

from bergman_lab.asymptotics import (Region, TestSection, bump_polynomial_sections, exact_im_psi,
                                     expansion_at, extract_phase, fit_expansion, gap_estimate, gap_ratio,
                                     log_defect, offdiagonal_decay)
from bergman_lab.errors import FitError, InsufficientDataError, PreconditionError
from bergman_lab.geometry import normal_coordinates, sample_points, sphere_model
from bergman_lab.hilbert import build_frame

KS = (8, 16, 24, 32, 48)


def test_fit_recovers_fs_coefficients(sphere_frames):
    fit = expansion_at({k: sphere_frames[k] for k in KS}, 0, [0.0, 0.5j])
    np.testing.assert_allclose(fit.b0, 1 / (2 * np.pi), rtol=1e-12)
    np.testing.assert_allclose(fit.b1, 1 / (2 * np.pi), rtol=1e-10)
    assert np.all(fit.relative_deviation < 1e-12)


def test_fit_on_torus_points(torus, torus_frames, rng):
    _, z = sample_points(torus, 20, rng)
    fit = expansion_at({k: torus_frames[k] for k in (8, 16, 24, 32, 48)}, 0, z)
    assert np.max(fit.relative_deviation) < 0.02


def test_perturbed_sphere_b0_follows_curvature():
    g = sphere_model(1, perturbations=[{"center": 0.2, "amplitude": 0.02, "radius": 1.0}])
    frames = {k: build_frame(g, k) for k in (8, 16, 24, 32, 40, 48)}
    # points where the curvature varies on scales >> k^{-1/2}; near the bump
    # shoulder the fit converges much more slowly in k
    fit = expansion_at(frames, 0, [0.2, 0.35 + 0.1j, 0.5])
    assert np.max(fit.relative_deviation) < 0.02
    outside = expansion_at(frames, 1, [0.4, 0.3j])
    assert np.max(outside.relative_deviation) < 0.02
    # the perturbation genuinely moves b0 away from the flat value at the bump center
    assert abs(fit.b0[0] * 2 * np.pi - 1) > 0.01


def test_fit_guards():
    with pytest.raises(InsufficientDataError):
        fit_expansion([8, 16, 24], [1.0, 2.0, 3.0])
    with pytest.raises(FitError):
        fit_expansion([1, 2, 3, 4, 5], [1.0, -1.0, 1.0, 1.0, 1.0])


@pytest.mark.parametrize("d", [0.05, 0.1, 0.2])
def test_phase_matches_taylor_on_sphere(sphere, sphere_frames, d):
    frames = {k: sphere_frames[k] for k in (16, 24, 32, 48, 64)}
    nc = normal_coordinates(sphere, 0.3, 0)
    x = complex(nc.to_chart(d * np.exp(0.7j)))
    probe = extract_phase(frames, x, 0.3)
    assert probe.relative_error < 0.15
    assert probe.nonnegative
    # exact oracle on the unperturbed sphere
    assert probe.im_psi == pytest.approx(exact_im_psi(sphere, x, 0.3), rel=1e-6)


def test_phase_on_torus_is_gaussian(torus_frames, torus):
    frames = {k: torus_frames[k] for k in (16, 24, 32, 48, 64)}
    probe = extract_phase(frames, 0.6 + 0.55j, 0.5 + 0.5j)
    assert probe.im_psi == pytest.approx(exact_im_psi(torus, 0.6 + 0.55j, 0.5 + 0.5j), rel=1e-6)


def test_phase_diagonal_and_symmetry(sphere_frames):
    frames = {k: sphere_frames[k] for k in (16, 24, 32, 48)}
    assert abs(extract_phase(frames, 0.2, 0.2).im_psi) < 1e-10
    a = extract_phase(frames, 0.25, 0.1 + 0.1j).im_psi
    b = extract_phase(frames, 0.1 + 0.1j, 0.25).im_psi
    assert a == pytest.approx(b, rel=1e-10)
    assert log_defect(frames[16], 0, 0.3, 0.3) == pytest.approx(0.0, abs=1e-12)


def test_decay_rate_grows_with_separation(sphere_frames):
    frames = {k: sphere_frames[k] for k in (8, 16, 24, 32)}
    near = offdiagonal_decay(frames, Region(0, -0.35, 0.1), Region(0, 0.35, 0.1), 16, 0)
    far = offdiagonal_decay(frames, Region(0, -0.6, 0.1), Region(0, 0.6, 0.1), 16, 0)
    assert 0 < near.rate < far.rate
    assert near.separation == pytest.approx(0.5)
    assert near.predicted_rate is not None and near.predicted_rate > 0


def test_decay_rejects_overlap(sphere_frames):
    with pytest.raises(PreconditionError):
        offdiagonal_decay({8: sphere_frames[8]}, Region(0, 0.0, 0.3), Region(0, 0.2, 0.3))


def test_test_section_dbar_matches_finite_difference():
    sec = TestSection(0.1 + 0.1j, 0.5, np.array([[1, 2j], [0.5, 0]]))
    z = np.array([0.2 + 0.05j, -0.1 + 0.3j])
    h = 1e-6
    fd = 0.5 * ((sec.value(z + h) - sec.value(z - h)) + 1j * (sec.value(z + 1j * h) - sec.value(z - 1j * h))) / (2 * h)
    np.testing.assert_allclose(sec.dbar(z), fd, atol=1e-7)


def test_sections_stay_inside_region():
    reg = Region(0, 0j, 1.0, 0.3)
    for s in bump_polynomial_sections(reg, 20, seed=3):
        assert abs(s.center) - s.radius >= 0.3 - 1e-12
        assert abs(s.center) + s.radius <= 1.0 + 1e-12


def test_gap_ratio_of_holomorphic_polynomial_times_bump_is_finite(sphere_frames):
    reg = Region(0, 0j, 0.8)
    r, d, u = gap_ratio(sphere_frames[8], reg, bump_polynomial_sections(reg, 1, 0)[0])
    assert 0 < r <= u and d > 0


def test_gap_estimate_finite_and_seeded(sphere_frames):
    frames = {k: sphere_frames[k] for k in (8, 16, 24, 32)}
    a = gap_estimate(frames, Region(0, 0j, 0.8), count=6, seed=1)
    b = gap_estimate(frames, Region(0, 0j, 0.8), count=6, seed=1)
    assert np.isfinite(a.C_hat) and np.isfinite(a.N_hat) and a.fit_residual < 0.2
    np.testing.assert_array_equal(a.ratios, b.ratios)
