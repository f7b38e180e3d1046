import numpy as np
import pytest

from bergman_lab.errors import ResolutionError
from bergman_lab.peaks import (concentration, directional_peak_section, exterior_sets, make_cutoff,
                               peak_limit, peak_section, verify_peak_sections)


def test_cutoff_shape():
    chi = make_cutoff()
    assert chi(0.0) == 1.0 and chi(0.5) == 1.0 and chi(1.0) == 0.0 and chi(1.3) == 0.0
    assert chi(0.75) == 0.5           # frozen regression constant
    assert chi.integral() == pytest.approx(1.5, abs=1e-12)
    assert chi.integral(0.5) == pytest.approx(1.36669, abs=1e-5)


def test_cutoff_derivative_matches_finite_difference():
    chi = make_cutoff()
    t = np.array([0.55, 0.7, 0.9, -0.8])
    h = 1e-6
    np.testing.assert_allclose(chi.derivative(t), (chi(t + h) - chi(t - h)) / (2 * h), atol=1e-6)


def test_bad_plateau():
    with pytest.raises(ValueError):
        make_cutoff(1.0)


def test_peak_value_approaches_corrected_limit(sphere, sphere_frames):
    lim = peak_limit(sphere, 0.0)
    assert lim["limit"] == pytest.approx(0.59455, abs=5e-5)
    u64 = peak_section(sphere_frames[64], 0.0).value.real
    u32 = peak_section(sphere_frames[32], 0.0).value.real
    assert abs((2 * u64 - u32) - lim["limit"]) / lim["limit"] < 0.10
    # the plateau-only formula is far off
    assert abs((2 * u64 - u32) - lim["plateau_formula"]) / lim["plateau_formula"] > 0.3


def test_peak_value_real_and_positive_everywhere(sphere_frames):
    for p in (0.0, 0.3, 1 + 1j, 3.0):
        u = peak_section(sphere_frames[32], p)
        assert u.value.real > 0.3
        assert abs(u.value.imag) < 1e-10 * u.value.real


def test_peak_concentrates(sphere_frames):
    assert concentration(peak_section(sphere_frames[64], 0.3)) > 0.9


def test_directional_peak_vanishes_at_center(sphere_frames):
    v = directional_peak_section(sphere_frames[32], 0.3)
    assert abs(v.value) < 1e-3
    assert abs(v.d_dz) > 0.1
    with pytest.raises(ValueError):
        directional_peak_section(sphere_frames[32], 0.3, j=2)


def test_small_k_outside_patch_raises(sphere):
    from bergman_lab.hilbert import build_frame
    with pytest.raises(ResolutionError):
        peak_section(build_frame(sphere, 1), 0.5)


def test_exterior_points_respect_metric_distance(sphere):
    (c, z), = exterior_sets(sphere, [1 + 1j], 0, 0.5, 50, seed=2)
    assert len(z) == 50
    # points are in convention charts, so coordinates are bounded
    assert np.all(np.abs(z) <= 1.0 + 1e-12)


def test_all_families_on_sphere(sphere_frames):
    rep = verify_peak_sections({k: sphere_frames[k] for k in (16, 24, 32, 48)}, [0.0, 0.3, 1 + 1j])
    assert rep.passed, rep.families
    assert rep.c0 > 0.3 and rep.c1 > 0.1
    assert rep.k0_hat == 16
    assert rep.exterior_decay_exponent < -1


def test_all_families_on_torus(torus_frames):
    rep = verify_peak_sections({k: torus_frames[k] for k in (16, 24, 32, 48)}, [0.5 + 0.5j, 0.2, 0.7 + 0.1j])
    assert rep.passed, rep.families


def test_verify_needs_enough_data(sphere_frames):
    with pytest.raises(ValueError):
        verify_peak_sections({16: sphere_frames[16]}, [0.0, 0.1, 0.2])
