import numpy as np
import pytest

from bergman_lab.asymptotics import extract_phase
from bergman_lab.errors import BasePointError
from bergman_lab.geometry import sample_points
from bergman_lab.kodaira import (curvature_diagnostic, embedding_threshold, fs_distance, immersion_check,
                                 injectivity_scan, kodaira_map, normalize_projective, sample_pairs,
                                 separation_probe, source_distance)


def test_normalize_projective_fixes_phase():
    u = normalize_projective([0, 1j, 1])[0]
    assert np.linalg.norm(u) == pytest.approx(1.0)
    assert u[1].real > 0 and u[1].imag == 0
    with pytest.raises(BasePointError):
        normalize_projective([0, 0])


def test_fs_distance_small_angles_are_accurate():
    u = np.array([1.0, 0.0])
    v = normalize_projective([1.0, 1e-9])[0]
    assert fs_distance(u, v) == pytest.approx(1e-9, rel=1e-6)
    assert fs_distance(u, 1j * u) == 0.0


def test_veronese_degree_one_is_isometric(sphere_frames):
    # k = 1 on the FS sphere embeds as the identity of P^1 (up to unitary change)
    a, b = kodaira_map(sphere_frames[1], 0, 0.2), kodaira_map(sphere_frames[1], 0, 0.7j)
    src = source_distance(sphere_frames[1].geometry, 0, 0.2, 0, 0.7j)
    assert a.distance(b) == pytest.approx(float(src), rel=1e-12)


@pytest.mark.parametrize("k", [2, 4, 16])
def test_sphere_immersion_full_rank(sphere, sphere_frames, k, rng):
    c, z = sample_points(sphere, 20, rng)
    certs = [immersion_check(sphere_frames[k], int(ci), zi) for ci, zi in zip(c, z)]
    assert all(cert.full_rank for cert in certs)
    # FS normalized singular value equals sqrt(k) on the exact model
    np.testing.assert_allclose([cert.sigma_min for cert in certs], np.sqrt(k), rtol=1e-5)


def test_torus_k1_fails_and_k3_passes(torus_frames):
    assert not immersion_check(torus_frames[1], 0, 0.3 + 0.4j).full_rank
    assert immersion_check(torus_frames[3], 0, 0.3 + 0.4j).full_rank


def test_separation_probe_near_pair(sphere_frames):
    pr = separation_probe(sphere_frames[16], 0, 0.05, 0.0)
    assert pr.f[0] == pytest.approx(1.0, abs=1e-14)
    assert 0 < pr.gap < 1
    assert not pr.failure
    im = extract_phase({k: sphere_frames[k] for k in (16, 24, 32, 48)}, 0.05, 0.0).im_psi
    assert pr.gap == pytest.approx(2 * 16 * im, rel=0.02)


def test_separation_probe_macroscopic_pair(sphere_frames):
    assert 1 - separation_probe(sphere_frames[32], 0, 1.0, 0.0).gap < 1e-9


def test_separation_probe_coincident_pair(torus_frames):
    pr = separation_probe(torus_frames[3], 0, 0.4, 0.4)
    np.testing.assert_allclose(pr.f, 1.0, atol=1e-14)
    assert pr.gap == 0.0 and not pr.failure


def test_lattice_translate_is_not_separated(torus_frames):
    # x and x + 1 are the same torus point: f(1) = 1 flags the pair
    pr = separation_probe(torus_frames[3], 0, 1.3 + 0.2j, 0.3 + 0.2j)
    assert pr.failure


def test_sample_pairs_strata(sphere):
    cx, x, cy, y, strata = sample_pairs(sphere, 16, 300, seed=0)
    assert len(x) == 300 and set(np.unique(strata)) == {0, 1, 2}
    d = source_distance(sphere, cx, x, cy, y)
    assert np.all(d[strata == 0] > 0.3)
    assert np.median(d[strata == 2]) < np.median(d[strata == 1]) < np.median(d[strata == 0])


def test_injectivity_scans(sphere_frames, torus_frames):
    assert injectivity_scan(sphere_frames[2], 300, seed=1).passed
    assert injectivity_scan(torus_frames[3], 300, seed=1).passed


def test_embedding_threshold(torus_frames):
    out = embedding_threshold({k: torus_frames[k] for k in (1, 3, 8)}, n_pairs=150)
    assert out["k_emb"] == 3
    assert not out["reports"][1].passed


def test_shrinking_scale_diagnostic(sphere_frames):
    frames = {k: sphere_frames[k] for k in (16, 24, 32, 48, 64)}
    c_hat = extract_phase(frames, 0.1, 0.0).im_psi / 0.01
    rep = curvature_diagnostic(frames, 0.0, c_hat=c_hat)
    assert rep.passed["negative"] and rep.passed["first_derivative_decreasing"]
    assert rep.passed["within_2x"]
    assert np.all(rep.scaled_f2 < 0)
