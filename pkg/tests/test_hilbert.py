import json

import numpy as np
import pytest
from scipy.special import beta as beta_fn

from bergman_lab.errors import IllConditionedError, RankError
from bergman_lab.geometry import sample_points, sphere_model
from bergman_lab.hilbert import (SphereMonomialBasis, ThetaBasis, _gram_by_quadrature, assemble_gram,
                                 bergman_function, bergman_kernel, bergman_project, build_frame,
                                 dbar_apply, dbar_norm, frame_from_json, frame_to_json, kernel_matrix,
                                 orthonormalize, section_data_on_rule)


@pytest.mark.parametrize("k", [1, 5, 10, 30])
def test_fs_bergman_function_is_constant(sphere, sphere_frames, rng, k):
    frame = sphere_frames.get(k) or build_frame(sphere, k)
    c, z = sample_points(sphere, 200, rng)
    P = bergman_function(frame, c, z)
    assert np.ptp(P) < 1e-8 * P.mean()
    assert P.mean() == pytest.approx((k + 1) / (2 * np.pi), rel=1e-12)


def test_degree_two_sphere_constant():
    g = sphere_model(2)
    P = bergman_function(build_frame(g, 3), 0, [0.0, 0.5, 0.9j])
    np.testing.assert_allclose(P, 7 / (4 * np.pi), rtol=1e-12)


def test_raw_gram_matches_beta_integrals(sphere):
    basis = SphereMonomialBasis(sphere, 2, normalized=False)
    G = _gram_by_quadrature(basis, sphere, sphere.quadrature(2))
    ref = 2 * np.pi * beta_fn(np.arange(3) + 1, 3 - np.arange(3))
    np.testing.assert_allclose(G, np.diag(ref), atol=1e-12)
    assert ref[0] == pytest.approx(2 * np.pi / 3)


def test_crosscheck_quadrature_against_closed_form(sphere, torus):
    assert build_frame(sphere, 40, crosscheck=True).meta["crosscheck_error"] < 1e-12
    assert build_frame(torus, 8, crosscheck=True).meta["crosscheck_error"] < 1e-12


def test_theta_gram_is_identity(torus):
    basis = ThetaBasis(torus, 5)
    G = _gram_by_quadrature(basis, torus, torus.quadrature(5))
    np.testing.assert_allclose(G, np.eye(5), atol=1e-12)


def test_torus_bergman_function_tends_to_density(torus_frames):
    P = bergman_function(torus_frames[48], 0, np.array([0.1, 0.4 + 0.7j]))
    np.testing.assert_allclose(P, 48 / (2 * np.pi), rtol=1e-12)


def test_trace_equals_dimension(torus, torus_frames):
    rule = torus.quadrature(8)
    z, w = rule.select(0)
    P = bergman_function(torus_frames[8], 0, z)
    assert np.sum(w * torus.density(0, z) * P) == pytest.approx(8, rel=1e-12)


def test_rank_deficient_gram_is_reported():
    G = np.ones((3, 3))
    with pytest.raises(RankError) as e:
        orthonormalize(G)
    assert e.value.directions.shape[1] == 2


def test_condition_cap(sphere):
    basis = SphereMonomialBasis(sphere, 60, normalized=False)
    with pytest.raises(IllConditionedError):
        assemble_gram(basis, sphere, sphere.quadrature(60), method="quadrature")


def test_kernel_hermitian_and_reproducing(sphere_frames):
    f = sphere_frames[8]
    K = kernel_matrix(f, 0, [0.2, 0.5j], 0, [0.2, 0.5j])
    np.testing.assert_allclose(K, K.conj().T, atol=1e-14)
    kv = bergman_kernel(f, (0, 0.3), (0, 0.3))
    assert kv.value.real == pytest.approx(9 / (2 * np.pi), rel=1e-12)


def test_projection_of_disc_restricted_section(sphere, sphere_frames):
    # f_4 at k = 8 is symmetric under z -> 1/z, so half its mass lies in |z| < 1
    k = 8
    rule = sphere.quadrature(k)
    f = sphere_frames[k]
    data = section_data_on_rule(sphere, k, 0, lambda z: f.evaluate(0, z)[:, 4], rule, weighted=True)
    proj = bergman_project(f, data)
    expected = np.zeros(k + 1)
    expected[4] = 0.5
    np.testing.assert_allclose(proj.coefficients, expected, atol=1e-13)
    assert proj.data_norm == pytest.approx(np.sqrt(0.5), rel=1e-13)


def test_dbar_of_holomorphic_vanishes(sphere):
    z = np.array([0.1, 0.2 + 0.3j])
    assert np.max(np.abs(dbar_apply(sphere, 4, lambda w: w ** 2 + 1, z))) < 1e-9
    g = dbar_apply(sphere, 4, lambda w: np.conj(w), z)
    np.testing.assert_allclose(g, 1.0, atol=1e-9)


def test_dbar_norm_positive_and_homogeneous(sphere):
    z = np.array([0.1, 0.3j])
    a = dbar_norm(sphere, 2, 0, z, np.ones(2), np.ones(2))
    b = dbar_norm(sphere, 2, 0, z, np.ones(2), 3 * np.ones(2))
    assert a > 0 and b == pytest.approx(3 * a)


def test_frame_json_roundtrip(sphere, torus_frames):
    f = build_frame(sphere, 6)
    text = frame_to_json(f)
    g = frame_from_json(text, sphere)
    np.testing.assert_array_equal(g.coefficients, f.coefficients)
    assert json.loads(text)["k"] == 6
    t = frame_from_json(frame_to_json(torus_frames[3]), torus_frames[3].geometry)
    np.testing.assert_array_equal(t.coefficients, torus_frames[3].coefficients)
    with pytest.raises(ValueError):
        frame_from_json(text, sphere_model(2))
