import numpy as np
import pytest

from bergman_lab.errors import DomainError, PositivityError, ResolutionError
from bergman_lab.geometry import (QuadraticWeight, build_quadrature, curvature_from_weight, det_curvature,
                                  det_curvature_array, min_resolution, model_from_config, normal_coordinates,
                                  plane_model, sample_points, self_check, sphere_model, torus_model)


def test_fs_curvature_is_one_relative_to_theta(sphere):
    for z in (0.0, 0.3 + 0.1j, 0.9j):
        assert det_curvature(sphere, 0, z) == pytest.approx(1.0, abs=1e-6)


def test_degree_m_sphere_curvature_and_volume():
    g = sphere_model(3)
    assert g.volume == pytest.approx(6 * np.pi)
    assert det_curvature(g, 0, 0.2) == pytest.approx(1.0, abs=1e-6)
    assert g.quadrature(4).volume(g) == pytest.approx(6 * np.pi, rel=1e-12)


def test_torus_flat_curvature(torus):
    vals = det_curvature_array(torus, 0, np.array([0.1, 0.5 + 0.5j, 0.9 + 0.2j]))
    np.testing.assert_allclose(vals, 1.0, atol=1e-6)
    assert torus.quadrature(4).volume(torus) == pytest.approx(2 * np.pi, rel=1e-12)


def test_sphere_cocycle_and_roundtrip(sphere):
    chk = self_check(sphere)
    assert chk["cocycle_error"] < 1e-12
    assert chk["transition_roundtrip_error"] < 1e-12
    assert chk["volume_error"] < 1e-10
    assert chk["theta_positive"]


def test_torus_translation_cocycle(torus):
    assert self_check(torus)["cocycle_error"] < 1e-12
    with pytest.raises(DomainError):
        torus.translate(0.1, 0.5)


def test_perturbed_sphere_differs_only_near_bump():
    g = sphere_model(1, perturbations=[{"center": 0.2, "amplitude": 0.02, "radius": 1.0}])
    assert not g.exact
    base = sphere_model(1)
    far = 0.2 + 3.0
    assert g.weight(0, far) == pytest.approx(base.weight(0, far), abs=1e-14)
    assert det_curvature(g, 0, 0.2) != pytest.approx(1.0, abs=1e-4)


def test_negative_weight_rejected():
    g = plane_model(QuadraticWeight(-0.5))
    with pytest.raises(PositivityError):
        det_curvature(g, 0, 0.0)


def test_curvature_matrix_hermitian(sphere):
    d = curvature_from_weight(sphere, 0, 0.4 - 0.3j)
    assert d.matrix.shape == (1, 1)
    assert abs(d.matrix[0, 0].imag) < 1e-9


def test_normal_coordinates_first_order(sphere):
    nc = normal_coordinates(sphere, 0.5 + 0.2j, 0)
    assert nc.lam == pytest.approx(0.5, abs=1e-6)
    assert complex(nc.from_chart(0.5 + 0.2j)) == pytest.approx(0.0, abs=1e-14)
    z = complex(nc.to_chart(0.01))
    assert complex(nc.from_chart(z)) == pytest.approx(0.01, abs=1e-14)


def test_resolution_floor():
    need = min_resolution("sphere", 20)
    with pytest.raises(ResolutionError) as e:
        build_quadrature("sphere", need - 1, k=20)
    assert e.value.suggested == need


def test_sample_points_in_convention_charts(sphere, rng):
    c, z = sample_points(sphere, 500, rng)
    assert np.all(np.abs(z) <= 1.0)
    assert set(np.unique(c)) <= {0, 1}


def test_model_hash_stable_and_sensitive():
    a = model_from_config({"name": "sphere"})
    b = model_from_config({"name": "sphere", "degree": 1})
    c = model_from_config({"name": "sphere", "degree": 2})
    assert a.model_hash == b.model_hash != c.model_hash
    assert torus_model().model_hash != a.model_hash
