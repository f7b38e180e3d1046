"""Property-based checks of the numerical building blocks."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman_lab.asymptotics import exact_im_psi, fit_expansion
from bergman_lab.geometry import sphere_model, torus_model
from bergman_lab.hilbert import build_frame, kernel_matrix, orthonormalize
from bergman_lab.kodaira import fs_distance, normalize_projective
from bergman_lab.peaks import make_cutoff
from bergman_lab.singular import admissible_basis

SPHERE = sphere_model(1)
TORUS = torus_model()
FRAMES = {k: build_frame(SPHERE, k) for k in (3, 10)}

coords = st.floats(-2.0, 2.0, allow_nan=False)
small = st.floats(-0.9, 0.9, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_orthonormalize_random_hpd(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    G = A @ A.conj().T + n * np.eye(n)
    C = orthonormalize(G)
    np.testing.assert_allclose(C @ G @ C.conj().T, np.eye(n), atol=1e-10)
    assert np.all(np.diag(C).real > 0) and np.allclose(np.triu(C, 1), 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_fit_recovers_exact_polynomial(b0, b1, b2):
    ks = np.array([8, 16, 24, 32, 40, 48], dtype=float)
    vals = ks * (b0 + b1 / ks + b2 / ks ** 2)
    if np.any(vals <= 0):
        return
    fit = fit_expansion(ks, vals, 1)
    np.testing.assert_allclose(fit.coefficients, [b0, b1, b2], atol=1e-8 * (1 + abs(b1) + abs(b2)))


@settings(max_examples=60, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(0.05, 0.95))
def test_cutoff_even_and_bounded(t, plateau):
    chi = make_cutoff(plateau)
    assert chi(t) == chi(-t)
    assert 0.0 <= chi(t) <= 1.0
    assert chi.derivative(abs(t)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=6),
       st.floats(0, 2 * np.pi))
def test_normalize_projective_idempotent_and_phase_free(v, theta):
    v = np.array(v)
    if np.linalg.norm(v) < 1e-6:
        return
    u = normalize_projective(v)[0]
    np.testing.assert_allclose(normalize_projective(u)[0], u, atol=1e-12)
    np.testing.assert_allclose(normalize_projective(np.exp(1j * theta) * v)[0], u, atol=1e-10)
    assert fs_distance(u, normalize_projective(2.5 * v)[0]) < 1e-7


@settings(max_examples=30, deadline=None)
@given(small, small, small, small, st.sampled_from([3, 10]))
def test_kernel_cauchy_schwarz_and_symmetry(a, b, c, d, k):
    f = FRAMES[k]
    x, y = complex(a, b), complex(c, d)
    K = kernel_matrix(f, 0, [x, y], 0, [x, y])
    assert abs(K[0, 1] - np.conj(K[1, 0])) < 1e-12 * K[0, 0].real
    assert abs(K[0, 1]) ** 2 <= K[0, 0].real * K[1, 1].real * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(coords, coords, coords, coords)
def test_im_psi_nonnegative_and_symmetric(a, b, c, d):
    x, y = complex(a, b), complex(c, d)
    for g in (SPHERE, TORUS):
        p = exact_im_psi(g, x, y)
        assert p >= -1e-14
        assert abs(p - exact_im_psi(g, y, x)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 3), st.floats(0.05, 0.95))
def test_admissibility_rule(k, m, frac):
    tau = frac * m
    adm = admissible_basis(k, m, tau, numeric=False)
    v = adm.exponents
    assert np.all(v > k * tau - 1) and np.all((v >= 0) & (v <= k * m))
    assert adm.m_k == np.count_nonzero(np.arange(k * m + 1) > k * tau - 1)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 12), st.floats(0.05, 0.95))
def test_numeric_integrability_matches_rule(k, tau):
    adm = admissible_basis(k, 1, tau, numeric=True)
    if abs(k * tau - round(k * tau)) < 1e-6:
        return    # boundary exponents are handled exactly elsewhere
    np.testing.assert_array_equal(adm.exponents, adm.closed_form)
