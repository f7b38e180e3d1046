"""A singular positively curved metric on ``O(m)`` over the sphere with one
logarithmic pole: multiplier spaces, their Bergman kernels, the identity with
the kernel of all L^2 sections on the punctured sphere, and dimension bounds.

Coordinates: everything is computed in the pole-centred chart
``zeta = (z - a) / (1 + conj(a) z)`` (a Fubini-Study isometry) and its
inversion.  With ``phi_FS = log(1 + |zeta|^2) / 2`` the weight is

    chart 0:  phi = (m - tau) phi_FS(zeta) + tau log|zeta|
    chart 1:  phi = (m - tau) phi_FS(w),          w = 1 / zeta,

which satisfies the ``O(m)`` cocycle, is smooth away from the pole and has
curvature ``(m - tau)`` times the Fubini-Study form there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import betaln, roots_legendre

from .asymptotics import ExpansionFit, Region, fit_expansion, gap_estimate
from .errors import DomainError, PreconditionError
from .geometry import (Chart, FubiniStudyWeight, LogPoleWeight, ModelGeometry, SumWeight,
                       build_quadrature)
from .hilbert import (BergmanFrame, SphereMonomialBasis, assemble_gram, bergman_function,
                      build_frame, orthonormalize)

__all__ = [
    "SingularModel", "SingularWeight", "AdmissibleSet", "admissible_basis", "divergence_test",
    "MultiplierFrame", "multiplier_frame", "multiplier_kernel", "punctured_frame", "SkodaReport",
    "skoda_check", "singular_expansion_check", "big_bound_check", "graded_disc_rule",
    "singular_gap", "annulus", "sample_off_pole",
]


def _fs_metric(scale):
    return lambda z: scale / (1.0 + np.abs(z) ** 2) ** 2


@dataclass(frozen=True)
class SingularWeight:
    """Pole coefficient ``tau`` at ``a`` on ``O(m)``; ``Sigma = {a}``."""

    m: int
    tau: float
    a: complex = 0j

    def __post_init__(self):
        if not 0 < self.tau < self.m:
            raise PreconditionError("need 0 < tau < m")

    @property
    def smooth_scale(self) -> float:
        return self.m - self.tau

    def chart_weights(self):
        w0 = SumWeight([FubiniStudyWeight(self.smooth_scale), LogPoleWeight(0j, self.tau)])
        return w0, FubiniStudyWeight(self.smooth_scale)


class SingularModel:
    """Sphere geometry in pole-centred coordinates carrying a ``SingularWeight``."""

    def __init__(self, m: int = 1, tau: float = 0.5, a: complex = 0j):
        self.weight = SingularWeight(int(m), float(tau), complex(a))
        w0, w1 = self.weight.chart_weights()
        charts = (Chart(0, transitions=(("inversion", 1),)), Chart(1, transitions=(("inversion", 0),)))
        config = {"name": "sphere", "degree": int(m), "metric_scale": float(m),
                  "singular": {"tau": float(tau), "a": [complex(a).real, complex(a).imag]}}
        self.geom = ModelGeometry("sphere", int(m), charts, (w0, w1),
                                  (_fs_metric(float(m)), _fs_metric(float(m))),
                                  volume=2 * np.pi * m, exact=False, config=config)

    @property
    def m(self):
        return self.weight.m

    @property
    def tau(self):
        return self.weight.tau

    @property
    def a(self):
        return self.weight.a

    def to_pole_chart(self, z):
        """Standard chart-0 coordinates to ``(chart, coordinate)`` of the pole-centred atlas."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        a = self.a
        zeta = (z - a) / (1 + np.conj(a) * z)
        return self.geom.convention(np.zeros(len(z), dtype=int), zeta)

    def smooth_det(self) -> float:
        """Curvature eigenvalue of the smooth part relative to Theta."""
        return self.weight.smooth_scale / self.m


# ---------------------------------------------------------------------------
# integrability

def graded_panels(t_in: float, t_out: float = 1.0, ratio: float = 10.0, n: int = 32):
    """Gauss-Legendre nodes on geometric panels ``[t_in, t_out]``."""
    x, w = roots_legendre(n)
    edges = [t_out]
    while edges[-1] / ratio > t_in:
        edges.append(edges[-1] / ratio)
    edges.append(t_in)
    edges = np.array(edges[::-1])
    lo, hi = edges[:-1, None], edges[1:, None]
    t = (0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)).ravel()
    wt = (0.5 * (hi - lo) * w[None, :]).ravel()
    return t, wt


def _radial_integral(alpha: float, beta: float, r_in: float, n: int = 32):
    """``int_{r_in^2}^1 t^alpha (1 + t)^(-beta) dt`` on graded panels (log-safe)."""
    t, w = graded_panels(r_in ** 2, 1.0, 10.0, n)
    with np.errstate(over="ignore"):
        return float(np.sum(w * np.exp(alpha * np.log(t) - beta * np.log1p(t))))


def _inner_tail(alpha: float, beta: float, r_in: float) -> float:
    """Two-term expansion of the innermost disc ``int_0^{r_in^2}``; only for ``alpha > -1``."""
    t0 = r_in ** 2
    return t0 ** (alpha + 1) / (alpha + 1) - beta * t0 ** (alpha + 2) / (alpha + 2)


@dataclass(frozen=True)
class DivergenceTest:
    alpha: float
    coarse: float         # numeric part, inner radius r_coarse
    fine: float           # numeric part, inner radius r_fine
    ratio: float
    divergent: bool
    refinement_change: float | None   # relative change with analytic tails (convergent only)


def divergence_test(alpha: float, beta: float, r_coarse: float = 1e-6, r_fine: float = 1e-150,
                    threshold: float = 10.0) -> DivergenceTest:
    """Local integrability of ``t^alpha (1 + t)^(-beta)`` at ``t = 0`` by inner-radius refinement."""
    nc = _radial_integral(alpha, beta, r_coarse)
    nf = _radial_integral(alpha, beta, r_fine)
    ratio = nf / nc
    div = bool(ratio > threshold)
    change = None
    if not div and alpha > -1:
        gc = nc + _inner_tail(alpha, beta, r_coarse)
        gf = nf + _inner_tail(alpha, beta, r_fine)
        change = abs(gc - gf) / abs(gf)
    return DivergenceTest(alpha, nc, nf, float(ratio), div, change)


@dataclass
class AdmissibleSet:
    k: int
    m: int
    tau: float
    threshold: float                 # k tau - 1; admissible iff v > threshold
    exponents: np.ndarray            # admissible vanishing orders
    candidates: np.ndarray           # enumerated window
    tests: dict = field(repr=False, default_factory=dict)   # v -> (pole test, infinity test)
    truncation_flag: bool = False

    @property
    def m_k(self) -> int:
        return len(self.exponents)

    @property
    def closed_form(self) -> np.ndarray:
        v = self.candidates
        return v[(v > self.threshold) & (v >= 0) & (v <= self.k * self.m)]


def admissible_basis(k: int, m: int, tau: float, a: complex = 0j, window: int = 3,
                     numeric: bool = True) -> AdmissibleSet:
    """Vanishing orders ``v`` at the pole for which ``zeta^v`` is a finite-norm section.

    Candidates run over Laurent orders ``-window .. k m + window``; each is
    tested for integrability at the pole and at the antipode.
    """
    k, m = int(k), int(m)
    thr = k * tau - 1
    cands = np.arange(-window, k * m + window + 1)
    beta0 = k * (m - tau) + 2
    tests = {}
    if numeric:
        keep = []
        for v in cands:
            at_pole = divergence_test(v - k * tau, beta0)
            at_inf = divergence_test(k * m - v, beta0)
            tests[int(v)] = (at_pole, at_inf)
            if not at_pole.divergent and not at_inf.divergent:
                keep.append(v)
        exps = np.array(keep, dtype=int)
        # the window is safe when its outermost candidates diverge decisively
        edge = [t for v in (cands[0], cands[-1]) for t in tests[int(v)] if t.divergent]
        flag = any(t.ratio < 1e3 * 10.0 for t in edge)
    else:
        exps = cands[(cands > thr) & (cands >= 0) & (cands <= k * m)]
        flag = False
    return AdmissibleSet(k, m, float(tau), float(thr), exps, cands, tests, bool(flag))


# ---------------------------------------------------------------------------
# frames

def _log_gram_diag(k, m, tau, v):
    """``log ||zeta^v||^2 = log(2 m pi B(v - k tau + 1, k m - v + 1))``."""
    return np.log(2 * m * np.pi) + betaln(v - k * tau + 1, k * m - v + 1)


@dataclass(frozen=True)
class MultiplierFrame:
    model: SingularModel
    k: int
    admissible: AdmissibleSet
    frame: BergmanFrame | None     # None when m_k = 0

    @property
    def m_k(self) -> int:
        return self.admissible.m_k

    @property
    def geometry(self):
        return self.model.geom

    def evaluate(self, chart, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.frame is None:
            return np.zeros((len(z), 0), dtype=complex)
        return self.frame.evaluate(chart, z)


def multiplier_frame(model: SingularModel, k: int, numeric_admissibility: bool = False) -> MultiplierFrame:
    """Orthonormal frame of the multiplier space from the closed-form Gram matrix."""
    adm = admissible_basis(k, model.m, model.tau, model.a, numeric=numeric_admissibility)
    if adm.m_k == 0:
        return MultiplierFrame(model, int(k), adm, None)
    v = adm.exponents
    logd = _log_gram_diag(k, model.m, model.tau, v)
    basis = SphereMonomialBasis(model.geom, k, exponents=v, log_scale=-0.5 * logd,
                                gram_diagonal=np.ones(len(v)))
    frame = build_frame(model.geom, k, basis=basis, method="closed")
    return MultiplierFrame(model, int(k), adm, frame)


def _check_off_pole(chart, z, min_dist=0.0):
    chart = np.broadcast_to(np.asarray(chart, dtype=int), np.shape(z))
    bad = (chart == 0) & (np.abs(z) <= min_dist)
    if np.any(bad):
        raise DomainError("point on the polar set")


def multiplier_kernel(mframe: MultiplierFrame, chart, z) -> np.ndarray:
    """``P_{k,I}(x) = sum_j |g_j(x)|^2`` on the pole-centred atlas."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_off_pole(chart, z)
    if mframe.frame is None:
        return np.zeros(len(z))
    return bergman_function(mframe.frame, chart, z)


def graded_disc_rule(r_in: float = 1e-6, n_panel: int = 32, n_theta: int = 64):
    """Unit disc minus ``|z| < r_in``: graded Gauss-Legendre in ``t = r^2`` times uniform angle."""
    t, wt = graded_panels(r_in ** 2, 1.0, 10.0, n_panel)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    z = (np.sqrt(t)[:, None] * np.exp(1j * th)[None, :]).ravel()
    w = np.repeat(0.5 * wt * 2 * np.pi / n_theta, n_theta)
    return z, w


def punctured_frame(model: SingularModel, k: int, r_in: float = 1e-6, n_panel: int = 32):
    """Frame for all finite-norm holomorphic sections on the punctured sphere.

    The candidate window is filtered by the divergence test, and the Gram
    matrix is assembled by graded 2-D quadrature (inner ring closed by its
    analytic tail), independently of the Beta-function closed form.
    """
    adm = admissible_basis(k, model.m, model.tau, model.a, numeric=True)
    v = adm.exponents
    if len(v) == 0:
        return adm, None, None
    geom = model.geom
    basis = SphereMonomialBasis(geom, k, exponents=v,
                                log_scale=-0.5 * _log_gram_diag(k, model.m, model.tau, v))
    n_theta = 2 * (k * model.m + 8)
    G = np.zeros((len(v), len(v)), dtype=complex)
    for c in (0, 1):
        z, w = graded_disc_rule(r_in if c == 0 else 1e-300 ** 0.5, n_panel, n_theta)
        if c == 1:
            # the antipodal chart is smooth; the ordinary disc rule suffices
            rule = build_quadrature("sphere", max(n_panel, k * model.m + 24))
            z, w = rule.select(1)
        wd = w * geom.density(c, z)
        V = basis.evaluate(c, z)
        G += V.T @ (np.conj(V) * wd[:, None])
    # innermost disc of the pole chart: only diagonal terms survive the angle average
    beta = k * (model.m - model.tau) + 2
    for i, vi in enumerate(v):
        alpha = vi - k * model.tau
        G[i, i] += 2 * model.m * np.pi * np.exp(2 * basis.log_scale[i]) * _inner_tail(alpha, beta, r_in)
    G = 0.5 * (G + G.conj().T)
    C = orthonormalize(G)
    return adm, BergmanFrame(basis, C, int(k), geom, {"gram_method": "graded-quadrature"}), G


@dataclass
class SkodaReport:
    k: int
    tau: float
    multiplier_exponents: np.ndarray
    punctured_exponents: np.ndarray
    thresholds_match: bool
    gram_error: float               # graded quadrature vs closed form
    max_relative_discrepancy: float
    truncation_flag: bool
    rejected: dict

    @property
    def passed(self) -> bool:
        return self.thresholds_match and self.max_relative_discrepancy < 1e-9


def sample_off_pole(model: SingularModel, n: int, rng, min_dist: float = 0.05):
    """Uniform points on the sphere, at pole-chart distance ``>= min_dist`` from the pole."""
    from .geometry import sample_points
    cs, zs = [], []
    while sum(len(z) for z in zs) < n:
        c, z = sample_points(model.geom, 2 * n, rng)
        keep = ~((c == 0) & (np.abs(z) < min_dist))
        cs.append(c[keep])
        zs.append(z[keep])
    return np.concatenate(cs)[:n], np.concatenate(zs)[:n]


def skoda_check(model: SingularModel, k: int, n_points: int = 50, seed: int = 0) -> SkodaReport:
    mf = multiplier_frame(model, k)
    adm, pframe, G = punctured_frame(model, k)
    rng = np.random.default_rng(seed)
    c, z = sample_off_pole(model, n_points, rng)
    pm = multiplier_kernel(mf, c, z)
    if pframe is None:
        pp = np.zeros(len(z))
        gerr = 0.0
    else:
        pp = bergman_function(pframe, c, z)
        gerr = float(np.max(np.abs(G - np.eye(len(G)))))
    denom = np.maximum(np.abs(pm), 1e-300)
    disc = float(np.max(np.abs(pp - pm) / denom)) if len(z) and mf.m_k else float(np.max(np.abs(pp)))
    rejected = {v: (t[0].ratio, t[1].ratio) for v, t in adm.tests.items() if v not in set(adm.exponents.tolist())}
    match = np.array_equal(adm.exponents, adm.closed_form) and np.array_equal(mf.admissible.exponents, adm.closed_form)
    return SkodaReport(int(k), model.tau, mf.admissible.exponents, adm.exponents, bool(match), gerr, disc,
                       adm.truncation_flag, rejected)


# ---------------------------------------------------------------------------
# expansion and bigness

def annulus(r_in: float = 0.3, r_out: float = 1.0) -> Region:
    return Region(0, 0j, r_out, r_in)


def singular_expansion_check(model: SingularModel, ks: Sequence[int], points=None,
                             region: Region | None = None, n_points: int = 20, seed: int = 0,
                             tol: float = 0.03) -> dict:
    """Fit ``P_{k,I}`` on a compact set away from the pole; ``b_0`` against the smooth part."""
    region = region or annulus()
    if region.r_in < 0.2:
        raise PreconditionError("compact set must stay at distance >= 0.2 from the pole")
    if points is None:
        points = region.sample(n_points, np.random.default_rng(seed))
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    frames = {k: multiplier_frame(model, k) for k in sorted(ks)}
    vals = np.stack([multiplier_kernel(frames[k], 0, points) for k in sorted(ks)])
    ref = np.full(len(points), model.smooth_det() / (2 * np.pi))
    fit = fit_expansion(sorted(ks), vals, 1, ref)
    return {"fit": fit, "points": points, "passed": bool(np.all(fit.relative_deviation < tol)),
            "max_relative_deviation": float(np.max(fit.relative_deviation))}


def _integrate_over(mframe: MultiplierFrame, region: Region | None, r_hole: float, n_r: int):
    """``int_K P_{k,I} dv`` with ``K`` a pole-chart annulus, or ``M`` minus a pole disc."""
    geom = mframe.geometry
    if region is not None:
        z, w = region.polar_rule(n_r, 2 * (mframe.k * mframe.model.m) + 32)
        return float(np.sum(w * geom.density(0, z) * multiplier_kernel(mframe, 0, z)))
    total = 0.0
    ann = Region(0, 0j, 1.0, r_hole)
    z, w = ann.polar_rule(n_r, 2 * (mframe.k * mframe.model.m) + 32)
    total += np.sum(w * geom.density(0, z) * multiplier_kernel(mframe, 0, z))
    rule = build_quadrature("sphere", max(64, mframe.k * mframe.model.m + 24))
    z1, w1 = rule.select(1)
    total += np.sum(w1 * geom.density(1, z1) * multiplier_kernel(mframe, 1, z1))
    return float(total)


def big_bound_check(model: SingularModel, ks: Sequence[int], region: Region | None = None,
                    r_hole: float = 1e-3, n_r: int = 96) -> dict:
    """``dim H^0(L^k) >= int_K P_{k,I} dv`` for every ``k`` and the growth exponent of the integral.

    The exponent is fitted as ``log I_k = log c + p log k + e / k`` (the
    ``1/k`` term absorbs the subleading coefficient); the plain log-log slope
    is reported alongside.
    """
    region = region if region is not None else annulus()
    ks = sorted(int(k) for k in ks)
    rows = []
    for k in ks:
        mf = multiplier_frame(model, k)
        integral = _integrate_over(mf, region, r_hole, n_r)
        whole = _integrate_over(mf, None, r_hole, n_r)
        dim = k * model.m + 1
        rows.append({"k": k, "integral_K": integral, "m_k": mf.m_k, "dim": dim,
                     "integral_punctured": whole, "holds": bool(integral <= mf.m_k + 1e-9 <= dim + 1e-9)})
    kk = np.array(ks, dtype=float)
    I = np.array([r["integral_K"] for r in rows])
    A = np.stack([np.ones_like(kk), np.log(kk), 1 / kk], axis=1)
    p = float(np.linalg.lstsq(A, np.log(I), rcond=None)[0][1])
    plain = float(np.polyfit(np.log(kk), np.log(I), 1)[0])
    trace_err = max(abs(r["integral_punctured"] - r["m_k"]) for r in rows)
    return {"rows": rows, "exponent": p, "loglog_slope": plain, "trace_error": float(trace_err),
            "inequality_holds": all(r["holds"] for r in rows),
            "passed": bool(all(r["holds"] for r in rows) and 0.9 <= p <= 1.1)}


def singular_gap(model: SingularModel, ks: Sequence[int], region: Region | None = None,
                 count: int = 32, seed: int = 0):
    """Gap estimate with the multiplier frames on an annulus avoiding the pole."""
    region = region or annulus()
    frames = {k: multiplier_frame(model, k).frame for k in sorted(ks)}
    return gap_estimate(frames, region, count=count, seed=seed)
