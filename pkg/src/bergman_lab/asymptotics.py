"""Large-k behaviour of Bergman kernels: on-diagonal expansion fits, the phase
``Im Psi`` from off-diagonal magnitudes, off-diagonal decay, and an empirical
small-spectral-gap exponent."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import (DomainError, FitError, GeneratorError, InsufficientDataError,
                     PreconditionError)
from .geometry import ModelGeometry, det_curvature_array, normal_coordinates
from .hilbert import (BergmanFrame, SectionData, bergman_function, bergman_project,
                      build_frame, kernel_matrix)

__all__ = [
    "ExpansionFit", "PhaseProbe", "DecayReport", "GapEstimate", "Region",
    "frame_family", "fit_expansion", "log_defect", "expansion_at", "extract_phase", "exact_im_psi",
    "offdiagonal_decay", "gap_estimate", "bump_polynomial_sections", "TestSection",
]

UNDERFLOW_FLOOR = 1e-280


def frame_family(geom: ModelGeometry, ks: Sequence[int], builder: Callable | None = None) -> dict:
    """``{k: frame}`` in increasing ``k``; ``builder(k)`` overrides ``build_frame``."""
    builder = builder or (lambda k: build_frame(geom, k))
    return {int(k): builder(int(k)) for k in sorted(set(int(k) for k in ks))}


# ---------------------------------------------------------------------------
# on-diagonal expansion

@dataclass(frozen=True)
class ExpansionFit:
    ks: np.ndarray
    coefficients: np.ndarray   # (3,) or (3, npts): b0, b1, b2
    residual: np.ndarray       # max relative residual of the fit per point
    reference: np.ndarray | None
    relative_deviation: np.ndarray | None
    condition: float
    n: int = 1

    @property
    def b0(self):
        return self.coefficients[0]

    @property
    def b1(self):
        return self.coefficients[1]


def fit_expansion(ks, values, n: int = 1, reference=None) -> ExpansionFit:
    """Least squares of ``P_k / k^n`` against ``{1, 1/k, 1/k^2}``.

    ``values`` has shape ``(len(ks),)`` or ``(len(ks), npts)``.
    """
    ks = np.asarray(ks, dtype=float)
    if len(np.unique(ks)) < 5:
        raise InsufficientDataError(f"need at least 5 distinct k values, got {len(np.unique(ks))}")
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0):
        raise FitError("non-positive Bergman function values in the fit data")
    A = np.stack([np.ones_like(ks), 1 / ks, 1 / ks ** 2], axis=1)
    y = vals / (ks ** n).reshape((-1,) + (1,) * (vals.ndim - 1))
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    # b_j multiplies k^{n-j}: y = b0 + b1/k + b2/k^2
    resid = np.max(np.abs(A @ coef - y) / np.abs(y), axis=0)
    if np.any(coef[0] <= 0):
        raise FitError("fitted leading coefficient is not positive")
    ref = rel = None
    if reference is not None:
        ref = np.asarray(reference, dtype=float)
        rel = np.abs(coef[0] - ref) / np.abs(ref)
    return ExpansionFit(ks, coef, resid, ref, rel, float(np.linalg.cond(A)), n)


def expansion_at(frames: Mapping[int, BergmanFrame], chart, z) -> ExpansionFit:
    """Fit ``P_k`` at points and compare with ``(2 pi)^{-1} |det R^L|``."""
    ks = sorted(frames)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    vals = np.stack([bergman_function(frames[k], chart, z) for k in ks])
    geom = frames[ks[0]].geometry
    charts = np.broadcast_to(np.asarray(chart, dtype=int), z.shape)
    ref = np.empty(z.shape)
    for c in np.unique(charts):
        m = charts == c
        ref[m] = np.abs(det_curvature_array(geom, int(c), z[m])) / (2 * np.pi)
    return fit_expansion(ks, vals, 1, ref)


# ---------------------------------------------------------------------------
# phase

@dataclass(frozen=True)
class PhaseProbe:
    x: complex
    y: complex
    chart: int
    ks: np.ndarray
    im_psi: float             # fitted slope
    samples: np.ndarray       # per-k normalized log defect
    prediction: float         # order-2 Taylor value lam |zeta_x - zeta_y|^2
    c_hat: float              # im_psi / |x - y|^2 (chart distance)
    relative_error: float

    @property
    def nonnegative(self) -> bool:
        return self.im_psi >= -1e-12


def log_defect(frame, chart, x, y):
    """``-log|P(x,y)| + (log P(x) + log P(y))/2``; zero at ``x = y``."""
    Fx = frame.evaluate(chart, [x])[0]
    Fy = frame.evaluate(chart, [y])[0]
    pxy = abs(np.vdot(Fy, Fx))
    if pxy < UNDERFLOW_FLOOR:
        raise DomainError(f"|P_k(x,y)| = {pxy:.2e} below floor at k={frame.k}; "
                          "use a smaller separation or smaller k")
    px = np.vdot(Fx, Fx).real
    py = np.vdot(Fy, Fy).real
    return -np.log(pxy) + 0.5 * (np.log(px) + np.log(py))


def extract_phase(frames: Mapping[int, BergmanFrame], x, y, chart: int = 0) -> PhaseProbe:
    """``Im Psi(x, y)`` as the ``k``-slope of the normalized log defect.

    The defect is fitted on ``{k, 1, 1/k}``; dividing by the diagonal values
    removes the amplitude ``b(x, y, k)`` up to its ``1/k`` corrections.
    """
    ks = np.array(sorted(frames), dtype=float)
    x, y = complex(x), complex(y)
    L = np.array([log_defect(frames[int(k)], chart, x, y) for k in ks])
    if len(ks) >= 3:
        A = np.stack([ks, np.ones_like(ks), 1 / ks], axis=1)
    else:
        A = np.stack([ks, np.ones_like(ks)], axis=1)
    slope = float(np.linalg.lstsq(A, L, rcond=None)[0][0])
    geom = frames[int(ks[0])].geometry
    nc = normal_coordinates(geom, y, chart)
    pred = nc.lam * abs(complex(nc.from_chart(x)) - complex(nc.from_chart(y))) ** 2
    if x == y:
        return PhaseProbe(x, y, chart, ks, slope, L, 0.0, 0.0, abs(slope))
    rel = abs(slope - pred) / pred
    return PhaseProbe(x, y, chart, ks, slope, L, float(pred), slope / abs(x - y) ** 2, float(rel))


def exact_im_psi(geom: ModelGeometry, x, y, chart: int = 0) -> float:
    """Closed-form ``Im Psi`` on the exact models (oracle)."""
    x, y = complex(x), complex(y)
    if geom.name == "sphere" and geom.exact:
        c2 = abs(1 + x * np.conj(y)) ** 2 / ((1 + abs(x) ** 2) * (1 + abs(y) ** 2))
        return -0.5 * geom.degree * np.log(c2)
    if geom.name == "torus" and geom.exact:
        # nearest lattice translate dominates
        d = x - y
        d = complex(d.real - round(d.real), d.imag - round(d.imag))
        return np.pi * abs(d) ** 2 / 2
    raise ValueError("no closed-form phase for this model")


# ---------------------------------------------------------------------------
# off-diagonal decay

@dataclass(frozen=True)
class Region:
    """Disc or annulus ``r_in <= |z - center| <= r_out`` in one chart."""

    chart: int
    center: complex
    r_out: float
    r_in: float = 0.0

    def polar_rule(self, n_r: int, n_theta: int):
        """Gauss-Legendre in ``r^2`` (``r`` for annuli) times uniform angle; dA weights."""
        t, wt = roots_legendre(n_r)
        if self.r_in == 0:
            s = 0.5 * (t + 1) * self.r_out ** 2
            r = np.sqrt(s)
            wr = 0.5 * wt * self.r_out ** 2 * 0.5   # r dr = ds / 2
        else:
            r = self.r_in + 0.5 * (t + 1) * (self.r_out - self.r_in)
            wr = 0.5 * wt * (self.r_out - self.r_in) * r
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        z = self.center + (r[:, None] * np.exp(1j * th[None, :])).ravel()
        w = np.repeat(wr * 2 * np.pi / n_theta, n_theta)
        return z, w

    def sample(self, n: int, rng: np.random.Generator):
        rad = np.sqrt(rng.uniform(self.r_in ** 2, self.r_out ** 2, n))
        return self.center + rad * np.exp(2j * np.pi * rng.random(n))

    def distance(self, other: "Region") -> float:
        return abs(self.center - other.center) - self.r_out - other.r_out


@dataclass(frozen=True)
class DecayReport:
    ks: np.ndarray
    sup_values: np.ndarray
    rate: float               # alpha in s_k ~ A exp(-alpha k)
    log_amplitude: float
    drop: float               # s_last / s_first
    separation: float
    predicted_rate: float | None
    passed: bool
    required_drop: float


def offdiagonal_decay(frames: Mapping[int, BergmanFrame], support_x: Region, support_y: Region,
                      n_samples: int = 64, seed: int = 0, required_drop: float = 1e-6) -> DecayReport:
    """``s_k = sup |P_{k,s,s1}(x, y)|`` over sampled ``x`` in ``support_x``, ``y`` in ``support_y``.

    The sampled set always contains the pair of closest boundary points.
    """
    sep = support_x.distance(support_y)
    if support_x.chart == support_y.chart and sep <= 0:
        raise PreconditionError("supports overlap; decay is only claimed for disjoint supports")
    rng = np.random.default_rng(seed)
    u = support_y.center - support_x.center
    u = u / abs(u) if abs(u) > 0 else 1.0
    xs = np.concatenate([[support_x.center + support_x.r_out * u], support_x.sample(n_samples, rng)])
    ys = np.concatenate([[support_y.center - support_y.r_out * u], support_y.sample(n_samples, rng)])
    ks = np.array(sorted(frames), dtype=float)
    sups = np.array([np.max(np.abs(kernel_matrix(frames[int(k)], support_x.chart, xs,
                                                 support_y.chart, ys))) for k in ks])
    A = np.stack([ks, np.ones_like(ks)], axis=1)
    coef = np.linalg.lstsq(A, np.log(sups), rcond=None)[0]
    rate = float(-coef[0])
    geom = frames[int(ks[0])].geometry
    pred = None
    if geom.exact and support_x.chart == support_y.chart:
        pred = float(exact_im_psi(geom, xs[0], ys[0], support_x.chart))
    drop = float(sups[-1] / sups[0])
    return DecayReport(ks, sups, rate, float(coef[1]), drop, float(sep), pred,
                       bool(rate > 0 and drop <= required_drop), required_drop)


# ---------------------------------------------------------------------------
# small spectral gap

@dataclass(frozen=True)
class TestSection:
    """``u = s^k G`` with ``G = bump(|z - c| / r) * sum a_pq z^p zbar^q``."""

    __test__ = False    # not a pytest class

    center: complex
    radius: float
    coeffs: np.ndarray    # (deg+1, deg+1), index [p, q]

    def _bump(self, z):
        s = np.abs(z - self.center) ** 2 / self.radius ** 2
        inside = s < 1
        b = np.zeros(np.shape(z))
        db = np.zeros(np.shape(z))
        with np.errstate(divide="ignore", over="ignore"):
            e = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        b[inside] = e
        db[inside] = -e / (1.0 - s[inside]) ** 2
        return b, db, s

    def _poly(self, z):
        zc = np.conj(z)
        deg = self.coeffs.shape[0] - 1
        P = np.zeros(np.shape(z), dtype=complex)
        dP = np.zeros(np.shape(z), dtype=complex)
        for p in range(deg + 1):
            for q in range(deg + 1):
                a = self.coeffs[p, q]
                if a == 0:
                    continue
                P += a * z ** p * zc ** q
                if q > 0:
                    dP += q * a * z ** p * zc ** (q - 1)
        return P, dP

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        b, _, _ = self._bump(z)
        return b * self._poly(z)[0]

    def dbar(self, z):
        z = np.asarray(z, dtype=complex)
        b, db, _ = self._bump(z)
        P, dP = self._poly(z)
        ds = (z - self.center) / self.radius ** 2     # d s / d zbar
        return db * ds * P + b * dP


def bump_polynomial_sections(region: Region, count: int, seed: int, degree: int = 3) -> list:
    """Seeded random bumps inside ``region`` times polynomials of degree <= ``degree``."""
    rng = np.random.default_rng(seed)
    out = []
    width = region.r_out - region.r_in
    for _ in range(count):
        r = rng.uniform(0.2, 0.45) * (width if region.r_in > 0 else region.r_out)
        lo = region.r_in + r if region.r_in > 0 else 0.0
        hi = region.r_out - r
        rho = rng.uniform(lo, max(lo, hi))
        c = region.center + rho * np.exp(2j * np.pi * rng.random())
        a = rng.standard_normal((degree + 1, degree + 1)) + 1j * rng.standard_normal((degree + 1, degree + 1))
        mask = np.add.outer(np.arange(degree + 1), np.arange(degree + 1)) <= degree
        out.append(TestSection(complex(c), float(r), a * mask))
    return out


@dataclass(frozen=True)
class GapEstimate:
    region: Region
    ks: np.ndarray
    ratios: np.ndarray          # rho_k
    C_hat: float
    N_hat: float
    fit_residual: float         # rms of log residuals
    skipped: int
    per_section: np.ndarray = field(repr=False, default=None)


def gap_ratio(frame: BergmanFrame, region: Region, section: TestSection, n_r: int | None = None,
              n_theta: int | None = None, scale: complex = 1.0):
    """``(||(I - P_k) u||, ||dbar u||, ||u||)`` for one test section."""
    geom = frame.geometry
    k = frame.k
    n_r = n_r or 64 + 2 * k
    n_theta = n_theta or 2 * (frame.basis.top if hasattr(frame.basis, "top") else k) + 64
    z, w = region.polar_rule(n_r, n_theta)
    keep = np.abs(z - section.center) < section.radius
    z, w = z[keep], w[keep]
    ew = np.exp(-k * geom.weight(region.chart, z))
    dens = geom.density(region.chart, z)
    vals = scale * section.value(z) * ew
    data = SectionData(region.chart, z, w * dens, vals)
    proj = bergman_project(frame, data)
    unorm2 = float(np.sum(data.measure * np.abs(vals) ** 2))
    resid2 = max(unorm2 - float(np.sum(np.abs(proj.coefficients) ** 2)), 0.0)
    form = scale * section.dbar(z)
    dbar2 = float(np.sum(w * dens / geom.metric(region.chart, z) * np.abs(form * ew) ** 2))
    return np.sqrt(resid2), np.sqrt(dbar2), np.sqrt(unorm2)


def gap_estimate(frames: Mapping[int, BergmanFrame], region: Region, count: int = 32, seed: int = 0,
                 degree: int = 3, sections: Sequence[TestSection] | None = None) -> GapEstimate:
    """Worst ratio ``||(I - P_k) u|| / ||dbar_k u||`` over a seeded family, fitted as ``C k^N``."""
    sections = list(sections) if sections is not None else bump_polynomial_sections(region, count, seed, degree)
    ks = np.array(sorted(frames), dtype=float)
    table = np.full((len(ks), len(sections)), np.nan)
    skipped = set()
    for i, k in enumerate(ks):
        for j, sec in enumerate(sections):
            r, d, u = gap_ratio(frames[int(k)], region, sec)
            if d < 1e-12 * u:
                skipped.add(j)
                continue
            table[i, j] = r / d
    if skipped:
        warnings.warn(f"{len(skipped)} numerically holomorphic test sections skipped")
    if len(skipped) == len(sections):
        raise GeneratorError("every test section was numerically holomorphic")
    rho = np.nanmax(table, axis=1)
    A = np.stack([np.ones_like(ks), np.log(ks)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(rho), rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - np.log(rho)) ** 2)))
    return GapEstimate(region, ks, rho, float(np.exp(coef[0])), float(coef[1]), res, len(skipped), table)
