"""Peak sections: Bergman projections of a cutoff at scale ``1/sqrt(k)`` placed
in normal coordinates at a point, the directional variants carrying a linear
factor, and the uniform lower/upper bounds they satisfy."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import ResolutionError
from .geometry import ModelGeometry, NormalCoordinates, det_curvature, normal_coordinates, sample_points
from .hilbert import BergmanFrame, SectionData, bergman_project

__all__ = [
    "CutoffProfile", "make_cutoff", "PeakSection", "peak_section", "directional_peak_section",
    "PeakReport", "verify_peak_sections", "peak_limit", "concentration", "exterior_sets",
    "measure_peaks", "summarize_peaks", "FAMILIES_C0", "FAMILIES_C1",
]


# ---------------------------------------------------------------------------
# cutoff

def _f(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _df(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """Even smooth plateau: 1 on ``|t| <= plateau``, 0 on ``|t| >= 1``."""

    plateau: float = 0.5

    def _s(self, t):
        return (1.0 - np.abs(np.asarray(t, dtype=float))) / (1.0 - self.plateau)

    def __call__(self, t):
        s = np.clip(self._s(t), 0.0, 1.0)
        a, b = _f(s), _f(1.0 - s)
        return a / (a + b)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        s = np.clip(self._s(t), 0.0, 1.0)
        a, b = _f(s), _f(1.0 - s)
        da, db = _df(s), _df(1.0 - s)
        dS = (da * b + a * db) / (a + b) ** 2
        inside = (np.abs(t) > self.plateau) & (np.abs(t) < 1.0)
        return np.where(inside, -np.sign(t) * dS / (1.0 - self.plateau), 0.0)

    def integral(self, gauss: float = 0.0, n: int = 64) -> float:
        """``int chi(t) exp(-gauss t^2) dt`` by panelled Gauss-Legendre."""
        x, w = roots_legendre(n)
        total = 0.0
        for lo, hi in ((-1.0, -self.plateau), (-self.plateau, self.plateau), (self.plateau, 1.0)):
            t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            total += 0.5 * (hi - lo) * np.sum(w * self(t) * np.exp(-gauss * t ** 2))
        return float(total)


def make_cutoff(plateau: float = 0.5) -> CutoffProfile:
    if not 0 < plateau < 1:
        raise ValueError("plateau must lie in (0, 1)")
    return CutoffProfile(float(plateau))


# ---------------------------------------------------------------------------
# peak sections

@dataclass(frozen=True)
class PeakSection:
    """``u = P_k(data)``; ``value`` and derivatives refer to the normal-gauge
    representative in normal coordinates at ``p``, derivatives scaled by ``1/sqrt(k)``."""

    p: complex
    chart: int
    k: int
    kind: int                       # 0 plain, j >= 1 directional
    coefficients: np.ndarray
    normal: NormalCoordinates
    frame: BergmanFrame = field(repr=False)
    value: complex = 0j
    d_dx: complex = 0j
    d_dy: complex = 0j

    @property
    def d_dz(self) -> complex:
        return 0.5 * (self.d_dx - 1j * self.d_dy)

    @property
    def d_dzbar(self) -> complex:
        return 0.5 * (self.d_dx + 1j * self.d_dy)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def evaluate(self, chart: int, z) -> np.ndarray:
        """Weighted representative in ``chart``'s own gauge, ``|u|_h = |value|``."""
        return self.frame.evaluate(chart, z) @ self.coefficients

    def normal_value(self, zeta) -> np.ndarray:
        z = self.normal.to_chart(np.atleast_1d(zeta))
        return self.evaluate(self.chart, z) * self.normal.gauge_phase(z, self.k)


def _square_rule(half: float, n: int, plateau: float):
    """Tensor Gauss-Legendre on ``[-half, half]^2`` panelled at the plateau edges."""
    x, w = roots_legendre(n)
    ts, ws = [], []
    edges = (-1.0, -plateau, plateau, 1.0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        ts.append(half * (0.5 * (hi - lo) * x + 0.5 * (hi + lo)))
        ws.append(half * 0.5 * (hi - lo) * w)
    t, wt = np.concatenate(ts), np.concatenate(ws)
    X, Y = np.meshgrid(t, t, indexing="ij")
    return (X + 1j * Y).ravel(), np.outer(wt, wt).ravel()


def _build(frame: BergmanFrame, p, chart, kind: int, cutoff: CutoffProfile, n_panel: int,
           scale: complex = 1.0) -> PeakSection:
    geom = frame.geometry
    k = frame.k
    chart_arr, p_arr = geom.convention(chart, np.array([p], dtype=complex))
    chart, p = int(chart_arr[0]), complex(p_arr[0])
    nc = normal_coordinates(geom, p, chart)
    half = 1.0 / np.sqrt(k)
    if abs(nc.b) > 0 and np.sqrt(2) * half * abs(nc.b) > 0.375 * abs(nc.a):
        raise ResolutionError(f"cutoff support leaves the normal-coordinate patch at k={k}; increase k",
                              int(np.ceil(2 * (abs(nc.b) / (0.375 * abs(nc.a))) ** 2)))
    zeta, w = _square_rule(half, n_panel, cutoff.plateau)
    z = nc.to_chart(zeta)
    eta = np.sqrt(k) * zeta
    vals = cutoff(eta.real) * cutoff(eta.imag)
    if kind:
        vals = vals * eta
    vals = scale * vals / nc.gauge_phase(z, k)
    measure = w * np.abs(nc.jacobian(zeta)) ** 2 * geom.density(chart, z)
    proj = bergman_project(frame, SectionData(chart, z, measure, vals))
    coef = proj.coefficients
    # value and scaled partials of the normal-gauge representative at p
    h = 0.1 / np.sqrt(k)
    probe = np.array([0, h, -h, 1j * h, -1j * h], dtype=complex)
    zz = nc.to_chart(probe)
    u = (frame.evaluate(chart, zz) @ coef) * nc.gauge_phase(zz, k)
    dx = (u[1] - u[2]) / (2 * h) / np.sqrt(k)
    dy = (u[3] - u[4]) / (2 * h) / np.sqrt(k)
    return PeakSection(p, chart, k, int(kind), coef, nc, frame, complex(u[0]), complex(dx), complex(dy))


def peak_section(frame: BergmanFrame, p, chart: int = 0, cutoff: CutoffProfile | None = None,
                 n_panel: int = 24, scale: complex = 1.0) -> PeakSection:
    """``u_k = P_k(s^k e^{k phi} chi(sqrt(k) y_1) chi(sqrt(k) y_2))`` in normal coordinates at ``p``."""
    return _build(frame, p, chart, 0, cutoff or make_cutoff(), n_panel, scale)


def directional_peak_section(frame: BergmanFrame, p, j: int = 1, chart: int = 0,
                             cutoff: CutoffProfile | None = None, n_panel: int = 24) -> PeakSection:
    """As ``peak_section`` with the extra factor ``sqrt(k) (y_1 + i y_2)``; only ``j = 1`` in dimension one."""
    if j != 1:
        raise ValueError("one complex dimension: only j = 1 exists")
    return _build(frame, p, chart, 1, cutoff or make_cutoff(), n_panel)


def peak_limit(geom: ModelGeometry, p, chart: int = 0, cutoff: CutoffProfile | None = None) -> dict:
    """Large-``k`` value of ``u~_k(p)``.

    With ``dv = 2 dA`` in normal coordinates at ``p`` and the kernel
    ``b_0 k exp(-k lam |zeta|^2)`` near the diagonal, the limit is
    ``2 b_0 (int exp(-lam t^2) chi(t) dt)^2``.  The plateau-only value
    ``(1/2) pi^{-1} |det R^L| (int chi)^2`` is returned alongside.
    """
    cutoff = cutoff or make_cutoff()
    nc = normal_coordinates(geom, p, chart)
    det = abs(det_curvature(geom, chart, p))
    b0 = det / (2 * np.pi)
    gauss = 2 * b0 * cutoff.integral(nc.lam) ** 2
    plain = 0.5 / np.pi * det * cutoff.integral() ** 2
    return {"limit": gauss, "plateau_formula": plain, "lam": nc.lam, "b0": b0}


def concentration(section: PeakSection, radius_scale: float = 2.0, n: int = 48) -> float:
    """Fraction of ``||u||^2`` inside the normal ball of radius ``radius_scale / sqrt(k)``."""
    geom = section.frame.geometry
    R = radius_scale / np.sqrt(section.k)
    t, wt = roots_legendre(n)
    s = 0.5 * (t + 1) * R ** 2
    th = 2 * np.pi * np.arange(2 * n) / (2 * n)
    zeta = (np.sqrt(s)[:, None] * np.exp(1j * th)[None, :]).ravel()
    w = np.repeat(0.25 * wt * R ** 2 * 2 * np.pi / (2 * n), 2 * n)
    z = section.normal.to_chart(zeta)
    vals = section.evaluate(section.chart, z)
    meas = w * np.abs(section.normal.jacobian(zeta)) ** 2 * geom.density(section.chart, z)
    return float(np.sum(meas * np.abs(vals) ** 2) / section.norm ** 2)


# ---------------------------------------------------------------------------
# inequality verification

@dataclass
class PeakReport:
    points: list
    ks: list
    table: list                     # per (p, k) dict of measured quantities
    c0: float
    c1: float
    k0_hat: int | None
    families: dict                  # name -> bool
    exterior_decay_exponent: float
    skipped: list

    @property
    def passed(self) -> bool:
        return all(self.families.values())


def _exterior_points(geom: ModelGeometry, p, chart, radius, n, rng):
    """``n`` points of ``M`` outside the ball ``sqrt(h(p)) |z - p| < radius`` of ``p``'s chart."""
    ca, pa = geom.convention(chart, np.array([p], dtype=complex))
    chart, p = int(ca[0]), complex(pa[0])
    scale = float(np.sqrt(geom.metric(chart, np.array([p]))[0]))
    out_c, out_z = [], []
    while sum(len(z) for z in out_z) < n:
        c, z = sample_points(geom, 4 * n, rng)
        if geom.name == "sphere":
            with np.errstate(divide="ignore", invalid="ignore"):
                zz = np.where(c == chart, z, 1 / z)
                keep = ~(scale * np.abs(zz - p) < radius)
        else:
            d = z - p
            d = (d.real - np.round(d.real)) + 1j * (d.imag - np.round(d.imag))
            keep = scale * np.abs(d) >= radius
        out_c.append(c[keep])
        out_z.append(z[keep])
    return np.concatenate(out_c)[:n], np.concatenate(out_z)[:n]


def exterior_sets(geom: ModelGeometry, points: Sequence, chart: int = 0, radius: float = 0.5,
                  n: int = 100, seed: int = 0) -> list:
    """Seeded exterior samples per base point (identical for every ``k``)."""
    return [_exterior_points(geom, complex(p), chart, radius, n, np.random.default_rng([seed, i]))
            for i, p in enumerate(points)]


def measure_peaks(frame: BergmanFrame, points: Sequence, exterior: list, chart: int = 0) -> list:
    """Peak-section quantities at one ``k`` for every base point."""
    rows = []
    for i, p in enumerate(points):
        u = peak_section(frame, p, chart)
        v = directional_peak_section(frame, p, 1, chart)
        ce, ze = exterior[i]
        vals = np.concatenate([u.evaluate(int(c), ze[ce == c]) for c in np.unique(ce)])
        rows.append({
            "point": i, "k": frame.k,
            "u_p_sq": abs(u.value) ** 2,
            "ext_max_sq": float(np.max(np.abs(vals) ** 2)),
            "du_max": max(abs(u.d_dx), abs(u.d_dy)),
            "v_p": abs(v.value),
            "dv_dz": abs(v.d_dz),
            "dv_dzbar": abs(v.d_dzbar),
            "concentration": concentration(u),
        })
    return rows


def _inv(x):
    return 1.0 / x if x > 0 else np.inf


FAMILIES_C0 = {
    "center_lower": lambda r: r["u_p_sq"],                       # |u(p)|^2 >= c0
    "exterior_upper": lambda r: _inv(r["k"] * r["ext_max_sq"]),  # |u(x)|^2 <= 1/(c0 k) off D
    "gradient_small": lambda r: _inv(r["k"] * r["du_max"]),      # |k^{-1/2} du/dx_s(p)| <= 1/(c0 k)
}
FAMILIES_C1 = {
    "directional_center_small": lambda r: _inv(r["k"] * r["v_p"]),
    "directional_antiholomorphic_small": lambda r: _inv(r["k"] * r["dv_dzbar"]),
    "directional_derivative_lower": lambda r: r["dv_dz"],
}


def summarize_peaks(rows: list, points: Sequence, floor: float = 1e-3) -> PeakReport:
    """Largest uniform constants ``c0``, ``c1`` over all rows and the smallest good ``k``.

    A family passes when its implied constant clears ``floor`` on every row.
    """
    ks = sorted({r["k"] for r in rows})
    fams = {**FAMILIES_C0, **FAMILIES_C1}
    implied = {name: np.array([fn(r) for r in rows]) for name, fn in fams.items()}
    c0 = float(min(implied[n].min() for n in FAMILIES_C0))
    c1 = float(min(implied[n].min() for n in FAMILIES_C1))
    families = {name: bool(v.min() >= floor) for name, v in implied.items()}
    kk = np.array([r["k"] for r in rows])
    k0 = None
    for k in reversed(ks):
        if not all(v[kk == k].min() >= floor for v in implied.values()):
            break
        k0 = k
    ext_by_k = [max(r["ext_max_sq"] for r in rows if r["k"] == k) for k in ks]
    slope = float(np.polyfit(np.log(ks), np.log(np.maximum(ext_by_k, 1e-300)), 1)[0])
    return PeakReport([complex(p) for p in points], ks, rows, c0, c1, k0, families, slope,
                       ["directional cross terms (j != s): vacuous in dimension one"])


def verify_peak_sections(frames: Mapping[int, BergmanFrame], points: Sequence, chart: int = 0,
                       exterior_radius: float = 0.5, n_exterior: int = 100, seed: int = 0,
                       floor: float = 1e-3) -> PeakReport:
    """Measure every peak-section inequality at every ``(p, k)`` and aggregate."""
    ks = sorted(frames)
    if len(points) < 3 or len(ks) < 4:
        raise ValueError("need at least 3 base points and 4 k values")
    geom = frames[ks[0]].geometry
    ext = exterior_sets(geom, points, chart, exterior_radius, n_exterior, seed)
    rows = [r for k in ks for r in measure_peaks(frames[k], points, ext, chart)]
    return summarize_peaks(rows, points, floor)
