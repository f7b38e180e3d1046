"""The Kodaira map into projective space and its immersion / injectivity
diagnostics, including the correlation functional along segments."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import BasePointError, DomainError, NumericsError, PreconditionError
from .geometry import ModelGeometry, sample_points
from .hilbert import BergmanFrame

__all__ = [
    "ProjectivePoint", "normalize_projective", "fs_distance", "kodaira_map", "kodaira_images",
    "ImmersionCertificate", "immersion_check", "SeparationProbe", "separation_probe",
    "source_distance", "sample_pairs", "ScanReport", "injectivity_scan", "embedding_threshold",
    "ShrinkingScaleReport", "curvature_diagnostic",
]

BASEPOINT_FLOOR = 1e-250
RANK_TOL = 1e-8


# ---------------------------------------------------------------------------
# projective points

def normalize_projective(v) -> np.ndarray:
    """Unit norm, first non-negligible entry real positive (rows for 2-D input)."""
    v = np.atleast_2d(np.asarray(v, dtype=complex))
    nrm = np.linalg.norm(v, axis=1, keepdims=True)
    if np.any(nrm == 0):
        raise BasePointError("zero homogeneous coordinate vector")
    u = v / nrm
    mag = np.abs(u)
    idx = np.argmax(mag > 1e-14 * mag.max(axis=1, keepdims=True), axis=1)
    lead = u[np.arange(len(u)), idx]
    return u * (np.conj(lead) / np.abs(lead))[:, None]


@dataclass(frozen=True)
class ProjectivePoint:
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", normalize_projective(self.coords)[0])

    def distance(self, other: "ProjectivePoint") -> float:
        return fs_distance(self.coords, other.coords)


def fs_distance(u, v) -> float | np.ndarray:
    """Fubini-Study angle between (rows of) unit vectors, stable near zero."""
    u = np.atleast_2d(u)
    v = np.atleast_2d(v)
    ip = np.sum(u * np.conj(v), axis=1)
    perp = np.linalg.norm(u - ip[:, None] * v, axis=1)
    d = np.arctan2(perp, np.abs(ip))
    return float(d[0]) if d.size == 1 else d


def kodaira_images(frame: BergmanFrame, chart, z) -> np.ndarray:
    """Normalized homogeneous coordinates of ``Phi_k`` at many points."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    charts = np.broadcast_to(np.asarray(chart, dtype=int), z.shape)
    F = np.empty((len(z), frame.dimension), dtype=complex)
    for c in np.unique(charts):
        m = charts == c
        F[m] = frame.evaluate(int(c), z[m])
    P = np.sum(np.abs(F) ** 2, axis=1)
    if np.any(P < BASEPOINT_FLOOR):
        raise BasePointError(f"all sections vanish at {np.count_nonzero(P < BASEPOINT_FLOOR)} point(s)")
    return normalize_projective(F)


def kodaira_map(frame: BergmanFrame, chart: int, z) -> ProjectivePoint:
    return ProjectivePoint(kodaira_images(frame, chart, [z])[0])


# ---------------------------------------------------------------------------
# immersion

@dataclass(frozen=True)
class ImmersionCertificate:
    chart: int
    x: complex
    k: int
    sigma_min: float          # Fubini-Study normalized, per unit Theta length
    sigma_max: float
    affine_sigma: tuple       # singular values of the affine-chart Jacobian
    pivot: int
    full_rank: bool


def _richardson(fun, x, step):
    """Central difference derivatives along x and y with one Richardson step."""
    def cd(h):
        return ((fun(x + h) - fun(x - h)) / (2 * h), (fun(x + 1j * h) - fun(x - 1j * h)) / (2 * h))
    a1, b1 = cd(step)
    a2, b2 = cd(step / 2)
    return (4 * a2 - a1) / 3, (4 * b2 - b1) / 3


def _realify(cols):
    return np.stack([np.concatenate([c.real, c.imag]) for c in cols], axis=1)


def immersion_check(frame: BergmanFrame, chart: int, x, step: float = 1e-4) -> ImmersionCertificate:
    """Rank of ``d Phi_k`` at ``x`` from an affine chart of projective space."""
    geom = frame.geometry
    x = complex(x)
    F0 = frame.evaluate(chart, [x])[0]
    if np.sum(np.abs(F0) ** 2) < BASEPOINT_FLOOR:
        raise BasePointError(f"base point at {x}")
    d = frame.dimension
    if d < 2:
        return ImmersionCertificate(chart, x, frame.k, 0.0, 0.0, (0.0, 0.0), 0, False)
    order = np.argsort(-np.abs(F0), kind="stable")
    aff = None
    for piv in order:
        if abs(F0[piv]) < 1e-12 * np.abs(F0).max():
            continue
        keep = np.arange(d) != piv

        def affine(z, piv=piv, keep=keep):
            F = frame.evaluate(chart, [z])[0]
            return F[keep] / F[piv]
        try:
            cols = _richardson(affine, x, step)
        except (FloatingPointError, ZeroDivisionError):
            continue
        if all(np.all(np.isfinite(c)) for c in cols):
            aff = (piv, np.linalg.svd(_realify(cols), compute_uv=False))
            break
    if aff is None:
        raise NumericsError("every affine pivot failed along the probe")
    piv, sv = aff

    def unit(z):
        F = frame.evaluate(chart, [z])[0]
        return F / np.linalg.norm(F)
    u = unit(x)
    cols = []
    for du in _richardson(unit, x, step):
        cols.append(du - np.vdot(u, du) * u)
    fs = np.linalg.svd(_realify(cols), compute_uv=False)
    scale = float(np.sqrt(geom.metric(chart, np.array([x]))[0]))
    full = bool(sv[-1] > RANK_TOL * sv[0])
    return ImmersionCertificate(chart, x, frame.k, float(fs[-1] / scale), float(fs[0] / scale),
                                (float(sv[0]), float(sv[-1])), int(piv), full)


# ---------------------------------------------------------------------------
# separation along segments

@dataclass(frozen=True)
class SeparationProbe:
    x: complex
    y: complex
    chart: int
    k: int
    t: np.ndarray
    f: np.ndarray
    gap: float                  # 1 - f(1)
    failure: bool               # f(0) = f(1) = 1 with x != y
    f2: np.ndarray              # f'' on interior nodes
    f2_min: float
    t_star: float               # interior node where f'' is largest
    scaled_f2: float            # f''(t_star) / (k |x - y|^2)
    dlogf_star: float           # (log f)'(t_star)
    d2logf_star: float          # (log f)''(t_star)


def _segment_values(frame, chart, x, y, t, via_chart=None):
    geom = frame.geometry
    z = t * x + (1 - t) * y
    pts = np.concatenate([z, [y]])
    if via_chart is not None and via_chart != chart:
        pts, _ = geom.change_chart(pts, chart, via_chart)
        chart = via_chart
    F = frame.evaluate(chart, pts)
    Fy = F[-1]
    Fz = F[:-1]
    num = np.abs(Fz @ np.conj(Fy)) ** 2
    return num / (np.sum(np.abs(Fz) ** 2, axis=1) * np.sum(np.abs(Fy) ** 2))


def separation_probe(frame: BergmanFrame, chart: int, x, y, n_t: int = 41,
                     via_chart: int | None = None) -> SeparationProbe:
    """``f_k(t) = |P(t x + (1 - t) y, y)|^2 / (P(t x + (1 - t) y) P(y))`` on a uniform grid."""
    x, y = complex(x), complex(y)
    geom = frame.geometry
    t = np.linspace(0.0, 1.0, n_t)
    seg = t * x + (1 - t) * y
    if not np.all(geom.charts[chart].contains(seg)):
        raise DomainError("segment leaves the chart")
    f = _segment_values(frame, chart, x, y, t, via_chart)
    dt = t[1] - t[0]
    f2 = (f[2:] - 2 * f[1:-1] + f[:-2]) / dt ** 2
    sep2 = abs(x - y) ** 2
    if x == y:
        return SeparationProbe(x, y, chart, frame.k, t, f, 0.0, False, f2, float(f2.min()), 0.0,
                               0.0, 0.0, 0.0)
    i = int(np.argmax(f2)) + 1
    lf = np.log(f)
    dlog = (lf[i + 1] - lf[i - 1]) / (2 * dt) if i + 1 < n_t else (lf[i] - lf[i - 1]) / dt
    d2log = (lf[i + 1] - 2 * lf[i] + lf[i - 1]) / dt ** 2
    gap = float(1.0 - f[-1])
    failure = bool(abs(gap) <= 1e-12)
    return SeparationProbe(x, y, chart, frame.k, t, f, gap, failure, f2, float(f2.min()), float(t[i]),
                           float(f2[i - 1] / (frame.k * sep2)), float(dlog), float(d2log))


# ---------------------------------------------------------------------------
# injectivity

def source_distance(geom: ModelGeometry, cx, x, cy, y) -> np.ndarray:
    """Riemannian distance of the unit-curvature model metric (sphere: Fubini-Study angle)."""
    cx, cy = np.asarray(cx), np.asarray(cy)
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    if geom.name == "sphere":
        def homog(c, z):
            return np.where(c == 0, 1.0, z), np.where(c == 0, z, 1.0)
        x0, x1 = homog(cx, x)
        y0, y1 = homog(cy, y)
        nx = np.sqrt(np.abs(x0) ** 2 + np.abs(x1) ** 2)
        ny = np.sqrt(np.abs(y0) ** 2 + np.abs(y1) ** 2)
        ip = np.abs(x0 * np.conj(y0) + x1 * np.conj(y1)) / (nx * ny)
        return np.arccos(np.clip(ip, 0.0, 1.0))
    d = x - y
    d = (d.real - np.round(d.real)) + 1j * (d.imag - np.round(d.imag))
    return np.abs(d)


def sample_pairs(geom: ModelGeometry, k: int, n: int, seed: int):
    """Stratified pairs: macroscopic (distance > 0.3), ``1/sqrt(k)`` and ``1/k`` scale."""
    rng = np.random.default_rng(seed)
    n1 = n // 3
    n2 = n // 3
    n3 = n - n1 - n2
    cx, x = sample_points(geom, 8 * n1 + 8, rng)
    cy, y = sample_points(geom, 8 * n1 + 8, rng)
    ok = source_distance(geom, cx, x, cy, y) > 0.3
    macro = (cx[ok][:n1], x[ok][:n1], cy[ok][:n1], y[ok][:n1])
    out = [macro]
    for count, scale in ((n2, 1 / np.sqrt(k)), (n3, 1.0 / k)):
        c, z = sample_points(geom, count, rng)
        h = np.empty(count)
        for ci in np.unique(c):
            h[c == ci] = geom.metric(int(ci), z[c == ci])
        # chart step of Theta-length ``scale * U(0.5, 2)``
        r = scale * rng.uniform(0.5, 2.0, count) / np.sqrt(h)
        w = z + r * np.exp(2j * np.pi * rng.random(count))
        out.append((c, z, c.copy(), w))
    strata = np.concatenate([np.full(len(o[0]), s) for s, o in enumerate(out)])
    cat = [np.concatenate([o[i] for o in out]) for i in range(4)]
    return (*cat, strata)


@dataclass
class ScanReport:
    k: int
    n_pairs: int
    source: np.ndarray
    image: np.ndarray
    gaps: np.ndarray            # 1 - f_k(1) = sin^2(image distance)
    strata: np.ndarray
    violations: list
    min_ratio: float            # min image / source distance

    @property
    def passed(self) -> bool:
        return not self.violations


def injectivity_scan(frame: BergmanFrame, n_pairs: int = 1000, seed: int = 0, pairs=None,
                     tol: float = 1e-10) -> ScanReport:
    geom = frame.geometry
    if pairs is None:
        pairs = sample_pairs(geom, frame.k, n_pairs, seed)
    cx, x, cy, y, strata = pairs
    ux = kodaira_images(frame, cx, x)
    uy = kodaira_images(frame, cy, y)
    img = np.atleast_1d(fs_distance(ux, uy))
    src = source_distance(geom, cx, x, cy, y)
    gaps = 1.0 - np.abs(np.sum(ux * np.conj(uy), axis=1)) ** 2
    bad = np.nonzero((img <= tol) & (src > 0))[0]
    viol = [{"x": [int(cx[i]), complex(x[i])], "y": [int(cy[i]), complex(y[i])],
             "source": float(src[i]), "image": float(img[i])} for i in bad]
    pos = src > 0
    ratio = float(np.min(img[pos] / src[pos])) if np.any(pos) else np.nan
    return ScanReport(frame.k, len(x), src, img, gaps, strata, viol, ratio)


def embedding_threshold(frames: Mapping[int, BergmanFrame], n_pairs: int = 1000, seed: int = 0) -> dict:
    """Smallest swept ``k`` beyond which every scan is violation-free."""
    reports = {k: injectivity_scan(frames[k], n_pairs, seed) for k in sorted(frames)}
    k_emb = None
    for k in sorted(reports, reverse=True):
        if not reports[k].passed:
            break
        k_emb = k
    return {"k_emb": k_emb, "reports": reports}


# ---------------------------------------------------------------------------
# shrinking-scale separation mechanism

@dataclass
class ShrinkingScaleReport:
    ks: np.ndarray
    scaled_f2: np.ndarray        # max_t f'' / (k |x - y|^2) per k (worst over directions)
    c2_hat: float                # -max scaled f''
    c_hat: float                 # Im Psi / |x - y|^2 from the phase fit
    predicted: float             # -4 c_hat
    first_derivative: np.ndarray # |(log f)'(t*)| per k
    hessian_term: np.ndarray     # (log f)''(t*) / (k |x - y|^2) per k
    passed: dict = field(default_factory=dict)


def curvature_diagnostic(frames: Mapping[int, BergmanFrame], p, chart: int = 0, directions: int = 4,
                         c_hat: float | None = None, scale: float = 1.0) -> ShrinkingScaleReport:
    """Pairs ``x = p + scale e^{i theta} / k``, ``y = p`` at each swept ``k``."""
    ks = np.array(sorted(frames))
    if np.any(scale / np.sqrt(ks) > 0.5):
        raise PreconditionError("sqrt(k)|x - y| is not small for the smallest k")
    p = complex(p)
    thetas = 2 * np.pi * np.arange(directions) / directions
    scaled = np.empty(len(ks))
    d1 = np.empty(len(ks))
    hess = np.empty(len(ks))
    for i, k in enumerate(ks):
        probes = [separation_probe(frames[int(k)], chart, p + scale * np.exp(1j * th) / k, p) for th in thetas]
        scaled[i] = max(pr.scaled_f2 for pr in probes)
        d1[i] = max(abs(pr.dlogf_star) for pr in probes)
        hess[i] = max(pr.d2logf_star / (k * abs(pr.x - pr.y) ** 2) for pr in probes)
    c2 = float(-np.max(scaled))
    pred = -4.0 * c_hat if c_hat is not None else np.nan
    passed = {
        "negative": bool(c2 > 0),
        "within_2x": bool(c_hat is not None and 0.5 <= c2 / (4 * c_hat) <= 2.0),
        "first_derivative_decreasing": bool(np.all(np.diff(d1) < 0)),
        "hessian_negative": bool(np.max(hess) < 0),
    }
    return ShrinkingScaleReport(ks, scaled, c2, float(c_hat) if c_hat is not None else np.nan, pred, d1, hess, passed)
