"""Model manifolds, line-bundle weights, curvature, normal coordinates, quadrature.

Two compact models are shipped, both of complex dimension one:

* ``sphere``: the projective line with charts ``z`` (chart 0) and ``w = 1/z``
  (chart 1), carrying ``O(m)`` with weight ``m/2 log(1 + |z|^2)`` plus optional
  compactly supported bumps.
* ``torus``: the square torus ``C / (Z + iZ)``, weight ``pi |z|^2 / 2`` in the
  universal-cover chart, lattice translations acting through the classical
  factor of automorphy.

A third ``plane`` model (a single chart with a user-supplied weight) exists for
local tests of the curvature and normal-coordinate routines.

Conventions. ``h(z) = <d/dz | d/dz>`` is the coefficient of the Hermitian
metric Theta; the volume form is ``dv = 2 h dA`` with ``dA`` Lebesgue measure in
the chart, so ``dv`` equals ``dA`` in coordinates that are orthonormal for the
underlying Riemannian metric.  The curvature ``R^L = 2 d dbar phi`` has matrix
``2 phi_{z zbar}`` and eigenvalue ``2 phi_{z zbar} / h`` relative to Theta.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import DomainError, NumericsError, PositivityError, ResolutionError

__all__ = [
    "Weight", "FubiniStudyWeight", "QuadraticWeight", "BumpWeight", "LogPoleWeight",
    "CallableWeight", "SumWeight", "InversionPullback", "wirtinger_derivatives",
    "Chart", "ModelGeometry", "QuadratureRule", "CurvatureData", "NormalCoordinates",
    "sphere_model", "torus_model", "plane_model", "model_from_config",
    "curvature_from_weight", "det_curvature", "normal_coordinates",
    "build_quadrature", "min_resolution", "sample_points", "self_check",
]

DERIV_KEYS = ("z", "zz", "zzbar", "zzz", "zzzbar")


# ---------------------------------------------------------------------------
# finite differences

def _shifted(f, z, h, i, j):
    return f(z + h * (i + 1j * j))


def wirtinger_derivatives(f: Callable, z, h: float = 1e-3) -> dict:
    """Wirtinger derivatives of a real function up to order three.

    Real partials come from central stencils on a 5x5 grid of step ``h``:
    fourth order for first and second derivatives, second order for the pure
    third derivatives.
    """
    z = np.asarray(z, dtype=complex)
    g = {(i, j): np.asarray(_shifted(f, z, h, i, j), dtype=float)
         for i in range(-2, 3) for j in range(-2, 3)}

    def d1(sel):  # sel(o) -> sample at offset o along one axis
        return (-sel(2) + 8 * sel(1) - 8 * sel(-1) + sel(-2)) / (12 * h)

    def d2(sel):
        return (-sel(2) + 16 * sel(1) - 30 * sel(0) + 16 * sel(-1) - sel(-2)) / (12 * h * h)

    def d3(sel):
        return (sel(2) - 2 * sel(1) + 2 * sel(-1) - sel(-2)) / (2 * h ** 3)

    fx = d1(lambda o: g[(o, 0)])
    fy = d1(lambda o: g[(0, o)])
    fxx = d2(lambda o: g[(o, 0)])
    fyy = d2(lambda o: g[(0, o)])
    fxy = d1(lambda o: d1(lambda q: g[(o, q)]))
    fxxx = d3(lambda o: g[(o, 0)])
    fyyy = d3(lambda o: g[(0, o)])
    fxxy = d1(lambda q: d2(lambda o: g[(o, q)]))
    fxyy = d1(lambda o: d2(lambda q: g[(o, q)]))
    return {
        "z": 0.5 * (fx - 1j * fy),
        "zzbar": 0.25 * (fxx + fyy) + 0j,
        "zz": 0.25 * (fxx - fyy - 2j * fxy),
        "zzz": (fxxx - 3 * fxyy - 1j * (3 * fxxy - fyyy)) / 8,
        "zzzbar": (fxxx + fxyy - 1j * (fxxy + fyyy)) / 8,
    }


# ---------------------------------------------------------------------------
# weights

class Weight:
    """Local weight ``phi`` of a trivialization, ``|s|^2 = exp(-2 phi)``."""

    analytic = False
    fd_step = 1e-3

    def __call__(self, z):
        raise NotImplementedError

    def derivatives(self, z) -> dict:
        return wirtinger_derivatives(self, z, self.fd_step)

    def describe(self) -> dict:
        return {"type": type(self).__name__}

    def __add__(self, other):
        return SumWeight((self, other))


class FubiniStudyWeight(Weight):
    analytic = True

    def __init__(self, scale: float = 1.0):
        self.scale = float(scale)

    def __call__(self, z):
        return 0.5 * self.scale * np.log1p(np.abs(z) ** 2)

    def derivatives(self, z):
        z = np.asarray(z, dtype=complex)
        s = self.scale
        zb = np.conj(z)
        q = 1.0 + (z * zb).real
        return {
            "z": s * zb / (2 * q),
            "zz": -s * zb ** 2 / (2 * q ** 2),
            "zzbar": s / (2 * q ** 2) + 0j,
            "zzz": s * zb ** 3 / q ** 3,
            "zzzbar": -s * zb / q ** 3,
        }

    def describe(self):
        return {"type": "fubini_study", "scale": self.scale}


class QuadraticWeight(Weight):
    """``phi = c |z|^2``; ``c = pi/2`` gives the torus weight."""

    analytic = True

    def __init__(self, coeff: float):
        self.coeff = float(coeff)

    def __call__(self, z):
        return self.coeff * np.abs(z) ** 2

    def derivatives(self, z):
        z = np.asarray(z, dtype=complex)
        zero = np.zeros_like(z)
        return {"z": self.coeff * np.conj(z), "zz": zero, "zzbar": zero + self.coeff,
                "zzz": zero, "zzzbar": zero}

    def describe(self):
        return {"type": "quadratic", "coeff": self.coeff}


def _bump_profile(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = r < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - r[m] ** 2))
    return out


class BumpWeight(Weight):
    """``amplitude * beta(|z - center| / radius)`` with ``beta(r) = exp(1 - 1/(1-r^2))``.

    Compactly supported in the closed disc of the given radius; derivatives are
    taken numerically.
    """

    def __init__(self, center: complex, amplitude: float, radius: float):
        if radius <= 0:
            raise ValueError("bump radius must be positive")
        self.center = complex(center)
        self.amplitude = float(amplitude)
        self.radius = float(radius)

    def __call__(self, z):
        return self.amplitude * _bump_profile(np.abs(np.asarray(z) - self.center) / self.radius)

    def describe(self):
        return {"type": "bump", "center": [self.center.real, self.center.imag],
                "amplitude": self.amplitude, "radius": self.radius}


class LogPoleWeight(Weight):
    """``tau log|z - a|``: a pole of the metric, pluriharmonic away from ``a``."""

    analytic = True

    def __init__(self, a: complex, tau: float):
        self.a = complex(a)
        self.tau = float(tau)

    def __call__(self, z):
        with np.errstate(divide="ignore"):
            return self.tau * np.log(np.abs(np.asarray(z) - self.a))

    def derivatives(self, z):
        d = np.asarray(z, dtype=complex) - self.a
        zero = np.zeros_like(d)
        t = self.tau
        return {"z": t / (2 * d), "zz": -t / (2 * d ** 2), "zzbar": zero,
                "zzz": t / d ** 3, "zzzbar": zero}

    def describe(self):
        return {"type": "log_pole", "a": [self.a.real, self.a.imag], "tau": self.tau}


class CallableWeight(Weight):
    def __init__(self, fn: Callable, derivative_fn: Callable | None = None, label: str = "callable"):
        self.fn = fn
        self.derivative_fn = derivative_fn
        self.analytic = derivative_fn is not None
        self.label = label

    def __call__(self, z):
        return np.asarray(self.fn(np.asarray(z, dtype=complex)), dtype=float)

    def derivatives(self, z):
        if self.derivative_fn is not None:
            return self.derivative_fn(np.asarray(z, dtype=complex))
        return super().derivatives(z)

    def describe(self):
        return {"type": "callable", "label": self.label}


class InversionPullback(Weight):
    """``phi(1/w)`` for a weight whose support is bounded (zero near ``w = 0``)."""

    def __init__(self, base: Weight):
        self.base = base

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape)
        nz = np.abs(w) > 0
        out[nz] = self.base(1.0 / w[nz])
        return out

    def describe(self):
        return {"type": "inversion", "base": self.base.describe()}


class SumWeight(Weight):
    def __init__(self, terms: Sequence[Weight]):
        flat = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, SumWeight) else [t])
        self.terms = tuple(flat)
        self.analytic = all(t.analytic for t in self.terms)

    def __call__(self, z):
        return sum(t(z) for t in self.terms)

    def derivatives(self, z):
        parts = [t.derivatives(z) for t in self.terms]
        return {key: sum(p[key] for p in parts) for key in DERIV_KEYS}

    def describe(self):
        return {"type": "sum", "terms": [t.describe() for t in self.terms]}


# ---------------------------------------------------------------------------
# charts and models

@dataclass(frozen=True)
class Chart:
    id: int
    dimension: int = 1
    radius: float = np.inf  # chart domain is |z| < radius
    transitions: tuple = ()  # descriptors, e.g. ("inversion", 1) or ("lattice", (1, 1j))

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.isfinite(z) & (np.abs(z) < self.radius)


@dataclass(frozen=True)
class ModelGeometry:
    """Immutable description of a model manifold with a Hermitian line bundle.

    ``weights[c]`` and ``metrics[c]`` are the bundle weight and Theta coefficient
    on chart ``c``.  ``exact`` marks the unperturbed models whose Gram matrices
    are known in closed form.
    """

    name: str
    degree: int
    charts: tuple
    weights: tuple
    metrics: tuple
    volume: float
    exact: bool
    config: dict = field(default_factory=dict, compare=False)

    @property
    def dimension(self) -> int:
        return 1

    @property
    def model_hash(self) -> str:
        blob = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def _check(self, chart, z):
        z = np.asarray(z, dtype=complex)
        if not np.all(self.charts[chart].contains(z)):
            raise DomainError(f"point outside chart {chart} of model {self.name}")
        return z

    def weight(self, chart: int, z):
        return self.weights[chart](z)

    def metric(self, chart: int, z):
        return np.asarray(self.metrics[chart](np.asarray(z, dtype=complex)), dtype=float)

    def density(self, chart: int, z):
        """Volume density of ``dv`` relative to chart Lebesgue measure."""
        return 2.0 * self.metric(chart, z)

    # -- chart changes ------------------------------------------------------
    def change_chart(self, z, src: int, dst: int):
        """Coordinates of the same points in chart ``dst``.

        Returns ``(z_dst, g)`` where ``g`` is the holomorphic transition factor
        of ``L`` with ``s_src = g * s_dst``.
        """
        z = np.asarray(z, dtype=complex)
        if src == dst:
            return z, np.ones_like(z)
        if self.name != "sphere":
            raise DomainError(f"model {self.name} has a single chart")
        w = 1.0 / z
        # s_0 = w^m s_1 on the overlap, and symmetrically s_1 = z^m s_0.
        return w, w ** self.degree

    def translate(self, z, lattice_vector: complex):
        """Torus: ``(z + lam, j(lam, z))`` with ``F(z + lam) = j^k F(z)`` for sections."""
        if self.name != "torus":
            raise DomainError("lattice translations exist only on the torus")
        lam = complex(lattice_vector)
        if abs(lam.real - round(lam.real)) > 1e-12 or abs(lam.imag - round(lam.imag)) > 1e-12:
            raise DomainError("not a lattice vector")
        z = np.asarray(z, dtype=complex)
        # semicharacter is trivial on the generators; products pick up a sign
        a, b = int(round(lam.real)), int(round(lam.imag))
        sign = (-1) ** (a * b)
        return z + lam, sign * np.exp(np.pi * (np.conj(lam) * z + abs(lam) ** 2 / 2))

    def convention(self, chart, z):
        """Move points to the preferred chart (sphere: the one with |coord| <= 1)."""
        chart = np.broadcast_to(np.asarray(chart, dtype=int), np.shape(z)).copy()
        z = np.array(z, dtype=complex, copy=True)
        if self.name == "sphere":
            flip = np.abs(z) > 1.0
            z[flip] = 1.0 / z[flip]
            chart[flip] = 1 - chart[flip]
        return chart, z

    def quadrature(self, k: int, resolution: int | None = None) -> "QuadratureRule":
        res = resolution if resolution is not None else default_resolution(self, k)
        return build_quadrature(self.name, res, k=k, degree=self.degree)


# ---------------------------------------------------------------------------
# model factories

def _fs_metric(scale):
    return lambda z: scale / (1.0 + np.abs(z) ** 2) ** 2


def sphere_model(degree: int = 1, perturbations: Sequence[dict] = (), metric_scale: float | None = None) -> ModelGeometry:
    """Projective line with ``O(degree)`` and the Fubini-Study weight.

    ``perturbations`` is a list of ``{"center", "amplitude", "radius"}`` bumps
    added to the chart-0 weight.  Theta defaults to the curvature of the
    unperturbed weight (``metric_scale = degree``).
    """
    m = int(degree)
    if m < 1:
        raise ValueError("degree must be positive")
    scale = float(m if metric_scale is None else metric_scale)
    bumps = []
    for p in perturbations:
        c = p["center"]
        c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        bumps.append(BumpWeight(c, p["amplitude"], p["radius"]))
    w0: Weight = FubiniStudyWeight(m)
    w1: Weight = FubiniStudyWeight(m)
    if bumps:
        w0 = SumWeight([w0, *bumps])
        w1 = SumWeight([w1, *(InversionPullback(b) for b in bumps)])
    charts = (Chart(0, transitions=(("inversion", 1),)), Chart(1, transitions=(("inversion", 0),)))
    config = {"name": "sphere", "degree": m, "metric_scale": scale,
              "perturbations": [b.describe() for b in bumps]}
    return ModelGeometry("sphere", m, charts, (w0, w1), (_fs_metric(scale), _fs_metric(scale)),
                         volume=2 * np.pi * scale, exact=not bumps and scale == m, config=config)


def torus_model(metric: float | None = None) -> ModelGeometry:
    """Square torus with the degree-one bundle of curvature ``pi`` (``d_k = k``)."""
    h = float(np.pi if metric is None else metric)
    chart = Chart(0, transitions=(("lattice", (1.0, 1.0j)),))
    config = {"name": "torus", "metric": h}
    return ModelGeometry("torus", 1, (chart,), (QuadraticWeight(np.pi / 2),),
                         (lambda z: np.full(np.shape(z), h),), volume=2 * h,
                         exact=(h == np.pi), config=config)


def plane_model(weight: Weight, metric: float = 1.0, radius: float = np.inf, label: str = "plane") -> ModelGeometry:
    """Single chart with an arbitrary weight and constant Theta (local tests only)."""
    config = {"name": "plane", "label": label, "weight": weight.describe(), "metric": metric}
    return ModelGeometry("plane", 1, (Chart(0, radius=radius),), (weight,),
                         (lambda z: np.full(np.shape(z), float(metric)),),
                         volume=np.inf, exact=False, config=config)


def model_from_config(cfg: dict) -> ModelGeometry:
    name = cfg.get("name", "sphere")
    if name == "sphere":
        return sphere_model(cfg.get("degree", 1), cfg.get("perturbations", ()), cfg.get("metric_scale"))
    if name == "torus":
        return torus_model(cfg.get("metric"))
    raise ValueError(f"unknown model {name!r}")


# ---------------------------------------------------------------------------
# curvature

@dataclass(frozen=True)
class CurvatureData:
    matrix: np.ndarray       # 2 phi_{z zbar}, n x n Hermitian
    eigenvalues: np.ndarray  # relative to Theta


def curvature_from_weight(geom: ModelGeometry, chart: int, point, tol: float = 1e-9) -> CurvatureData:
    z = geom._check(chart, point)
    d = geom.weights[chart].derivatives(z)
    mixed = 2.0 * d["zzbar"]
    if not np.all(np.isfinite(mixed)):
        raise DomainError("weight is not smooth at the requested point")
    if np.max(np.abs(np.imag(mixed))) > tol * max(1.0, np.max(np.abs(mixed))):
        raise NumericsError("curvature matrix is not Hermitian within tolerance")
    mat = np.real(mixed).reshape(1, 1)
    h = float(geom.metric(chart, z))
    return CurvatureData(matrix=mat.astype(complex), eigenvalues=np.array([mat[0, 0] / h]))


def det_curvature(geom: ModelGeometry, chart: int, point) -> float:
    data = curvature_from_weight(geom, chart, point)
    if np.any(data.eigenvalues <= 0):
        raise PositivityError(f"curvature eigenvalues {data.eigenvalues} not positive")
    return float(np.prod(data.eigenvalues))


def det_curvature_array(geom: ModelGeometry, chart: int, z) -> np.ndarray:
    """Vectorized ``det R^L`` relative to Theta (no positivity check)."""
    z = np.asarray(z, dtype=complex)
    d = geom.weights[chart].derivatives(z)
    return 2.0 * np.real(d["zzbar"]) / geom.metric(chart, z)


# ---------------------------------------------------------------------------
# normal coordinates

@dataclass(frozen=True)
class NormalCoordinates:
    """Holomorphic coordinates ``z = p + a zeta + b zeta^2`` and gauge ``H``.

    In the trivialization ``s' = s exp(H(z - p))`` the weight reads
    ``phi'(zeta) = lam |zeta|^2 + O(|zeta|^4)``; ``2 lam`` is the curvature
    eigenvalue at ``p``.  ``gauge`` holds the coefficients of the cubic
    polynomial ``H`` in ``delta = z - p``.
    """

    chart: int
    p: complex
    a: complex
    b: complex
    gauge: np.ndarray
    lam: float

    def to_chart(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return self.p + self.a * zeta + self.b * zeta ** 2

    def from_chart(self, z):
        d = np.asarray(z, dtype=complex) - self.p
        if self.b == 0:
            return d / self.a
        return 2 * d / (self.a + np.sqrt(self.a ** 2 + 4 * self.b * d))

    def jacobian(self, zeta):
        return self.a + 2 * self.b * np.asarray(zeta, dtype=complex)

    def gauge_value(self, z):
        d = np.asarray(z, dtype=complex) - self.p
        c = self.gauge
        return c[0] + d * (c[1] + d * (c[2] + d * c[3]))

    def normal_weight(self, geom: ModelGeometry, zeta):
        """``phi'`` in normal coordinates and normal gauge."""
        z = self.to_chart(zeta)
        return geom.weight(self.chart, z) - np.real(self.gauge_value(z))

    def gauge_phase(self, z, k: int):
        """Factor turning chart weighted representatives into normal-gauge ones."""
        return np.exp(-1j * k * np.imag(self.gauge_value(z)))


def normal_coordinates(geom: ModelGeometry, p, chart: int = 0) -> NormalCoordinates:
    z = complex(geom._check(chart, p))
    d = {key: complex(np.asarray(v).reshape(-1)[0])
         for key, v in geom.weights[chart].derivatives(np.array([z])).items()}
    phi0 = float(np.asarray(geom.weight(chart, np.array([z])))[0])
    mixed = d["zzbar"].real
    h = float(np.asarray(geom.metric(chart, np.array([z])))[0])
    if mixed <= 0:
        raise PositivityError(f"curvature at {p} is not positive ({2 * mixed})")
    a = 1.0 / np.sqrt(h)
    b = -d["zzzbar"] * a * a / (2 * mixed)
    gauge = np.array([phi0, 2 * d["z"], d["zz"], d["zzz"] / 3], dtype=complex)
    return NormalCoordinates(chart, z, complex(a), complex(b), gauge, mixed / h)


# ---------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes with coordinate-area weights (``dA``) on one or more charts."""

    model: str
    resolution: int
    order: int
    chart_ids: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    @property
    def rule_id(self) -> str:
        return f"{self.model}:{self.resolution}"

    @property
    def nodes(self):
        return list(zip(self.chart_ids.tolist(), self.points.tolist(), self.weights.tolist()))

    def __len__(self):
        return len(self.weights)

    def charts(self):
        return sorted(set(self.chart_ids.tolist()))

    def select(self, chart):
        m = self.chart_ids == chart
        return self.points[m], self.weights[m]

    def integrate(self, func: Callable) -> complex:
        """``sum_c sum_nodes w * func(c, z)``; ``func`` returns a chart 2-form density."""
        total = 0.0
        for c in self.charts():
            z, w = self.select(c)
            total = total + np.sum(w * func(c, z))
        return total

    def volume(self, geom: ModelGeometry) -> float:
        return float(self.integrate(lambda c, z: geom.density(c, z)))


def min_resolution(model: str, k: int, degree: int = 1) -> int:
    k = max(int(k), 1)
    if model == "sphere":
        return int(np.ceil(1.25 * k * degree)) + 24
    if model == "torus":
        return int(2 * k + np.ceil(8 * np.sqrt(k))) + 16
    raise ValueError(f"no quadrature for model {model!r}")


def default_resolution(geom: ModelGeometry, k: int) -> int:
    base = min_resolution(geom.name, k, geom.degree)
    return base if geom.exact else base + 48


def _disc_rule(n_radial, n_angle):
    x, wx = roots_legendre(n_radial)
    t = 0.5 * (x + 1.0)          # t = r^2 on [0, 1]
    wt = 0.5 * wx
    theta = 2 * np.pi * (np.arange(n_angle) + 0.5) / n_angle
    r = np.sqrt(t)
    z = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    w = np.repeat(wt * np.pi / n_angle, n_angle)  # dA = (1/2) dt dtheta
    return z, w


def build_quadrature(model: str, resolution: int, k: int | None = None, degree: int = 1) -> QuadratureRule:
    """Sphere: Gauss-Legendre in ``r^2`` times uniform angle on both unit discs.
    Torus: uniform ``resolution x resolution`` grid on the unit square."""
    resolution = int(resolution)
    if k is not None:
        need = min_resolution(model, k, degree)
        if resolution < need:
            raise ResolutionError(f"resolution {resolution} too low for k={k}; need >= {need}", need)
    if model == "sphere":
        z, w = _disc_rule(resolution, 2 * resolution)
        pts = np.concatenate([z, z])
        wts = np.concatenate([w, w])
        ids = np.repeat([0, 1], len(z))
        return QuadratureRule("sphere", resolution, 2 * resolution - 1, ids, pts, wts)
    if model == "torus":
        g = np.arange(resolution) / resolution
        x, y = np.meshgrid(g, g, indexing="ij")
        pts = (x + 1j * y).ravel()
        wts = np.full(pts.shape, 1.0 / resolution ** 2)
        return QuadratureRule("torus", resolution, resolution, np.zeros(len(pts), dtype=int), pts, wts)
    raise ValueError(f"no quadrature for model {model!r}")


# ---------------------------------------------------------------------------
# sampling and diagnostics

def sample_points(geom: ModelGeometry, n: int, rng: np.random.Generator):
    """Uniformly distributed points, returned as ``(charts, coords)`` in convention charts."""
    if geom.name == "sphere":
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (v[:, 0] + 1j * v[:, 1]) / (1.0 - v[:, 2])
        z[~np.isfinite(z)] = 1e12
        return geom.convention(np.zeros(n, dtype=int), z)
    if geom.name == "torus":
        u = rng.random((n, 2))
        return np.zeros(n, dtype=int), u[:, 0] + 1j * u[:, 1]
    raise ValueError("sampling defined for compact models only")


def self_check(geom: ModelGeometry, n: int = 100, seed: int = 0) -> dict:
    """Cocycle, positivity and volume diagnostics as a JSON-ready dict."""
    rng = np.random.default_rng(seed)
    out = {"model": geom.name, "hash": geom.model_hash}
    if geom.name == "sphere":
        z = 0.5 + 1.5 * rng.random(n)
        z = z * np.exp(2j * np.pi * rng.random(n))
        w, g = geom.change_chart(z, 0, 1)
        lhs = np.exp(-2 * geom.weight(0, z))
        rhs = np.abs(g) ** 2 * np.exp(-2 * geom.weight(1, w))
        back, _ = geom.change_chart(w, 1, 0)
        out["cocycle_error"] = float(np.max(np.abs(lhs - rhs)))
        out["transition_roundtrip_error"] = float(np.max(np.abs(back - z)))
    elif geom.name == "torus":
        z = rng.random(n) + 1j * rng.random(n)
        errs = []
        for lam in (1, 1j, 1 + 1j, -2 + 1j):
            z2, j = geom.translate(z, lam)
            lhs = np.exp(-2 * geom.weight(0, z))
            rhs = np.abs(j) ** 2 * np.exp(-2 * geom.weight(0, z2))
            errs.append(np.max(np.abs(lhs - rhs) / lhs))
        out["cocycle_error"] = float(max(errs))
    rule = geom.quadrature(8)
    mets = np.concatenate([geom.metric(c, rule.select(c)[0]) for c in rule.charts()])
    out["theta_positive"] = bool(np.all(mets > 0))
    out["volume_quadrature"] = rule.volume(geom)
    out["volume_exact"] = geom.volume
    out["volume_error"] = abs(out["volume_quadrature"] - geom.volume)
    out["theta_convention"] = "Theta = R^L of the unperturbed model" if geom.exact or geom.name == "sphere" else "custom"
    return out
