"""L^2 spaces of holomorphic sections of L^k: Gram matrices, orthonormal frames,
Bergman kernel and projection, the dbar operator and its (0,1)-norm.

Sections are handled through *weighted representatives*: on a chart with
trivialization ``s`` and weight ``phi`` a section ``f = s^k e^{k phi} f~``, so
``|f|_h = |f~|``.  Evaluators always return ``f~`` with the factor ``e^{-k phi}``
folded in on the log scale; ``e^{+k phi}`` is never formed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import DomainError, IllConditionedError, RankError, ResolutionError
from .geometry import ModelGeometry, QuadratureRule

__all__ = [
    "SphereMonomialBasis", "ThetaBasis", "make_basis", "GramMatrix", "BergmanFrame",
    "KernelValue", "SectionData", "ProjectionResult", "assemble_gram", "orthonormalize",
    "build_frame", "bergman_kernel", "bergman_function", "kernel_matrix",
    "localized_kernel", "bergman_project", "dbar_apply", "dbar_norm",
    "frame_to_json", "frame_from_json", "section_data_on_rule",
]

CONDITION_CAP = 1e12


# ---------------------------------------------------------------------------
# spanning sets

def _fs_log_norm2(k_eff, v, scale):
    """log of ``2 pi scale * v! (N - v)! / (N + 1)!`` with ``N = k_eff``."""
    return (np.log(2 * np.pi * scale) + gammaln(v + 1) + gammaln(k_eff - v + 1) - gammaln(k_eff + 2))


class SphereMonomialBasis:
    """Monomials ``c_v z^v`` in chart 0, i.e. ``c_v w^{N - v}`` in chart 1, ``N = k m``.

    By default ``c_v`` normalizes the monomials for the Fubini-Study model, so
    the Gram matrix is the identity there and close to it for small perturbations.
    """

    def __init__(self, geom: ModelGeometry, k: int, exponents=None, log_scale=None,
                 normalized: bool = True, gram_diagonal=None):
        self.geom = geom
        self.k = int(k)
        self.top = self.k * geom.degree
        self.exponents = (np.arange(self.top + 1) if exponents is None
                          else np.asarray(exponents, dtype=int))
        if log_scale is not None:
            self.log_scale = np.asarray(log_scale, dtype=float)
        elif normalized:
            scale = geom.config.get("metric_scale", geom.degree)
            self.log_scale = -0.5 * _fs_log_norm2(self.top, self.exponents, scale)
        else:
            self.log_scale = np.zeros(len(self.exponents))
        self.normalized = normalized
        self._gram_diagonal = gram_diagonal

    @property
    def dimension(self):
        return len(self.exponents)

    def closed_form_gram(self):
        if self._gram_diagonal is not None:
            return np.diag(np.asarray(self._gram_diagonal, dtype=float)).astype(complex)
        if not self.geom.exact:
            return None
        scale = self.geom.config.get("metric_scale", self.geom.degree)
        logd = _fs_log_norm2(self.top, self.exponents, scale) + 2 * self.log_scale
        return np.diag(np.exp(logd)).astype(complex)

    def _powers(self, chart):
        return self.exponents if chart == 0 else self.top - self.exponents

    def evaluate(self, chart: int, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        p = self._powers(chart)
        phi = self.geom.weight(chart, z)
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            logr = np.log(r)
            logmag = self.log_scale[None, :] + p[None, :] * logr[:, None] - self.k * phi[:, None]
        zero = r == 0
        if np.any(zero):
            sub = logmag[zero]
            sub[:, p == 0] = (self.log_scale[p == 0][None, :] - self.k * phi[zero][:, None])
            sub[:, p != 0] = -np.inf
            logmag[zero] = sub
        if np.any(np.isnan(logmag)) or np.any(logmag == np.inf):
            raise DomainError("section representative undefined at a requested point (pole?)")
        return np.exp(logmag + 1j * p[None, :] * np.angle(z)[:, None])

    def holomorphic(self, chart: int, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        p = self._powers(chart)
        return np.exp(self.log_scale)[None, :] * z[:, None] ** p[None, :]

    def describe(self):
        return {"type": "sphere_monomial", "k": self.k, "exponents": self.exponents.tolist(),
                "normalized": self.normalized}


class ThetaBasis:
    """Theta functions of level ``k`` on the square torus, ``d_k = k``.

    In Landau gauge ``F_j(z) = sum_m exp(-pi n^2/k + 2 pi i n z)``, ``n = j + k m``;
    the symmetric-gauge weighted representative is
    ``exp(i pi k x y) sum_m exp(-pi (n + k y)^2 / k + 2 pi i n x)``.
    """

    def __init__(self, geom: ModelGeometry, k: int):
        if geom.name != "torus":
            raise ValueError("theta basis lives on the torus")
        self.geom = geom
        self.k = int(k)
        self.window = int(np.ceil(4.0 / np.sqrt(self.k))) + 1
        # |F_j|^2 e^{-2k phi} integrates to 1/sqrt(2k) against dA
        self.log_scale = -0.5 * (np.log(2 * geom.metric(0, 0.0).item()) - 0.5 * np.log(2 * self.k))

    @property
    def dimension(self):
        return self.k

    @property
    def exponents(self):
        return np.arange(self.k)

    def closed_form_gram(self):
        return np.eye(self.k, dtype=complex) if self.geom.exact else None

    def evaluate(self, chart: int, z) -> np.ndarray:
        if chart != 0:
            raise DomainError("torus has one chart")
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        k = self.k
        x, y = z.real, z.imag
        j = np.arange(k)
        out = np.empty((len(z), k), dtype=complex)
        offs = np.arange(-self.window, self.window + 1)
        for s in range(0, len(z), 2048):
            xs, ys = x[s:s + 2048], y[s:s + 2048]
            mc = np.rint(-ys[:, None] - j[None, :] / k)
            n = j[None, :, None] + k * (mc[:, :, None] + offs[None, None, :])
            expo = -np.pi * (n + k * ys[:, None, None]) ** 2 / k + 2j * np.pi * n * xs[:, None, None]
            out[s:s + 2048] = np.exp(expo).sum(axis=2) * np.exp(1j * np.pi * k * xs * ys)[:, None]
        return out * np.exp(self.log_scale)

    def holomorphic(self, chart, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return self.evaluate(chart, z) * np.exp(self.k * self.geom.weight(0, z))[:, None]

    def describe(self):
        return {"type": "theta", "k": self.k}


def make_basis(geom: ModelGeometry, k: int):
    if geom.name == "sphere":
        return SphereMonomialBasis(geom, k)
    if geom.name == "torus":
        return ThetaBasis(geom, k)
    raise ValueError(f"no section basis for model {geom.name}")


# ---------------------------------------------------------------------------
# Gram matrices and frames

@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    rule_id: str
    condition: float
    method: str


def _gram_by_quadrature(basis, geom: ModelGeometry, rule: QuadratureRule) -> np.ndarray:
    d = basis.dimension
    G = np.zeros((d, d), dtype=complex)
    for c in rule.charts():
        z, w = rule.select(c)
        wd = w * geom.density(c, z)
        for s in range(0, len(z), 8192):
            V = basis.evaluate(c, z[s:s + 8192])
            G += V.T @ (np.conj(V) * wd[s:s + 8192, None])
    return G


def assemble_gram(basis, geom: ModelGeometry, rule: QuadratureRule | None = None,
                  method: str = "auto", cap: float = CONDITION_CAP) -> GramMatrix:
    """``G_ij = (f_i | f_j)``.  ``method``: ``auto`` (closed form when known),
    ``closed`` or ``quadrature``."""
    closed = basis.closed_form_gram() if method in ("auto", "closed") else None
    if method == "closed" and closed is None:
        raise ValueError("no closed-form Gram matrix for this basis")
    if closed is not None:
        G, rule_id, used = closed, "closed-form", "closed"
    else:
        rule = rule if rule is not None else geom.quadrature(basis.k)
        G, rule_id, used = _gram_by_quadrature(basis, geom, rule), rule.rule_id, "quadrature"
    G = 0.5 * (G + G.conj().T)
    cond = float(np.linalg.cond(G))
    if not np.isfinite(cond) or cond > cap:
        raise IllConditionedError(
            f"Gram condition number {cond:.3e} exceeds cap {cap:.1e}; "
            "use a rescaled spanning set or the closed-form Gram path")
    return GramMatrix(G, rule_id, cond, used)


def orthonormalize(G, rank_tol: float = 1e-13) -> np.ndarray:
    """Lower-triangular ``C`` with positive diagonal such that ``C G C* = I``."""
    G = np.asarray(getattr(G, "entries", G), dtype=complex)
    evals, evecs = np.linalg.eigh(G)
    bad = evals <= rank_tol * max(evals.max(), 0.0)
    if np.any(bad) or evals.max() <= 0:
        raise RankError(f"Gram matrix numerically rank deficient ({int(bad.sum())} directions)",
                        directions=evecs[:, bad], eigenvalues=evals[bad])
    L = np.linalg.cholesky(G)
    return solve_triangular(L, np.eye(len(G), dtype=complex), lower=True)


@dataclass(frozen=True)
class BergmanFrame:
    """Orthonormal frame ``f_i = sum_j C_ij e_j`` over a spanning set."""

    basis: object
    coefficients: np.ndarray
    k: int
    geometry: ModelGeometry
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dimension(self) -> int:
        return self.coefficients.shape[0]

    def evaluate(self, chart: int, z) -> np.ndarray:
        """Weighted representatives ``f~_i(z)``, shape ``(npts, d)``."""
        return self.basis.evaluate(chart, z) @ self.coefficients.T

    def holomorphic(self, chart: int, z) -> np.ndarray:
        return self.basis.holomorphic(chart, z) @ self.coefficients.T


def build_frame(geom: ModelGeometry, k: int, resolution: int | None = None, method: str = "auto",
                basis=None, crosscheck: bool = False) -> BergmanFrame:
    basis = basis if basis is not None else make_basis(geom, k)
    rule = None
    if method != "closed" and (basis.closed_form_gram() is None or method == "quadrature" or crosscheck):
        rule = geom.quadrature(k, resolution)
    gram = assemble_gram(basis, geom, rule, method=method)
    meta = {"gram_method": gram.method, "rule": gram.rule_id, "condition": gram.condition,
            "resolution": None if rule is None else rule.resolution}
    if crosscheck and gram.method == "closed":
        Gq = _gram_by_quadrature(basis, geom, rule)
        meta["crosscheck_error"] = float(np.max(np.abs(Gq - gram.entries)))
    C = orthonormalize(gram)
    return BergmanFrame(basis, C, int(k), geom, meta)


# ---------------------------------------------------------------------------
# kernels

@dataclass(frozen=True)
class KernelValue:
    value: complex
    chart_x: int
    chart_y: int
    k: int


def kernel_matrix(frame: BergmanFrame, cx: int, zx, cy: int, zy) -> np.ndarray:
    """``P_{k,s,s1}(x_a, y_b) = sum_j f~_j(x_a) conj(f^_j(y_b))``."""
    Fx = frame.evaluate(cx, zx)
    Fy = frame.evaluate(cy, zy)
    return Fx @ Fy.conj().T


def bergman_kernel(frame: BergmanFrame, x, y) -> KernelValue:
    (cx, zx), (cy, zy) = x, y
    val = kernel_matrix(frame, cx, [zx], cy, [zy])[0, 0]
    return KernelValue(complex(val), int(cx), int(cy), frame.k)


def bergman_function(frame: BergmanFrame, chart, z) -> np.ndarray:
    """``P_k(x) = sum_j |f_j(x)|_h^2``; ``chart`` may be scalar or per-point."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    charts = np.broadcast_to(np.asarray(chart, dtype=int), z.shape)
    out = np.empty(z.shape)
    for c in np.unique(charts):
        m = charts == c
        F = frame.evaluate(int(c), z[m])
        out[m] = np.sum(F.real ** 2 + F.imag ** 2, axis=1)
    return out


def localized_kernel(frame: BergmanFrame, s_chart: int, s1_chart: int) -> Callable:
    """Evaluator ``(x, y) -> P_{k,s,s1}(x, y)`` for chart coordinates ``x``, ``y``."""
    def evaluator(x, y):
        return kernel_matrix(frame, s_chart, np.atleast_1d(x), s1_chart, np.atleast_1d(y))
    return evaluator


# ---------------------------------------------------------------------------
# projection

@dataclass(frozen=True)
class SectionData:
    """A chart-supported smooth section sampled on a quadrature.

    ``values`` are weighted representatives at ``points`` of chart ``chart``;
    ``measure`` are the weights of ``dv`` (coordinate weights times density).
    """

    chart: int
    points: np.ndarray
    measure: np.ndarray
    values: np.ndarray

    def scaled(self, c):
        return SectionData(self.chart, self.points, self.measure, c * self.values)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.measure * np.abs(self.values) ** 2)))


@dataclass(frozen=True)
class ProjectionResult:
    coefficients: np.ndarray   # (data | f_j)
    residual_orthogonality: float
    residual_norm: float
    data_norm: float


def section_data_on_rule(geom: ModelGeometry, k: int, chart: int, func: Callable,
                         rule: QuadratureRule, weighted: bool = False) -> SectionData:
    """Sample ``func`` on the chart-``chart`` nodes of ``rule``.

    ``func`` returns the holomorphic-frame representative ``G`` (``u = s^k G``)
    unless ``weighted`` is set, in which case it returns ``u~`` directly.
    """
    z, w = rule.select(chart)
    vals = np.asarray(func(z), dtype=complex)
    if not weighted:
        vals = vals * np.exp(-k * geom.weight(chart, z))
    return SectionData(chart, z, w * geom.density(chart, z), vals)


def bergman_project(frame: BergmanFrame, data: SectionData, refined: SectionData | None = None,
                    refine_tol: float = 1e-6) -> ProjectionResult:
    F = frame.evaluate(data.chart, data.points)
    coef = (data.values * data.measure) @ F.conj()
    if refined is not None:
        F2 = frame.evaluate(refined.chart, refined.points)
        coef2 = (refined.values * refined.measure) @ F2.conj()
        gap = np.max(np.abs(coef2 - coef)) / max(np.max(np.abs(coef2)), 1e-300)
        if gap > refine_tol:
            raise ResolutionError(f"projection changes by {gap:.2e} under refinement")
        coef = coef2
        data, F = refined, F2
    resid = data.values - F @ coef
    orth = (resid * data.measure) @ F.conj()
    return ProjectionResult(coef, float(np.max(np.abs(orth), initial=0.0)),
                            float(np.sqrt(np.sum(data.measure * np.abs(resid) ** 2))), data.norm())


# ---------------------------------------------------------------------------
# dbar

def dbar_apply(geom: ModelGeometry, k: int, func: Callable, z, step: float = 1e-5,
               analytic: Callable | None = None) -> np.ndarray:
    """``dG/dzbar`` for ``u = s^k G`` (the trivialization is holomorphic)."""
    z = np.asarray(z, dtype=complex)
    if analytic is not None:
        return np.asarray(analytic(z), dtype=complex)
    gx = (func(z + step) - func(z - step)) / (2 * step)
    gy = (func(z + 1j * step) - func(z - 1j * step)) / (2 * step)
    return 0.5 * (gx + 1j * gy)


def dbar_norm(geom: ModelGeometry, k: int, chart: int, z, coord_weights, form) -> float:
    """``||dbar u||`` with ``|dzbar|^2 = 1/h`` and the weight ``e^{-2 k phi}``."""
    z = np.asarray(z, dtype=complex)
    dens = geom.density(chart, z) / geom.metric(chart, z)
    logw = -2 * k * geom.weight(chart, z)
    val = np.sum(coord_weights * dens * np.abs(form) ** 2 * np.exp(logw))
    return float(np.sqrt(val))


# ---------------------------------------------------------------------------
# portable serialization

def _fmt(values) -> str:
    return "[" + ",".join(f"{v:.16e}" for v in np.asarray(values, dtype=float).ravel()) + "]"


def frame_to_json(frame: BergmanFrame, resolution=None) -> str:
    C = frame.coefficients
    head = {"model_hash": frame.geometry.model_hash, "model": frame.geometry.config, "k": frame.k,
            "resolution": resolution, "basis": frame.basis.describe(), "shape": list(C.shape),
            "meta": {k: v for k, v in frame.meta.items() if isinstance(v, (int, float, str, type(None)))}}
    body = json.dumps(head, sort_keys=True)
    return (body[:-1] + ',"coefficients_real":' + _fmt(C.real)
            + ',"coefficients_imag":' + _fmt(C.imag) + "}")


def frame_from_json(text: str, geom: ModelGeometry, basis=None) -> BergmanFrame:
    blob = json.loads(text)
    if blob["model_hash"] != geom.model_hash:
        raise ValueError("frame file belongs to a different model")
    shape = tuple(blob["shape"])
    C = (np.array(blob["coefficients_real"]) + 1j * np.array(blob["coefficients_imag"])).reshape(shape)
    basis = basis if basis is not None else make_basis(geom, blob["k"])
    return BergmanFrame(basis, C, blob["k"], geom, dict(blob.get("meta", {})))
