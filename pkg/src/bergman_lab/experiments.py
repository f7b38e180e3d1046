"""Experiment catalog, configuration, frame cache and the deterministic sweep runner."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .asymptotics import (Region, bump_polynomial_sections, fit_expansion, gap_ratio, log_defect,
                          offdiagonal_decay)
from .errors import BergmanLabError
from .geometry import det_curvature_array, model_from_config, normal_coordinates, sample_points
from .hilbert import bergman_function, build_frame, frame_from_json, frame_to_json
from .kodaira import curvature_diagnostic, immersion_check, injectivity_scan
from .peaks import exterior_sets, measure_peaks, peak_limit, peak_section, summarize_peaks
from .singular import (SingularModel, big_bound_check, multiplier_frame, singular_expansion_check,
                       skoda_check)

log = logging.getLogger("bergman_lab")

__all__ = ["ExperimentConfig", "ExperimentReport", "FrameCache", "EXPERIMENTS", "list_experiments",
           "run", "ordered_map", "load_config", "apply_overrides"]

CACHE_ENV = "BERGLAB_CACHE"


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    experiment: str
    model: dict = field(default_factory=lambda: {"name": "sphere"})
    ks: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    output: str = "results"
    workers: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        entry = EXPERIMENTS[self.experiment]
        self.ks = [int(k) for k in (self.ks or entry.default_ks)]
        if any(b <= a for a, b in zip(self.ks, self.ks[1:])):
            raise ValueError("k-list must be strictly increasing")
        try:
            # YAML reads "1e-9" (no dot) as a string
            self.tolerances = {k: float(v) for k, v in {**entry.tolerances, **self.tolerances}.items()}
        except (TypeError, ValueError):
            raise ValueError(f"tolerances must be numbers: {self.tolerances}") from None
        if any(not (v > 0) for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive")
        self.params = {**entry.params, **self.params}
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    """``key.sub=value`` overrides; values are parsed as YAML scalars/lists."""
    import yaml
    cfg = json.loads(json.dumps(cfg))
    for item in overrides or []:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        node = cfg
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = yaml.safe_load(raw)
    return cfg


def load_config(path: str | os.PathLike) -> dict:
    import yaml
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError("config must be a mapping")
    return data


# ---------------------------------------------------------------------------
# frame cache

class FrameCache:
    """Write-once JSON frames keyed by ``(model hash, k, resolution)`` plus a manifest."""

    def __init__(self, root: str | os.PathLike | None = None):
        root = root or os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "bergman_lab"
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.root / "manifest.json"

    def _manifest(self) -> dict:
        if self.manifest_path.exists():
            try:
                return json.loads(self.manifest_path.read_text())
            except json.JSONDecodeError:
                log.warning("cache manifest unreadable; starting a new one")
        return {}

    def _key(self, geom, k, resolution):
        return f"{geom.model_hash}_k{k}_r{resolution if resolution is not None else 'auto'}"

    def get(self, geom, k: int, resolution=None, builder: Callable | None = None):
        key = self._key(geom, k, resolution)
        path = self.root / f"{key}.json"
        if path.exists():
            try:
                return frame_from_json(path.read_text(), geom)
            except (ValueError, KeyError, json.JSONDecodeError) as exc:
                log.warning("cache entry %s corrupt (%s); purging and rebuilding", key, exc)
                path.unlink(missing_ok=True)
        frame = (builder or (lambda: build_frame(geom, k, resolution)))()
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        tmp.write_text(frame_to_json(frame, resolution))
        os.replace(tmp, path)
        man = self._manifest()
        man[key] = {"model": geom.config, "k": int(k), "resolution": resolution}
        mtmp = self.manifest_path.with_suffix(f".{os.getpid()}.tmp")
        mtmp.write_text(json.dumps(man, sort_keys=True, indent=1))
        os.replace(mtmp, self.manifest_path)
        return frame

    def clean(self) -> int:
        n = len(list(self.root.glob("*.json")))
        shutil.rmtree(self.root, ignore_errors=True)
        self.root.mkdir(parents=True, exist_ok=True)
        return n


def _frame(model_cfg: dict, k: int, cache_dir):
    geom = model_from_config(model_cfg)
    if cache_dir is None:
        return build_frame(geom, k)
    return FrameCache(cache_dir).get(geom, k)


# ---------------------------------------------------------------------------
# deterministic parallel map

def ordered_map(fn: Callable, tasks: list, workers: int = 1) -> list:
    """Results in task order regardless of worker count or completion order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# report

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    rows: list                      # per-k measurements (CSV)
    fitted: dict
    assertions: dict                # name -> {"value", "tolerance", "passed"}
    curve: list = field(default_factory=list)   # (x, y) plot data
    wall_time: float = 0.0
    hashes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions.values())

    def csv_text(self) -> str:
        if not self.rows:
            return ""
        cols = list(self.rows[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in cols])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"experiment": self.experiment, "config": self.config, "fitted": _jsonable(self.fitted),
                "assertions": _jsonable(self.assertions), "passed": self.passed,
                "wall_time": self.wall_time, "hashes": self.hashes, "version": __version__}

    def write(self, outdir: str | os.PathLike) -> dict:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"csv": out / f"{self.experiment}.csv", "json": out / f"{self.experiment}.json",
                 "dat": out / f"{self.experiment}.dat"}
        paths["csv"].write_text(self.csv_text())
        paths["json"].write_text(json.dumps(self.summary(), indent=1, sort_keys=True))
        paths["dat"].write_text("".join(f"{_fmt(x)} {_fmt(y)}\n" for x, y in self.curve))
        return paths


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _check(value, tol, passed):
    return {"value": _jsonable(value), "tolerance": _jsonable(tol), "passed": bool(passed)}


def _complex_list(vals):
    return [_as_complex(v) for v in vals]


# ---------------------------------------------------------------------------
# tasks (top level so that worker processes can import them)

def _expansion_points(cfg):
    """``params.points``: a count of uniform samples, or explicit ``[chart, x, y]`` triples."""
    pts = cfg["params"]["points"]
    if isinstance(pts, int):
        return sample_points(model_from_config(cfg["model"]), pts, np.random.default_rng(cfg["seed"]))
    arr = np.asarray(pts, dtype=float).reshape(-1, 3)
    return arr[:, 0].astype(int), arr[:, 1] + 1j * arr[:, 2]


def _task_expansion(args):
    cfg, k, cache = args
    c, z = _expansion_points(cfg)
    P = bergman_function(_frame(cfg["model"], k, cache), c, z)
    return [{"k": k, "point": i, "chart": int(c[i]), "x": z[i].real, "y": z[i].imag, "P_k": P[i]}
            for i in range(len(z))]


def _run_expansion(cfg, cache):
    rows = [r for part in ordered_map(_task_expansion, [(cfg, k, cache) for k in cfg["ks"]], cfg["workers"])
            for r in part]
    geom = model_from_config(cfg["model"])
    npts = len(_expansion_points(cfg)[1])
    ks = cfg["ks"]
    vals = np.array([[r["P_k"] for r in rows if r["k"] == k] for k in ks])
    c = np.array([r["chart"] for r in rows[:npts]])
    z = np.array([complex(r["x"], r["y"]) for r in rows[:npts]])
    ref = np.empty(npts)
    for ci in np.unique(c):
        ref[c == ci] = np.abs(det_curvature_array(geom, int(ci), z[c == ci])) / (2 * np.pi)
    fit = fit_expansion(ks, vals, 1, ref)
    tol = cfg["tolerances"]["b0_relative"]
    dev = float(np.max(fit.relative_deviation))
    fitted = {"b0": fit.b0, "b1": fit.b1, "reference": ref, "max_relative_deviation": dev,
              "max_fit_residual": float(np.max(fit.residual))}
    asserts = {"b0_matches_curvature": _check(dev, tol, dev <= tol),
               "b0_positive": _check(float(np.min(fit.b0)), 0.0, bool(np.all(fit.b0 > 0)))}
    curve = [(k, float(np.mean(vals[i]) / k)) for i, k in enumerate(ks)]
    return rows, fitted, asserts, curve


def _phase_pairs(cfg):
    geom = model_from_config(cfg["model"])
    pairs = []
    for p in _complex_list(cfg["params"]["base_points"]):
        ch, pz = geom.convention(0, np.array([p]))
        nc = normal_coordinates(geom, complex(pz[0]), int(ch[0]))
        for d in cfg["params"]["distances"]:
            for j in range(cfg["params"]["directions"]):
                x = complex(nc.to_chart(d * np.exp(2j * np.pi * j / cfg["params"]["directions"])))
                pairs.append((int(ch[0]), x, complex(pz[0]), d))
    return pairs


def _task_phase(args):
    cfg, k, cache = args
    frame = _frame(cfg["model"], k, cache)
    out = []
    for i, (c, x, y, d) in enumerate(_phase_pairs(cfg)):
        out.append({"k": k, "pair": i, "distance": d, "defect_xy": log_defect(frame, c, x, y),
                    "defect_yx": log_defect(frame, c, y, x), "defect_xx": log_defect(frame, c, x, x)})
    return out


def _run_phase(cfg, cache):
    rows = [r for part in ordered_map(_task_phase, [(cfg, k, cache) for k in cfg["ks"]], cfg["workers"])
            for r in part]
    geom = model_from_config(cfg["model"])
    ks = np.array(cfg["ks"], dtype=float)
    A = np.stack([ks, np.ones_like(ks), 1 / ks], axis=1)
    pairs = _phase_pairs(cfg)
    slopes, swapped, diag, preds = [], [], [], []
    for i, (c, x, y, d) in enumerate(pairs):
        sel = [r for r in rows if r["pair"] == i]
        for key, acc in (("defect_xy", slopes), ("defect_yx", swapped), ("defect_xx", diag)):
            acc.append(float(np.linalg.lstsq(A, np.array([r[key] for r in sel]), rcond=None)[0][0]))
        nc = normal_coordinates(geom, y, c)
        preds.append(nc.lam * abs(complex(nc.from_chart(x))) ** 2)
    slopes, swapped, diag, preds = map(np.array, (slopes, swapped, diag, preds))
    rel = np.abs(slopes - preds) / preds
    tol = cfg["tolerances"]["taylor_relative"]
    fitted = {"im_psi": slopes, "prediction": preds, "relative_error": rel, "swap_difference": np.abs(slopes - swapped)}
    asserts = {"taylor_order2": _check(float(rel.max()), tol, rel.max() <= tol),
               "nonnegative": _check(float(slopes.min()), 0.0, slopes.min() >= 0),
               "diagonal_zero": _check(float(np.abs(diag).max()), cfg["tolerances"]["diagonal"],
                                       np.abs(diag).max() <= cfg["tolerances"]["diagonal"]),
               "swap_symmetric": _check(float(np.max(np.abs(slopes - swapped) / preds)), tol,
                                        np.max(np.abs(slopes - swapped) / preds) <= tol)}
    curve = [(p[3], s) for p, s in zip(pairs, slopes)]
    return rows, fitted, asserts, curve


def _as_complex(v):
    return complex(*v) if isinstance(v, (list, tuple)) else complex(v)


def _decay_regions(cfg, sep):
    """Two discs of radius ``r`` whose closest points are ``sep`` apart along ``direction``."""
    r = cfg["params"]["radius"]
    c = _as_complex(cfg["params"]["center"])
    u = _as_complex(cfg["params"].get("direction", 1.0))
    u /= abs(u)
    half = (sep / 2 + r) * u
    return Region(0, c - half, r), Region(0, c + half, r)


def _run_decay(cfg, cache):
    frames = {k: _frame(cfg["model"], k, cache) for k in cfg["ks"]}
    rows, fitted, rates = [], {}, []
    main = cfg["params"]["separation"]
    seps = sorted(set(cfg["params"]["separations"]) | {main})
    reports = {}
    for sep in seps:
        rx, ry = _decay_regions(cfg, sep)
        rep = offdiagonal_decay(frames, rx, ry, cfg["params"]["samples"], cfg["seed"],
                                cfg["tolerances"]["required_drop"])
        reports[sep] = rep
        rates.append(rep.rate)
        for k, s in zip(rep.ks, rep.sup_values):
            rows.append({"separation": sep, "k": int(k), "sup_kernel": float(s)})
        fitted[f"rate@{sep}"] = rep.rate
        fitted[f"drop@{sep}"] = rep.drop
        fitted[f"predicted_rate@{sep}"] = rep.predicted_rate
    m = reports[main]
    asserts = {"positive_rate": _check(m.rate, 0.0, m.rate > 0),
               "drop_six_orders": _check(m.drop, m.required_drop, m.drop <= m.required_drop),
               "rate_monotone_in_separation": _check(rates, None, bool(np.all(np.diff(rates) > 0)))}
    curve = [(r["k"], r["sup_kernel"]) for r in rows if r["separation"] == main]
    return rows, fitted, asserts, curve


def _gap_frames(cfg, k, cache):
    if cfg["params"].get("singular"):
        s = cfg["params"]["singular"]
        return multiplier_frame(SingularModel(s.get("m", 1), s["tau"]), k).frame
    return _frame(cfg["model"], k, cache)


def _gap_region(cfg):
    r = cfg["params"]["region"]
    return Region(0, complex(r.get("center", 0.0)), r["r_out"], r.get("r_in", 0.0))


def _task_gap(args):
    cfg, k, cache = args
    frame = _gap_frames(cfg, k, cache)
    region = _gap_region(cfg)
    secs = bump_polynomial_sections(region, cfg["params"]["count"], cfg["seed"], cfg["params"]["degree"])
    out = []
    for j, s in enumerate(secs):
        r, d, u = gap_ratio(frame, region, s)
        ratio = r / d if d >= 1e-12 * u else np.nan     # numerically holomorphic: skipped
        out.append({"k": k, "section": j, "residual": r, "dbar": d, "norm": u, "ratio": ratio})
    return out


def _run_gap(cfg, cache):
    rows = [r for part in ordered_map(_task_gap, [(cfg, k, cache) for k in cfg["ks"]], cfg["workers"])
            for r in part]
    ks = np.array(cfg["ks"], dtype=float)
    rho = np.array([np.nanmax([r["ratio"] for r in rows if r["k"] == k]) for k in cfg["ks"]])
    A = np.stack([np.ones_like(ks), np.log(ks)], axis=1)
    coef = np.linalg.lstsq(A, np.log(rho), rcond=None)[0]
    res = float(np.sqrt(np.mean((A @ coef - np.log(rho)) ** 2)))
    C, N = float(np.exp(coef[0])), float(coef[1])
    tol = cfg["tolerances"]["fit_residual"]
    fitted = {"rho": rho, "C_hat": C, "N_hat": N, "fit_residual": res}
    asserts = {"finite_constants": _check([C, N], None, bool(np.isfinite(C) and np.isfinite(N) and C > 0)),
               "loglog_residual": _check(res, tol, res < tol)}
    return rows, fitted, asserts, list(zip(cfg["ks"], rho.tolist()))


def _task_peaks(args):
    cfg, k, cache = args
    geom = model_from_config(cfg["model"])
    pts = _complex_list(cfg["params"]["base_points"])
    ext = exterior_sets(geom, pts, 0, cfg["params"]["exterior_radius"], cfg["params"]["exterior_points"], cfg["seed"])
    return measure_peaks(_frame(cfg["model"], k, cache), pts, ext)


def _run_peaks(cfg, cache):
    rows = [r for part in ordered_map(_task_peaks, [(cfg, k, cache) for k in cfg["ks"]], cfg["workers"])
            for r in part]
    pts = _complex_list(cfg["params"]["base_points"])
    rep = summarize_peaks(rows, pts, cfg["tolerances"]["constant_floor"])
    geom = model_from_config(cfg["model"])
    klim = cfg["params"]["limit_k"]
    f_hi, f_lo = _frame(cfg["model"], klim, cache), _frame(cfg["model"], klim // 2, cache)
    lim_rows = []
    for p in pts:
        ch, pz = geom.convention(0, np.array([p]))
        lim = peak_limit(geom, complex(pz[0]), int(ch[0]))
        hi = peak_section(f_hi, p).value.real
        lo = peak_section(f_lo, p).value.real
        rich = 2 * hi - lo
        lim_rows.append({"richardson": rich, "limit": lim["limit"], "plateau_formula": lim["plateau_formula"],
                         "relative": abs(rich - lim["limit"]) / lim["limit"],
                         "relative_plateau": abs(rich - lim["plateau_formula"]) / lim["plateau_formula"]})
    tol = cfg["tolerances"]["limit_relative"]
    worst = max(r["relative"] for r in lim_rows)
    conc = min(r["concentration"] for r in rows if r["k"] >= 32) if any(r["k"] >= 32 for r in rows) else np.nan
    fitted = {"c0": rep.c0, "c1": rep.c1, "k0_hat": rep.k0_hat, "exterior_decay_exponent": rep.exterior_decay_exponent,
              "limit": lim_rows, "skipped": rep.skipped, "min_concentration_k32": conc}
    asserts = {f"family_{n}": _check(None, cfg["tolerances"]["constant_floor"], ok) for n, ok in rep.families.items()}
    asserts["k0_hat"] = _check(rep.k0_hat, cfg["tolerances"]["k0_max"],
                               rep.k0_hat is not None and rep.k0_hat <= cfg["tolerances"]["k0_max"])
    asserts["exterior_faster_than_1_over_k"] = _check(rep.exterior_decay_exponent, -1.0, rep.exterior_decay_exponent < -1)
    asserts["limit_richardson"] = _check(worst, tol, worst <= tol)
    asserts["concentration"] = _check(conc, 0.5, conc > 0.5)
    curve = [(r["k"], r["u_p_sq"]) for r in rows]
    return rows, fitted, asserts, curve


def _task_immersion(args):
    cfg, k, cache = args
    geom = model_from_config(cfg["model"])
    c, z = sample_points(geom, cfg["params"]["points"], np.random.default_rng(cfg["seed"]))
    frame = _frame(cfg["model"], k, cache)
    out = []
    for i, (ci, zi) in enumerate(zip(c, z)):
        cert = immersion_check(frame, int(ci), zi)
        out.append({"k": k, "point": i, "sigma_min": cert.sigma_min, "full_rank": cert.full_rank})
    return out


def _run_immersion(cfg, cache):
    rows = [r for part in ordered_map(_task_immersion, [(cfg, k, cache) for k in cfg["ks"]], cfg["workers"])
            for r in part]
    kmin = cfg["params"]["k_min"]
    per_k = {k: [r for r in rows if r["k"] == k] for k in cfg["ks"]}
    smin = {k: min(r["sigma_min"] for r in v) for k, v in per_k.items()}
    full = {k: all(r["full_rank"] for r in v) for k, v in per_k.items()}
    asserts = {f"full_rank_k{k}": _check(smin[k], None, full[k]) for k in cfg["ks"] if k >= kmin}
    for k in cfg["params"].get("expect_failure", []):
        if k in full:
            asserts[f"detects_failure_k{k}"] = _check(smin[k], None, not full[k])
    fitted = {"sigma_min": smin, "sigma_min_over_sqrt_k": {k: smin[k] / np.sqrt(k) for k in smin}}
    return rows, fitted, asserts, [(k, smin[k]) for k in cfg["ks"]]


def _task_injectivity(args):
    cfg, k, cache = args
    rep = injectivity_scan(_frame(cfg["model"], k, cache), cfg["params"]["pairs"], cfg["seed"])
    return {"k": k, "pairs": rep.n_pairs, "violations": len(rep.violations), "min_ratio": rep.min_ratio,
            "min_image_distance": float(np.min(rep.image)), "curve": list(zip(rep.source.tolist(), rep.image.tolist()))}


def _run_injectivity(cfg, cache):
    parts = ordered_map(_task_injectivity, [(cfg, k, cache) for k in cfg["ks"]], cfg["workers"])
    rows = [{k: v for k, v in p.items() if k != "curve"} for p in parts]
    kmin = cfg["params"]["k_min"]
    asserts = {f"injective_k{p['k']}": _check(p["violations"], 0, p["violations"] == 0)
               for p in parts if p["k"] >= kmin}
    k_emb = None
    for p in reversed(parts):
        if p["violations"]:
            break
        k_emb = p["k"]
    fitted = {"k_emb": k_emb}
    c2 = cfg["params"].get("shrinking_ks")
    if c2:
        from .asymptotics import extract_phase
        frames = {k: _frame(cfg["model"], k, cache) for k in c2}
        p0 = complex(cfg["params"].get("shrinking_point", 0.0))
        ph = extract_phase(frames, p0 + 0.1, p0)
        rep = curvature_diagnostic(frames, p0, c_hat=ph.im_psi / 0.01)
        fitted["shrinking_scaled_f2"] = rep.scaled_f2
        fitted["shrinking_c2_hat"] = rep.c2_hat
        fitted["shrinking_predicted"] = rep.predicted
        fitted["shrinking_first_derivative"] = rep.first_derivative
        fitted["shrinking_hessian"] = rep.hessian_term
        for n, ok in rep.passed.items():
            asserts[f"shrinking_{n}"] = _check(None, None, ok)
    last = parts[-1]
    return rows, fitted, asserts, last["curve"]


def _singular_model(cfg):
    s = cfg["params"]
    return SingularModel(s.get("m", 1), s["tau"], _as_complex(s.get("a", 0.0)))


def _task_skoda(args):
    cfg, k, _ = args
    rep = skoda_check(_singular_model(cfg), k, cfg["params"]["points"], cfg["seed"])
    return {"k": k, "m_k": len(rep.multiplier_exponents), "threshold": k * rep.tau - 1,
            "min_exponent": int(rep.multiplier_exponents.min()) if len(rep.multiplier_exponents) else -1,
            "thresholds_match": rep.thresholds_match, "gram_error": rep.gram_error,
            "discrepancy": rep.max_relative_discrepancy, "truncation_flag": rep.truncation_flag}


def _run_skoda(cfg, cache):
    rows = ordered_map(_task_skoda, [(cfg, k, cache) for k in cfg["ks"]], cfg["workers"])
    tol = cfg["tolerances"]["discrepancy"]
    worst = max(r["discrepancy"] for r in rows)
    asserts = {"skoda_identity": _check(worst, tol, worst < tol),
               "thresholds_closed_form": _check(None, None, all(r["thresholds_match"] for r in rows)),
               "window_not_truncated": _check(None, None, not any(r["truncation_flag"] for r in rows))}
    fitted = {"admissibility": [(r["k"], r["threshold"], r["m_k"]) for r in rows]}
    return rows, fitted, asserts, [(r["k"], r["m_k"]) for r in rows]


def _run_big(cfg, cache):
    model = _singular_model(cfg)
    res = big_bound_check(model, cfg["ks"])
    exp = singular_expansion_check(model, cfg["ks"], n_points=cfg["params"]["points"], seed=cfg["seed"],
                                   tol=cfg["tolerances"]["b0_relative"])
    rows = [{k: v for k, v in r.items()} for r in res["rows"]]
    lo, hi = cfg["tolerances"]["exponent_low"], cfg["tolerances"]["exponent_high"]
    fitted = {"exponent": res["exponent"], "loglog_slope": res["loglog_slope"], "trace_error": res["trace_error"],
              "expansion_max_relative_deviation": exp["max_relative_deviation"]}
    asserts = {"dimension_bound": _check(None, None, res["inequality_holds"]),
               "growth_exponent": _check(res["exponent"], [lo, hi], lo <= res["exponent"] <= hi),
               "trace_identity": _check(res["trace_error"], cfg["tolerances"]["trace"],
                                        res["trace_error"] < cfg["tolerances"]["trace"]),
               "expansion_b0": _check(exp["max_relative_deviation"], cfg["tolerances"]["b0_relative"], exp["passed"])}
    return rows, fitted, asserts, [(r["k"], r["integral_K"]) for r in rows]


# ---------------------------------------------------------------------------
# catalog

@dataclass(frozen=True)
class ExperimentEntry:
    name: str
    runner: Callable
    description: str
    default_ks: tuple
    tolerances: dict
    params: dict


EXPERIMENTS = {s.name: s for s in [
    ExperimentEntry("expansion", _run_expansion, "fit P_k(x)/k against {1, 1/k, 1/k^2}; b0 vs curvature",
                   tuple(range(8, 49, 8)), {"b0_relative": 0.02}, {"points": 20}),
    ExperimentEntry("phase", _run_phase, "Im Psi from k-slopes of normalized off-diagonal magnitudes",
                   (16, 24, 32, 48, 64), {"taylor_relative": 0.15, "diagonal": 1e-10},
                   {"base_points": [0.0, 0.3, [1.0, 1.0]], "distances": [0.05, 0.1, 0.2], "directions": 4}),
    ExperimentEntry("decay", _run_decay, "sup of the kernel over disjoint supports versus k",
                   tuple(range(8, 41, 8)), {"required_drop": 1e-6},
                   {"separation": 0.5, "separations": [0.25, 0.5, 1.0], "radius": 0.1, "center": 0.0,
                    "samples": 64}),
    ExperimentEntry("gap", _run_gap, "worst ||(I-P_k)u|| / ||dbar u|| over seeded test sections",
                   (8, 12, 16, 24, 32), {"fit_residual": 0.2},
                   {"region": {"r_out": 0.8}, "count": 32, "degree": 3}),
    ExperimentEntry("peaks", _run_peaks, "peak and directional peak section inequalities",
                   (16, 24, 32, 48), {"constant_floor": 1e-3, "limit_relative": 0.10, "k0_max": 16},
                   {"base_points": [0.0, 0.3, [1.0, 1.0]], "exterior_radius": 0.5, "exterior_points": 100,
                    "limit_k": 64}),
    ExperimentEntry("immersion", _run_immersion, "rank of the Kodaira map differential at sample points",
                   (1, 2, 4, 16), {}, {"points": 200, "k_min": 2, "expect_failure": []}),
    ExperimentEntry("injectivity", _run_injectivity, "stratified pair scan and shrinking-scale diagnostic",
                   (1, 2, 4, 16), {}, {"pairs": 1000, "k_min": 2, "shrinking_ks": [16, 24, 32, 48, 64],
                                       "shrinking_point": 0.0}),
    ExperimentEntry("singular-skoda", _run_skoda, "multiplier kernel versus kernel of L^2 sections off the pole",
                   tuple(range(1, 17)), {"discrepancy": 1e-9}, {"tau": 0.5, "m": 1, "a": 0.0, "points": 50}),
    ExperimentEntry("singular-big", _run_big, "dimension bound and growth of the integrated multiplier kernel",
                   tuple(range(8, 49, 8)), {"exponent_low": 0.9, "exponent_high": 1.1, "trace": 1e-3,
                                            "b0_relative": 0.03},
                   {"tau": 0.5, "m": 1, "a": 0.0, "points": 20}),
]}


def list_experiments() -> list[dict]:
    return [{"name": s.name, "description": s.description, "default_ks": list(s.default_ks)}
            for s in EXPERIMENTS.values()]


def run(config: ExperimentConfig | dict, cache_dir=None, write: bool = True) -> ExperimentReport:
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    d = cfg.to_dict()
    t0 = time.perf_counter()
    rows, fitted, asserts, curve = EXPERIMENTS[cfg.experiment].runner(d, cache_dir)
    wall = time.perf_counter() - t0
    hashes = {}
    if not cfg.experiment.startswith("singular"):
        hashes["model"] = model_from_config(cfg.model).model_hash
    rep = ExperimentReport(cfg.experiment, d, rows, fitted, asserts, curve, wall, hashes)
    if write:
        rep.write(cfg.output)
    return rep
