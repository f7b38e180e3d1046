"""Acceptance suite: one function per criterion, aggregated by ``verify_all``.

Each criterion returns a ``CriterionResult``; tolerances are module constants so
they can be audited in one place.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import beta as beta_fn

from .experiments import ExperimentReport, run
from .geometry import sample_points, sphere_model
from .hilbert import SphereMonomialBasis, _gram_by_quadrature, bergman_function, build_frame

log = logging.getLogger("bergman_lab")

__all__ = ["CriterionResult", "SuiteReport", "CRITERIA", "verify_all", "PROFILES"]

# tolerances
B0_REL = 0.02
FS_FLAT = 1e-8
GRAM_BETA = 1e-12
PHASE_REL = 0.15
DIAGONAL = 1e-10
DECAY_DROP = 1e-6
GAP_RESIDUAL = 0.2
PEAK_LIMIT_REL = 0.10
SKODA = 1e-9
BIG_EXPONENT = (0.9, 1.1)
QUICK_SECONDS = 5 * 60
FULL_SECONDS = 30 * 60

TORUS = {"name": "torus"}
SPHERE = {"name": "sphere"}
DIAG = complex(np.sqrt(0.5), np.sqrt(0.5))


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.summary}"


@dataclass
class SuiteReport:
    profile: str
    results: list
    seconds: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def vector(self) -> list:
        return [r.passed for r in self.results]


# Profile sizes. "full" uses the sample counts the criteria name; "quick" trims
# point/pair counts but keeps every k range and tolerance.
PROFILES = {
    "full": {"points1": 20, "points2": 200, "points7": 200, "pairs8": 1000, "points9": 50, "samples4": 64,
             "sections5": 32, "exterior6": 100},
    "quick": {"points1": 10, "points2": 50, "points7": 40, "pairs8": 200, "points9": 20, "samples4": 32,
              "sections5": 12, "exterior6": 40},
}


def _run(cfg, cache) -> ExperimentReport:
    cfg = {"output": "", **cfg}
    return run(cfg, cache_dir=cache, write=False)


def _val(rep, name):
    return rep.assertions[name]["value"]


# ---------------------------------------------------------------------------

def criterion_1(size, cache, seed=0):
    """Leading coefficient against the curvature determinant on sphere and torus."""
    devs, ok = {}, True
    for label, model in (("sphere", SPHERE), ("torus", TORUS)):
        rep = _run({"experiment": "expansion", "model": model, "ks": list(range(8, 49, 8)), "seed": seed,
                    "params": {"points": size["points1"]}, "tolerances": {"b0_relative": B0_REL}}, cache)
        devs[label] = rep.fitted["max_relative_deviation"]
        ok &= rep.passed
    s = ", ".join(f"{k} max rel dev {v:.2e}" for k, v in devs.items())
    return ok, f"{s} (tol {B0_REL})", devs


def criterion_2(size, cache, seed=0):
    """FS Bergman function is flat; quadrature Gram equals the Beta integrals."""
    geom = sphere_model(1)
    c, z = sample_points(geom, size["points2"], np.random.default_rng(seed))
    flat = 0.0
    for k in range(1, 31):
        P = bergman_function(build_frame(geom, k), c, z)
        flat = max(flat, (P.max() - P.min()) / P.mean())
    gram_err = 0.0
    for k, normalized in ((2, False), (8, True), (30, True)):
        basis = SphereMonomialBasis(geom, k, normalized=normalized)
        G = _gram_by_quadrature(basis, geom, geom.quadrature(k))
        v = basis.exponents
        ref = 2 * np.pi * beta_fn(v + 1, k - v + 1) * np.exp(2 * basis.log_scale)
        gram_err = max(gram_err, float(np.max(np.abs(G - np.diag(ref))) / np.max(ref)))
    ok = flat < FS_FLAT and gram_err < GRAM_BETA
    return ok, f"flatness {flat:.2e} (tol {FS_FLAT}), Gram vs Beta {gram_err:.2e} (tol {GRAM_BETA})", \
        {"flatness": flat, "gram_error": gram_err}


def criterion_3(size, cache, seed=0):
    """Phase: order-2 Taylor law, sign and diagonal."""
    out, ok = {}, True
    for label, model, pts in (("sphere", SPHERE, [0.0, 0.3, [1.0, 1.0]]), ("torus", TORUS, [[0.5, 0.5], 0.2])):
        rep = _run({"experiment": "phase", "model": model, "ks": [16, 24, 32, 48, 64], "seed": seed,
                    "params": {"base_points": pts, "distances": [0.05, 0.1, 0.2], "directions": 4},
                    "tolerances": {"taylor_relative": PHASE_REL, "diagonal": DIAGONAL}}, cache)
        ok &= all(rep.assertions[n]["passed"] for n in ("taylor_order2", "nonnegative", "diagonal_zero"))
        out[label] = {n: _val(rep, n) for n in ("taylor_order2", "nonnegative", "diagonal_zero")}
    s = "; ".join(f"{k}: rel err {v['taylor_order2']:.2e}, min ImPsi {v['nonnegative']:.2e}, "
                  f"diag {v['diagonal_zero']:.1e}" for k, v in out.items())
    return ok, s, out


def criterion_4(size, cache, seed=0):
    """Off-diagonal decay over disjoint supports at separation 0.5, k = 8..40."""
    out, ok = {}, True
    for label, model, center, direction in (("sphere", SPHERE, 0.0, 1.0), ("torus", TORUS, [0.5, 0.5],
                                                                          [DIAG.real, DIAG.imag])):
        rep = _run({"experiment": "decay", "model": model, "ks": list(range(8, 41, 8)), "seed": seed,
                    "params": {"separation": 0.5, "separations": [0.5], "radius": 0.1, "center": center,
                               "direction": direction, "samples": size["samples4"]},
                    "tolerances": {"required_drop": DECAY_DROP}}, cache)
        ok &= rep.assertions["positive_rate"]["passed"] and rep.assertions["drop_six_orders"]["passed"]
        out[label] = {"drop": rep.fitted["drop@0.5"], "rate": rep.fitted["rate@0.5"]}
    s = "; ".join(f"{k}: drop {v['drop']:.2e} (need <= {DECAY_DROP:.0e}), rate {v['rate']:.3f}"
                  for k, v in out.items())
    return ok, s, out


def criterion_5(size, cache, seed=0):
    """Small spectral gap fit on the smooth sphere and on the singular annulus."""
    out, ok = {}, True
    common = {"experiment": "gap", "ks": [8, 12, 16, 24, 32], "seed": seed,
              "tolerances": {"fit_residual": GAP_RESIDUAL}}
    for label, params in (("sphere", {"region": {"r_out": 0.8}}),
                          ("singular", {"region": {"r_out": 1.0, "r_in": 0.3}, "singular": {"tau": 0.5, "m": 1}})):
        rep = _run({**common, "params": {**params, "count": size["sections5"], "degree": 3}}, cache)
        ok &= rep.passed
        out[label] = {"C_hat": rep.fitted["C_hat"], "N_hat": rep.fitted["N_hat"], "residual": rep.fitted["fit_residual"]}
    s = "; ".join(f"{k}: C={v['C_hat']:.3g} N={v['N_hat']:.3f} resid {v['residual']:.3f}" for k, v in out.items())
    return ok, s + f" (tol {GAP_RESIDUAL})", out


def criterion_6(size, cache, seed=0):
    """Peak-section inequalities and the Richardson limit at k = 64."""
    out, ok = {}, True
    for label, model, pts in (("sphere", SPHERE, [0.0, 0.3, [1.0, 1.0]]),
                              ("torus", TORUS, [[0.5, 0.5], 0.2, [0.7, 0.1]])):
        rep = _run({"experiment": "peaks", "model": model, "ks": [16, 24, 32, 48], "seed": seed,
                    "params": {"base_points": pts, "exterior_radius": 0.5, "exterior_points": size["exterior6"],
                               "limit_k": 64},
                    "tolerances": {"limit_relative": PEAK_LIMIT_REL}}, cache)
        ok &= rep.passed
        lim = rep.fitted["limit"]
        out[label] = {"c0": rep.fitted["c0"], "c1": rep.fitted["c1"], "k0": rep.fitted["k0_hat"],
                      "limit_rel": max(r["relative"] for r in lim),
                      "literal_rel": max(r["relative_plateau"] for r in lim),
                      "failed": [n for n, a in rep.assertions.items() if not a["passed"]]}
    s = "; ".join(f"{k}: c0={v['c0']:.3f} c1={v['c1']:.3f} k0={v['k0']} limit rel {v['limit_rel']:.2e} "
                  f"(literal plateau formula rel {v['literal_rel']:.2f})" for k, v in out.items())
    return ok, s, out


def criterion_7(size, cache, seed=0):
    """Immersion for sphere k >= 2, torus k >= 3; torus k = 1 detected as failing."""
    s_rep = _run({"experiment": "immersion", "model": SPHERE, "ks": [2, 3, 4, 8, 16, 32], "seed": seed,
                  "params": {"points": size["points7"], "k_min": 2}}, cache)
    t_rep = _run({"experiment": "immersion", "model": TORUS, "ks": [1, 3, 4, 8, 16], "seed": seed,
                  "params": {"points": size["points7"], "k_min": 3, "expect_failure": [1]}}, cache)
    ok = s_rep.passed and t_rep.passed
    smin = {"sphere": s_rep.fitted["sigma_min_over_sqrt_k"], "torus": t_rep.fitted["sigma_min_over_sqrt_k"]}
    low = min(min(v for k, v in d.items() if k != 1) for d in smin.values())
    s = (f"min sigma_min/sqrt(k) {low:.3f} over passing k; torus k=1 "
         f"{'rejected' if t_rep.assertions['detects_failure_k1']['passed'] else 'NOT rejected'}")
    return ok, s, smin


def criterion_8(size, cache, seed=0):
    """Pair scans and the shrinking-scale curvature diagnostic."""
    s_rep = _run({"experiment": "injectivity", "model": SPHERE, "ks": [2, 3, 4, 8, 16], "seed": seed,
                  "params": {"pairs": size["pairs8"], "k_min": 2, "shrinking_ks": [16, 24, 32, 48, 64]}}, cache)
    t_rep = _run({"experiment": "injectivity", "model": TORUS, "ks": [3, 4, 8, 16], "seed": seed,
                  "params": {"pairs": size["pairs8"], "k_min": 3, "shrinking_ks": []}}, cache)
    required = ["shrinking_negative", "shrinking_first_derivative_decreasing"]
    scans = all(a["passed"] for n, a in {**s_rep.assertions, **t_rep.assertions}.items() if n.startswith("injective"))
    shrink = all(s_rep.assertions[n]["passed"] for n in required)
    f2 = s_rep.fitted["shrinking_scaled_f2"]
    s = (f"scans {'clean' if scans else 'VIOLATIONS'}; scaled f'' in [{np.min(f2):.2f}, {np.max(f2):.2f}], "
         f"predicted {s_rep.fitted['shrinking_predicted']:.2f}; first-derivative term "
         f"{'decreasing' if s_rep.assertions['shrinking_first_derivative_decreasing']['passed'] else 'NOT decreasing'}")
    return scans and shrink, s, {"scaled_f2": f2, "k_emb_sphere": s_rep.fitted["k_emb"],
                                 "k_emb_torus": t_rep.fitted["k_emb"]}


def criterion_9(size, cache, seed=0):
    """Multiplier kernel equals the punctured kernel; thresholds exact."""
    rep = _run({"experiment": "singular-skoda", "ks": list(range(1, 17)), "seed": seed,
                "params": {"tau": 0.5, "m": 1, "points": size["points9"]},
                "tolerances": {"discrepancy": SKODA}}, cache)
    d = _val(rep, "skoda_identity")
    s = (f"max rel discrepancy {d:.2e} (tol {SKODA}); thresholds "
         f"{'exact' if rep.assertions['thresholds_closed_form']['passed'] else 'MISMATCH'}")
    return rep.passed, s, {"discrepancy": d}


def criterion_10(size, cache, seed=0):
    """Dimension bound and linear growth of the integrated multiplier kernel."""
    rep = _run({"experiment": "singular-big", "ks": list(range(8, 49, 8)), "seed": seed,
                "params": {"tau": 0.5, "m": 1, "points": size["points1"]},
                "tolerances": {"exponent_low": BIG_EXPONENT[0], "exponent_high": BIG_EXPONENT[1]}}, cache)
    ok = rep.assertions["dimension_bound"]["passed"] and rep.assertions["growth_exponent"]["passed"]
    s = (f"bound {'holds' if rep.assertions['dimension_bound']['passed'] else 'FAILS'}; exponent "
         f"{rep.fitted['exponent']:.3f} in {list(BIG_EXPONENT)} (plain log-log slope {rep.fitted['loglog_slope']:.3f})")
    return ok, s, dict(rep.fitted)


def criterion_11(size, cache, seed=0, timings=None):
    """Runtime budget and byte-identical CSV across runs and worker counts."""
    timings = dict(timings or {})
    if "quick" not in timings:
        t0 = time.perf_counter()
        verify_all("quick", cache, seed, criteria=range(1, 11))
        timings["quick"] = time.perf_counter() - t0
    identical = True
    for cfg in ({"experiment": "expansion", "ks": list(range(8, 49, 8)), "params": {"points": 20}},
                {"experiment": "phase", "model": TORUS},
                {"experiment": "gap"},
                {"experiment": "singular-skoda", "ks": [1, 2, 3, 4, 5, 6, 7, 8]}):
        texts = [_run({**cfg, "seed": seed, "workers": w}, c).csv_text() for w, c in ((1, None), (1, cache), (2, cache))]
        identical &= len(set(texts)) == 1
    ok = identical and timings["quick"] < QUICK_SECONDS and timings.get("full", 0.0) < FULL_SECONDS
    full = f"{timings['full']:.0f}s" if "full" in timings else "not measured"
    s = (f"quick {timings['quick']:.0f}s (< {QUICK_SECONDS}s), full {full} (< {FULL_SECONDS}s), CSV "
         f"{'byte-identical' if identical else 'DIFFERS'} across runs/workers/cache")
    return ok, s, {**timings, "identical": identical}


CRITERIA = {
    1: ("leading coefficient", criterion_1),
    2: ("exact sphere cross-check", criterion_2),
    3: ("phase law", criterion_3),
    4: ("off-diagonal decay", criterion_4),
    5: ("spectral gap", criterion_5),
    6: ("peak sections", criterion_6),
    7: ("immersion", criterion_7),
    8: ("injectivity", criterion_8),
    9: ("multiplier identity", criterion_9),
    10: ("big-bundle bound", criterion_10),
    11: ("engineering", criterion_11),
}


def run_criterion(n: int, profile: str = "full", cache=None, seed: int = 0, **kw) -> CriterionResult:
    name, fn = CRITERIA[n]
    t0 = time.perf_counter()
    ok, summary, details = fn(PROFILES[profile], cache, seed, **kw)
    return CriterionResult(n, name, bool(ok), summary, details, time.perf_counter() - t0)


def verify_all(profile: str = "quick", cache=None, seed: int = 0, criteria=None) -> SuiteReport:
    """Run the criteria (1-10 by default, 11 appended with the measured timing)."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    chosen = list(criteria) if criteria is not None else list(CRITERIA)
    t0 = time.perf_counter()
    results = []
    for n in chosen:
        if n == 11:
            continue
        results.append(run_criterion(n, profile, cache, seed))
        log.info(results[-1].line())
    elapsed = time.perf_counter() - t0
    if 11 in chosen:
        timings = {profile: elapsed}
        results.append(run_criterion(11, profile, cache, seed, timings=timings))
    return SuiteReport(profile, results, time.perf_counter() - t0)

