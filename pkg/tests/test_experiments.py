import json

import numpy as np
import pytest

from bergman_lab.experiments import (EXPERIMENTS, ExperimentConfig, FrameCache, apply_overrides,
                                     list_experiments, ordered_map, run)
from bergman_lab.geometry import sphere_model
from bergman_lab.hilbert import build_frame


def test_catalog_has_nine_entries():
    names = [e["name"] for e in list_experiments()]
    assert len(names) == 9
    assert set(names) == {"expansion", "phase", "decay", "gap", "peaks", "immersion", "injectivity",
                          "singular-skoda", "singular-big"}


@pytest.mark.parametrize("bad", [
    {"experiment": "nope"},
    {"experiment": "phase", "ks": [16, 16, 24]},
    {"experiment": "phase", "ks": [24, 16]},
    {"experiment": "phase", "tolerances": {"taylor_relative": 0.0}},
    {"experiment": "phase", "workers": 0},
    {"experiment": "phase", "colour": "blue"},
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(bad)


def test_config_defaults_fill_in():
    cfg = ExperimentConfig("peaks")
    assert cfg.ks == list(EXPERIMENTS["peaks"].default_ks)
    assert cfg.tolerances["limit_relative"] == 0.10


def test_overrides_parse_yaml_values():
    cfg = apply_overrides({"experiment": "phase", "params": {"directions": 4}},
                          ["ks=[16, 24, 32]", "params.directions=2", "model.name=torus", "seed=7"])
    assert cfg["ks"] == [16, 24, 32] and cfg["params"]["directions"] == 2
    assert cfg["model"] == {"name": "torus"} and cfg["seed"] == 7
    with pytest.raises(ValueError):
        apply_overrides({}, ["novalue"])


def _square(x):
    return x * x


def test_ordered_map_keeps_order():
    assert ordered_map(_square, list(range(7)), workers=2) == [x * x for x in range(7)]


def test_cache_roundtrip_and_manifest(tmp_path):
    cache = FrameCache(tmp_path)
    g = sphere_model(1)
    a = cache.get(g, 5)
    b = cache.get(g, 5)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert len(man) == 1 and next(iter(man.values()))["k"] == 5
    assert cache.clean() == 2
    assert not list(tmp_path.glob("*.json"))


def test_cache_corruption_purges_and_rebuilds(tmp_path, caplog):
    cache = FrameCache(tmp_path)
    g = sphere_model(1)
    cache.get(g, 4)
    path = next(p for p in tmp_path.glob("*.json") if p.name != "manifest.json")
    blob = json.loads(path.read_text())
    blob["model_hash"] = "0" * 16
    path.write_text(json.dumps(blob))
    with caplog.at_level("WARNING", logger="bergman_lab"):
        f = cache.get(g, 4)
    assert "corrupt" in caplog.text
    np.testing.assert_array_equal(f.coefficients, build_frame(g, 4).coefficients)


def test_cache_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("BERGLAB_CACHE", str(tmp_path / "c"))
    assert FrameCache().root == tmp_path / "c"


def test_report_files_and_csv_format(tmp_path):
    rep = run({"experiment": "expansion", "ks": [8, 16, 24, 32, 40], "params": {"points": 3},
               "output": str(tmp_path)})
    csv = (tmp_path / "expansion.csv").read_text().splitlines()
    assert csv[0] == "k,point,chart,x,y,P_k"
    assert len(csv) == 1 + 5 * 3
    assert all(len(f.split("e")[0].lstrip("-").replace(".", "")) == 17
               for f in csv[1].split(",")[3:])
    summary = json.loads((tmp_path / "expansion.json").read_text())
    assert summary["passed"] and "wall_time" in summary and summary["hashes"]["model"]
    dat = (tmp_path / "expansion.dat").read_text().splitlines()
    assert len(dat) == 5 and len(dat[0].split()) == 2
    assert rep.passed


@pytest.mark.parametrize("name,overrides", [
    ("phase", {"params": {"base_points": [0.3], "distances": [0.1], "directions": 2}}),
    ("gap", {"ks": [8, 12, 16], "params": {"count": 4}}),
    ("singular-skoda", {"ks": [1, 2, 3, 4]}),
])
def test_csv_identical_across_workers_and_cache(tmp_path, name, overrides):
    cfg = {"experiment": name, **overrides}
    texts = [run({**cfg, "workers": w}, cache_dir=c, write=False).csv_text()
             for w, c in ((1, None), (2, None), (1, tmp_path), (2, tmp_path))]
    assert len(set(texts)) == 1


def test_every_experiment_runs_small(tmp_path):
    small = {
        "expansion": {"ks": [8, 12, 16, 20, 24], "params": {"points": 3}},
        "phase": {"ks": [16, 24, 32], "params": {"base_points": [0.0], "distances": [0.1], "directions": 1}},
        "decay": {"ks": [8, 16], "params": {"samples": 8, "separations": [0.5]}},
        "gap": {"ks": [8, 12, 16], "params": {"count": 3}},
        "peaks": {"ks": [16, 24, 32, 48], "params": {"exterior_points": 10, "limit_k": 32}},
        "immersion": {"ks": [1, 2], "params": {"points": 5}},
        "injectivity": {"ks": [1, 2], "params": {"pairs": 30, "shrinking_ks": []}},
        "singular-skoda": {"ks": [1, 2], "params": {"points": 5}},
        "singular-big": {"ks": [8, 16, 24, 32, 40], "params": {"points": 4}},
    }
    for name, cfg in small.items():
        rep = run({"experiment": name, "output": str(tmp_path), **cfg})
        assert rep.assertions, name
        assert (tmp_path / f"{name}.csv").exists()


def test_quick_suite_same_vector_cold_and_warm(tmp_path):
    from bergman_lab.acceptance import verify_all
    cold = verify_all("quick", tmp_path, criteria=range(1, 11))
    warm = verify_all("quick", tmp_path, criteria=range(1, 11))
    assert cold.vector() == warm.vector()
    assert [r.summary for r in cold.results] == [r.summary for r in warm.results]
