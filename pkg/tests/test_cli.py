import pytest
import yaml

from bergman_lab.cli import main


@pytest.fixture(autouse=True)
def _cache(tmp_path, monkeypatch):
    monkeypatch.setenv("BERGLAB_CACHE", str(tmp_path / "cache"))


def _write(tmp_path, cfg):
    p = tmp_path / "cfg.yaml"
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


def test_list(capsys):
    assert main(["list"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 9


def test_run_pass_writes_outputs(tmp_path):
    cfg = _write(tmp_path, {"experiment": "singular-skoda", "ks": [1, 2, 3], "params": {"points": 5}})
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "singular-skoda.csv").exists()


def test_run_assertion_failure_exit_code(tmp_path):
    cfg = _write(tmp_path, {"experiment": "decay", "ks": [8, 16], "params": {"samples": 8, "separations": [0.5]}})
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 1


def test_set_override(tmp_path):
    cfg = _write(tmp_path, {"experiment": "singular-skoda", "ks": [1, 2]})
    assert main(["run", cfg, "--set", "params.points=3", "--set", "tolerances.discrepancy=1e-9",
                 "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("argv", [["frobnicate"], ["verify", "--profile", "huge"], []])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_unknown_experiment_is_usage_error(tmp_path):
    assert main(["run", _write(tmp_path, {"experiment": "bogus"})]) == 2
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2


def test_too_few_ks_is_usage_error(tmp_path):
    cfg = _write(tmp_path, {"experiment": "expansion", "ks": [8, 16], "params": {"points": 2}})
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 2


def test_numerics_error_exit_code(tmp_path, monkeypatch):
    from bergman_lab import experiments
    from bergman_lab.errors import IllConditionedError

    def boom(cfg, cache):
        raise IllConditionedError("synthetic")
    entry = experiments.EXPERIMENTS["gap"]
    monkeypatch.setitem(experiments.EXPERIMENTS, "gap",
                        experiments.ExperimentEntry("gap", boom, "", entry.default_ks, entry.tolerances, entry.params))
    assert main(["run", _write(tmp_path, {"experiment": "gap"}), "--out", str(tmp_path / "o")]) == 3


def test_verify_subset(capsys):
    assert main(["verify", "--criteria", "2", "9"]) == 0
    out = capsys.readouterr().out
    assert "2/2 criteria passed" in out


def test_clean_cache(capsys):
    assert main(["clean-cache"]) == 0
