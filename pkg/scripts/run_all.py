"""Run every YAML config under configs/ and print a one-line status per experiment."""
import argparse
import os
from pathlib import Path

from bergman_lab.experiments import ExperimentConfig, FrameCache, load_config, run

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=str(ROOT / "configs"))
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cache = FrameCache(os.environ.get("BERGLAB_CACHE")).root
    for path in sorted(Path(args.configs).glob("*.yaml")):
        cfg = load_config(path)
        cfg["output"] = str(Path(args.out) / path.stem)
        cfg["workers"] = args.workers
        rep = run(ExperimentConfig.from_dict(cfg), cache_dir=cache)
        failed = [n for n, a in rep.assertions.items() if not a["passed"]]
        status = "PASS" if rep.passed else "FAIL " + ",".join(failed)
        print(f"{path.stem:22s} {rep.wall_time:6.1f}s  {status}")


if __name__ == "__main__":
    main()
