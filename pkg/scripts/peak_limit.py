"""Peak-section centre value against its large-k limit.

Prints ``u_k(p)`` for increasing ``k``, the Richardson extrapolation
``2 u_{2k} - u_k``, the Gaussian-weighted limit and the plateau-only value.
"""
import argparse

from bergman_lab.geometry import model_from_config
from bergman_lab.hilbert import build_frame
from bergman_lab.peaks import peak_limit, peak_section


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="sphere", choices=["sphere", "torus"])
    ap.add_argument("--point", type=complex, default=0j)
    ap.add_argument("--ks", type=int, nargs="+", default=[8, 16, 32, 64, 128])
    args = ap.parse_args()
    g = model_from_config({"name": args.model})
    ch, p = g.convention(0, [args.point])
    lim = peak_limit(g, complex(p[0]), int(ch[0]))
    vals = {}
    for k in args.ks:
        vals[k] = peak_section(build_frame(g, k), args.point).value.real
        rich = 2 * vals[k] - vals[k // 2] if k // 2 in vals else float("nan")
        print(f"k={k:4d}  u_k(p)={vals[k]:.6f}  richardson={rich:.6f}")
    print(f"gaussian-weighted limit {lim['limit']:.6f}; plateau-only value {lim['plateau_formula']:.6f}")


if __name__ == "__main__":
    main()
