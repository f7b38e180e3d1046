"""Convergence of the fitted leading coefficient on a bump-perturbed sphere.

Relative deviation of b0 from the local curvature along a ray from the bump
centre, for two k windows.  Where the curvature changes over lengths
comparable to ``k^{-1/2}`` the fit needs larger k.
"""
import argparse

import numpy as np

from bergman_lab.asymptotics import expansion_at
from bergman_lab.geometry import det_curvature_array, sphere_model
from bergman_lab.hilbert import build_frame


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitude", type=float, default=0.02)
    ap.add_argument("--radius", type=float, default=1.0)
    ap.add_argument("--center", type=float, default=0.2)
    args = ap.parse_args()
    g = sphere_model(1, perturbations=[{"center": args.center, "amplitude": args.amplitude,
                                        "radius": args.radius}])
    r = np.linspace(0.0, 0.95, 8) * args.radius
    z = args.center + r
    det = det_curvature_array(g, 0, z)
    windows = [(8, 16, 24, 32, 40, 48), (32, 48, 64, 80, 96, 112)]
    fits = [expansion_at({k: build_frame(g, k) for k in ks}, 0, z) for ks in windows]
    print(f"{'dist':>6} {'det':>8} " + " ".join(f"{'k<=' + str(w[-1]):>10}" for w in windows))
    for i in range(len(z)):
        print(f"{r[i]:6.3f} {det[i]:8.4f} " + " ".join(f"{f.relative_deviation[i]:10.2e}" for f in fits))


if __name__ == "__main__":
    main()
