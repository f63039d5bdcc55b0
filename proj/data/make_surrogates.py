#!/usr/bin/env python3
"""Generate shape-matched surrogate files for datasets that are not bundled.

The UCI Seeds, Qualitative Bankruptcy and Somerville Happiness files could not
be redistributed with this repository. These surrogates reproduce the class
counts, dimensionality and value types of the originals from published
per-class summary statistics, so the full task matrix can run end to end.
Results on them are NOT comparable to results on the real files. Drop the real
files in place (same names, same column layout) to replace them.

Usage: python3 make_surrogates.py [output_dir]
"""

import sys
from pathlib import Path

import numpy as np

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
RNG = np.random.default_rng(20240521)


def seeds():
    # area, perimeter, compactness, kernel length, kernel width,
    # asymmetry coefficient, groove length; 70 kernels per variety.
    params = {
        "Kama": dict(length=(5.51, 0.23), width=(3.24, 0.18), compact=(0.880, 0.016),
                     asym=(2.67, 1.17), groove_ratio=(0.924, 0.030)),
        "Rosa": dict(length=(6.15, 0.27), width=(3.68, 0.19), compact=(0.884, 0.016),
                     asym=(3.64, 1.18), groove_ratio=(0.979, 0.020)),
        "Canadian": dict(length=(5.23, 0.14), width=(2.85, 0.15), compact=(0.849, 0.022),
                         asym=(4.79, 1.34), groove_ratio=(0.979, 0.020)),
    }
    area_mean = {"Kama": 14.33, "Rosa": 18.33, "Canadian": 11.87}
    rows = []
    for name, p in params.items():
        n = 70
        z = RNG.multivariate_normal([0, 0], [[1, 0.8], [0.8, 1]], size=n)
        length = p["length"][0] + p["length"][1] * z[:, 0]
        width = p["width"][0] + p["width"][1] * z[:, 1]
        shape = area_mean[name] / (p["length"][0] * p["width"][0])
        area = shape * length * width * (1 + 0.01 * RNG.standard_normal(n))
        compact = np.clip(p["compact"][0] + p["compact"][1] * RNG.standard_normal(n), 0.8, 0.92)
        perimeter = np.sqrt(4 * np.pi * area / compact)
        compact = 4 * np.pi * area / perimeter**2
        asym = np.abs(p["asym"][0] + p["asym"][1] * RNG.standard_normal(n)) + 0.7
        groove = length * (p["groove_ratio"][0] + p["groove_ratio"][1] * RNG.standard_normal(n))
        for i in range(n):
            rows.append([f"{area[i]:.2f}", f"{perimeter[i]:.2f}", f"{compact[i]:.4f}",
                         f"{length[i]:.3f}", f"{width[i]:.3f}", f"{asym[i]:.3f}",
                         f"{groove[i]:.3f}", name])
    return rows


def bankruptcy():
    # Six qualitative risk attributes with levels P/A/N, encoded 1/0/-1.
    # Columns: industrial risk, management risk, financial flexibility,
    # credibility, competitiveness, operating risk.
    probs = {
        "NB": [(0.35, 0.35, 0.30), (0.35, 0.35, 0.30), (0.40, 0.50, 0.10),
               (0.50, 0.45, 0.05), (0.60, 0.38, 0.02), (0.35, 0.35, 0.30)],
        "B": [(0.25, 0.30, 0.45), (0.20, 0.30, 0.50), (0.02, 0.18, 0.80),
              (0.03, 0.20, 0.77), (0.00, 0.03, 0.97), (0.25, 0.30, 0.45)],
    }
    counts = {"NB": 143, "B": 107}
    levels = np.array([1, 0, -1])
    rows = []
    for name, n in counts.items():
        cols = [RNG.choice(levels, size=n, p=p) for p in probs[name]]
        for i in range(n):
            rows.append([str(c[i]) for c in cols] + [name])
    return rows


def happiness():
    # Six 1-5 satisfaction ratings; weak class signal.
    means = {
        "Unhappy": [4.15, 2.40, 3.15, 3.50, 3.45, 4.05],
        "Happy": [4.50, 2.65, 3.50, 3.75, 3.75, 4.35],
    }
    counts = {"Unhappy": 66, "Happy": 77}
    rows = []
    for name, n in counts.items():
        cols = []
        for m in means[name]:
            v = np.rint(m + 0.9 * RNG.standard_normal(n))
            cols.append(np.clip(v, 1, 5).astype(int))
        for i in range(n):
            rows.append([str(c[i]) for c in cols] + [name])
    return rows


def write(name, rows):
    with open(OUT / name, "w") as f:
        for r in rows:
            f.write(",".join(r) + "\n")
    print(f"{name}: {len(rows)} rows, {len(rows[0]) - 1} features")


if __name__ == "__main__":
    write("seeds_surrogate.csv", seeds())
    write("bankruptcy_surrogate.csv", bankruptcy())
    write("happiness_surrogate.csv", happiness())
