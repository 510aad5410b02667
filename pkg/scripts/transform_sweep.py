"""Intertwining and isometry residuals over random natural transformations.

    python scripts/transform_sweep.py --n 200 --elements 5 --seed 0
"""
import argparse

import numpy as np

from presheaf_mp.random_models import random_field, random_presheaf_pair, random_weights
from presheaf_mp.transform import NaturalTransformation, check_theorem1, check_theorem3, isometry_residuals


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--elements", type=int, default=5)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    r1 = r3 = iso = 0.0
    for k in range(args.n):
        F, G, comps = random_presheaf_pair(rng, n_elements=int(rng.integers(1, args.elements + 1)))
        phi = NaturalTransformation(F, G, comps)
        H = random_field(F, rng)
        r1 = max(r1, check_theorem1(F, G, phi, H, args.trials, random_weights(F, rng), random_weights(G, rng), k))
        r3 = max(r3, check_theorem3(F, G, phi, H, args.trials, k))
        iso = max(iso, *isometry_residuals(phi, 5, k))
    print(f"{args.n} transformations: weighted intertwining {r1:.1e}, full map {r3:.1e}, isometry {iso:.1e}")


if __name__ == "__main__":
    main()
