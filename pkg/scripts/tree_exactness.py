"""BP and MP against brute-force marginals on random trees.

    python scripts/tree_exactness.py --n 50 --max-vars 10 --seed 0
"""
import argparse
import time

import numpy as np

from presheaf_mp.bp import BpOptions, bp_run
from presheaf_mp.energy import hamiltonians_from_factors
from presheaf_mp.mp import mp_run
from presheaf_mp.oracle import exact_joint, exact_marginals
from presheaf_mp.presheaf import graphical_presheaf
from presheaf_mp.random_models import random_factors, random_tree_spec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--max-vars", type=int, default=10)
    ap.add_argument("--coupling", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'vars':>4} {'bp it':>6} {'bp err':>9} {'mp it':>6} {'mp err':>9} {'secs':>6}")
    for _ in range(args.n):
        spec = random_tree_spec(int(rng.integers(2, args.max_vars + 1)), rng)
        F = graphical_presheaf(spec)
        factors = random_factors(spec, rng, args.coupling)
        H = hamiltonians_from_factors(spec, factors, F)
        exact = exact_marginals(exact_joint(spec, factors=factors), spec)
        t0 = time.perf_counter()
        bp = bp_run(F, H, BpOptions(damping=1.0, tol=1e-12))
        mp = mp_run(F, H)
        secs = time.perf_counter() - t0
        e_bp = max(np.abs(bp.beliefs[a] - exact[a]).max() for a in exact)
        e_mp = max(np.abs(mp.beliefs[a] - exact[a]).max() for a in exact) if mp.beliefs else np.inf
        print(f"{len(spec.names):>4} {bp.state.iteration:>6} {e_bp:>9.1e} {mp.iterations:>6} {e_mp:>9.1e} {secs:>6.2f}")


if __name__ == "__main__":
    main()
