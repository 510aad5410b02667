"""Compare the two MP update rules on a tree and on the plaquette region graph.

The literal increment moves away from fixed points; the descent rule (the
default in mp_run) converges to the same zeros of the increment.
"""
import argparse

import numpy as np

from presheaf_mp.bp import BpOptions, bp_run
from presheaf_mp.energy import hamiltonians_from_factors
from presheaf_mp.mp import MpOptions, mp_run
from presheaf_mp.presheaf import graphical_presheaf
from presheaf_mp.random_models import cycle_spec, plaquette_spec, random_factors, random_tree_spec


def report(name, F, H, bp_damping):
    print(name)
    for rule, damping in (("descent", 0.5), ("descent", 1.0), ("increment", 1.0), ("increment", 0.1)):
        res = mp_run(F, H, options=MpOptions(rule=rule, damping=damping, max_iters=5000))
        print(f"  mp {rule:<9} damping {damping:<4} converged={res.converged!s:<5} "
              f"iterations={res.iterations:<5} residual={res.residual:.1e}")
    bp = bp_run(F, H, BpOptions(damping=bp_damping, max_iters=5000))
    print(f"  bp damping {bp_damping:<4} converged={bp.converged!s:<5} iterations={bp.state.iteration}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for name, spec, bp_damping in (("tree, 6 variables", random_tree_spec(6, rng), 0.5),
                                   ("plaquettes on a 3x3 grid", plaquette_spec(), 0.3),
                                   ("single 4-cycle (no MP fixed point)", cycle_spec(4), 0.5)):
        F = graphical_presheaf(spec)
        report(name, F, hamiltonians_from_factors(spec, random_factors(spec, rng, 0.5), F), bp_damping)


if __name__ == "__main__":
    main()
