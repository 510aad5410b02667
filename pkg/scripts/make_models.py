"""Regenerate the shipped example models in models/."""
from pathlib import Path

import numpy as np

from presheaf_mp import io
from presheaf_mp.oracle import exact_joint, exact_marginals
from presheaf_mp.presheaf import GraphicalSpec
from presheaf_mp.random_models import cycle_spec, plaquette_spec
from presheaf_mp.transform import coordinate_binning

OUT = Path(__file__).resolve().parent.parent / "models"


def graphical(spec: GraphicalSpec, factors: dict) -> dict:
    return {"graphical": {"variables": [list(v) for v in spec.variables], "regions": [list(r) for r in spec.regions]},
            "factors": {k: [float(x) for x in v] for k, v in factors.items()}}


def write(name, obj):
    (OUT / name).write_text(io.dumps(obj), encoding="utf-8")


def main():
    OUT.mkdir(exist_ok=True)
    path2 = GraphicalSpec([("x1", 2), ("x2", 2)], [["x1"], ["x2"], ["x1", "x2"]])
    write("path2.json", graphical(path2, {"x1,x2": [2, 1, 1, 2]}))

    path3 = GraphicalSpec([("x1", 2), ("x2", 2), ("x3", 2)],
                          [["x1"], ["x2"], ["x3"], ["x1", "x2"], ["x2", "x3"]])
    f3 = {"x1": [1.5, 0.5], "x3": [0.8, 1.2], "x1,x2": [2.0, 0.7, 0.4, 1.6], "x2,x3": [1.1, 0.3, 0.9, 2.5]}
    write("path3.json", graphical(path3, f3))
    (OUT / "path3_explicit.json").write_text(io.dump_model(io.load_model(OUT / "path3.json")), encoding="utf-8")
    write("path3_evidence.json", {"x3": 1})
    m = io.load_model(OUT / "path3.json")
    write("path3_beliefs.json", io.field_to_json(exact_marginals(exact_joint(path3, factors=m.factors), path3)))

    # frustrated triangle: two ferromagnetic edges, one antiferromagnetic
    fc = {"x1,x2": [2.0, 0.5, 0.5, 2.0], "x2,x3": [2.0, 0.5, 0.5, 2.0], "x1,x3": [0.5, 2.0, 2.0, 0.5],
          "x1": [1.3, 0.7]}
    write("cycle3.json", graphical(cycle_spec(3), fc))

    plaq = plaquette_spec()
    rng = np.random.default_rng(7)
    fp = {plaq.region_name(r): np.round(np.exp(rng.uniform(-0.4, 0.4, plaq.region_size(r))), 6)
          for r in plaq.regions if len(r) == 4}
    write("plaquette.json", graphical(plaq, fp))

    # binning three states into two on a one-element poset
    write("bin_source.json", {"poset": {"elements": ["a"], "leq": []},
                              "presheaf": {"sets": {"a": 3}, "maps": {}},
                              "hamiltonians": {"a": [0.3, -0.2, 0.5]}})
    write("bin_target.json", {"poset": {"elements": ["a"], "leq": []},
                              "presheaf": {"sets": {"a": 2}, "maps": {}},
                              "hamiltonians": {"a": [0.0, 0.0]}})
    write("bin_transform.json", {"source": "bin_source.json", "target": "bin_target.json",
                                 "components": {"a": [0, 1, 1]}})

    # binning the middle variable of a chain
    tern = GraphicalSpec([("x1", 2), ("x2", 3), ("x3", 2)], [["x1"], ["x2"], ["x3"], ["x1", "x2"], ["x2", "x3"]])
    ft = {"x2": [1.0, 0.6, 1.4], "x1,x2": [1.8, 0.9, 0.5, 1.2, 0.7, 1.5], "x2,x3": [1.0, 2.0, 0.4, 0.8, 1.3, 0.6]}
    write("path3_ternary.json", graphical(tern, ft))
    binned, phi = coordinate_binning(tern, "x2", [0, 1, 1])
    write("path3_binned.json", graphical(binned, {}))
    write("path3_bin_transform.json", {"source": "path3_ternary.json", "target": "path3_binned.json",
                                       "components": {a: [int(i) for i in c] for a, c in phi.comps.items()}})

    write("joint_xy.json", {"joint": [[0.10, 0.05, 0.15], [0.20, 0.10, 0.05], [0.05, 0.25, 0.05]],
                            "observed": 1})


if __name__ == "__main__":
    main()
