"""Regenerate the golden CLI outputs in models/golden/.

Every entry of ``RUNS`` is executed from inside models/ and its standard output
is stored as ``<name>.txt``; ``runs.json`` keeps the argument lists and exit codes.
"""
import json
import subprocess
import sys
from pathlib import Path

MODELS = Path(__file__).resolve().parent.parent / "models"
GOLDEN = MODELS / "golden"

RUNS = {
    "infer_path2_mp": ["infer", "--model", "path2.json"],
    "infer_path3_mp": ["infer", "--model", "path3.json"],
    "infer_path3_bp": ["infer", "--model", "path3.json", "--algo", "bp"],
    "infer_path3_mp_seed": ["infer", "--model", "path3.json", "--seed", "7"],
    "infer_path3_bp_seed": ["infer", "--model", "path3.json", "--algo", "bp", "--seed", "7"],
    "infer_path3_explicit": ["infer", "--model", "path3_explicit.json"],
    "infer_path3_evidence": ["infer", "--model", "path3.json", "--evidence", "path3_evidence.json"],
    "infer_cycle3_bp": ["infer", "--model", "cycle3.json", "--algo", "bp"],
    "infer_cycle3_mp": ["infer", "--model", "cycle3.json", "--max-iters", "200"],
    "infer_plaquette_mp": ["infer", "--model", "plaquette.json"],
    "infer_plaquette_bp": ["infer", "--model", "plaquette.json", "--algo", "bp", "--damping", "0.3"],
    "infer_ternary_mp": ["infer", "--model", "path3_ternary.json"],
    "exact_path2": ["exact", "--model", "path2.json"],
    "exact_path3": ["exact", "--model", "path3.json"],
    "exact_path3_evidence": ["exact", "--model", "path3.json", "--evidence", "path3_evidence.json"],
    "exact_plaquette": ["exact", "--model", "plaquette.json"],
    "check_critical_path3": ["check", "critical", "--model", "path3.json", "--beliefs", "path3_beliefs.json"],
    "check_tree_path3": ["check", "tree", "--model", "path3.json"],
    "check_tree_cycle3": ["check", "tree", "--model", "cycle3.json"],
    "check_variational": ["check", "variational", "--joint", "joint_xy.json"],
    "intertwine_bin": ["check", "intertwine", "--model", "bin_source.json", "--target-model", "bin_target.json",
                       "--transform", "bin_transform.json", "--theorem", "1", "--seed", "3"],
    "intertwine_path3_t1": ["check", "intertwine", "--model", "path3_ternary.json",
                            "--target-model", "path3_binned.json", "--transform", "path3_bin_transform.json",
                            "--theorem", "1", "--seed", "3"],
    "intertwine_path3_t3": ["check", "intertwine", "--model", "path3_ternary.json",
                            "--target-model", "path3_binned.json", "--transform", "path3_bin_transform.json",
                            "--theorem", "3", "--seed", "3"],
    "transform_bin": ["transform", "apply", "--transform", "bin_transform.json", "--model", "bin_source.json"],
    "transform_path3": ["transform", "apply", "--transform", "path3_bin_transform.json",
                        "--model", "path3_ternary.json"],
    "mobius_path3": ["poset", "mobius", "--model", "path3.json"],
    "mobius_plaquette": ["poset", "mobius", "--model", "plaquette.json"],
}


def run(argv):
    proc = subprocess.run([sys.executable, "-m", "presheaf_mp", *argv], cwd=MODELS,
                          capture_output=True)
    return proc.returncode, proc.stdout


def main():
    GOLDEN.mkdir(exist_ok=True)
    index = {}
    for name, argv in RUNS.items():
        code, out = run(argv)
        (GOLDEN / f"{name}.txt").write_bytes(out)
        index[name] = {"argv": argv, "exit": code}
        print(f"{name}: exit {code}")
    (GOLDEN / "runs.json").write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
