"""Command-line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 non-convergence or residual
above tolerance, 3 validation failure.  Results go to standard output (or
``--out``); diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .bp import BpOptions, bp_run
from .energy import CRITICAL_TOL, SECTION_TOL, criticality_residual
from .errors import ParseError, PresheafMPError
from .mp import MpOptions, mp_run
from .oracle import (entropy_decomposition_check, exact_joint, exact_marginals, mask_evidence,
                     tree_factorization_check, variational_identity_check)
from .transform import (NaturalTransformation, check_theorem1, check_theorem3, push_hamiltonian,
                        same_presheaf)

log = logging.getLogger("presheaf_mp")

INTERTWINE_TOL = 1e-9
TREE_TOL = 1e-10
VARIATIONAL_TOL = 1e-12


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _model_with_evidence(args):
    model = io.load_model(args.model)
    H = model.hamiltonians
    evidence = io.load_evidence(args.evidence) if getattr(args, "evidence", None) else None
    if evidence:
        if model.spec is None:
            raise PresheafMPError("evidence needs a graphical model")
        H = mask_evidence(model.spec, H, evidence)
    return model, H, evidence


def cmd_infer(args) -> int:
    model, H, _ = _model_with_evidence(args)
    F = model.presheaf
    init_seed = args.seed
    if args.algo == "bp":
        opt = BpOptions(max_iters=args.max_iters, tol=args.tol,
                        damping=0.5 if args.damping is None else args.damping,
                        init="ones" if init_seed is None else "random", seed=init_seed)
        res = bp_run(F, H, opt)
        beliefs, converged, iters, resid = res.beliefs, res.converged, res.state.iteration, res.state.last_delta
    else:
        opt = MpOptions(max_iters=args.max_iters, tol=args.tol,
                        damping=0.5 if args.damping is None else args.damping,
                        rule=args.rule, init="zeros" if init_seed is None else "random", seed=init_seed)
        res = mp_run(F, H, model.weights, opt)
        beliefs, converged, iters, resid = res.beliefs, res.converged, res.iterations, res.residual
    print(json.dumps({"algo": args.algo, "converged": converged, "iterations": iters,
                      "residual": io.num_out(resid)}), file=sys.stderr)
    if beliefs is not None:
        _emit(io.dumps(io.field_to_json(beliefs)), args.out)
    return 0 if converged else 2


def cmd_exact(args) -> int:
    model, H, evidence = _model_with_evidence(args)
    if model.spec is None:
        raise PresheafMPError("exact inference needs a graphical model")
    if model.factors is not None:
        joint = exact_joint(model.spec, factors=model.factors, evidence=evidence)
    else:
        joint = exact_joint(model.spec, hamiltonians=model.hamiltonians, evidence=evidence)
    _emit(io.dumps(io.field_to_json(exact_marginals(joint, model.spec))), args.out)
    return 0


def cmd_check_critical(args) -> int:
    model, H, _ = _model_with_evidence(args)
    Q = io.load_beliefs(args.beliefs, model.presheaf)
    rs, rc = criticality_residual(model.presheaf, H, Q)
    ok = rs <= args.section_tol and rc <= args.critical_tol
    print(json.dumps({"r_section": rs, "r_critical": rc, "critical": ok}))
    return 0 if ok else 2


def cmd_check_intertwine(args) -> int:
    model = io.load_model(args.model)
    target = io.load_model(args.target_model)
    _, _, phi_file = io.load_transform(args.transform)
    if not (same_presheaf(phi_file.source, model.presheaf) and same_presheaf(phi_file.target, target.presheaf)):
        raise PresheafMPError("transform does not connect the given models")
    phi = NaturalTransformation(model.presheaf, target.presheaf, phi_file.comps)
    F, G, H = model.presheaf, target.presheaf, model.hamiltonians
    if args.theorem == 1:
        r = check_theorem1(F, G, phi, H, trials=args.trials, weights_F=model.weights,
                           weights_G=target.weights, seed=args.seed)
    else:
        r = check_theorem3(F, G, phi, H, trials=args.trials, seed=args.seed)
    print(json.dumps({"theorem": args.theorem, "trials": args.trials, "seed": args.seed,
                      "residual": r, "tol": args.tol}))
    return 0 if r < args.tol else 2


def cmd_check_tree(args) -> int:
    model = io.load_model(args.model)
    if model.spec is None:
        raise PresheafMPError("tree checks need a graphical model")
    if model.factors is not None:
        joint = exact_joint(model.spec, factors=model.factors)
    else:
        joint = exact_joint(model.spec, hamiltonians=model.hamiltonians)
    r1 = tree_factorization_check(model.spec, joint)
    r2 = entropy_decomposition_check(model.spec, joint)
    ok = max(r1, r2) < args.tol
    print(json.dumps({"factorization": r1, "entropy": r2, "tol": args.tol}))
    return 0 if ok else 2


def cmd_check_variational(args) -> int:
    obj = io.read_json(args.joint)
    try:
        P = np.array(obj["joint"], dtype=float)
        y = int(obj["observed"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("joint file needs \"joint\" (matrix [x][y]) and \"observed\" (column index)") from None
    if P.ndim != 2 or not 0 <= y < P.shape[1] or (P < 0).any():
        raise PresheafMPError("joint must be a nonnegative matrix and observed a valid column")
    r = variational_identity_check(P, y)
    print(json.dumps({"residual": r, "tol": args.tol}))
    return 0 if r < args.tol else 2


def cmd_transform_apply(args) -> int:
    model = io.load_model(args.model)
    src, tgt, phi = io.load_transform(args.transform)
    if not same_presheaf(phi.source, model.presheaf):
        raise PresheafMPError("model does not match the transform's source")
    phi = NaturalTransformation(model.presheaf, tgt.presheaf, phi.comps)
    if not phi.validate():
        raise PresheafMPError("transform is not natural")
    out = io.Model(tgt.poset, tgt.presheaf, push_hamiltonian(phi, model.hamiltonians))
    _emit(io.dump_model(out), args.out)
    return 0


def cmd_poset_mobius(args) -> int:
    model = io.load_model(args.model)
    table = model.poset.mobius
    obj = {"mu": [[a, b, int(v)] for (a, b), v in table.mu.items()],
           "c": {a: int(table.c[a]) for a in model.poset}}
    _emit(io.dumps(obj), args.out)
    return 0


def build_parser() -> Parser:
    p = Parser(prog="presheaf-mp", description="Belief propagation and message passing on presheaves.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    q = sub.add_parser("infer", help="run BP or MP")
    q.add_argument("--model", required=True)
    q.add_argument("--algo", choices=["mp", "bp"], default="mp")
    q.add_argument("--damping", type=float)
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--max-iters", type=int, default=20000)
    q.add_argument("--rule", choices=["descent", "increment"], default="descent", help="MP update rule")
    q.add_argument("--seed", type=int, help="random initial messages with this seed")
    q.add_argument("--evidence")
    q.add_argument("--out")
    q.set_defaults(func=cmd_infer)

    q = sub.add_parser("exact", help="brute-force marginals")
    q.add_argument("--model", required=True)
    q.add_argument("--evidence")
    q.add_argument("--out")
    q.set_defaults(func=cmd_exact)

    check = sub.add_parser("check", help="certificates and identities")
    csub = check.add_subparsers(dest="check", required=True, parser_class=Parser)
    q = csub.add_parser("critical")
    q.add_argument("--model", required=True)
    q.add_argument("--beliefs", required=True)
    q.add_argument("--evidence")
    q.add_argument("--section-tol", type=float, default=SECTION_TOL)
    q.add_argument("--critical-tol", type=float, default=CRITICAL_TOL)
    q.set_defaults(func=cmd_check_critical)
    q = csub.add_parser("intertwine")
    q.add_argument("--model", required=True)
    q.add_argument("--target-model", required=True)
    q.add_argument("--transform", required=True)
    q.add_argument("--theorem", type=int, choices=[1, 3], default=1)
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tol", type=float, default=INTERTWINE_TOL)
    q.set_defaults(func=cmd_check_intertwine)
    q = csub.add_parser("tree")
    q.add_argument("--model", required=True)
    q.add_argument("--tol", type=float, default=TREE_TOL)
    q.set_defaults(func=cmd_check_tree)
    q = csub.add_parser("variational")
    q.add_argument("--joint", required=True)
    q.add_argument("--tol", type=float, default=VARIATIONAL_TOL)
    q.set_defaults(func=cmd_check_variational)

    t = sub.add_parser("transform", help="natural transformations")
    tsub = t.add_subparsers(dest="transform_cmd", required=True, parser_class=Parser)
    q = tsub.add_parser("apply")
    q.add_argument("--transform", required=True)
    q.add_argument("--model", required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_transform_apply)

    ps = sub.add_parser("poset", help="order-theoretic data")
    psub = ps.add_subparsers(dest="poset_cmd", required=True, parser_class=Parser)
    q = psub.add_parser("mobius")
    q.add_argument("--model", required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_poset_mobius)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PresheafMPError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
