"""Brute-force ground truth over the full configuration space."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp
from scipy.stats import entropy

from .energy import hamiltonians_from_factors
from .errors import (InconsistentEvidence, NegativeFactor, NotTree, SearchSpaceTooLarge, UnknownElement,
                     ValidationError, ZeroEvidence, ZeroPartition)
from .presheaf import GraphicalSpec, graphical_presheaf

JOINT_CAP = 10 ** 7


def _check_space(spec: GraphicalSpec, cap: int) -> int:
    n = math.prod(k for _, k in spec.variables)
    if n > cap:
        raise SearchSpaceTooLarge(f"{n} joint configurations exceed the cap {cap}")
    return n


def _evidence_mask(spec: GraphicalSpec, evidence) -> np.ndarray:
    names = tuple(spec.names)
    n = spec.region_size(names)
    keep = np.ones(n, dtype=bool)
    for v, val in (evidence or {}).items():
        if v not in spec.domain:
            raise UnknownElement(f"evidence on undeclared variable {v!r}")
        if not 0 <= int(val) < spec.domain[v]:
            raise ValidationError(f"evidence value {val} out of range for {v!r}")
        keep &= spec.projection(names, (v,)) == int(val)
    return keep


def log_joint(spec: GraphicalSpec, factors=None, hamiltonians=None, cap: int = JOINT_CAP) -> np.ndarray:
    """Unnormalised log-probabilities over all variables (first-declared least significant).

    From factors: ``sum_r ln f_r``.  From Hamiltonians alone: ``-sum_a c(a) H_a``.
    """
    _check_space(spec, cap)
    names = tuple(spec.names)
    out = np.zeros(spec.region_size(names))
    if factors is not None:
        for name, f in factors.items():
            f = np.asarray(f, dtype=float)
            if (f < 0).any():
                raise NegativeFactor(f"factor of {name!r} has negative entries")
            with np.errstate(divide="ignore"):
                out += np.log(f)[spec.projection(names, spec.region_of(name))]
        return out
    if hamiltonians is None:
        return out
    c = graphical_presheaf(spec).poset.mobius.c
    for name, h in hamiltonians.items():
        if c[name]:
            h = np.asarray(h, dtype=float)[spec.projection(names, spec.region_of(name))]
            with np.errstate(invalid="ignore"):
                term = -c[name] * h
            out += np.where(np.isinf(h), -np.inf, term)
    return out


def exact_joint(spec: GraphicalSpec, factors=None, hamiltonians=None, evidence=None,
                cap: int = JOINT_CAP) -> np.ndarray:
    lj = log_joint(spec, factors, hamiltonians, cap)
    lj = np.where(_evidence_mask(spec, evidence), lj, -np.inf)
    z = logsumexp(lj)
    if not np.isfinite(z):
        raise ZeroPartition("every configuration has zero probability")
    return np.exp(lj - z)


def log_partition(spec: GraphicalSpec, factors=None, hamiltonians=None, evidence=None) -> float:
    lj = log_joint(spec, factors, hamiltonians)
    return float(logsumexp(np.where(_evidence_mask(spec, evidence), lj, -np.inf)))


def exact_marginals(joint, spec: GraphicalSpec) -> dict:
    names = tuple(spec.names)
    return {spec.region_name(r): np.bincount(spec.projection(names, r), weights=joint,
                                             minlength=spec.region_size(r))
            for r in spec.regions}


def marginal(joint, spec: GraphicalSpec, variables) -> np.ndarray:
    order = {n: i for i, n in enumerate(spec.names)}
    r = tuple(sorted(variables, key=order.__getitem__))
    return np.bincount(spec.projection(tuple(spec.names), r), weights=joint, minlength=spec.region_size(r))


def tree_structure(spec: GraphicalSpec) -> tuple:
    """``(edges, degree)`` of the graph whose edges are the two-variable regions; NotTree on cycles."""
    if any(len(r) > 2 for r in spec.regions):
        raise NotTree("regions with more than two variables do not form a graph")
    edges = [r for r in spec.regions if len(r) == 2]
    parent = {v: v for v in spec.names}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            raise NotTree(f"edge {u},{v} closes a cycle")
        parent[ru] = rv
    degree = {v: sum(v in e for e in edges) for v in spec.names}
    return edges, degree


def tree_factorization_check(spec: GraphicalSpec, joint) -> float:
    """Largest deviation of the joint from its edge/vertex marginal factorisation."""
    edges, degree = tree_structure(spec)
    names = tuple(spec.names)
    approx = np.ones(len(joint))
    for e in edges:
        approx *= marginal(joint, spec, e)[spec.projection(names, e)]
    for v in names:
        if degree[v] != 1:
            pv = marginal(joint, spec, (v,))[spec.projection(names, (v,))]
            with np.errstate(divide="ignore", invalid="ignore"):
                approx = approx / pv ** (degree[v] - 1)
    approx = np.where(np.isfinite(approx), approx, 0.0)
    return float(np.abs(np.asarray(joint) - approx).max())


def entropy_decomposition_check(spec: GraphicalSpec, joint, marginals=None) -> float:
    """``|S(P) - (sum_e S(P_e) - sum_v (deg v - 1) S(P_v))|``; ``marginals`` overrides the joint's own."""
    edges, degree = tree_structure(spec)

    def m(vars_):
        if marginals is not None:
            return np.asarray(marginals[",".join(vars_)], dtype=float)
        return marginal(joint, spec, vars_)

    local = sum(entropy(m(e)) for e in edges) - sum((degree[v] - 1) * entropy(m((v,))) for v in spec.names)
    return float(abs(entropy(joint) - local))


def variational_free_energy(joint_xy, y_obs: int, Q) -> float:
    """``E_Q[-ln P(x, y)] - S(Q)`` for a joint matrix indexed ``[x, y]``."""
    col = np.asarray(joint_xy, dtype=float)[:, y_obs]
    Q = np.asarray(Q, dtype=float)
    pos = Q > 0
    if np.any(col[pos] <= 0):
        return np.inf
    return float(np.sum(Q[pos] * (-np.log(col[pos]))) + np.sum(Q[pos] * np.log(Q[pos])))


def variational_identity_check(joint_xy, y_obs: int) -> float:
    """``|F(posterior) + ln P_Y(y)|``."""
    P = np.asarray(joint_xy, dtype=float)
    P = P / P.sum()
    py = P[:, y_obs].sum()
    if not py > 0:
        raise ZeroEvidence(f"observation {y_obs} has zero probability")
    post = P[:, y_obs] / py
    return abs(variational_free_energy(P, y_obs, post) + math.log(py))


def mask_evidence(spec: GraphicalSpec, H, observed) -> dict:
    """Copy of ``H`` with ``+inf`` on every state that contradicts the observation."""
    dom = spec.domain
    observed = observed or {}
    for v, val in observed.items():
        if v not in dom:
            raise UnknownElement(f"evidence on undeclared variable {v!r}")
        if not 0 <= int(val) < dom[v]:
            raise ValidationError(f"evidence value {val} out of range for {v!r}")
    out = {a: np.array(h, dtype=float) for a, h in H.items()}
    for r in spec.regions:
        name = spec.region_name(r)
        obs = [v for v in r if v in observed]
        if not obs:
            continue
        bad = np.zeros(len(out[name]), dtype=bool)
        for v in obs:
            bad |= spec.projection(r, (v,)) != int(observed[v])
        out[name][bad] = np.inf
        if not np.isfinite(out[name]).any():
            raise InconsistentEvidence(f"evidence leaves no allowed state in region {name!r}")
    return out


def conditioning_to_hamiltonian(spec: GraphicalSpec, factors, observed, F=None) -> dict:
    """Hamiltonians of the factors, masked by the observation."""
    F = graphical_presheaf(spec) if F is None else F
    return mask_evidence(spec, hamiltonians_from_factors(spec, factors, F), observed)
