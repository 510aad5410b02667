"""Hamiltonians, local free energies and the Bethe free energy.

Forbidden states carry ``H = +inf``; ``exp(-inf) = 0`` and ``0 * inf = 0`` inside
expectations.
"""
from __future__ import annotations

import logging

import numpy as np

from .calculus import delta_matrix, mu_dual_covariant
from .errors import AllMassMasked, NegativeFactor, NonPositiveBelief, NotNormalized, ValidationError
from .poset import Poset
from .presheaf import FiniteSetPresheaf, GraphicalSpec, flatten_field, graphical_presheaf, section_violation

log = logging.getLogger(__name__)

SECTION_TOL = 1e-8
CRITICAL_TOL = 1e-6


def finite_mask(H) -> dict:
    return {a: np.isfinite(h) for a, h in H.items()}


def check_subobject(F: FiniteSetPresheaf, H) -> None:
    """Finite-energy states must project to finite-energy states."""
    for a in F.poset:
        h = np.asarray(H[a], dtype=float)
        if h.shape != (F.sizes[a],):
            raise ValidationError(f"hamiltonian of {a!r} has length {len(h)}, expected {F.sizes[a]}")
        if np.isnan(h).any() or (h == -np.inf).any():
            raise ValidationError(f"hamiltonian of {a!r} must be finite or +inf")
    for a, b in F.pairs:
        ok_a = np.isfinite(H[a])
        if not np.all(np.isfinite(H[b])[F.maps[(a, b)][ok_a]]):
            raise ValidationError(f"finite-energy states of {a!r} map onto forbidden states of {b!r}")


def hamiltonians_from_factors(spec: GraphicalSpec, factors, F: FiniteSetPresheaf | None = None) -> dict:
    """``H_a = sum over regions b below a of -ln f_b`` pulled back to ``a``; missing factors are 1."""
    F = graphical_presheaf(spec) if F is None else F
    neg_log = {}
    for b in F.poset:
        if b not in factors:
            neg_log[b] = np.zeros(F.sizes[b])
            continue
        f = np.asarray(factors[b], dtype=float)
        if f.shape != (F.sizes[b],):
            raise ValidationError(f"factor of {b!r} has length {len(f)}, expected {F.sizes[b]}")
        if (f < 0).any() or np.isnan(f).any():
            raise NegativeFactor(f"factor of {b!r} has negative entries")
        with np.errstate(divide="ignore"):
            neg_log[b] = -np.log(f)
    H = {a: neg_log[a].copy() for a in F.poset}
    for a, b in F.pairs:
        H[a] += neg_log[b][F.maps[(a, b)]]
    return H


def fe_differential(H, v) -> dict:
    """``H + ln v + 1``; forbidden states keep ``+inf``."""
    out = {}
    for a, h in H.items():
        v_a = np.asarray(v[a], dtype=float)
        ok = np.isfinite(h)
        if np.any(v_a[ok] <= 0):
            raise NonPositiveBelief(f"belief of {a!r} is not positive on an allowed state")
        r = np.full(len(h), np.inf)
        r[ok] = h[ok] + np.log(v_a[ok]) + 1.0
        out[a] = r
    return out


def local_free_energy(h_a, q_a) -> float:
    """``sum q H + sum q ln q`` with ``0 ln 0 = 0`` and ``0 * inf = 0``."""
    h_a = np.asarray(h_a, dtype=float)
    q_a = np.asarray(q_a, dtype=float)
    pos = q_a > 0
    return float(np.sum(q_a[pos] * h_a[pos]) + np.sum(q_a[pos] * np.log(q_a[pos])))


def g_H(H, weights, l) -> dict:
    """Inverse differential: ``exp(-H + w * l - 1)``, zero on forbidden states."""
    out = {}
    for a, h in H.items():
        w = 1.0 if weights is None else weights[a]
        with np.errstate(over="ignore"):
            r = np.exp(-h + w * l[a] - 1.0)
        if np.isinf(r).any():
            log.warning("g_H overflowed to +inf on element %s", a)
        out[a] = r
    return out


def bethe_free_energy(poset: Poset, H, Q, tol: float = SECTION_TOL) -> float:
    c = poset.mobius.c
    total = 0.0
    for a in poset:
        q = np.asarray(Q[a], dtype=float)
        if abs(q.sum() - 1.0) > tol:
            raise NotNormalized(f"belief of {a!r} sums to {q.sum()!r}")
        if c[a]:
            total += c[a] * local_free_energy(H[a], q)
    return total


def normalize_field(v) -> dict:
    out = {}
    for a, x in v.items():
        s = x.sum()
        if not s > 0:
            raise AllMassMasked(f"no mass left on element {a!r}")
        out[a] = x / s
    return out


def criticality_residual(F: FiniteSetPresheaf, H, Q) -> tuple:
    """``(r_section, r_critical)`` for a candidate critical point ``Q`` of the Bethe energy.

    ``r_critical`` is the Euclidean norm of the part of the Möbius-transformed
    differential that cannot be written as ``d_{F*}(l)`` plus per-element
    constants (the normalisation multipliers); forbidden states are dropped.
    """
    r_section = section_violation(F, Q)
    with np.errstate(invalid="ignore"):  # inf - inf only on forbidden rows, dropped below
        y = flatten_field(F, mu_dual_covariant(F, fe_differential(H, Q)))
    keep = flatten_field(F, finite_mask(H)).astype(bool)
    A = delta_matrix(F).T
    ind = np.zeros((F.dim, len(F.poset)))
    for k, a in enumerate(F.poset):
        ind[F.offsets[a]:F.offsets[a] + F.sizes[a], k] = 1.0
    A = np.hstack([A, ind])[keep]
    y = y[keep]
    coef, *_ = np.linalg.lstsq(A, y, rcond=1e-10)
    r_critical = float(np.linalg.norm(y - A @ coef))
    return r_section, r_critical


def is_critical(F, H, Q, section_tol=SECTION_TOL, critical_tol=CRITICAL_TOL) -> bool:
    rs, rc = criticality_residual(F, H, Q)
    return rs <= section_tol and rc <= critical_tol
