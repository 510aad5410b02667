"""Degree-0/1 operators on field bundles and message bundles.

Message bundles are dicts keyed by strict pairs ``(a, b)`` (``b < a``) holding a
vector over the set of ``b``.  Degenerate ``a -> a`` messages are never stored.
"""
from __future__ import annotations

import numpy as np

from .presheaf import FiniteSetPresheaf, adjoint, pushforward


def zero_messages(F: FiniteSetPresheaf) -> dict:
    return {(a, b): np.zeros(F.sizes[b]) for a, b in F.pairs}


def flatten_messages(F: FiniteSetPresheaf, l) -> np.ndarray:
    if not F.pairs:
        return np.zeros(0)
    return np.concatenate([np.asarray(l[p], dtype=float) for p in F.pairs])


def unflatten_messages(F: FiniteSetPresheaf, vec) -> dict:
    off = F.message_offsets
    return {(a, b): np.array(vec[off[(a, b)]:off[(a, b)] + F.sizes[b]], dtype=float) for a, b in F.pairs}


def message_inner(F: FiniteSetPresheaf, weights, l, k) -> float:
    """Pairing on messages; the pair ``(a, b)`` uses the product of ``b``."""
    total = 0.0
    for a, b in F.pairs:
        w = 1.0 if weights is None else weights[b]
        total += float(np.dot(w * l[(a, b)], k[(a, b)]))
    return total


def sup_norm(bundle) -> float:
    vals = [np.abs(v).max() for v in bundle.values() if len(v)]
    return float(max(vals)) if vals else 0.0


def delta(F: FiniteSetPresheaf, v) -> dict:
    """``result(a -> b) = pushforward(v_a) - v_b``."""
    return {(a, b): pushforward(F, a, b, v[a]) - v[b] for a, b in F.pairs}


def d_dual(F: FiniteSetPresheaf, weights, l) -> dict:
    """Adjoint of :func:`delta`: outgoing messages lifted by the adjoint, minus incoming ones."""
    out = {a: np.zeros(F.sizes[a]) for a in F.poset}
    for a, b in F.pairs:
        m = l[(a, b)]
        out[a] += adjoint(F, weights, a, b, m)
        out[b] -= m
    return out


def zeta_functor(F: FiniteSetPresheaf, weights, v) -> dict:
    """``result(a) = sum_{b <= a} adjoint(v_b)``."""
    out = {a: np.array(v[a], dtype=float) for a in F.poset}
    for a, b in F.pairs:
        out[a] += adjoint(F, weights, a, b, v[b])
    return out


def mu_functor(F: FiniteSetPresheaf, weights, v) -> dict:
    """Inverse of :func:`zeta_functor`, with integer Möbius coefficients."""
    mu = F.poset.mobius.mu
    out = {a: np.array(v[a], dtype=float) for a in F.poset}
    for a, b in F.pairs:
        c = mu[(a, b)]
        if c:
            out[a] += c * adjoint(F, weights, a, b, v[b])
    return out


def zeta_dual_covariant(F: FiniteSetPresheaf, v) -> dict:
    """Same as :func:`zeta_functor` with plain pullbacks."""
    return zeta_functor(F, None, v)


def mu_dual_covariant(F: FiniteSetPresheaf, v) -> dict:
    """``result(a)(x) = sum_{b <= a} mu(a, b) v_b(F(x))``."""
    return mu_functor(F, None, v)


def delta_matrix(F: FiniteSetPresheaf) -> np.ndarray:
    """Matrix of :func:`delta` from flattened fields to flattened messages."""
    D = np.zeros((F.message_dim, F.dim))
    for a, b in F.pairs:
        r0 = F.message_offsets[(a, b)]
        D[r0 + F.maps[(a, b)], F.offsets[a] + np.arange(F.sizes[a])] += 1.0
        D[r0 + np.arange(F.sizes[b]), F.offsets[b] + np.arange(F.sizes[b])] -= 1.0
    return D

