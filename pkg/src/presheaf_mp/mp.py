"""Operator-form message passing on field and message bundles.

The increment is ``delta(g_H(zeta(d_dual(l))))``.  Its zeros are the fixed
points; the iteration in :func:`mp_run` follows the sign that makes those zeros
attracting (see ``MpOptions.rule``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .bp import normalize_log_messages
from .calculus import (d_dual, delta_matrix, flatten_messages, unflatten_messages,
                       zero_messages, zeta_functor)
from .energy import normalize_field
from .errors import ValidationError
from .presheaf import FiniteSetPresheaf, flatten_field, pushforward


def inner_exponents(F: FiniteSetPresheaf, H, weights, l) -> dict:
    """``-H + w * zeta(d_dual(l)) - 1`` per element (``-inf`` on forbidden states)."""
    z = zeta_functor(F, weights, d_dual(F, weights, l))
    out = {}
    for a in F.poset:
        w = 1.0 if weights is None else weights[a]
        out[a] = -np.asarray(H[a], dtype=float) + w * z[a] - 1.0
    return out


def inner_beliefs(F: FiniteSetPresheaf, H, weights, l) -> dict:
    """Unnormalised beliefs ``g_H(zeta(d_dual(l)))``."""
    with np.errstate(over="ignore"):
        return {a: np.exp(e) for a, e in inner_exponents(F, H, weights, l).items()}


def delta_mp(F: FiniteSetPresheaf, H, weights, l) -> dict:
    """The MP increment; exponentials are shifted per pair before subtracting."""
    ex = inner_exponents(F, H, weights, l)
    out = {}
    for a, b in F.pairs:
        s = max(ex[a].max(), ex[b].max())
        if not np.isfinite(s):
            s = 0.0 if s == -np.inf else s
        with np.errstate(over="ignore", invalid="ignore"):
            diff = pushforward(F, a, b, np.exp(ex[a] - s)) - np.exp(ex[b] - s)
            out[(a, b)] = np.exp(s) * diff
    return out


def beliefs_mp(F: FiniteSetPresheaf, H, weights, l) -> dict:
    ex = inner_exponents(F, H, weights, l)
    # shift before exponentiating; normalisation removes it
    return normalize_field({a: np.exp(e - (e.max() if np.isfinite(e.max()) else 0.0)) for a, e in ex.items()})


def mp_step(F: FiniteSetPresheaf, H, weights, l, damping: float = 1.0) -> dict:
    """``l + damping * delta_mp(l)``; ``damping = 1`` is the undamped rule."""
    if not 0.0 < damping <= 1.0:
        raise ValidationError("damping must lie in (0, 1]")
    d = delta_mp(F, H, weights, l)
    return {p: l[p] + damping * d[p] for p in F.pairs}


@dataclass
class MpOptions:
    """Iteration settings.

    ``rule="descent"`` steps ``l - damping * delta_mp(l) / s`` with ``s`` the
    largest entry of ``w * g`` (the inner beliefs); this is the direction in which
    fixed points attract.  ``rule="increment"`` is the literal ``mp_step`` and is
    kept for comparison; it moves away from fixed points.
    """

    max_iters: int = 20000
    tol: float = 1e-10
    damping: float = 0.5
    rule: str = "descent"
    init: str = "zeros"
    seed: int | None = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValidationError("damping must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if self.rule not in ("descent", "increment"):
            raise ValidationError(f"unknown rule {self.rule!r}")
        if self.init not in ("zeros", "random"):
            raise ValidationError(f"unknown initialisation {self.init!r}")


@dataclass
class MpResult:
    messages: dict
    beliefs: dict | None
    converged: bool
    iterations: int
    residual: float
    trace: list = field(default_factory=list)


def initial_messages(F: FiniteSetPresheaf, init="zeros", seed=None) -> dict:
    if init == "zeros":
        return zero_messages(F)
    rng = np.random.default_rng(seed)
    return {(a, b): rng.uniform(-0.1, 0.1, F.sizes[b]) for a, b in F.pairs}


class MpOperator:
    """Dense-matrix form of the MP increment for one presheaf, Hamiltonian and weights.

    Matches :func:`delta_mp` and :func:`beliefs_mp`; used inside :func:`mp_run`
    where the same operators are applied thousands of times.
    """

    def __init__(self, F: FiniteSetPresheaf, H, weights=None):
        self.F = F
        w = np.ones(F.dim) if weights is None else flatten_field(F, weights)
        self.w = w
        D = delta_matrix(F)
        w_msg = np.concatenate([w[F.offsets[b]:F.offsets[b] + F.sizes[b]] for _, b in F.pairs]) \
            if F.pairs else np.zeros(0)
        d_dual_mat = (D.T * w_msg[None, :]) / w[:, None]
        Z = np.eye(F.dim)
        for a, b in F.pairs:
            m = F.maps[(a, b)]
            rows = F.offsets[a] + np.arange(F.sizes[a])
            Z[rows, F.offsets[b] + m] += w[F.offsets[b] + m] / w[rows]
        self.lift = (Z @ d_dual_mat) * w[:, None]
        self.neg_h = -flatten_field(F, H)
        self.allowed = np.isfinite(self.neg_h)
        # per message row: source/target element index and the pushforward pattern
        els = list(F.poset)
        self.elem_of_state = np.concatenate([np.full(F.sizes[a], k) for k, a in enumerate(els)])
        self.starts = np.array([F.offsets[a] for a in els], dtype=np.int64)
        self.push = np.clip(D, 0.0, None)
        self.self_rows = np.zeros((F.message_dim, F.dim))
        src, dst = [], []
        for a, b in F.pairs:
            r0 = F.message_offsets[(a, b)]
            r = r0 + np.arange(F.sizes[b])
            self.self_rows[r, F.offsets[b] + np.arange(F.sizes[b])] = 1.0
            src += [els.index(a)] * F.sizes[b]
            dst += [els.index(b)] * F.sizes[b]
        self.src, self.dst = np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)
        self.c = np.array([F.poset.mobius.c[a] for a in els], dtype=float)

    def exponents(self, lvec) -> np.ndarray:
        return self.neg_h + self.lift @ lvec - 1.0

    def element_max(self, e) -> np.ndarray:
        return np.maximum.reduceat(e, self.starts) if len(e) else np.zeros(0)

    def increment(self, lvec, e=None) -> np.ndarray:
        e = self.exponents(lvec) if e is None else e
        t = self.element_max(e)
        t = np.where(np.isfinite(t), t, 0.0)
        g_hat = np.exp(e - t[self.elem_of_state])
        s = np.maximum(t[self.src], t[self.dst])
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(s) * (np.exp(t[self.src] - s) * (self.push @ g_hat)
                                - np.exp(t[self.dst] - s) * (self.self_rows @ g_hat))

    def weighted_max(self, e) -> float:
        with np.errstate(over="ignore"):
            return float(np.max(self.w * np.exp(e))) if len(e) else 0.0

    def beliefs(self, e) -> np.ndarray:
        t = self.element_max(e)
        p = np.exp(e - t[self.elem_of_state])
        return p / np.add.reduceat(p, self.starts)[self.elem_of_state]

    def bethe(self, q) -> float:
        pos = q > 0
        terms = np.zeros_like(q)
        terms[pos] = q[pos] * (np.log(q[pos]) - self.neg_h[pos])
        return float(np.dot(self.c, np.add.reduceat(terms, self.starts)))


def mp_run(F: FiniteSetPresheaf, H, weights=None, options: MpOptions | None = None, l=None) -> MpResult:
    opt = options or MpOptions()
    l = initial_messages(F, opt.init, opt.seed) if l is None else {p: np.array(l[p], dtype=float) for p in F.pairs}
    op = MpOperator(F, H, weights)
    lvec = flatten_messages(F, l)
    trace = []
    e = op.exponents(lvec)
    d = op.increment(lvec, e)
    r = float(np.abs(d).max()) if len(d) else 0.0
    it = 0
    while np.isfinite(r) and r >= opt.tol and it < opt.max_iters:
        if opt.rule == "descent":
            s = op.weighted_max(e)
            if not (np.isfinite(s) and s > 0):
                r = np.inf
                break
            lvec = lvec - (opt.damping / s) * d
        else:
            lvec = lvec + opt.damping * d
        it += 1
        e = op.exponents(lvec)
        d = op.increment(lvec, e)
        r = float(np.abs(d).max()) if len(d) else 0.0
        entry = {"iteration": it, "delta": r}
        if np.isfinite(r):
            entry["bethe"] = op.bethe(op.beliefs(e))
        trace.append(entry)
    converged = bool(np.isfinite(r) and r < opt.tol)
    l = unflatten_messages(F, lvec)
    try:
        beliefs = beliefs_mp(F, H, weights, l)
    except (ValueError, FloatingPointError):
        beliefs = None
    return MpResult(l, beliefs, converged, it, float(r), trace)


# --------------------------------------------------------------------------
# correspondence with BP messages (unit weights)


def _constant_gauge_matrix(F: FiniteSetPresheaf) -> np.ndarray:
    """``K[a, p]``: log-mass change at ``a`` from a unit constant on message ``p``."""
    P = F.poset
    idx = P.index
    d = np.zeros((len(P), len(F.pairs)))
    for k, (a, b) in enumerate(F.pairs):
        d[idx[a], k] += 1.0
        d[idx[b], k] -= 1.0
    zeta = P.leq.T.astype(float)
    return zeta @ d


def _log_masses(F, H, l) -> np.ndarray:
    ex = inner_exponents(F, H, None, l)
    return np.array([logsumexp(ex[a]) for a in F.poset])


def transfer_bp_to_mp(F: FiniteSetPresheaf, H, log_m) -> dict:
    """MP messages from BP log-messages (unit weights).

    The sign flips, masked entries become 0, and per-pair constants are chosen
    by least squares so that neighbouring inner beliefs carry equal mass.
    """
    base = normalize_log_messages(log_m)
    l = {p: np.where(np.isfinite(v), -v, 0.0) for p, v in base.items()}
    if not F.pairs:
        return l
    L = _log_masses(F, H, l)
    K = _constant_gauge_matrix(F)
    idx = F.poset.index
    rows, rhs = [], []
    for a, b in F.pairs:
        rows.append(K[idx[a]] - K[idx[b]])
        rhs.append(L[idx[b]] - L[idx[a]])
    c, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return {p: l[p] + c[k] for k, p in enumerate(F.pairs)}


def transfer_mp_to_bp(l, H=None) -> dict:
    """BP log-messages from MP messages: ``-l``, with ``-inf`` on forbidden states."""
    out = {}
    for (a, b), v in l.items():
        m = -np.asarray(v, dtype=float)
        if H is not None:
            m = np.where(np.isfinite(H[b]), m, -np.inf)
        out[(a, b)] = m
    return out
