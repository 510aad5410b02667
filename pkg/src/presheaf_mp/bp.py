"""Generalized belief propagation with top-down messages, in the log domain.

``log_m[(a, b)]`` holds ``ln m_{a->b}`` over the states of ``b``.  Forbidden
states (``H = +inf``) carry ``-inf`` messages.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .energy import bethe_free_energy
from .errors import AllMassMasked, ValidationError
from .presheaf import FiniteSetPresheaf


def fiber_logsumexp(values, index, size) -> np.ndarray:
    """``result[y] = ln sum_{x : index[x] = y} exp(values[x])``; empty fibres give ``-inf``."""
    values = np.asarray(values, dtype=float)
    top = np.full(size, -np.inf)
    np.maximum.at(top, index, values)
    shift = np.where(np.isfinite(top), top, 0.0)
    s = np.bincount(index, weights=np.exp(values - shift[index]), minlength=size)
    with np.errstate(divide="ignore"):
        return np.log(s) + shift


def log_sub(x, y) -> np.ndarray:
    """``x - y`` with ``-inf - (-inf) = -inf``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    out = np.full(np.broadcast(x, y).shape, -np.inf)
    ok = np.isfinite(y)
    x, y = np.broadcast_arrays(x, y)
    out[ok] = x[ok] - y[ok]
    return out


def bottom_up(F: FiniteSetPresheaf, log_m) -> dict:
    """Log bottom-up messages: ``n[(a, b)]`` is ``ln n_{b->a}`` over states of ``b``, for ``b <= a``.

    ``ln n_{b->a} = sum of ln m_{c->b}`` over ``c > b`` with ``c`` not below ``a``.
    The ``b = a`` entry therefore collects every message arriving at ``a``.
    """
    P = F.poset
    out = {}
    for a in P:
        for b in P.below(a):
            acc = np.zeros(F.sizes[b])
            for c in P.above(b, strict=True):
                if not P.le(c, a):
                    acc = acc + log_m[(c, b)]
            out[(a, b)] = acc
    return out


def unnormalized_log_beliefs(F: FiniteSetPresheaf, H, log_m) -> dict:
    n = bottom_up(F, log_m)
    out = {}
    for a in F.poset:
        acc = -np.asarray(H[a], dtype=float) + n[(a, a)]
        for b in F.poset.below(a, strict=True):
            acc = acc + n[(a, b)][F.maps[(a, b)]]
        out[a] = acc
    return out


def normalize_log_field(F: FiniteSetPresheaf, logb) -> dict:
    out = {}
    for a in F.poset:
        top = np.max(logb[a])
        if not np.isfinite(top):
            raise AllMassMasked(f"every state of {a!r} has zero belief")
        p = np.exp(logb[a] - top)
        out[a] = p / p.sum()
    return out


def beliefs_bp(F: FiniteSetPresheaf, H, log_m) -> dict:
    return normalize_log_field(F, unnormalized_log_beliefs(F, H, log_m))


def bp_step(F: FiniteSetPresheaf, H, log_m) -> dict:
    """``ln m' = ln m + ln pushforward(b_a) - ln b_b`` with unnormalised beliefs."""
    logb = unnormalized_log_beliefs(F, H, log_m)
    for a in F.poset:
        if not np.isfinite(logb[a]).any():
            raise AllMassMasked(f"every state of {a!r} has zero belief")
    out = {}
    for a, b in F.pairs:
        pushed = fiber_logsumexp(logb[a], F.maps[(a, b)], F.sizes[b])
        out[(a, b)] = log_sub(log_m[(a, b)] + pushed, logb[b])
    return out


def normalize_log_messages(log_m) -> dict:
    """Shift each message so that its exponentials sum to one."""
    out = {}
    for p, v in log_m.items():
        z = logsumexp(v)
        out[p] = v - z if np.isfinite(z) else np.array(v, dtype=float)
    return out


def damp_log(old, new, damping) -> np.ndarray:
    if damping == 1.0:
        return np.array(new, dtype=float)
    out = np.full(len(new), -np.inf)
    ok = np.isfinite(old) & np.isfinite(new)
    out[ok] = (1.0 - damping) * old[ok] + damping * new[ok]
    return out


def log_message_change(old, new) -> float:
    worst = 0.0
    for p in old:
        a, b = old[p], new[p]
        fa, fb = np.isfinite(a), np.isfinite(b)
        if not np.array_equal(fa, fb):
            return np.inf
        if fa.any():
            worst = max(worst, float(np.abs(a[fa] - b[fa]).max()))
    return worst


@dataclass
class BpOptions:
    max_iters: int = 1000
    tol: float = 1e-10
    damping: float = 0.5
    init: str = "ones"
    seed: int | None = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValidationError("damping must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if self.init not in ("ones", "random"):
            raise ValidationError(f"unknown initialisation {self.init!r}")


@dataclass
class BpState:
    log_messages: dict
    iteration: int = 0
    last_delta: float = np.inf


@dataclass
class BpResult:
    state: BpState
    beliefs: dict
    converged: bool
    trace: list = field(default_factory=list)


def initial_log_messages(F: FiniteSetPresheaf, H, init="ones", seed=None) -> dict:
    rng = np.random.default_rng(seed)
    out = {}
    for a, b in F.pairs:
        v = np.zeros(F.sizes[b]) if init == "ones" else rng.uniform(-0.1, 0.1, F.sizes[b])
        v[~np.isfinite(H[b])] = -np.inf
        out[(a, b)] = v
    return normalize_log_messages(out)


def bp_run(F: FiniteSetPresheaf, H, options: BpOptions | None = None, log_m=None) -> BpResult:
    opt = options or BpOptions()
    log_m = initial_log_messages(F, H, opt.init, opt.seed) if log_m is None else normalize_log_messages(log_m)
    trace = []
    state = BpState(log_m)
    converged = False
    for it in range(1, opt.max_iters + 1):
        new = bp_step(F, H, log_m)
        new = normalize_log_messages({p: damp_log(log_m[p], new[p], opt.damping) for p in F.pairs})
        change = log_message_change(log_m, new)
        log_m = new
        beliefs = beliefs_bp(F, H, log_m)
        trace.append({"iteration": it, "delta": change,
                      "bethe": bethe_free_energy(F.poset, H, beliefs)})
        state = BpState(log_m, it, change)
        if change < opt.tol:
            converged = True
            break
    return BpResult(state, beliefs_bp(F, H, log_m), converged, trace)


def bp_fixed_point_residual(F: FiniteSetPresheaf, H, log_m) -> float:
    """Change of the normalised messages under one undamped step."""
    old = normalize_log_messages(log_m)
    return log_message_change(old, normalize_log_messages(bp_step(F, H, old)))
