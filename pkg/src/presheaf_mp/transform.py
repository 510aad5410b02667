"""Natural transformations between presheaves (coherent binnings) and the
numerical checks that MP commutes with them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bp import fiber_logsumexp
from .calculus import sup_norm
from .errors import Mismatch, NaturalityFailed, NotSurjective, PosetMismatch, ValidationError
from .mp import MpOptions, delta_mp, mp_run, mp_step
from .presheaf import FiniteSetPresheaf, GraphicalSpec, graphical_presheaf


@dataclass(frozen=True, eq=False)
class NaturalTransformation:
    source: FiniteSetPresheaf
    target: FiniteSetPresheaf
    comps: dict

    def __post_init__(self):
        F, G = self.source, self.target
        comps = {}
        for a in F.poset:
            c = np.asarray(self.comps.get(a, ()), dtype=np.int64)
            if c.shape != (F.sizes[a],):
                raise ValidationError(f"component {a!r} has length {len(c)}, expected {F.sizes[a]}")
            if a in G.sizes and len(c) and (c.min() < 0 or c.max() >= G.sizes[a]):
                raise ValidationError(f"component {a!r} has values outside the target set")
            comps[a] = c
        object.__setattr__(self, "comps", comps)

    def validate(self) -> bool:
        """True iff every naturality square commutes."""
        if not self.source.poset.same_as(self.target.poset):
            raise PosetMismatch("source and target live over different posets")
        return naturality_failure(self) is None

    def is_surjective(self) -> bool:
        return all(len(np.unique(self.comps[a])) == self.target.sizes[a] for a in self.source.poset)


def naturality_failure(phi: NaturalTransformation):
    F, G = phi.source, phi.target
    for a, b in F.pairs:
        if not np.array_equal(G.maps[(a, b)][phi.comps[a]], phi.comps[b][F.maps[(a, b)]]):
            return a, b
    return None


def require_natural(phi: NaturalTransformation) -> None:
    if not phi.validate():
        a, b = naturality_failure(phi)
        raise NaturalityFailed(f"naturality square {a}->{b} does not commute")


def identity_transformation(F: FiniteSetPresheaf) -> NaturalTransformation:
    return NaturalTransformation(F, F, {a: np.arange(F.sizes[a]) for a in F.poset})


def push_vector(phi: NaturalTransformation, a, u) -> np.ndarray:
    return np.bincount(phi.comps[a], weights=np.asarray(u, dtype=float), minlength=phi.target.sizes[a])


def phi_adjoint(phi: NaturalTransformation, weights_F, weights_G, a, v) -> np.ndarray:
    """Adjoint of :func:`push_vector` for the two diagonal products."""
    c = phi.comps[a]
    out = np.asarray(v, dtype=float)[c]
    if weights_G is not None:
        out = out * weights_G[a][c]
    if weights_F is not None:
        out = out / weights_F[a]
    return out


def phi_weights(phi: NaturalTransformation) -> dict:
    """Fibre sizes: ``w_a(x) = |phi_a^{-1}(phi_a(x))|``."""
    out = {}
    for a in phi.source.poset:
        c = phi.comps[a]
        out[a] = np.bincount(c, minlength=phi.target.sizes[a])[c].astype(float)
    return out


def push_hamiltonian(phi: NaturalTransformation, H) -> dict:
    """``-ln sum over the fibre of exp(-H)``; ``+inf`` off the image."""
    return {a: -fiber_logsumexp(-np.asarray(H[a], dtype=float), phi.comps[a], phi.target.sizes[a])
            for a in phi.source.poset}


def lift_messages(phi: NaturalTransformation, l, weights_F=None, weights_G=None) -> dict:
    return {(a, b): phi_adjoint(phi, weights_F, weights_G, b, l[(a, b)]) for a, b in phi.source.pairs}


def push_messages(phi: NaturalTransformation, l) -> dict:
    return {(a, b): push_vector(phi, b, l[(a, b)]) for a, b in phi.source.pairs}


def lift_field(phi, v, weights_F=None, weights_G=None) -> dict:
    return {a: phi_adjoint(phi, weights_F, weights_G, a, v[a]) for a in phi.source.poset}


def push_field(phi, v) -> dict:
    return {a: push_vector(phi, a, v[a]) for a in phi.source.poset}


def random_messages(P: FiniteSetPresheaf, rng, scale=1.0) -> dict:
    return {(a, b): rng.normal(scale=scale, size=P.sizes[b]) for a, b in P.pairs}


def bundle_diff(x, y) -> float:
    return sup_norm({k: np.asarray(x[k]) - np.asarray(y[k]) for k in x})


def intertwining_residual(phi, H, l, weights_F=None, weights_G=None) -> float:
    """``|dMP_G(l) - push(dMP_F(lift(l)))|`` for one message bundle on the target."""
    Ht = push_hamiltonian(phi, H)
    lhs = delta_mp(phi.target, Ht, weights_G, l)
    rhs = push_messages(phi, delta_mp(phi.source, H, weights_F, lift_messages(phi, l, weights_F, weights_G)))
    return bundle_diff(lhs, rhs)


def check_theorem1(F, G, phi: NaturalTransformation, H, trials=100, weights_F=None, weights_G=None,
                   seed=0, scale=1.0) -> float:
    """Largest intertwining residual of the MP increment over random target messages."""
    if phi.source is not F or phi.target is not G:
        phi = NaturalTransformation(F, G, dict(phi.comps))
    require_natural(phi)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        l = random_messages(G, rng, scale)
        worst = max(worst, intertwining_residual(phi, H, l, weights_F, weights_G))
    return worst


def isometry_residuals(phi: NaturalTransformation, trials=20, seed=0) -> tuple:
    """``(|push(lift(v)) - v|, |<lift f, lift g>_phi - <f, g>|)`` maximised over random ``v, f, g`` on the image."""
    w = phi_weights(phi)
    rng = np.random.default_rng(seed)
    r1 = r2 = 0.0
    for _ in range(trials):
        for a in phi.source.poset:
            on_image = np.zeros(phi.target.sizes[a], dtype=bool)
            on_image[phi.comps[a]] = True
            f, g = (rng.normal(size=phi.target.sizes[a]) * on_image for _ in range(2))
            back = push_vector(phi, a, phi_adjoint(phi, w, None, a, f))
            r1 = max(r1, float(np.abs(back - f).max()))
            lf, lg = phi_adjoint(phi, w, None, a, f), phi_adjoint(phi, w, None, a, g)
            r2 = max(r2, abs(float(np.dot(w[a] * lf, lg)) - float(np.dot(f, g))))
    return r1, r2


def check_isometry(phi: NaturalTransformation, tol=1e-12, trials=20, seed=0) -> tuple:
    r1, r2 = isometry_residuals(phi, trials, seed)
    return r1 <= tol, r2 <= tol


def check_theorem3(F, G, phi: NaturalTransformation, H, trials=100, seed=0, scale=1.0) -> float:
    """Largest ``|MP_G(l) - push(MP_F(lift(l)))|`` with fibre-size weights on the source."""
    if phi.source is not F or phi.target is not G:
        phi = NaturalTransformation(F, G, dict(phi.comps))
    require_natural(phi)
    if not phi.is_surjective():
        raise NotSurjective("every component must be surjective")
    w = phi_weights(phi)
    Ht = push_hamiltonian(phi, H)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        l = random_messages(G, rng, scale)
        lhs = mp_step(G, Ht, None, l, 1.0)
        rhs = push_messages(phi, mp_step(F, H, w, lift_messages(phi, l, w, None), 1.0))
        worst = max(worst, bundle_diff(lhs, rhs))
    return worst


def same_presheaf(F: FiniteSetPresheaf, G: FiniteSetPresheaf) -> bool:
    if F is G:
        return True
    if not F.poset.same_as(G.poset) or F.sizes != G.sizes:
        return False
    return all(np.array_equal(F.maps[p], G.maps[p]) for p in F.pairs)


def compose(phi: NaturalTransformation, psi: NaturalTransformation) -> NaturalTransformation:
    """``psi`` after ``phi``."""
    if not same_presheaf(phi.target, psi.source):
        raise Mismatch("target of the first transformation is not the source of the second")
    out = NaturalTransformation(phi.source, psi.target,
                                {a: psi.comps[a][phi.comps[a]] for a in phi.source.poset})
    require_natural(out)
    return out


def image_subpresheaf(phi: NaturalTransformation) -> tuple:
    """The image as a presheaf, with its embedding into the target."""
    require_natural(phi)
    G = phi.target
    states = {a: np.unique(phi.comps[a]) for a in G.poset}
    local = {}
    for a in G.poset:
        idx = np.full(G.sizes[a], -1, dtype=np.int64)
        idx[states[a]] = np.arange(len(states[a]))
        local[a] = idx
    maps = {(a, b): local[b][G.maps[(a, b)][states[a]]] for a, b in G.pairs}
    Im = FiniteSetPresheaf(G.poset, {a: len(states[a]) for a in G.poset}, maps)
    return Im, NaturalTransformation(Im, G, {a: states[a].copy() for a in G.poset})


def composition_residuals(phi: NaturalTransformation, psi: NaturalTransformation, H, trials=20, seed=0,
                          weights=(None, None, None)) -> tuple:
    """Functoriality checks for a chain ``F -> G -> L``.

    Returns ``(hamiltonian_residual, transport_residual)``: the first compares
    pushing the Hamiltonian in one or two steps; the second compares the MP
    increment transported along the composite with the two-step transport.
    """
    chi = compose(phi, psi)
    wF, wG, wL = weights
    H1 = push_hamiltonian(chi, H)
    H2 = push_hamiltonian(psi, push_hamiltonian(phi, H))
    r_h = 0.0
    for a in H1:
        fin = np.isfinite(H1[a])
        if not np.array_equal(fin, np.isfinite(H2[a])):
            r_h = np.inf
            break
        if fin.any():
            r_h = max(r_h, float(np.abs(H1[a][fin] - H2[a][fin]).max()))
    rng = np.random.default_rng(seed)
    F, L = phi.source, psi.target
    r_t = 0.0
    for _ in range(trials):
        l = random_messages(L, rng)
        direct = push_messages(chi, delta_mp(F, H, wF, lift_messages(chi, l, wF, wL)))
        lifted = lift_messages(phi, lift_messages(psi, l, wG, wL), wF, wG)
        two_step = push_messages(psi, push_messages(phi, delta_mp(F, H, wF, lifted)))
        r_t = max(r_t, bundle_diff(direct, two_step))
    return r_h, r_t


def lumped_hamiltonian(phi: NaturalTransformation, h_target) -> dict:
    """A source Hamiltonian constant on every fibre: ``H_a(x) = h_a(phi_a(x))``."""
    return {a: np.asarray(h_target[a], dtype=float)[phi.comps[a]] for a in phi.source.poset}


def fixed_point_transport(phi: NaturalTransformation, H, options: MpOptions | None = None) -> dict:
    """Run MP on the source (fibre-size weights) from zero messages and push the result.

    Reports the MP residual on the target at the pushed messages, and how far the
    source fixed point is from the image of the lift (``l - lift(push(l))``); the
    pushed messages are a target fixed point whenever that distance vanishes.
    """
    require_natural(phi)
    if not phi.is_surjective():
        raise NotSurjective("every component must be surjective")
    F, G = phi.source, phi.target
    w = phi_weights(phi)
    res = mp_run(F, H, w, options)
    pushed = push_messages(phi, res.messages)
    target_residual = sup_norm(delta_mp(G, push_hamiltonian(phi, H), None, pushed))
    back = lift_messages(phi, pushed, w, None)
    return {"converged": res.converged, "iterations": res.iterations, "source_residual": res.residual,
            "target_residual": target_residual, "off_image": bundle_diff(res.messages, back),
            "messages": pushed}


def coordinate_binning(spec: GraphicalSpec, variable: str, bins) -> tuple:
    """Bin the values of one variable in every region that contains it.

    ``bins[k]`` is the new value of old value ``k``.  Returns ``(target_spec, phi)``.
    """
    bins = np.asarray(bins, dtype=np.int64)
    dom = spec.domain
    if variable not in dom:
        raise ValidationError(f"unknown variable {variable!r}")
    if bins.shape != (dom[variable],) or bins.min() < 0:
        raise ValidationError("bins must give a nonnegative value for every old value")
    new_size = int(bins.max()) + 1
    target = GraphicalSpec([(n, new_size if n == variable else k) for n, k in spec.variables],
                           [list(r) for r in spec.regions])
    F, G = graphical_presheaf(spec), graphical_presheaf(target)
    comps = {}
    for r in spec.regions:
        name = spec.region_name(r)
        c = np.zeros(F.sizes[name], dtype=np.int64)
        for x in range(F.sizes[name]):
            asg = spec.decode(r, x)
            if variable in asg:
                asg[variable] = bins[asg[variable]]
            c[x] = target.encode(r, asg)
        comps[name] = c
    return target, NaturalTransformation(F, G, comps)
