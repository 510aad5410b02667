"""Presheaves of finite sets over a poset and their linearisations.

A presheaf stores, for every element ``a`` a set ``{0, ..., size(a)-1}`` and,
for every strict pair ``b < a``, an index array ``maps[(a, b)]`` of length
``size(a)`` with values in ``range(size(b))``.  Vectors over the sets are
numpy arrays; a field bundle is a dict ``element -> array``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import (DuplicateRegion, EmptyRegion, NotComparable, SearchSpaceTooLarge,
                     UnknownElement, ValidationError)
from .poset import Poset, build_poset

SECTION_CAP = 10 ** 7


@dataclass(frozen=True, eq=False)
class FiniteSetPresheaf:
    poset: Poset
    sizes: dict
    maps: dict

    def __post_init__(self):
        for a in self.poset:
            if a not in self.sizes:
                raise ValidationError(f"missing set size for element {a!r}")
            if int(self.sizes[a]) < 1:
                raise ValidationError(f"set of element {a!r} must be nonempty")
        for b, a in self.poset.relation_pairs():
            if (a, b) not in self.maps:
                raise ValidationError(f"missing map {a}->{b}")
            m = self.maps[(a, b)]
            if m.shape != (self.sizes[a],):
                raise ValidationError(f"map {a}->{b} has length {len(m)}, expected {self.sizes[a]}")
            if len(m) and (m.min() < 0 or m.max() >= self.sizes[b]):
                raise ValidationError(f"map {a}->{b} has values outside [0, {self.sizes[b]})")
        extra = set(self.maps) - {(a, b) for b, a in self.poset.relation_pairs()}
        if extra:
            a, b = sorted(extra)[0]
            raise ValidationError(f"map {a}->{b} given but {b!r} <= {a!r} does not hold")
        bad = composition_violation(self)
        if bad is not None:
            a, b, c = bad
            raise ValidationError(f"maps do not compose on triple ({a}, {b}, {c}): "
                                  f"{b}->{c} after {a}->{b} differs from {a}->{c}")

    @cached_property
    def pairs(self) -> tuple:
        """Strict pairs ``(a, b)`` with ``b < a``; a-major, b-minor in element order."""
        els = self.poset.elements
        return tuple((a, b) for a in els for b in els if a != b and self.poset.le(b, a))

    @cached_property
    def offsets(self) -> dict:
        out, k = {}, 0
        for a in self.poset:
            out[a] = k
            k += self.sizes[a]
        return out

    @cached_property
    def dim(self) -> int:
        return sum(self.sizes[a] for a in self.poset)

    @cached_property
    def message_offsets(self) -> dict:
        out, k = {}, 0
        for a, b in self.pairs:
            out[(a, b)] = k
            k += self.sizes[b]
        return out

    @cached_property
    def message_dim(self) -> int:
        return sum(self.sizes[b] for _, b in self.pairs)

    def map(self, a, b) -> np.ndarray:
        if a == b:
            return np.arange(self.sizes[a])
        try:
            return self.maps[(a, b)]
        except KeyError:
            raise NotComparable(f"{b!r} <= {a!r} does not hold") from None


def composition_violation(F: FiniteSetPresheaf):
    """First triple ``(a, b, c)`` with ``c <= b <= a`` where the maps fail to compose, else None."""
    P = F.poset
    for a in P:
        for b in P.below(a, strict=True):
            for c in P.below(b, strict=True):
                if not np.array_equal(F.maps[(b, c)][F.maps[(a, b)]], F.maps[(a, c)]):
                    return a, b, c
    return None


def identity_presheaf(poset: Poset, size: int | Mapping) -> FiniteSetPresheaf:
    sizes = {a: (size[a] if isinstance(size, Mapping) else size) for a in poset}
    maps = {}
    for b, a in poset.relation_pairs():
        if sizes[a] != sizes[b]:
            raise ValidationError("identity presheaf needs equal sizes on comparable elements")
        maps[(a, b)] = np.arange(sizes[a])
    return FiniteSetPresheaf(poset, sizes, maps)


# --------------------------------------------------------------------------
# graphical presheaves


@dataclass(frozen=True)
class GraphicalSpec:
    """Variables ``(name, domain_size)`` and regions (collections of variable names)."""

    variables: tuple
    regions: tuple

    def __init__(self, variables, regions):
        variables = tuple((str(n), int(k)) for n, k in variables)
        names = [n for n, _ in variables]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate variable names")
        order = {n: i for i, n in enumerate(names)}
        canon, seen = [], set()
        for r in regions:
            r = list(r)
            if not r:
                raise EmptyRegion("regions must be nonempty")
            for v in r:
                if v not in order:
                    raise UnknownElement(f"region uses undeclared variable {v!r}")
            key = tuple(sorted(set(r), key=order.__getitem__))
            if key in seen:
                raise DuplicateRegion(f"region {set(key)} listed twice")
            seen.add(key)
            canon.append(key)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "regions", tuple(canon))

    @property
    def names(self) -> list:
        return [n for n, _ in self.variables]

    @property
    def domain(self) -> dict:
        return dict(self.variables)

    def region_name(self, region) -> str:
        return ",".join(region)

    @property
    def region_names(self) -> list:
        return [self.region_name(r) for r in self.regions]

    def region_of(self, name) -> tuple:
        return self.regions[self.region_names.index(name)]

    def region_size(self, region) -> int:
        dom = self.domain
        return math.prod(dom[v] for v in region)

    def encode(self, region, assignment: Mapping) -> int:
        """Mixed-radix index; the first-declared variable is the least significant digit."""
        dom, k, stride = self.domain, 0, 1
        for v in region:
            k += int(assignment[v]) * stride
            stride *= dom[v]
        return k

    def decode(self, region, index: int) -> dict:
        dom, out = self.domain, {}
        for v in region:
            out[v] = index % dom[v]
            index //= dom[v]
        return out

    def projection(self, region, subregion) -> np.ndarray:
        """Index array sending states of ``region`` to states of ``subregion``."""
        dom = self.domain
        n = self.region_size(region)
        idx = np.arange(n)
        out = np.zeros(n, dtype=np.int64)
        stride = 1
        sub_stride = {}
        s = 1
        for v in subregion:
            sub_stride[v] = s
            s *= dom[v]
        for v in region:
            digit = (idx // stride) % dom[v]
            if v in sub_stride:
                out += digit * sub_stride[v]
            stride *= dom[v]
        return out

    def poset(self) -> Poset:
        names = self.region_names
        pairs = [(names[j], names[i])
                 for i, a in enumerate(self.regions) for j, b in enumerate(self.regions)
                 if i != j and set(b) <= set(a)]
        return build_poset(names, pairs)


def graphical_presheaf(spec: GraphicalSpec) -> FiniteSetPresheaf:
    P = spec.poset()
    sizes = {spec.region_name(r): spec.region_size(r) for r in spec.regions}
    maps = {}
    for b_name, a_name in P.relation_pairs():
        maps[(a_name, b_name)] = spec.projection(spec.region_of(a_name), spec.region_of(b_name))
    return FiniteSetPresheaf(P, sizes, maps)


# --------------------------------------------------------------------------
# linear extension and its dual / adjoint


def unit_weights(F: FiniteSetPresheaf) -> dict:
    return {a: np.ones(F.sizes[a]) for a in F.poset}


def check_weights(F: FiniteSetPresheaf, weights) -> dict:
    if weights is None:
        return unit_weights(F)
    for a in F.poset:
        w = np.asarray(weights[a], dtype=float)
        if w.shape != (F.sizes[a],):
            raise ValidationError(f"weights of {a!r} have wrong length")
        if not np.all(w > 0):
            raise ValidationError(f"weights of {a!r} must be strictly positive")
    return weights


def pushforward(F: FiniteSetPresheaf, a, b, u) -> np.ndarray:
    """Fibre sums: ``result[y] = sum_{x : F(x) = y} u[x]``."""
    m = F.map(a, b)
    return np.bincount(m, weights=np.asarray(u, dtype=float), minlength=F.sizes[b])


def pullback(F: FiniteSetPresheaf, a, b, l) -> np.ndarray:
    """``result[x] = l[F(x)]``."""
    return np.asarray(l, dtype=float)[F.map(a, b)]


def adjoint(F: FiniteSetPresheaf, weights, a, b, v) -> np.ndarray:
    """Adjoint of :func:`pushforward` for diagonal products with the given weights."""
    m = F.map(a, b)
    v = np.asarray(v, dtype=float)[m]
    if weights is None:
        return v
    return weights[b][m] / weights[a] * v


def field_inner(F: FiniteSetPresheaf, weights, u, v) -> float:
    w = unit_weights(F) if weights is None else weights
    return float(sum(np.dot(w[a] * u[a], v[a]) for a in F.poset))


def zero_field(F: FiniteSetPresheaf) -> dict:
    return {a: np.zeros(F.sizes[a]) for a in F.poset}


def flatten_field(F: FiniteSetPresheaf, v) -> np.ndarray:
    return np.concatenate([np.asarray(v[a], dtype=float) for a in F.poset]) if len(F.poset) else np.zeros(0)


def unflatten_field(F: FiniteSetPresheaf, vec) -> dict:
    return {a: np.array(vec[F.offsets[a]:F.offsets[a] + F.sizes[a]], dtype=float) for a in F.poset}


# --------------------------------------------------------------------------
# sections


def sections(F: FiniteSetPresheaf, cap: int = SECTION_CAP) -> list:
    """All compatible families ``(x_a)`` as tuples in element order (backtracking search)."""
    space = math.prod(F.sizes[a] for a in F.poset)
    if space > cap:
        raise SearchSpaceTooLarge(f"{space} candidate families exceed the cap {cap}")
    P = F.poset
    order = [P.elements[i] for i in P.linear_extension][::-1]  # tops first
    checks = []
    for k, a in enumerate(order):
        earlier = [b for b in order[:k] if P.le(b, a) or P.le(a, b)]
        checks.append(earlier)

    out = []
    assign = {}

    def rec(k):
        if k == len(order):
            out.append(tuple(assign[a] for a in P.elements))
            return
        a = order[k]
        for x in range(F.sizes[a]):
            ok = True
            for b in checks[k]:
                if P.le(a, b):
                    ok = F.maps[(b, a)][assign[b]] == x
                else:
                    ok = F.maps[(a, b)][x] == assign[b]
                if not ok:
                    break
            if ok:
                assign[a] = x
                rec(k + 1)
        assign.pop(a, None)

    rec(0)
    return sorted(out)


def constraint_matrix(F: FiniteSetPresheaf) -> np.ndarray:
    """Rows ``pushforward(v_a) - v_b`` over all strict pairs, on flattened field bundles."""
    rows = []
    for a, b in F.pairs:
        block = np.zeros((F.sizes[b], F.dim))
        m = F.maps[(a, b)]
        block[m, F.offsets[a] + np.arange(F.sizes[a])] = 1.0
        block[np.arange(F.sizes[b]), F.offsets[b] + np.arange(F.sizes[b])] -= 1.0
        rows.append(block)
    if not rows:
        return np.zeros((0, F.dim))
    return np.vstack(rows)


def linear_sections_matrix(F: FiniteSetPresheaf, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal columns spanning the vector-space limit (flattened layout)."""
    A = constraint_matrix(F)
    if A.shape[0] == 0:
        return np.eye(F.dim)
    return scipy.linalg.null_space(A, rcond=rtol)


def linear_sections_basis(F: FiniteSetPresheaf) -> list:
    B = linear_sections_matrix(F)
    return [unflatten_field(F, B[:, k]) for k in range(B.shape[1])]


def section_violation(F: FiniteSetPresheaf, Q) -> float:
    """Largest of: negative mass, normalisation error, marginalisation error."""
    worst = 0.0
    for a in F.poset:
        q = np.asarray(Q[a], dtype=float)
        worst = max(worst, float(max(0.0, -q.min())), abs(float(q.sum()) - 1.0))
    for a, b in F.pairs:
        diff = pushforward(F, a, b, Q[a]) - np.asarray(Q[b], dtype=float)
        worst = max(worst, float(np.abs(diff).max()))
    return worst


def probabilistic_section_check(F: FiniteSetPresheaf, Q, tol: float = 1e-8) -> bool:
    return section_violation(F, Q) <= tol


def point_mass_bundle(F: FiniteSetPresheaf, section: Sequence[int]) -> dict:
    out = {}
    for a, x in zip(F.poset.elements, section):
        v = np.zeros(F.sizes[a])
        v[x] = 1.0
        out[a] = v
    return out


def iter_region_states(spec: GraphicalSpec, region):
    """Assignments of ``region`` in index order."""
    dom = spec.domain
    for digits in itertools.product(*[range(dom[v]) for v in reversed(region)]):
        yield dict(zip(reversed(region), digits))
