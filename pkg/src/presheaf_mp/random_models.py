"""Seeded generators for random posets, presheaves, binnings and graphical models."""
from __future__ import annotations

import numpy as np

from .poset import Poset, build_poset
from .presheaf import FiniteSetPresheaf, GraphicalSpec


def random_poset(n: int, rng, density: float = 0.4) -> Poset:
    """Random order on ``e0 .. e{n-1}``: relations only go up a hidden random permutation."""
    perm = rng.permutation(n)
    names = [f"e{i}" for i in range(n)]
    pairs = [(names[perm[i]], names[perm[j]])
             for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return build_poset(names, pairs)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def labels(self, items) -> dict:
        roots, out = {}, {}
        for x in sorted(items):
            out[x] = roots.setdefault(self.find(x), len(roots))
        return out


def _coarsen_top_down(poset, domains, start_labels, rng, max_classes, extra_merges, keep_apart=()):
    """Labels per element, each coarser than ``start_labels`` and than the labels of elements above.

    ``keep_apart`` is a set of points that may only merge among themselves.
    """
    order = [poset.elements[i] for i in poset.linear_extension][::-1]
    labels = {}
    for b in order:
        dom = sorted(domains[b])
        uf = _UnionFind(dom)
        if start_labels is not None:
            by_class = {}
            for x in dom:
                by_class.setdefault(start_labels[b][x], []).append(x)
            for xs in by_class.values():
                for x in xs[1:]:
                    uf.union(xs[0], x)
        for a in poset.above(b, strict=True):
            by_class = {}
            for x in domains[a]:
                by_class.setdefault(labels[a][x], []).append(x)
            for xs in by_class.values():
                for x in xs[1:]:
                    uf.union(xs[0], x)

        def can_merge(x, y):
            return (x in keep_apart) == (y in keep_apart)

        def merge_random():
            roots = sorted({uf.find(x) for x in dom})
            if len(roots) < 2:
                return False
            for _ in range(20):
                x, y = rng.choice(roots, size=2, replace=False)
                if can_merge(x, y):
                    uf.union(int(x), int(y))
                    return True
            return False

        for _ in range(extra_merges(rng)):
            merge_random()
        while len({uf.find(x) for x in dom}) > max_classes:
            if not merge_random():
                break
        labels[b] = uf.labels(dom)
    return labels


def _presheaf_from_labels(poset, domains, labels) -> FiniteSetPresheaf:
    sizes = {a: len(set(labels[a].values())) for a in poset}
    maps = {}
    for b, a in poset.relation_pairs():
        m = np.zeros(sizes[a], dtype=np.int64)
        for x in domains[a]:
            m[labels[a][x]] = labels[b][x]
        maps[(a, b)] = m
    return FiniteSetPresheaf(poset, sizes, maps)


def random_presheaf_pair(rng, n_elements: int = 5, max_size: int = 6, n_points: int = 10,
                         surjective: bool = True, density: float = 0.4):
    """Random ``(F, G, components)`` with a natural transformation ``F -> G``.

    Every set is a quotient of a subset of shared points; elements higher in the
    order see fewer points and finer classes, so the maps compose.  ``G`` is a
    further quotient; with ``surjective=False`` it also gets states that no
    state of ``F`` reaches.
    """
    P = random_poset(n_elements, rng, density)
    order = [P.elements[i] for i in P.linear_extension][::-1]
    domains = {}
    for b in order:
        dom = set()
        for a in P.above(b, strict=True):
            dom |= domains[a]
        k = int(rng.integers(1, n_points + 1))
        dom |= set(rng.choice(n_points, size=k, replace=False).tolist())
        domains[b] = dom
    f_labels = _coarsen_top_down(P, domains, None, rng, max_size, lambda r: int(r.integers(0, 3)))
    F = _presheaf_from_labels(P, domains, f_labels)
    g_domains = dict(domains)
    extra = set()
    if not surjective:
        ghost = list(range(n_points, n_points + 3))
        for b in order:
            add = set()
            for a in P.above(b, strict=True):
                add |= g_domains[a] - domains[a]
            if rng.random() < 0.7:
                add.add(int(rng.choice(ghost)))
            g_domains[b] = domains[b] | add
            extra |= add
    start = {a: {x: f_labels[a].get(x, -1 - x) for x in g_domains[a]} for a in P}
    g_labels = _coarsen_top_down(P, g_domains, start, rng, max_size, lambda r: int(r.integers(0, 3)), extra)
    G = _presheaf_from_labels(P, g_domains, g_labels)
    comps = {}
    for a in P:
        c = np.zeros(F.sizes[a], dtype=np.int64)
        for x in domains[a]:
            c[f_labels[a][x]] = g_labels[a][x]
        comps[a] = c
    return F, G, comps


def random_field(F: FiniteSetPresheaf, rng, scale: float = 1.0) -> dict:
    return {a: rng.normal(scale=scale, size=F.sizes[a]) for a in F.poset}


def random_weights(F: FiniteSetPresheaf, rng) -> dict:
    return {a: rng.uniform(0.5, 2.0, F.sizes[a]) for a in F.poset}


def random_tree_spec(n: int, rng, domain: int = 2) -> GraphicalSpec:
    """Random labelled tree on ``x0 .. x{n-1}``: vertex regions plus one region per edge."""
    names = [f"x{i}" for i in range(n)]
    edges = [(names[int(rng.integers(0, i))], names[i]) for i in range(1, n)]
    return GraphicalSpec([(v, domain) for v in names], [[v] for v in names] + [list(e) for e in edges])


def random_factors(spec: GraphicalSpec, rng, coupling: float = 1.0, only_small: int | None = None) -> dict:
    """Positive factors ``exp(U(-coupling, coupling))`` on every region (or regions up to ``only_small`` variables)."""
    out = {}
    for r in spec.regions:
        if only_small is not None and len(r) > only_small:
            continue
        out[spec.region_name(r)] = np.exp(rng.uniform(-coupling, coupling, spec.region_size(r)))
    return out


def cycle_spec(n: int = 3, domain: int = 2) -> GraphicalSpec:
    names = [f"x{i + 1}" for i in range(n)]
    edges = [[names[i], names[(i + 1) % n]] for i in range(n)]
    return GraphicalSpec([(v, domain) for v in names], [[v] for v in names] + edges)


def plaquette_spec(domain: int = 2) -> GraphicalSpec:
    """Four overlapping 2x2 plaquettes of a 3x3 grid, closed under intersection."""
    names = [f"x{i}" for i in range(9)]

    def cell(i, j):
        return 3 * i + j

    plaquettes = [[cell(i, j), cell(i + 1, j), cell(i, j + 1), cell(i + 1, j + 1)] for i in range(2) for j in range(2)]
    regions = [[4], [3, 4], [1, 4], [4, 7], [4, 5]] + plaquettes
    return GraphicalSpec([(v, domain) for v in names], [[names[k] for k in r] for r in regions])
