"""Finite posets, the zeta operator and Möbius inversion.

The order is stored as its full reflexive-transitive closure: ``leq[i, j]`` is
True iff ``elements[i] <= elements[j]``. Element order (input order) fixes every
matrix layout in the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CycleError, UnknownElement


@dataclass(frozen=True, eq=False)
class MobiusTable:
    """Möbius coefficients ``mu[(a, b)]`` for ``b <= a`` and overcounting numbers ``c[a]``."""

    mu: dict
    c: dict
    matrix: np.ndarray  # integer matrix, matrix[i, j] = mu(elements[i], elements[j])


@dataclass(frozen=True, eq=False)
class Poset:
    elements: tuple
    leq: np.ndarray

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise UnknownElement("duplicate element identifiers")

    @cached_property
    def index(self) -> dict:
        return {a: i for i, a in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, a):
        return a in self.index

    def le(self, b, a) -> bool:
        """True iff ``b <= a``."""
        return bool(self.leq[self.index[b], self.index[a]])

    def lt(self, b, a) -> bool:
        return b != a and self.le(b, a)

    def below(self, a, strict=False) -> list:
        i = self.index[a]
        return [b for j, b in enumerate(self.elements) if self.leq[j, i] and (not strict or j != i)]

    def above(self, a, strict=False) -> list:
        i = self.index[a]
        return [b for j, b in enumerate(self.elements) if self.leq[i, j] and (not strict or j != i)]

    def relation_pairs(self) -> list:
        """All pairs ``(b, a)`` with ``b <= a``, strict pairs only, in element order."""
        n = len(self.elements)
        return [(self.elements[j], self.elements[i])
                for i in range(n) for j in range(n) if i != j and self.leq[j, i]]

    @cached_property
    def linear_extension(self) -> tuple:
        """Element indices sorted so that every element comes after everything below it."""
        down = self.leq.sum(axis=0)
        return tuple(sorted(range(len(self.elements)), key=lambda i: (down[i], i)))

    @cached_property
    def mobius(self) -> MobiusTable:
        return mobius_table(self)

    def same_as(self, other: "Poset") -> bool:
        return self.elements == other.elements and np.array_equal(self.leq, other.leq)


def build_poset(elements: Sequence[str], relation_pairs: Iterable[tuple] = ()) -> Poset:
    """Reflexive-transitive closure of ``relation_pairs``; a pair ``(b, a)`` means ``b <= a``."""
    elements = tuple(str(e) for e in elements)
    index = {a: i for i, a in enumerate(elements)}
    if len(index) != len(elements):
        raise UnknownElement("duplicate element identifiers")
    n = len(elements)
    leq = np.eye(n, dtype=bool)
    for b, a in relation_pairs:
        for x in (b, a):
            if x not in index:
                raise UnknownElement(f"relation references undeclared element {x!r}")
        leq[index[b], index[a]] = True
    # Warshall closure
    for k in range(n):
        leq |= np.outer(leq[:, k], leq[k, :])
    both = leq & leq.T
    np.fill_diagonal(both, False)
    if both.any():
        i, j = map(int, np.argwhere(both)[0])
        raise CycleError(f"{elements[i]!r} <= {elements[j]!r} and {elements[j]!r} <= {elements[i]!r}")
    return Poset(elements, leq)


def _as_vector(poset: Poset, values) -> np.ndarray:
    if isinstance(values, Mapping):
        return np.array([values[a] for a in poset.elements])
    arr = np.asarray(values)
    if arr.shape != (len(poset),):
        raise ValueError(f"expected {len(poset)} values, got shape {arr.shape}")
    return arr


def zeta_matrix(poset: Poset) -> np.ndarray:
    """Integer matrix Z with (Z @ lam)[a] = sum over b <= a of lam[b]."""
    return poset.leq.T.astype(np.int64)


def zeta_scalar(poset: Poset, lam) -> np.ndarray:
    """``result[a] = sum_{b <= a} lam[b]``; accepts a sequence in element order or a mapping."""
    return zeta_matrix(poset) @ _as_vector(poset, lam)


def mobius_scalar(poset: Poset, lam) -> np.ndarray:
    """Inverse of :func:`zeta_scalar`."""
    return poset.mobius.matrix @ _as_vector(poset, lam)


def mobius_table(poset: Poset) -> MobiusTable:
    # mu(a, b) = -sum_{b < c <= a} mu(a, c), filled top-down along a linear extension;
    # Python ints throughout so no rounding can enter.
    n = len(poset)
    order = poset.linear_extension
    leq = poset.leq
    mat = [[0] * n for _ in range(n)]
    for i in range(n):
        mat[i][i] = 1
        for j in reversed(order):
            if j == i or not leq[j, i]:
                continue
            mat[i][j] = -sum(mat[i][k] for k in range(n)
                             if k != j and leq[j, k] and leq[k, i])
    matrix = np.array(mat, dtype=np.int64).reshape(n, n)
    els = poset.elements
    mu = {(els[i], els[j]): mat[i][j] for i in range(n) for j in range(n) if leq[j, i]}
    c = {els[j]: sum(mat[i][j] for i in range(n) if leq[j, i]) for j in range(n)}
    return MobiusTable(mu=mu, c=c, matrix=matrix)


def overcount(poset: Poset) -> dict:
    """Overcounting numbers ``c(a) = sum_{b >= a} mu(b, a)``."""
    return dict(poset.mobius.c)


def graph_poset(vertices: Sequence[str], edges: Sequence[tuple]) -> Poset:
    """Vertices below the edges that contain them; edge ``(u, v)`` is named ``"u,v"``."""
    names = list(vertices) + [f"{u},{v}" for u, v in edges]
    pairs = [(u, f"{u},{v}") for u, v in edges] + [(v, f"{u},{v}") for u, v in edges]
    return build_poset(names, pairs)
