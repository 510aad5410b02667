import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from presheaf_mp.errors import (DuplicateRegion, EmptyRegion, NotComparable, SearchSpaceTooLarge,
                                ValidationError)
from presheaf_mp.poset import build_poset
from presheaf_mp.presheaf import (FiniteSetPresheaf, GraphicalSpec, adjoint, graphical_presheaf,
                                  identity_presheaf, linear_sections_basis, point_mass_bundle,
                                  probabilistic_section_check, pullback, pushforward, sections)
from presheaf_mp.random_models import random_presheaf_pair, random_weights


def collapse_presheaf(n=3):
    P = build_poset(["a", "b"], [("b", "a")])
    return FiniteSetPresheaf(P, {"a": n, "b": 1}, {("a", "b"): np.zeros(n, dtype=np.int64)})


def test_path2_shape_and_encoding(path2):
    assert path2.sizes["x1,x2"] == 4
    assert list(path2.map("x1,x2", "x1")) == [k % 2 for k in range(4)]


def test_single_region_identity():
    F = graphical_presheaf(GraphicalSpec([("x1", 3)], [["x1"]]))
    assert F.sizes == {"x1": 3} and F.pairs == ()


def test_path3_composes(path3):
    # construction validates composition; check every triple explicitly too
    P = path3.poset
    for a in P:
        for b in P.below(a):
            for c in P.below(b):
                assert np.array_equal(path3.map(b, c)[path3.map(a, b)], path3.map(a, c))


def test_region_order_within_region_follows_declaration():
    spec = GraphicalSpec([("x1", 2), ("x2", 3)], [["x2", "x1"]])
    assert spec.region_names == ["x1,x2"]
    assert spec.encode(("x1", "x2"), {"x1": 1, "x2": 2}) == 1 + 2 * 2


def test_region_errors():
    with pytest.raises(EmptyRegion):
        GraphicalSpec([("x", 2)], [[]])
    with pytest.raises(DuplicateRegion):
        GraphicalSpec([("x", 2), ("y", 2)], [["x", "y"], ["y", "x"]])


def test_noncomposing_maps_name_the_triple():
    P = build_poset(["a", "b", "c"], [("c", "b"), ("b", "a")])
    maps = {("a", "b"): np.array([0, 1]), ("b", "c"): np.array([0, 1]), ("a", "c"): np.array([1, 0])}
    with pytest.raises(ValidationError, match=r"\(a, b, c\)"):
        FiniteSetPresheaf(P, {"a": 2, "b": 2, "c": 2}, maps)


def test_pushforward_examples(path2):
    F = identity_presheaf(build_poset(["b", "a"], [("b", "a")]), 2)
    assert list(pushforward(F, "a", "b", [1, 2])) == [1, 2]
    assert list(pushforward(path2, "x1,x2", "x1", [0.25] * 4)) == [0.5, 0.5]
    assert list(pushforward(collapse_presheaf(), "a", "b", [1, 2, 3])) == [6]


def test_pullback_examples(path2):
    assert list(pullback(path2, "x1,x2", "x1", [1, 0])) == [1, 0, 1, 0]
    assert list(pullback(collapse_presheaf(), "a", "b", [7.0])) == [7, 7, 7]


def test_not_comparable(path2):
    with pytest.raises(NotComparable):
        pushforward(path2, "x1", "x2", [1, 1])
    with pytest.raises(NotComparable):
        adjoint(path2, None, "x1", "x1,x2", [1, 1, 1, 1])


def test_adjoint_fibre_weights():
    F = collapse_presheaf(2)
    w = {"a": np.array([2.0, 2.0]), "b": np.array([1.0])}
    assert np.allclose(adjoint(F, w, "a", "b", [3.0]), [1.5, 1.5])


def test_adjoint_unit_weights_is_pullback(path3, rng):
    v = rng.normal(size=2)
    assert np.array_equal(adjoint(path3, None, "x1,x2", "x2", v), pullback(path3, "x1,x2", "x2", v))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_adjoint_identity_random(seed):
    rng = np.random.default_rng(seed)
    P = build_poset(["a", "b"], [("b", "a")])
    F = FiniteSetPresheaf(P, {"a": 4, "b": 2}, {("a", "b"): rng.integers(0, 2, 4)})
    w = random_weights(F, rng)
    u, v = rng.normal(size=4), rng.normal(size=2)
    lhs = np.dot(w["b"] * pushforward(F, "a", "b", u), v)
    rhs = np.dot(w["a"] * u, adjoint(F, w, "a", "b", v))
    assert abs(lhs - rhs) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_transport_properties(seed):
    rng = np.random.default_rng(seed)
    F, _, _ = random_presheaf_pair(rng, n_elements=5)
    P = F.poset
    for a in P:
        u = rng.normal(size=F.sizes[a])
        for b in P.below(a, strict=True):
            assert abs(pushforward(F, a, b, u).sum() - u.sum()) < 1e-12
            for c in P.below(b, strict=True):
                two = pushforward(F, b, c, pushforward(F, a, b, u))
                assert np.allclose(two, pushforward(F, a, c, u), atol=1e-12)
                lc = rng.normal(size=F.sizes[c])
                assert np.allclose(pullback(F, a, b, pullback(F, b, c, lc)), pullback(F, a, c, lc), atol=1e-12)
    for s in sections(F):
        assert probabilistic_section_check(F, point_mass_bundle(F, s))


def test_sections_examples(path2):
    F = identity_presheaf(build_poset(["b", "a"], [("b", "a")]), 2)
    assert sections(F) == [(0, 0), (1, 1)]
    assert len(sections(path2)) == 4
    P = build_poset(["a", "b", "c"], [("c", "a"), ("c", "b")])
    # a and b both project to c, but with incompatible images
    G = FiniteSetPresheaf(P, {"a": 1, "b": 1, "c": 2},
                          {("a", "c"): np.array([0]), ("b", "c"): np.array([1])})
    assert sections(G) == []


def test_sections_cap(path3):
    with pytest.raises(SearchSpaceTooLarge):
        sections(path3, cap=10)


def test_linear_sections(path2):
    F = identity_presheaf(build_poset(["a"]), 2)
    assert len(linear_sections_basis(F)) == 2
    assert len(linear_sections_basis(path2)) == 4
    C = collapse_presheaf(2)
    basis = linear_sections_basis(C)
    assert len(basis) == 2
    for v in basis:
        assert abs(v["b"][0] - v["a"].sum()) < 1e-12


def test_linear_sections_orthonormal(path3):
    basis = linear_sections_basis(path3)
    G = np.array([[sum(np.dot(u[a], v[a]) for a in path3.poset) for v in basis] for u in basis])
    assert np.allclose(G, np.eye(len(basis)), atol=1e-12)


def test_probabilistic_sections(path2, path3, rng):
    uniform = {a: np.full(path2.sizes[a], 1.0 / path2.sizes[a]) for a in path2.poset}
    assert probabilistic_section_check(path2, uniform)
    bad = dict(uniform, x1=np.array([0.9, 0.1]))
    assert not probabilistic_section_check(path2, bad)
    joint = rng.random(8)
    joint /= joint.sum()
    spec = GraphicalSpec([("x1", 2), ("x2", 2), ("x3", 2)], [["x1"], ["x2"], ["x3"], ["x1", "x2"], ["x2", "x3"]])
    names = tuple(spec.names)
    Q = {spec.region_name(r): np.bincount(spec.projection(names, r), weights=joint, minlength=spec.region_size(r))
         for r in spec.regions}
    assert probabilistic_section_check(path3, Q)
