import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from presheaf_mp.calculus import (d_dual, delta, delta_matrix, flatten_messages, message_inner,
                                  mu_dual_covariant, mu_functor, unflatten_messages, zero_messages,
                                  zeta_dual_covariant, zeta_functor)
from presheaf_mp.poset import build_poset
from presheaf_mp.presheaf import (field_inner, flatten_field, identity_presheaf, linear_sections_basis,
                                  pullback, unflatten_field)
from presheaf_mp.random_models import random_field, random_presheaf_pair, random_weights


def chain():
    return identity_presheaf(build_poset(["b", "a"], [("b", "a")]), 2)


def boolean_presheaf():
    P = build_poset(["0", "1", "2", "12"], [("0", "1"), ("0", "2"), ("1", "12"), ("2", "12")])
    spec_sizes = {"0": 1, "1": 2, "2": 2, "12": 4}
    maps = {("12", "1"): np.arange(4) % 2, ("12", "2"): np.arange(4) // 2,
            ("12", "0"): np.zeros(4, dtype=np.int64), ("1", "0"): np.zeros(2, dtype=np.int64),
            ("2", "0"): np.zeros(2, dtype=np.int64)}
    from presheaf_mp.presheaf import FiniteSetPresheaf
    return FiniteSetPresheaf(P, spec_sizes, maps)


def random_messages_on(F, rng):
    return {p: rng.normal(size=F.sizes[p[1]]) for p in F.pairs}


def test_delta_kills_linear_sections(path3):
    for v in linear_sections_basis(path3):
        assert max(np.abs(m).max() for m in delta(path3, v).values()) < 1e-12


def test_delta_path2_example(path2):
    v = {"x1,x2": np.full(4, 0.25), "x1": np.array([0.6, 0.4]), "x2": np.array([0.5, 0.5])}
    assert np.allclose(delta(path2, v)[("x1,x2", "x1")], [-0.1, 0.1])


def test_delta_matches_matrix(path3, rng):
    v = random_field(path3, rng)
    direct = flatten_messages(path3, delta(path3, v))
    assert np.allclose(delta_matrix(path3) @ flatten_field(path3, v), direct, atol=1e-12)
    # brute force entry by entry
    for a, b in path3.pairs:
        for y in range(path3.sizes[b]):
            want = sum(v[a][x] for x in range(path3.sizes[a]) if path3.map(a, b)[x] == y) - v[b][y]
            assert abs(delta(path3, v)[(a, b)][y] - want) < 1e-12


def test_d_dual_examples(path2):
    assert all(not x.any() for x in d_dual(path2, None, zero_messages(path2)).values())
    l = zero_messages(path2)
    l[("x1,x2", "x1")] = np.array([1.0, 0.0])
    out = d_dual(path2, None, l)
    assert list(out["x1,x2"]) == [1, 0, 1, 0]
    assert list(out["x1"]) == [-1, 0]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6), weighted=st.booleans())
def test_d_dual_is_adjoint(seed, weighted):
    rng = np.random.default_rng(seed)
    F, _, _ = random_presheaf_pair(rng)
    w = random_weights(F, rng) if weighted else None
    v, l = random_field(F, rng), random_messages_on(F, rng)
    lhs = field_inner(F, w, d_dual(F, w, l), v)
    rhs = message_inner(F, w, l, delta(F, v))
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_zeta_examples(path2):
    F = identity_presheaf(build_poset(["a"]), 3)
    v = {"a": np.array([1.0, 2.0, 3.0])}
    assert np.array_equal(zeta_functor(F, None, v)["a"], v["a"])
    v = {"x1": np.array([1.0, 0.0]), "x2": np.zeros(2), "x1,x2": np.zeros(4)}
    out = zeta_functor(path2, None, v)
    assert np.array_equal(out["x1,x2"], pullback(path2, "x1,x2", "x1", v["x1"]))


def test_mu_chain():
    F = chain()
    v = {"a": np.array([5.0, 7.0]), "b": np.array([1.0, 2.0])}
    out = mu_functor(F, None, v)
    assert list(out["a"]) == [4, 5] and list(out["b"]) == [1, 2]
    assert list(mu_dual_covariant(F, v)["a"]) == [4, 5]


@pytest.mark.parametrize("make", [chain, boolean_presheaf])
def test_zeta_mu_inverse_fixed(make, rng):
    F = make()
    w = random_weights(F, rng)
    v = random_field(F, rng)
    for weights in (None, w):
        back = mu_functor(F, weights, zeta_functor(F, weights, v))
        assert max(np.abs(back[a] - v[a]).max() for a in F.poset) < 1e-12
        back = zeta_functor(F, weights, mu_functor(F, weights, v))
        assert max(np.abs(back[a] - v[a]).max() for a in F.poset) < 1e-12
    back = zeta_dual_covariant(F, mu_dual_covariant(F, v))
    assert max(np.abs(back[a] - v[a]).max() for a in F.poset) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_zeta_mu_inverse_random(seed):
    rng = np.random.default_rng(seed)
    F, _, _ = random_presheaf_pair(rng)
    w = random_weights(F, rng)
    v = random_field(F, rng)
    back = mu_functor(F, w, zeta_functor(F, w, v))
    assert max(np.abs(back[a] - v[a]).max() for a in F.poset) < 1e-12


def test_flatten_round_trip(path3, rng):
    l = random_messages_on(path3, rng)
    back = unflatten_messages(path3, flatten_messages(path3, l))
    assert all(np.array_equal(back[p], l[p]) for p in path3.pairs)
    v = random_field(path3, rng)
    back = unflatten_field(path3, flatten_field(path3, v))
    assert all(np.array_equal(back[a], v[a]) for a in path3.poset)


def test_no_self_messages(path3):
    assert all(a != b for a, b in path3.pairs)
    assert set(zero_messages(path3)) == set(path3.pairs)
