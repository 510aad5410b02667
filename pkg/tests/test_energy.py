import math

import numpy as np
import pytest

from presheaf_mp.energy import (bethe_free_energy, check_subobject, criticality_residual, fe_differential,
                                g_H, hamiltonians_from_factors, is_critical, local_free_energy)
from presheaf_mp.errors import NegativeFactor, NonPositiveBelief, NotNormalized, ValidationError
from presheaf_mp.oracle import exact_joint, exact_marginals
from presheaf_mp.poset import build_poset
from presheaf_mp.presheaf import identity_presheaf
from presheaf_mp.random_models import random_factors


def test_hamiltonians_from_factors(path2_spec, path2):
    H = hamiltonians_from_factors(path2_spec, {"x1": [2.0, 1.0]})
    assert np.allclose(H["x1"], [-math.log(2), 0])
    assert np.allclose(H["x1,x2"], [-math.log(2), 0, -math.log(2), 0])
    assert not H["x2"].any()
    H = hamiltonians_from_factors(path2_spec, {a: np.ones(path2.sizes[a]) for a in path2.poset})
    assert all(not h.any() for h in H.values())


def test_zero_factor_gives_masked_fibre(path2_spec, path2):
    H = hamiltonians_from_factors(path2_spec, {"x1": [0.0, 1.0]})
    assert H["x1"][0] == np.inf
    assert list(np.isinf(H["x1,x2"])) == [True, False, True, False]
    check_subobject(path2, H)


def test_negative_factor(path2_spec):
    with pytest.raises(NegativeFactor):
        hamiltonians_from_factors(path2_spec, {"x1": [-1.0, 1.0]})


def test_subobject_violation(path2):
    H = {"x1": np.array([np.inf, 0.0]), "x2": np.zeros(2), "x1,x2": np.zeros(4)}
    with pytest.raises(ValidationError):
        check_subobject(path2, H)


def test_fe_differential_examples(rng):
    H = {"a": np.zeros(3)}
    assert np.allclose(fe_differential(H, {"a": np.full(3, math.exp(-1))})["a"], 0)
    assert np.allclose(fe_differential(H, {"a": np.ones(3)})["a"], 1)
    with pytest.raises(NonPositiveBelief):
        fe_differential(H, {"a": np.array([1.0, 0.0, 1.0])})
    h, q = rng.normal(size=4), rng.random(4) + 0.1
    grad = fe_differential({"a": h}, {"a": q})["a"]
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1e-6
        fd = (local_free_energy(h, q + e) - local_free_energy(h, q - e)) / 2e-6
        assert abs(fd - grad[i]) < 1e-6


def test_g_h(rng):
    out = g_H({"a": np.zeros(3)}, None, {"a": np.zeros(3)})
    assert np.allclose(out["a"], math.exp(-1))
    out = g_H({"a": np.array([np.inf, 0.0])}, None, {"a": np.array([50.0, 0.0])})
    assert out["a"][0] == 0
    H, l = {"a": rng.normal(size=5)}, {"a": rng.normal(size=5)}
    assert np.allclose(fe_differential(H, g_H(H, None, l))["a"], l["a"], atol=1e-10)


def test_bethe_examples(path2, path3_spec, path3, rng):
    F = identity_presheaf(build_poset(["a"]), 2)
    assert abs(bethe_free_energy(F.poset, {"a": np.zeros(2)}, {"a": np.full(2, 0.5)}) + math.log(2)) < 1e-12
    q1, q2 = np.array([0.3, 0.7]), np.array([0.6, 0.4])
    qe = np.outer(q2, q1).ravel()
    H = {a: np.zeros(path2.sizes[a]) for a in path2.poset}
    Q = {"x1": q1, "x2": q2, "x1,x2": qe}
    assert abs(bethe_free_energy(path2.poset, H, Q) - np.sum(qe * np.log(qe))) < 1e-12
    with pytest.raises(NotNormalized):
        bethe_free_energy(F.poset, {"a": np.zeros(2)}, {"a": np.array([0.5, 0.6])})
    # on a tree, the exact marginals give the exact free energy -ln Z
    factors = random_factors(path3_spec, rng)
    H = hamiltonians_from_factors(path3_spec, factors)
    joint = exact_joint(path3_spec, factors=factors)
    from presheaf_mp.oracle import log_partition
    fe = bethe_free_energy(path3.poset, H, exact_marginals(joint, path3_spec))
    assert abs(fe + log_partition(path3_spec, factors=factors)) < 1e-10


def test_criticality_exact_tree(path3_spec, path3, rng):
    factors = random_factors(path3_spec, rng)
    H = hamiltonians_from_factors(path3_spec, factors)
    Q = exact_marginals(exact_joint(path3_spec, factors=factors), path3_spec)
    rs, rc = criticality_residual(path3, H, Q)
    assert rs < 1e-8 and rc < 1e-8
    assert is_critical(path3, H, Q)
    bad = dict(Q, x2=Q["x2"] + np.array([0.1, -0.1]))
    rs, _ = criticality_residual(path3, H, bad)
    assert rs > 0.05


def test_criticality_singleton_softmax(rng):
    F = identity_presheaf(build_poset(["a"]), 4)
    h = rng.normal(size=4)
    q = np.exp(-h) / np.exp(-h).sum()
    _, rc = criticality_residual(F, {"a": h}, {"a": q})
    assert rc < 1e-10
    _, rc = criticality_residual(F, {"a": h}, {"a": np.full(4, 0.25)})
    assert rc > 1e-3


def test_criticality_with_masked_states(path3_spec, path3, rng):
    factors = random_factors(path3_spec, rng)
    factors["x3"] = np.array([0.0, 1.0])
    H = hamiltonians_from_factors(path3_spec, factors)
    Q = exact_marginals(exact_joint(path3_spec, factors=factors), path3_spec)
    rs, rc = criticality_residual(path3, H, Q)
    assert rs < 1e-12 and rc < 1e-8
