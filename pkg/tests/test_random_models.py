import numpy as np
from hypothesis import given, settings, strategies as st

from presheaf_mp.oracle import tree_structure
from presheaf_mp.presheaf import graphical_presheaf
from presheaf_mp.random_models import (cycle_spec, plaquette_spec, random_poset, random_presheaf_pair,
                                       random_tree_spec)
from presheaf_mp.transform import NaturalTransformation


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6), surjective=st.booleans())
def test_random_pair_is_natural(seed, surjective):
    rng = np.random.default_rng(seed)
    F, G, comps = random_presheaf_pair(rng, n_elements=5, max_size=6, surjective=surjective)
    phi = NaturalTransformation(F, G, comps)
    assert phi.validate()
    assert max(F.sizes.values()) <= 6
    if surjective:
        assert phi.is_surjective()


def test_seeded_generators_repeat():
    a = random_poset(6, np.random.default_rng(3))
    b = random_poset(6, np.random.default_rng(3))
    assert a.same_as(b)


def test_tree_and_cyclic_specs():
    rng = np.random.default_rng(0)
    spec = random_tree_spec(7, rng)
    edges, _ = tree_structure(spec)
    assert len(edges) == 6
    assert sum(graphical_presheaf(cycle_spec(5)).poset.mobius.c.values()) == 0
    assert sum(graphical_presheaf(plaquette_spec()).poset.mobius.c.values()) == 1
