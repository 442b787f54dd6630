"""
Tests d'acceptation : accord entre vérificateurs combinatoires et oracle
spectral sur des instances aléatoires et sur les instances de référence.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stoqverify.core.instance_model import to_setcsp
from stoqverify.core.spectral_oracle import exact_frustration_free, ground_energy, min_unsat_over_subsets
from stoqverify.core.verifiers import VerifierConfig, np_verify
from stoqverify.core.walk_graph import bfs_to_bad
from tests.generators import make_rng, random_uniform_instance

pytestmark = pytest.mark.slow


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_frustration_free_iff_zero_energy(seed):
    h = random_uniform_instance(make_rng(seed), n=4, m=5)
    ff = exact_frustration_free(h).frustration_free
    energy = ground_energy(h, "dense").energy
    assert ff == (energy <= 1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_unbounded_search_decides_frustration_freeness(seed):
    h = random_uniform_instance(make_rng(seed), n=4, m=4)
    cfg = VerifierConfig(radius=h.dimension)
    accepted = [x for x in h.all_strings() if np_verify(h, x, cfg).accepted]
    assert bool(accepted) == exact_frustration_free(h).frustration_free
    for x in accepted:
        assert bfs_to_bad(x, h) is None


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_subset_states_bound_the_ground_energy(seed):
    h = random_uniform_instance(make_rng(seed), n=3, m=3)
    best = min_unsat_over_subsets(to_setcsp(h))
    assert float(best.value) >= ground_energy(h).energy - 1e-9


@pytest.mark.parametrize("name", ["E1", "E2", "E3", "E4", "E5", "E6", "E7"])
def test_reference_instances(library, name):
    h = library.load(name)
    expected = library.info(name)["frustration_free"]
    assert exact_frustration_free(h).frustration_free is expected
    assert (ground_energy(h).energy <= 1e-9) is expected
