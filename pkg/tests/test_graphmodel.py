import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrgwalks.graphmodel import (
    InvalidTrailError,
    PermutationGraph,
    TrailSpec,
    adjacency,
    apply_word,
    couple_conditioned,
    coupling_shape_ok,
    random_cycle_trail,
    removed_edges,
    sample_graph,
    substream,
)
from rrgwalks.words import word

from conftest import cycle_perm, graph_of


def test_sample_graph_is_reproducible_and_valid():
    g1, g2 = sample_graph(50, 3, seed=7), sample_graph(50, 3, seed=7)
    assert g1 == g2
    assert g1 != sample_graph(50, 3, seed=8)
    assert g1.perms.shape == (3, 50)
    for row in g1.perms:
        assert sorted(row.tolist()) == list(range(50))


def test_sample_graph_rejects_bad_sizes():
    with pytest.raises(ValueError):
        sample_graph(0, 2, seed=1)
    with pytest.raises(ValueError):
        sample_graph(5, 0, seed=1)


def test_rejects_non_permutation():
    with pytest.raises(ValueError):
        PermutationGraph(np.array([[0, 0, 1]]))


def test_substreams_are_distinct():
    a = substream(3, 0).integers(0, 2**62, size=4)
    b = substream(3, 1).integers(0, 2**62, size=4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, substream(3, 0).integers(0, 2**62, size=4))


def test_fixed_points_have_uniform_mean():
    # E[# fixed points] = 1 for a uniform permutation
    fp = [sample_graph(30, 1, rng=substream(11, t)).fixed_points()[0] for t in range(3000)]
    assert abs(np.mean(fp) - 1) < 4 * np.std(fp) / np.sqrt(len(fp))


@given(st.integers(1, 30), st.integers(1, 4), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_adjacency_is_symmetric_and_regular(n, d, seed):
    A = adjacency(sample_graph(n, d, seed=seed))
    assert np.array_equal(A, A.T)
    assert np.all(A.sum(axis=1) == 2 * d)


def test_identity_permutations_give_loops_counted_twice():
    A = adjacency(graph_of(np.arange(5), np.arange(5)))
    assert np.array_equal(A, 4 * np.eye(5, dtype=np.int64))


def test_json_round_trip():
    g = sample_graph(9, 2, seed=4)
    assert PermutationGraph.from_json(g.to_json()) == g
    with pytest.raises(ValueError):
        PermutationGraph.from_dict({"n": 3, "d": 2, "perms": g.perms.tolist()})


def test_apply_word_order_and_inverse():
    g = graph_of(cycle_perm(5), [1, 0, 2, 3, 4])
    # pi_1 first: 4 -> 0, then pi_2: 0 -> 1
    assert apply_word(g, word(1, 2), 4) == 1
    assert apply_word(g, word(2, 1), 4) == 0
    assert apply_word(g, word(-1), 0) == 4
    assert np.array_equal(apply_word(g, word(1, -1), np.arange(5)), np.arange(5))
    with pytest.raises(ValueError):
        apply_word(g, word(3), 0)


def test_trail_edges_flip_inverted_letters():
    s = TrailSpec.cycle([0, 1, 2], word(1, -2, 1))
    assert s.k == 3 and s.closed and s.distinct
    assert s.labeled_edges() == [(0, 1, 0), (2, 1, 1), (2, 0, 0)]


def test_couple_rejects_bad_trails():
    g = sample_graph(10, 2, seed=0)
    with pytest.raises(InvalidTrailError):
        couple_conditioned(g, TrailSpec((0, 1, 2), word(1, 1)))  # not closed
    with pytest.raises(InvalidTrailError):
        couple_conditioned(g, TrailSpec.cycle([0, 1], word(1, -1)))  # not reduced
    with pytest.raises(InvalidTrailError):
        couple_conditioned(g, TrailSpec.cycle([0, 1, 0], word(1, 1, 1)))  # repeats a vertex
    with pytest.raises(InvalidTrailError):
        couple_conditioned(g, TrailSpec.cycle([0, 1], word(3, 3)))


def test_couple_is_identity_when_trail_present():
    g = graph_of(cycle_perm(4), np.arange(4))
    s = TrailSpec.cycle([0, 1, 2, 3], word(1, 1, 1, 1))
    assert couple_conditioned(g, s) == g
    assert removed_edges(g, g) == []


def _all_graphs(n, d):
    for perms in itertools.product(itertools.permutations(range(n)), repeat=d):
        yield PermutationGraph(np.array(perms))


@pytest.mark.parametrize(
    "n,d,s",
    [
        (4, 1, TrailSpec.cycle([0], word(1))),
        (4, 1, TrailSpec.cycle([2, 0, 3], word(1, 1, 1))),
        (3, 2, TrailSpec.cycle([0, 1], word(1, 2))),
        (3, 2, TrailSpec.cycle([0, 2, 1], word(1, -2, -2))),
    ],
)
def test_coupling_pushes_uniform_onto_conditional_uniform(n, d, s):
    law = Counter(couple_conditioned(g, s) for g in _all_graphs(n, d))
    support = [g for g in _all_graphs(n, d) if s.appears_in(g)]
    assert set(law) == set(support)
    assert len(set(law.values())) == 1


@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_coupling_contains_trail_and_respects_shape(seed, k, d):
    rng = substream(seed, 0)
    g = sample_graph(20, d, rng=rng)
    s = random_cycle_trail(20, d, k, rng)
    g2 = couple_conditioned(g, s)
    assert s.appears_in(g2)
    removed = removed_edges(g, g2)
    assert coupling_shape_ok(s, removed)
    # each transposition changes at most two entries per constraint
    assert len(removed) <= 2 * k


def test_shape_check_detects_far_edges():
    s = TrailSpec.cycle([0, 1, 2], word(1, 1, 1))
    assert coupling_shape_ok(s, [(0, 5, 0), (7, 1, 0)])
    assert not coupling_shape_ok(s, [(7, 8, 0)])
    assert not coupling_shape_ok(s, [(0, 5, 1)])  # right vertex, wrong generator


def test_removed_edges_shape_mismatch():
    with pytest.raises(ValueError):
        removed_edges(sample_graph(4, 1, seed=0), sample_graph(5, 1, seed=0))
