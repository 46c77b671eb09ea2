import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrgwalks.graphmodel import sample_graph
from rrgwalks.walks import (
    CountVector,
    bad_walks,
    centered_cnbw,
    count_cnbw,
    count_cnbw_transfer,
    count_cnbw_words,
    count_cycles,
    count_nbw,
    count_nbw_dp,
    is_nonbacktracking,
    nbw_from_cnbw,
)
from rrgwalks.words import a_closed_form, mean_cnbw_infty

from conftest import cycle_perm, graph_of


def edge_matrix_traces(g, r):
    """Traces of powers of a dense non-backtracking matrix on directed labeled edges."""
    images = g.images
    states = [(v, c) for c in range(2 * g.d) for v in range(g.n)]
    index = {s: i for i, s in enumerate(states)}
    B = np.zeros((len(states),) * 2, dtype=object)
    for (v, c), i in index.items():
        head = images[c][v]
        for c2 in range(2 * g.d):
            if c2 != c ^ 1:
                B[i, index[(head, c2)]] += 1
    out, P = [], np.eye(len(states), dtype=object)
    for _ in range(r):
        P = P.dot(B)
        out.append(int(np.trace(P)))
    return out


def brute_walks(g, r):
    """(closed NB walks, cyclically NB walks, distinct-vertex cyclic trails) by listing letter sequences."""
    images = g.images
    nbw, cnbw, trails = [0] * r, [0] * r, [0] * r
    for k in range(1, r + 1):
        for codes in itertools.product(range(2 * g.d), repeat=k):
            if not is_nonbacktracking(codes):
                continue
            wrap = codes[0] != codes[-1] ^ 1
            for v in range(g.n):
                path = [v]
                for c in codes:
                    path.append(int(images[c][path[-1]]))
                if path[-1] != v:
                    continue
                nbw[k - 1] += 1
                if wrap:
                    cnbw[k - 1] += 1
                    if len(set(path[:-1])) == k:
                        trails[k - 1] += 1
    return nbw, cnbw, [t // (2 * k) for k, t in enumerate(trails, start=1)]


small_graphs = st.builds(
    lambda n, d, seed: sample_graph(n, d, seed=seed), st.integers(1, 7), st.integers(1, 2), st.integers(0, 10**6)
)


@given(small_graphs)
@settings(max_examples=40, deadline=None)
def test_counters_match_letter_enumeration(g):
    r = 5
    nbw, cnbw, cycles = brute_walks(g, r)
    assert list(count_cnbw_words(g, r).values) == cnbw
    assert list(count_cnbw_transfer(g, r).values) == cnbw
    assert list(count_nbw_dp(g, r).values) == nbw
    assert list(nbw_from_cnbw(count_cnbw_words(g, r)).values) == nbw
    assert list(count_cycles(g, r).values) == cycles


@given(st.integers(3, 25), st.integers(1, 3), st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_transfer_matches_edge_matrix(n, d, seed):
    g = sample_graph(n, d, seed=seed)
    assert list(count_cnbw_transfer(g, 6, block=7).values) == edge_matrix_traces(g, 6)


def test_single_cycle_graph():
    n = 6
    g = graph_of(cycle_perm(n))
    cyc = count_cycles(g, 12)
    assert cyc.values == tuple(1 if k == n else 0 for k in range(1, 13))
    cn = count_cnbw_words(g, 12)
    assert cn.values == tuple(2 * n if k % n == 0 else 0 for k in range(1, 13))
    assert bad_walks(g, 12).values == (0,) * 12


def test_lollipop_is_nonbacktracking_but_not_cyclically():
    # pi_1 is a 4-cycle on 1..4 with 0 fixed, pi_2 = (0 1 2); word pi_2 pi_1^4 pi_2^-1 from 0
    p1 = [0, 2, 3, 4, 1]
    p2 = [1, 2, 0, 3, 4]
    g = graph_of(p1, p2)
    codes = [2, 0, 0, 0, 0, 3]
    assert is_nonbacktracking(codes)
    assert codes[0] == codes[-1] ^ 1
    nbw, cnbw, _ = brute_walks(g, 6)
    assert count_nbw_dp(g, 6)[6] == nbw[5] > cnbw[5] == count_cnbw_words(g, 6)[6]


def test_fixed_point_is_a_loop():
    g = graph_of([0, 2, 1])
    assert count_cycles(g, 2).values == (1, 1)
    assert count_cnbw_words(g, 2).values == (2, 6)


def test_repeated_cycles_explain_every_walk_on_disjoint_cycles():
    g = graph_of([1, 2, 0, 4, 3, 5])
    assert bad_walks(g, 8).values == (0,) * 8


def test_bad_walks_on_theta_graph():
    # two generators forming overlapping cycles give walks that are not repeated cycles
    g = graph_of(cycle_perm(4), [1, 0, 2, 3])
    b = bad_walks(g, 8)
    assert all(v >= 0 for v in b.values)
    assert any(v > 0 for v in b.values)


def test_auto_and_spectral_methods_agree():
    g = sample_graph(60, 2, seed=5)
    words = count_cnbw(g, 10, method="words")
    assert count_cnbw(g, 10) == words
    assert count_cnbw(g, 10, method="transfer") == words
    assert count_cnbw(g, 10, method="spectral") == words
    assert count_nbw(g, 10) == count_nbw_dp(g, 10)
    with pytest.raises(ValueError):
        count_cnbw(g, 10, method="magic")


def test_transfer_switches_to_big_integers():
    g = sample_graph(6, 3, seed=1)
    r = 28  # 5^28 overflows the safe int64 bound
    tr = count_cnbw_transfer(g, r)
    assert tr[r] > 2**62
    assert list(tr.values) == edge_matrix_traces(g, r)


def test_r_validation_and_indexing():
    g = sample_graph(5, 1, seed=0)
    with pytest.raises(ValueError):
        count_cnbw_words(g, 0)
    cv = count_cycles(g, 3)
    with pytest.raises(IndexError):
        cv[4]
    assert cv.to_csv().splitlines()[0] == "k,value"


def test_cycles_longer_than_n_are_zero():
    g = sample_graph(3, 2, seed=2)
    assert count_cycles(g, 6).values[3:] == (0, 0, 0)


def test_centered_values():
    g = sample_graph(40, 2, seed=3)
    cn = count_cnbw(g, 4)
    nt = centered_cnbw(g, 4, cnbw=cn)
    for k in range(1, 5):
        assert nt[k] == pytest.approx((cn[k] - mean_cnbw_infty(2, k)) / 3 ** (k / 2))


def test_mean_cnbw_of_large_graph_near_limit():
    # E CNBW_1 -> a(d,1) = 2d as n grows; 300 graphs at d=2 keep the check quick
    vals = [count_cnbw_words(sample_graph(500, 2, seed=s), 1)[1] for s in range(300)]
    assert abs(np.mean(vals) - a_closed_form(2, 1)) < 4 * np.std(vals) / np.sqrt(len(vals))


def test_count_vector_is_hashable_value():
    assert CountVector("C", (1, 2), 3, 1) == CountVector("C", (1, 2), 3, 1)
