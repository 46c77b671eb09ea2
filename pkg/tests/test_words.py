import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from scipy import stats

from rrgwalks.words import (
    BudgetExceededError,
    Letter,
    a_closed_form,
    a_inclusion_exclusion,
    enumerate_cyclically_reduced,
    expected_category_count,
    expected_cycle_count_exact,
    falling_factorial,
    inverse_word,
    is_cyclically_reduced,
    mean_cnbw_infty,
    profile,
    theta,
    word,
)


def brute_reduced(d, k):
    """All length-k words as (generator, inverted) pairs, filtered by a direct check."""
    alphabet = [(j, inv) for j in range(1, d + 1) for inv in (False, True)]

    def inv(a):
        return (a[0], not a[1])

    return [
        w
        for w in itertools.product(alphabet, repeat=k)
        if all(w[i] != inv(w[i + 1]) for i in range(k - 1)) and w[0] != inv(w[-1])
    ]


letters = st.builds(Letter, st.integers(1, 5), st.booleans())


@given(letters)
def test_letter_inverse_is_involution(a):
    assert a.inverse().inverse() == a
    assert a.inverse().generator_index == a.generator_index
    assert Letter.from_code(a.code) == a


@given(st.lists(letters, min_size=1, max_size=8))
def test_inverse_word_twice_is_identity(w):
    assert inverse_word(inverse_word(tuple(w))) == tuple(w)


def test_is_cyclically_reduced_examples():
    assert is_cyclically_reduced(word(1))
    assert not is_cyclically_reduced(word(1, -1))
    assert not is_cyclically_reduced(word(1, 2, -1))
    assert is_cyclically_reduced(word(1, 2, 1))
    with pytest.raises(ValueError):
        is_cyclically_reduced(())


@pytest.mark.parametrize("d,k,expected", [(2, 1, 4), (2, 2, 12), (3, 3, 126), (1, 2, 2), (2, 3, 28)])
def test_a_values(d, k, expected):
    assert a_closed_form(d, k) == expected
    assert a_inclusion_exclusion(d, k) == expected


def test_a_d1_k2_matches_brute_force():
    assert len(brute_reduced(1, 2)) == 2 == a_inclusion_exclusion(1, 2)


def test_a_is_exact_for_large_k():
    k = 200
    assert a_closed_form(5, k) == 9**k - 1 + 10
    assert a_inclusion_exclusion(5, k) == a_closed_form(5, k)


def test_enumeration_examples():
    assert enumerate_cyclically_reduced(1, 1) == [word(1), word(-1)]
    assert enumerate_cyclically_reduced(1, 3) == [word(1, 1, 1), word(-1, -1, -1)]
    assert len(enumerate_cyclically_reduced(2, 4)) == 84


@pytest.mark.parametrize("d,k", [(1, 4), (2, 3), (2, 4), (3, 3)])
def test_enumeration_matches_brute_force_in_order(d, k):
    got = [tuple((l.generator_index, l.inverted) for l in w) for w in enumerate_cyclically_reduced(d, k)]
    assert got == brute_reduced(d, k)  # product order is pi_1 < pi_1^-1 < pi_2 < ...
    everything = set(itertools.product([(j, b) for j in range(1, d + 1) for b in (False, True)], repeat=k))
    for w in everything - set(got):
        assert not is_cyclically_reduced(tuple(Letter(j, b) for j, b in w))


def test_enumeration_budget():
    with pytest.raises(BudgetExceededError):
        enumerate_cyclically_reduced(5, 9)


def test_falling_factorial():
    assert falling_factorial(5, 0) == 1
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(10, 10) == 3628800
    with pytest.raises(ValueError):
        falling_factorial(3, 4)


def test_expected_cycle_count_small_cases():
    for n in (3, 10, 57):
        assert expected_cycle_count_exact(n, 1, 1) == 1
        assert expected_cycle_count_exact(n, 1, 2) == Fraction(1, 2)
    assert expected_cycle_count_exact(10, 2, 1) == 2


def brute_expected_cycles(n, d, k):
    # direct sum over words of [n]_k prod 1/[n]_{e_i}, no profile grouping
    total = Fraction(0)
    for w in brute_reduced(d, k):
        e = profile(tuple(Letter(j, b) for j, b in w), d)
        term = Fraction(falling_factorial(n, k))
        for ei in e:
            term /= falling_factorial(n, ei)
        total += term
    return total / (2 * k)


@pytest.mark.parametrize("n,d,k", [(7, 2, 3), (12, 2, 4), (9, 3, 3)])
def test_expected_cycle_count_matches_ungrouped_sum(n, d, k):
    assert expected_cycle_count_exact(n, d, k) == brute_expected_cycles(n, d, k)


def test_expected_cycle_count_converges():
    d, k = 2, 4
    limit = Fraction(a_closed_form(d, k), 2 * k)
    gaps = [abs(expected_cycle_count_exact(n, d, k) - limit) for n in (10**2, 10**3, 10**4)]
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_expected_category_count():
    assert expected_category_count(30, 3, [3]) == 1
    assert expected_category_count(30, 3, [2, 2]) == Fraction(24360, 756900)
    assert expected_category_count(10**6, 3, [2, 2]) < Fraction(1, 10**5)
    assert float(expected_category_count(10**6, 3, [2, 1])) == pytest.approx(1, rel=1e-5)
    with pytest.raises(ValueError):
        expected_category_count(2, 3, [3])


def test_mean_cnbw_infty():
    assert mean_cnbw_infty(2, 1) == 4
    assert mean_cnbw_infty(2, 2) == 16
    assert mean_cnbw_infty(2, 4) == 100


def test_theta_examples():
    assert theta(2, 1) == 24
    assert theta(1, 1) == 8
    assert theta(2, 2) == 312


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (2, 4), (3, 6), (2, 6)])
def test_theta_is_second_moment_of_compound_poisson(d, k):
    # brute second moment from truncated pmfs of each independent term 2j * Poi(a/2j)
    divs = [j for j in range(1, k + 1) if k % j == 0]
    m1, m2 = [], []
    for j in divs:
        lam = a_closed_form(d, j) / (2 * j)
        xs = range(int(lam + 20 * lam**0.5 + 40))
        pm = [stats.poisson.pmf(x, lam) for x in xs]
        m1.append(sum(p * 2 * j * x for x, p in zip(xs, pm)))
        m2.append(sum(p * (2 * j * x) ** 2 for x, p in zip(xs, pm)))
    second = sum(m2) + sum(m1[a] * m1[b] for a in range(len(divs)) for b in range(len(divs)) if a != b)
    assert second == pytest.approx(theta(d, k), rel=1e-9)
