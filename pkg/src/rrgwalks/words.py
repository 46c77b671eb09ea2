"""Exact combinatorics of cyclically reduced words on pi_1..pi_d and their inverses.

Letters are stored internally as integer codes ``2*(j-1) + inverted`` so that
``code ^ 1`` is the inverse letter and the natural integer order is the
lexicographic order pi_1 < pi_1^-1 < pi_2 < ... used throughout the package.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Sequence

ENUMERATION_BUDGET = 10**8


class BudgetExceededError(ValueError):
    """Requested enumeration is larger than the configured budget."""


@dataclass(frozen=True, order=True)
class Letter:
    generator_index: int  # 1-based, in [1..d]
    inverted: bool = False

    def __post_init__(self):
        if self.generator_index < 1:
            raise ValueError(f"generator index must be >= 1, got {self.generator_index}")

    @property
    def code(self) -> int:
        return 2 * (self.generator_index - 1) + int(self.inverted)

    @classmethod
    def from_code(cls, code: int) -> "Letter":
        return cls(code // 2 + 1, bool(code & 1))

    def inverse(self) -> "Letter":
        return Letter(self.generator_index, not self.inverted)

    def __str__(self):
        return f"pi{self.generator_index}" + ("^-1" if self.inverted else "")


Word = tuple  # tuple[Letter, ...]


def word(*tokens: int) -> Word:
    """Build a word from signed generator indices, e.g. ``word(1, -2)`` is pi_1 pi_2^-1."""
    if not tokens:
        raise ValueError("words are nonempty")
    return tuple(Letter(abs(t), t < 0) for t in tokens)


def parse_word(text: str) -> Word:
    """Parse a whitespace or comma separated list of signed generator indices."""
    return word(*(int(tok) for tok in text.replace(",", " ").split()))


def word_codes(w: Sequence[Letter]) -> tuple[int, ...]:
    return tuple(letter.code for letter in w)


def inverse_word(w: Sequence[Letter]) -> Word:
    """Formal inverse: reversed order, each letter inverted."""
    return tuple(letter.inverse() for letter in reversed(w))


def is_cyclically_reduced(w: Sequence[Letter]) -> bool:
    if len(w) == 0:
        raise ValueError("words are nonempty")
    codes = word_codes(w)
    return _codes_reduced(codes)


def _codes_reduced(codes: Sequence[int]) -> bool:
    k = len(codes)
    if any(codes[i] == codes[i + 1] ^ 1 for i in range(k - 1)):
        return False
    return codes[0] != codes[-1] ^ 1


def profile(w: Sequence[Letter], d: int) -> tuple[int, ...]:
    """Multiplicities e[i] of pi_i or pi_i^-1 in ``w`` (length d)."""
    e = [0] * d
    for letter in w:
        if letter.generator_index > d:
            raise ValueError(f"letter {letter} outside alphabet of size d={d}")
        e[letter.generator_index - 1] += 1
    return tuple(e)


def a_closed_form(d: int, k: int) -> int:
    """Number of cyclically reduced words of length k on 2d letters."""
    _check_dk(d, k)
    if k % 2 == 0:
        return (2 * d - 1) ** k - 1 + 2 * d
    return (2 * d - 1) ** k + 1


def a_inclusion_exclusion(d: int, k: int) -> int:
    # Sum over the |S| < k terms, plus the |S| = k term which survives only for even k.
    _check_dk(d, k)
    total = sum(comb(k, l) * (-1) ** l * (2 * d) ** (k - l) for l in range(k))
    if k % 2 == 0:
        total += 2 * d
    return total


def _check_dk(d: int, k: int) -> None:
    if d < 1 or k < 1:
        raise ValueError(f"need d >= 1 and k >= 1, got d={d}, k={k}")


def _check_budget(d: int, k: int, budget: int = ENUMERATION_BUDGET) -> None:
    if (2 * d) ** k > budget:
        raise BudgetExceededError(f"(2d)^k = {(2 * d) ** k} exceeds budget {budget}")


def iter_reduced_codes(d: int, k: int) -> Iterator[tuple[int, ...]]:
    """Cyclically reduced words as code tuples, in lexicographic order.

    Depth-first with pruning on the adjacent condition; the wrap-around
    condition is tested at the leaves.
    """
    _check_dk(d, k)
    alphabet = range(2 * d)
    prefix: list[int] = []

    def rec():
        if len(prefix) == k:
            if prefix[0] != prefix[-1] ^ 1:
                yield tuple(prefix)
            return
        for c in alphabet:
            if prefix and c == prefix[-1] ^ 1:
                continue
            prefix.append(c)
            yield from rec()
            prefix.pop()

    yield from rec()


def enumerate_cyclically_reduced(d: int, k: int, budget: int = ENUMERATION_BUDGET) -> list[Word]:
    _check_dk(d, k)
    _check_budget(d, k, budget)
    return [tuple(Letter.from_code(c) for c in codes) for codes in iter_reduced_codes(d, k)]


def a_enumerated(d: int, k: int, budget: int = ENUMERATION_BUDGET) -> int:
    _check_budget(d, k, budget)
    return sum(1 for _ in iter_reduced_codes(d, k))


def falling_factorial(n: int, j: int) -> int:
    """[n]_j = n (n-1) ... (n-j+1), with [n]_0 = 1."""
    if j < 0 or j > n:
        raise ValueError(f"falling factorial needs 0 <= j <= n, got n={n}, j={j}")
    out = 1
    for i in range(j):
        out *= n - i
    return out


def reduced_word_profiles(d: int, k: int, budget: int = ENUMERATION_BUDGET) -> Counter:
    """Counter mapping each profile e[1..d] to the number of reduced words with it."""
    _check_budget(d, k, budget)
    profiles: Counter = Counter()
    for codes in iter_reduced_codes(d, k):
        e = [0] * d
        for c in codes:
            e[c >> 1] += 1
        profiles[tuple(e)] += 1
    return profiles


def expected_cycle_count_exact(n: int, d: int, k: int, budget: int = ENUMERATION_BUDGET) -> Fraction:
    """E[C_k] at finite n: (1/2k) sum_w [n]_k prod_i 1/[n]_{e_w^i}, exactly."""
    if n < k:
        raise ValueError(f"need n >= k, got n={n}, k={k}")
    nk = falling_factorial(n, k)
    total = Fraction(0)
    for e, count in reduced_word_profiles(d, k, budget).items():
        denom = 1
        for ei in e:
            denom *= falling_factorial(n, ei)
        total += Fraction(count * nk, denom)
    return total / (2 * k)


def expected_category_count(n: int, v: int, e: Sequence[int]) -> Fraction:
    """Expected number of copies of a category graph with v vertices and per-label edge counts e."""
    if v < 0 or any(ei < 0 for ei in e):
        raise ValueError("vertex and edge counts must be nonnegative")
    if n < v or n < max(e, default=0):
        raise ValueError(f"need n >= v and n >= max(e); got n={n}, v={v}, e={list(e)}")
    denom = 1
    for ei in e:
        denom *= falling_factorial(n, ei)
    return Fraction(falling_factorial(n, v), denom)


def divisors(k: int) -> list[int]:
    return [j for j in range(1, k + 1) if k % j == 0]


def mean_cnbw_infty(d: int, k: int) -> int:
    """mu_k(d) = E[CNBW_k^infty] = sum_{j|k} a(d, j)."""
    _check_dk(d, k)
    return sum(a_closed_form(d, j) for j in divisors(k))


def theta(d: int, k: int) -> int:
    """Second moment of CNBW_k^infty."""
    _check_dk(d, k)
    var = sum(2 * j * a_closed_form(d, j) for j in divisors(k))
    return var + mean_cnbw_infty(d, k) ** 2
