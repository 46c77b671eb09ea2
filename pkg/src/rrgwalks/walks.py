"""Exact counts of cycles and (cyclically) non-backtracking closed walks.

Three independent routes to CNBW_k are available:

* ``words``    -- sum over cyclically reduced words of |Fix(w)|, a depth-first
                  search over words that is vectorized over start vertices;
* ``transfer`` -- traces of the non-backtracking operator on (vertex, arriving
                  letter) states, propagated exactly in integer blocks;
* ``spectral`` -- the Chebyshev trace identity on the eigenvalues
                  (:func:`rrgwalks.spectra.cnbw_from_spectrum`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphmodel import PermutationGraph
from .words import BudgetExceededError, divisors, mean_cnbw_infty

WORDS_BUDGET = 2 * 10**8  # vertex-steps in the word DFS
TRANSFER_BUDGET = 4 * 10**9  # state-steps in the transfer propagation
_INT64_SAFE = 2**62


class CountingInconsistencyError(RuntimeError):
    """Counters disagree with an identity that must hold exactly."""


@dataclass(frozen=True)
class CountVector:
    """Counts indexed by walk length k = 1..r."""

    kind: str  # C | NBW | CNBW | B | Ntilde
    values: tuple
    n: int
    d: int

    @property
    def r(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int):
        if not 1 <= k <= self.r:
            raise IndexError(f"k={k} outside 1..{self.r}")
        return self.values[k - 1]

    def items(self):
        return [(k, v) for k, v in enumerate(self.values, start=1)]

    def to_csv(self) -> str:
        return "k,value\n" + "".join(f"{k},{v!r}\n" if isinstance(v, float) else f"{k},{v}\n" for k, v in self.items())


def _check_r(r: int) -> None:
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")


def _word_search_cost(d: int, n: int, r: int) -> int:
    # number of reduced prefixes up to length r, times n
    return n * sum(2 * d * (2 * d - 1) ** (k - 1) for k in range(1, r + 1))


def _closed_trails(g: PermutationGraph, r: int, distinct: bool) -> list[int]:
    """Closed trails of each length 1..r with cyclically reduced words.

    With ``distinct`` the vertices s_0..s_{k-1} must be pairwise distinct.
    Returns trail counts indexed 0..r (index 0 unused).
    """
    images = g.images
    nletters = images.shape[0]
    counts = [0] * (r + 1)
    starts = np.arange(g.n)

    def rec(first, last, depth, alive, cur, path):
        # alive: start vertices still in play; cur: their current vertex
        for c in range(nletters):
            if c == last ^ 1:
                continue
            nxt = images[c][cur]
            k = depth + 1
            w1 = c if first < 0 else first
            home = nxt == alive
            if c != w1 ^ 1:  # wrap-around condition
                counts[k] += int(np.count_nonzero(home))
            if k == r:
                continue
            if distinct:
                keep = ~home
                for prev in path[1:]:
                    keep &= nxt != prev
                if not keep.any():
                    continue
                rec(w1, c, k, alive[keep], nxt[keep], [p[keep] for p in path] + [nxt[keep]])
            else:
                rec(w1, c, k, alive, nxt, path)

    rec(-1, -2, 0, starts, starts, [starts])
    return counts


def count_cycles(g: PermutationGraph, r: int, budget: int = WORDS_BUDGET) -> CountVector:
    """C_k for k = 1..r: labeled simple cycles, each counted once over its 2k trails."""
    _check_r(r)
    r_eff = min(r, g.n)  # no simple cycle is longer than n
    if _word_search_cost(g.d, g.n, r_eff) > budget:
        raise BudgetExceededError("cycle search exceeds budget")
    trails = _closed_trails(g, r_eff, distinct=True)
    values = []
    for k in range(1, r + 1):
        t = trails[k] if k <= r_eff else 0
        if t % (2 * k):
            raise CountingInconsistencyError(f"{t} closed trails of length {k} is not a multiple of {2 * k}")
        values.append(t // (2 * k))
    return CountVector("C", tuple(values), g.n, g.d)


def count_cnbw_words(g: PermutationGraph, r: int, budget: int = WORDS_BUDGET) -> CountVector:
    """CNBW_k = sum over cyclically reduced words w of length k of |Fix(w)|."""
    _check_r(r)
    if _word_search_cost(g.d, g.n, r) > budget:
        raise BudgetExceededError("word enumeration exceeds budget")
    counts = _closed_trails(g, r, distinct=False)
    return CountVector("CNBW", tuple(counts[1:]), g.n, g.d)


def _transfer_dtype(d: int, r: int, n: int):
    # entries of B^k are at most (2d-1)^(k-1); traces at most 2dn times that
    return np.int64 if 2 * d * n * (2 * d - 1) ** r < _INT64_SAFE else object


def _step(images: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    """One forward non-backtracking step on a (2d*n, m) block of state vectors.

    State (v, a) sits at row a*n + v; it moves to (b(v), b) for every b != a^-1.
    """
    nletters = images.shape[0]
    x3 = x.reshape(nletters, n, -1)
    out = np.empty_like(x3)
    for b in range(nletters):
        src = images[b ^ 1]  # predecessor vertex of w under letter b
        gathered = x3[:, src, :]
        out[b] = gathered.sum(axis=0) - gathered[b ^ 1]
    return out.reshape(nletters * n, -1)


def count_cnbw_transfer(g: PermutationGraph, r: int, budget: int = TRANSFER_BUDGET, block: int = 256) -> CountVector:
    """CNBW_k = trace(B^k) for the non-backtracking operator on (vertex, letter) states."""
    _check_r(r)
    n, d = g.n, g.d
    S = 2 * d * n
    if S * S * r > budget:
        raise BudgetExceededError(f"transfer propagation of {S} states over {r} steps exceeds budget")
    dtype = _transfer_dtype(d, r, n)
    images = g.images
    traces = [0] * r
    for lo in range(0, S, block):
        hi = min(S, lo + block)
        cols = np.arange(lo, hi)
        x = np.zeros((S, hi - lo), dtype=dtype)
        x[cols, np.arange(hi - lo)] = 1
        for k in range(r):
            x = _step(images, x, n)
            traces[k] += int(x[cols, np.arange(hi - lo)].sum())
    return CountVector("CNBW", tuple(traces), n, d)


def count_nbw_dp(g: PermutationGraph, r: int, budget: int = TRANSFER_BUDGET, block: int = 256) -> CountVector:
    """Closed non-backtracking walks by direct propagation from each start vertex.

    No constraint ties the last step to the first, so lollipop-shaped walks are
    included.
    """
    _check_r(r)
    n, d = g.n, g.d
    S = 2 * d * n
    if S * n * r > budget:
        raise BudgetExceededError("NBW propagation exceeds budget")
    dtype = _transfer_dtype(d, r, n)
    images = g.images
    nletters = 2 * d
    totals = [0] * r
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        starts = np.arange(lo, hi)
        m = hi - lo
        x = np.zeros((S, m), dtype=dtype)
        for b in range(nletters):
            x[b * n + images[b][starts], np.arange(m)] += 1
        for k in range(r):
            if k > 0:
                x = _step(images, x, n)
            x3 = x.reshape(nletters, n, m)
            totals[k] += int(x3[:, starts, np.arange(m)].sum())
    return CountVector("NBW", tuple(totals), n, d)


def nbw_from_cnbw(cnbw: CountVector) -> CountVector:
    """NBW_k from CNBW via the tail-adding recursion."""
    q = 2 * cnbw.d - 1
    nbw: list[int] = []
    for k in range(1, cnbw.r + 1):
        if k <= 2:
            nbw.append(cnbw[k])
        else:
            nbw.append(cnbw[k] + q * nbw[k - 3] - cnbw[k - 2])
    return CountVector("NBW", tuple(nbw), cnbw.n, cnbw.d)


def count_nbw(g: PermutationGraph, r: int, cnbw: CountVector | None = None) -> CountVector:
    if cnbw is None:
        cnbw = count_cnbw(g, r)
    return nbw_from_cnbw(cnbw)


def count_cnbw(g: PermutationGraph, r: int, method: str = "auto") -> CountVector:
    """Dispatch to a CNBW counter.

    ``auto`` prefers the exact word search, then the transfer operator, and
    falls back to the spectral reconstruction only when both exceed budget.
    """
    _check_r(r)
    if method == "auto":
        if _word_search_cost(g.d, g.n, r) <= WORDS_BUDGET:
            method = "words"
        elif (2 * g.d * g.n) ** 2 * r <= TRANSFER_BUDGET:
            method = "transfer"
        else:
            method = "spectral"
    if method == "words":
        return count_cnbw_words(g, r)
    if method == "transfer":
        return count_cnbw_transfer(g, r)
    if method == "spectral":
        from .graphmodel import adjacency
        from .spectra import cnbw_from_spectrum, eigenvalues

        return cnbw_from_spectrum(eigenvalues(adjacency(g), g.d), r)
    raise ValueError(f"unknown CNBW method {method!r}")


def repeated_cycle_walks(cycles: CountVector, k: int) -> int:
    """sum_{j|k} 2j C_j: walks that wind around a single short cycle."""
    return sum(2 * j * cycles[j] for j in divisors(k))


def bad_walks(g: PermutationGraph, r: int, cycles: CountVector | None = None, cnbw: CountVector | None = None) -> CountVector:
    """B_k = CNBW_k - sum_{j|k} 2j C_j."""
    cycles = cycles if cycles is not None else count_cycles(g, r)
    cnbw = cnbw if cnbw is not None else count_cnbw(g, r)
    values = []
    for k in range(1, r + 1):
        b = cnbw[k] - repeated_cycle_walks(cycles, k)
        if b < 0:
            raise CountingInconsistencyError(f"B_{k} = {b} < 0")
        values.append(b)
    return CountVector("B", tuple(values), g.n, g.d)


def centered_values(cnbw: CountVector) -> CountVector:
    q = 2 * cnbw.d - 1
    vals = tuple(float((cnbw[k] - mean_cnbw_infty(cnbw.d, k)) / q ** (k / 2)) for k in range(1, cnbw.r + 1))
    return CountVector("Ntilde", vals, cnbw.n, cnbw.d)


def centered_cnbw(g: PermutationGraph, r: int, cnbw: CountVector | None = None) -> CountVector:
    """(2d-1)^{-k/2} (CNBW_k - mu_k(d))."""
    cnbw = cnbw if cnbw is not None else count_cnbw(g, r)
    return centered_values(cnbw)


def is_nonbacktracking(codes: Sequence[int]) -> bool:
    return all(codes[i + 1] != codes[i] ^ 1 for i in range(len(codes) - 1))
