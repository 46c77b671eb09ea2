"""Permutation model of random 2d-regular multigraphs and the size-biased coupling.

Random streams: every sample is drawn from a Philox-4x64 counter-based
generator keyed by ``SeedSequence([seed, trial])``. The pair (master seed,
trial index) fully determines a trial, so any execution order reproduces
the serial run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .words import Letter, Word, is_cyclically_reduced, word_codes


class InvalidTrailError(ValueError):
    """Trail is not closed, repeats a vertex, or has a non-reduced word."""


def substream(seed: int, trial: int = 0) -> np.random.Generator:
    if seed < 0 or trial < 0:
        raise ValueError("seed and trial index must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial)])))


def _as_perm_table(perms) -> np.ndarray:
    table = np.array(perms, dtype=np.int64)
    if table.ndim != 2:
        raise ValueError("perms must be a d x n table")
    d, n = table.shape
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    expected = np.arange(n)
    for row in table:
        if not np.array_equal(np.sort(row), expected):
            raise ValueError("every row must be a permutation of 0..n-1")
    table.setflags(write=False)
    return table


@dataclass(frozen=True, eq=False)
class PermutationGraph:
    """d permutations of 0..n-1; edge (i, pi_j(i)) for every i and j."""

    perms: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "perms", _as_perm_table(self.perms))

    @property
    def d(self) -> int:
        return self.perms.shape[0]

    @property
    def n(self) -> int:
        return self.perms.shape[1]

    def __repr__(self):
        return f"PermutationGraph(n={self.n}, d={self.d})"

    def __eq__(self, other):
        return isinstance(other, PermutationGraph) and np.array_equal(self.perms, other.perms)

    def __hash__(self):
        return hash(self.perms.tobytes())

    @cached_property
    def inverses(self) -> np.ndarray:
        inv = np.empty_like(self.perms)
        rows = np.arange(self.d)[:, None]
        inv[rows, self.perms] = np.arange(self.n)[None, :]
        inv.setflags(write=False)
        return inv

    @cached_property
    def images(self) -> np.ndarray:
        """(2d, n) table: row ``code`` is the map of the letter with that code."""
        table = np.empty((2 * self.d, self.n), dtype=np.int64)
        table[0::2] = self.perms
        table[1::2] = self.inverses
        table.setflags(write=False)
        return table

    def fixed_points(self) -> np.ndarray:
        """Number of fixed points of each permutation."""
        return (self.perms == np.arange(self.n)[None, :]).sum(axis=1)

    def to_dict(self) -> dict:
        return {"n": self.n, "d": self.d, "perms": self.perms.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PermutationGraph":
        g = cls(data["perms"])
        if g.n != data.get("n", g.n) or g.d != data.get("d", g.d):
            raise ValueError("n/d metadata does not match the permutation table")
        return g

    @classmethod
    def from_json(cls, text: str) -> "PermutationGraph":
        return cls.from_dict(json.loads(text))


def sample_graph(n: int, d: int, seed: int | None = None, *, rng: np.random.Generator | None = None) -> PermutationGraph:
    """d iid uniform permutations (Fisher-Yates with unbiased bounded draws)."""
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if rng is None:
        if seed is None:
            raise ValueError("pass either seed or rng")
        rng = substream(seed, 0)
    return PermutationGraph(np.stack([rng.permutation(n) for _ in range(d)]))


def adjacency(g: PermutationGraph) -> np.ndarray:
    """Count matrix with loops counted twice: row sums are all 2d."""
    n = g.n
    A = np.zeros((n, n), dtype=np.int64)
    src = np.arange(n)
    for perm in g.perms:
        np.add.at(A, (src, perm), 1)
        np.add.at(A, (perm, src), 1)
    return A


def apply_word(g: PermutationGraph, w: Sequence[Letter], v):
    """Apply w_1 first, then w_2, ..., to a vertex or an array of vertices."""
    images = g.images
    out = np.asarray(v)
    for c in word_codes(w):
        if c >= 2 * g.d:
            raise ValueError(f"letter code {c} outside alphabet of size d={g.d}")
        out = images[c][out]
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TrailSpec:
    """A labeled trail s_0 -w_1-> s_1 -> ... -w_k-> s_k.

    ``vertices`` holds all k+1 vertices; a closed trail has s_k == s_0.
    """

    vertices: tuple
    word: Word

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        object.__setattr__(self, "word", tuple(self.word))
        if len(self.vertices) != len(self.word) + 1:
            raise ValueError("a trail of length k has k+1 vertices")

    @property
    def k(self) -> int:
        return len(self.word)

    @property
    def closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    @property
    def distinct(self) -> bool:
        body = self.vertices[:-1]
        return len(set(body)) == len(body)

    @classmethod
    def cycle(cls, vertices: Sequence[int], w: Word) -> "TrailSpec":
        """Closed trail through ``vertices`` (s_0..s_{k-1}), returning to s_0."""
        return cls(tuple(vertices) + (vertices[0],), w)

    @classmethod
    def from_walk(cls, g: PermutationGraph, start: int, w: Word) -> "TrailSpec":
        verts = [int(start)]
        for letter in w:
            verts.append(int(g.images[letter.code][verts[-1]]))
        return cls(tuple(verts), w)

    def labeled_edges(self) -> list[tuple[int, int, int]]:
        """Directed edges (tail, head, generator) with tail -pi_l-> head, 0-based l."""
        edges = []
        for i, letter in enumerate(self.word):
            a, b = self.vertices[i], self.vertices[i + 1]
            if letter.inverted:
                a, b = b, a
            edges.append((a, b, letter.generator_index - 1))
        return edges

    def appears_in(self, g: PermutationGraph) -> bool:
        return all(g.perms[l, a] == b for a, b, l in self.labeled_edges())


def _validate_cycle(g: PermutationGraph, s: TrailSpec) -> None:
    if not s.closed:
        raise InvalidTrailError("trail is not closed")
    if not s.distinct:
        raise InvalidTrailError("trail repeats a vertex")
    if not is_cyclically_reduced(s.word):
        raise InvalidTrailError("trail word is not cyclically reduced")
    if any(v < 0 or v >= g.n for v in s.vertices):
        raise InvalidTrailError("trail vertex out of range")
    if any(letter.generator_index > g.d for letter in s.word):
        raise InvalidTrailError("trail letter outside the alphabet")


def couple_conditioned(g: PermutationGraph, s: TrailSpec, check: bool = True) -> PermutationGraph:
    """Minimal-swap coupling: returns G' distributed as G conditioned to contain s.

    For each generator l, the constrained pairs (a_m, b_m) are handled in trail
    order and each step left-multiplies pi_l by the transposition exchanging
    the current image of a_m with b_m.
    """
    _validate_cycle(g, s)
    perms = g.perms.copy()
    inv = g.inverses.copy()
    for a, b, l in s.labeled_edges():
        x = perms[l, a]
        if x == b:
            continue
        c = inv[l, b]
        perms[l, a], perms[l, c] = b, x
        inv[l, b], inv[l, x] = a, c
    out = PermutationGraph(perms)
    if check:
        assert s.appears_in(out), "coupled graph does not contain the trail"
        assert coupling_shape_ok(s, removed_edges(g, out)), "removed edge not adjacent to trail"
    return out


def removed_edges(g: PermutationGraph, g_prime: PermutationGraph) -> list[tuple[int, int, int]]:
    """Labeled directed edges (tail, head, generator) of g that are absent in g'.

    Generators are reported 0-based like vertices.
    """
    if g.perms.shape != g_prime.perms.shape:
        raise ValueError(f"shape mismatch: {g.perms.shape} vs {g_prime.perms.shape}")
    ls, tails = np.nonzero(g.perms != g_prime.perms)
    return [(int(i), int(g.perms[l, i]), int(l)) for l, i in zip(ls, tails)]


def coupling_shape_ok(s: TrailSpec, removed: Sequence[tuple[int, int, int]]) -> bool:
    """Every removed edge i -pi_l-> j shares its tail or its head with a pi_l edge of s."""
    edges = s.labeled_edges()
    tails = {(a, l) for a, _, l in edges}
    heads = {(b, l) for _, b, l in edges}
    return all((i, l) in tails or (j, l) in heads for i, j, l in removed)


def random_cycle_trail(n: int, d: int, k: int, rng: np.random.Generator) -> TrailSpec:
    """Uniform distinct vertices s_0..s_{k-1} with a uniform cyclically reduced word."""
    if k > n:
        raise ValueError("cycle longer than vertex count")
    vertices = rng.choice(n, size=k, replace=False)
    while True:
        codes = rng.integers(0, 2 * d, size=k)
        w = tuple(Letter.from_code(int(c)) for c in codes)
        if is_cyclically_reduced(w):
            return TrailSpec.cycle(vertices.tolist(), w)
