"""Spectra of the scaled adjacency matrix, the CNBW trace identity, and discrepancy checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .chebyshev import phi_power_sums, gamma_shift
from .graphmodel import PermutationGraph
from .walks import CountVector

ROUNDING_ALARM = 1e-3


class IdentityViolationError(RuntimeError):
    """Spectral reconstruction of a walk count is not close to an integer."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of (2d-1)^{-1/2} A in descending order."""

    eigenvalues: np.ndarray
    n: int
    d: int

    @property
    def scale(self) -> float:
        return math.sqrt(2 * self.d - 1)

    @property
    def top(self) -> float:
        return float(self.eigenvalues[0])

    def unscaled(self) -> np.ndarray:
        return self.eigenvalues * self.scale


def _check_symmetric(A: np.ndarray) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be square")
    if not np.array_equal(A, A.T):
        raise ValueError("adjacency must be symmetric")


def eigenvalues(A: np.ndarray, d: int, check: bool = False) -> Spectrum:
    """Dense symmetric eigensolve (LAPACK tridiagonal reduction) of A / sqrt(2d-1).

    With ``check`` eigenvectors are computed too and every residual
    ||A v - mu v|| is held to 1e-8 ||A||.
    """
    _check_symmetric(A)
    Af = np.asarray(A, dtype=float)
    if check:
        mu, V = np.linalg.eigh(Af)
        res = np.linalg.norm(Af @ V - V * mu, axis=0)
        bound = 1e-8 * max(np.linalg.norm(Af, 2), 1.0)
        if np.any(res > bound):
            raise np.linalg.LinAlgError(f"eigen residual {res.max():.3e} exceeds {bound:.3e}")
    else:
        mu = np.linalg.eigvalsh(Af)
    lam = mu[::-1] / math.sqrt(2 * d - 1)
    return Spectrum(lam.copy(), A.shape[0], d)


def second_eigenvalue(A: np.ndarray) -> float:
    """max(lambda_2, |lambda_n|) of the unscaled matrix."""
    _check_symmetric(A)
    if A.shape[0] < 2:
        raise ValueError("second eigenvalue needs n >= 2")
    mu = np.linalg.eigvalsh(np.asarray(A, dtype=float))
    return second_from_eigs(mu[::-1])


def second_from_eigs(desc: np.ndarray) -> float:
    return float(max(desc[1], abs(desc[-1])))


def eigbound_constant(m: float) -> float:
    return 36000 + 2400 * m


def gamma_sums(spec: Spectrum, r: int) -> np.ndarray:
    """sum_i Gamma_k(lambda_i) for k = 0..r."""
    sums = phi_power_sums(spec.eigenvalues, r).sum(axis=1)
    for k in range(2, r + 1, 2):
        sums[k] += spec.n * gamma_shift(k, spec.d)
    return sums


@dataclass(frozen=True)
class SpectralCounts:
    counts: CountVector
    raw: tuple  # pre-rounding values
    deviation: tuple  # |raw - rounded|


def spectral_cnbw(spec: Spectrum, r: int, alarm: float = ROUNDING_ALARM) -> SpectralCounts:
    q = 2 * spec.d - 1
    sums = gamma_sums(spec, r)
    raw = tuple(float(q ** (k / 2) * sums[k]) for k in range(1, r + 1))
    rounded = tuple(int(round(v)) for v in raw)
    dev = tuple(abs(v - c) for v, c in zip(raw, rounded))
    for k, dk in enumerate(dev, start=1):
        if dk > alarm:
            raise IdentityViolationError(f"CNBW_{k} spectral value {raw[k - 1]!r} is {dk:.3e} from an integer")
    return SpectralCounts(CountVector("CNBW", rounded, spec.n, spec.d), raw, dev)


def cnbw_from_spectrum(spec: Spectrum, r: int, alarm: float = ROUNDING_ALARM) -> CountVector:
    """CNBW_k = round((2d-1)^{k/2} sum_i Gamma_k(lambda_i))."""
    return spectral_cnbw(spec, r, alarm).counts


def _mask(n: int, S) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    m[np.asarray(list(S), dtype=np.int64)] = True
    return m


def edge_count(g: PermutationGraph, A: Iterable[int], B: Iterable[int]) -> int:
    """e(A, B) = #{(i, a) : a in A, pi_i(a) in B}."""
    ma, mb = _mask(g.n, A), _mask(g.n, B)
    return int(sum(np.count_nonzero(mb[perm[ma]]) for perm in g.perms))


@dataclass(frozen=True)
class PairRecord:
    size_a: int
    size_b: int
    edges: int
    mu: float
    held: int  # 1 or 2 for the property that held, 0 for a violation


@dataclass
class DiscrepancyReport:
    n: int
    d: int
    m: float
    c1: float
    c2: float
    records: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(1 for rec in self.records if rec.held == 0)

    def counts(self) -> dict:
        out = {1: 0, 2: 0, 0: 0}
        for rec in self.records:
            out[rec.held] += 1
        return out


def discrepancy_constants(m: float) -> tuple[float, float]:
    return math.e**4, 2 * math.e**2 * (6 + m)


def classify_pair(n: int, d: int, size_a: int, size_b: int, e: int, c1: float, c2: float) -> int:
    mu = size_a * size_b * d / n
    if e / mu <= c1:
        return 1
    big = max(size_a, size_b)
    if e * math.log(e / mu) <= c2 * big * math.log(n / big):
        return 2
    return 0


def discrepancy_check(g: PermutationGraph, pairs: Sequence[tuple], m: float = 1.0) -> DiscrepancyReport:
    c1, c2 = discrepancy_constants(m)
    report = DiscrepancyReport(g.n, g.d, m, c1, c2)
    for A, B in pairs:
        A, B = list(A), list(B)
        if not A or not B:
            raise ValueError("discrepancy pairs need nonempty sets")
        e = edge_count(g, A, B)
        held = classify_pair(g.n, g.d, len(A), len(B), e, c1, c2)
        report.records.append(PairRecord(len(A), len(B), e, len(A) * len(B) * g.d / g.n, held))
    return report


def sample_pairs(n: int, count: int, rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """Uniform random subsets with sizes drawn from a log-spaced ladder."""
    sizes = np.unique(np.geomspace(1, n, num=max(2, int(math.log2(n)) + 1)).astype(int))
    pairs = []
    for _ in range(count):
        sa, sb = rng.choice(sizes, size=2)
        pairs.append((rng.choice(n, size=sa, replace=False), rng.choice(n, size=sb, replace=False)))
    return pairs


def exhaustive_pairs(n: int):
    """Every pair of nonempty vertex subsets (only sensible for n <= 12)."""
    if n > 12:
        raise ValueError("exhaustive discrepancy mode is limited to n <= 12")
    subsets = [[v for v in range(n) if mask >> v & 1] for mask in range(1, 1 << n)]
    for A in subsets:
        for B in subsets:
            yield A, B
