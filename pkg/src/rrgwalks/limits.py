"""Reference limit laws and distances to them.

Lattice pmfs live on ``offset + step * i``; compound CNBW laws use step 2
because every term 2j C_j is even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .chebyshev import ChebSeries
from .graphmodel import substream
from .words import a_closed_form, divisors, mean_cnbw_infty

DEFAULT_EPS = 1e-12
CONVOLUTION_LIMIT = 10**6


@dataclass(frozen=True)
class Pmf:
    offset: int
    probs: np.ndarray
    step: int = 1
    eps: float = 0.0  # mass dropped by truncation

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if np.any(probs < 0):
            raise ValueError("pmf entries must be nonnegative")
        object.__setattr__(self, "probs", probs)

    @property
    def values(self) -> np.ndarray:
        return self.offset + self.step * np.arange(len(self.probs))

    @property
    def mass(self) -> float:
        return float(self.probs.sum())

    def moment(self, p: int) -> float:
        return float(np.sum(self.probs * self.values.astype(float) ** p))

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def var(self) -> float:
        return self.moment(2) - self.mean**2

    def prob(self, x: int) -> float:
        i, rem = divmod(x - self.offset, self.step)
        if rem or i < 0 or i >= len(self.probs):
            return 0.0
        return float(self.probs[i])

    def to_csv(self) -> str:
        return "value,probability\n" + "".join(f"{v},{p!r}\n" for v, p in zip(self.values, self.probs.tolist()))


@dataclass(frozen=True)
class EmpiricalDist:
    """Integer samples summarised as a sorted count table."""

    values: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDist":
        v, c = np.unique(np.asarray(samples), return_counts=True)
        return cls(v, c)

    @property
    def trials(self) -> int:
        return int(self.counts.sum())

    @property
    def mean(self) -> float:
        return float(np.sum(self.values * self.counts) / self.trials)

    def probs(self) -> np.ndarray:
        return self.counts / self.trials


def poisson_pmf(lam: float, eps: float = DEFAULT_EPS) -> Pmf:
    """Poi(lam) truncated where the remaining upper tail drops below eps."""
    if lam < 0:
        raise ValueError("Poisson mean must be nonnegative")
    if lam == 0:
        return Pmf(0, np.array([1.0]), 1, 0.0)
    upper = int(lam + 40 * math.sqrt(lam) + 60)
    x = np.arange(upper + 1)
    p = np.exp(x * math.log(lam) - lam - gammaln(x + 1))
    tail = np.cumsum(p[::-1])[::-1]  # tail[i] = P(X >= i) within the array
    cut = int(np.argmax(tail < eps)) if np.any(tail < eps) else len(p)
    return Pmf(0, p[:cut], 1, float(tail[cut]) if cut < len(p) else 0.0)


def _scaled(pmf: Pmf, factor: int, step: int) -> np.ndarray:
    """Spread a step-1 pmf onto a lattice of the given step after scaling by factor."""
    stride = factor // step
    out = np.zeros(stride * (len(pmf.probs) - 1) + 1)
    out[::stride] = pmf.probs
    return out


def cnbw_infty_pmf(d: int, k: int, eps: float = DEFAULT_EPS) -> Pmf:
    """Law of sum_{j|k} 2j Poi(a(d,j)/2j), by exact lattice convolution."""
    divs = divisors(k)
    probs = np.array([1.0])
    dropped = 0.0
    for j in divs:
        part = poisson_pmf(a_closed_form(d, j) / (2 * j), eps / len(divs))
        dropped += part.eps
        spread = _scaled(part, 2 * j, 2)
        if len(probs) + len(spread) > CONVOLUTION_LIMIT:
            raise ValueError("compound law support exceeds convolution limit")
        probs = np.convolve(probs, spread)
    return Pmf(0, probs, 2, dropped)


def tv_distance(p, q: Pmf) -> float:
    """Total variation between a Pmf or EmpiricalDist and a reference Pmf.

    Truncation mass of either side is added as an upper error bar.
    """
    if isinstance(p, EmpiricalDist):
        pv, pp, peps = p.values, p.probs(), 0.0
    elif isinstance(p, Pmf):
        if p.step != q.step or (p.offset - q.offset) % q.step:
            raise ValueError("pmfs live on different lattices")
        pv, pp, peps = p.values, p.probs, p.eps
    else:
        raise TypeError("p must be a Pmf or EmpiricalDist")
    qmap = dict(zip(q.values.tolist(), q.probs.tolist()))
    total = 0.0
    seen_q = 0.0
    for v, pr in zip(np.asarray(pv).tolist(), np.asarray(pp).tolist()):
        qv = qmap.get(v, 0.0)
        seen_q += qv
        total += abs(pr - qv)
    total += q.mass - seen_q  # q mass where p has none
    return float(min(1.0, 0.5 * total + 0.5 * (peps + q.eps)))


def tv_distance_joint(samples: np.ndarray, marginals: Sequence[Pmf]) -> float:
    """TV between the empirical law of integer vectors and a product of marginals."""
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[1] != len(marginals):
        raise ValueError("samples must be (trials, len(marginals))")
    rows, counts = np.unique(samples, axis=0, return_counts=True)
    T = samples.shape[0]
    total = 0.0
    seen_q = 0.0
    for row, c in zip(rows, counts):
        qv = 1.0
        for x, m in zip(row.tolist(), marginals):
            qv *= m.prob(int(x))
        seen_q += qv
        total += abs(c / T - qv)
    total += max(0.0, 1.0 - seen_q)
    return float(min(1.0, 0.5 * total + 0.5 * sum(m.eps for m in marginals)))


def bootstrap_tv_se(samples, q: Pmf, seed: int, resamples: int = 200) -> float:
    """Bootstrap standard error of the empirical TV, from a dedicated substream."""
    samples = np.asarray(samples)
    rng = substream(seed, 2**32 + 1)
    vals = [
        tv_distance(EmpiricalDist.from_samples(rng.choice(samples, size=len(samples))), q)
        for _ in range(resamples)
    ]
    return float(np.std(vals, ddof=1))


def ks_statistic(samples, mean: float, variance: float) -> float:
    """Kolmogorov-Smirnov distance between the sample CDF and N(mean, variance)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 100:
        raise ValueError("KS comparison needs at least 100 samples")
    return float(stats.kstest(samples, "norm", args=(mean, math.sqrt(variance))).statistic)


@dataclass
class YfReference:
    samples: np.ndarray
    mean: float
    variance: float

    @property
    def empirical(self) -> EmpiricalDist:
        return EmpiricalDist.from_samples(self.samples)


def _yf_weights(d: int, series: ChebSeries, K: int) -> np.ndarray:
    q = 2 * d - 1
    K = min(K, series.K)
    return np.array([series.coeffs[k] / q ** (k / 2) for k in range(1, K + 1)])


def yf_moments(d: int, series: ChebSeries, K: int) -> tuple[float, float]:
    """Mean and variance of sum_{k<=K} c_k (2d-1)^{-k/2} CNBW_k^infty.

    The variance groups by the shared Poisson C_j: each C_j enters every
    CNBW_k with j | k, with weight 2j.
    """
    w = _yf_weights(d, series, K)
    K = len(w)
    mean = sum(w[k - 1] * mean_cnbw_infty(d, k) for k in range(1, K + 1))
    var = 0.0
    for j in range(1, K + 1):
        lam = a_closed_form(d, j) / (2 * j)
        coef = sum(w[k - 1] * 2 * j for k in range(j, K + 1, j))
        var += lam * coef**2
    return float(mean), float(var)


def yf_reference(d: int, series: ChebSeries, K: int, trials: int, seed: int) -> YfReference:
    """Monte Carlo of Y_f driven by one shared family of independent C_j^infty."""
    if series.basis != "Gamma":
        raise ValueError("Y_f needs a Gamma-basis series")
    if K < 1:
        raise ValueError("K must be >= 1")
    w = _yf_weights(d, series, K)
    K = len(w)
    rng = substream(seed, 0)
    lams = np.array([a_closed_form(d, j) / (2 * j) for j in range(1, K + 1)])
    C = rng.poisson(lams, size=(trials, K))
    Y = np.zeros(trials)
    for k in range(1, K + 1):
        cnbw_k = sum(2 * j * C[:, j - 1] for j in divisors(k))
        Y += w[k - 1] * cnbw_k
    mean, var = yf_moments(d, series, K)
    return YfReference(Y, mean, var)


def sigma_f_squared(series: ChebSeries) -> float:
    """sum_{k>=1} 2k c_k^2 over a Phi-basis series."""
    if series.basis != "Phi":
        raise ValueError("sigma_f^2 is defined for Phi-basis coefficients")
    c = series.coeffs
    return float(sum(2 * k * c[k] ** 2 for k in range(1, len(c))))
