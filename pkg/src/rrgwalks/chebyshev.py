"""Chebyshev bases on [-2, 2], series expansion, and linear eigenvalue statistics.

Bases (x already scaled by (2d-1)^{-1/2}):

    Phi_0 = 1,   Phi_k(x) = 2 T_k(x/2)
    Gamma_k = Phi_k + (2d-2)/(2d-1)^{k/2}  for even k >= 2, Gamma_k = Phi_k otherwise
    p_k(x) = U_k(x/2) - U_{k-2}(x/2)/(2d-1)

Sum_i Gamma_k(lambda_i) = (2d-1)^{-k/2} CNBW_k, which is what ties the
eigenvalue side of the package to the walk counters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .words import mean_cnbw_infty

BASES = ("T", "U", "Phi", "Gamma", "p")


def _cheb_T(k: int, y):
    y = np.asarray(y, dtype=float)
    t_prev, t = np.ones_like(y), y.copy()
    if k == 0:
        return t_prev
    for _ in range(k - 1):
        t_prev, t = t, 2 * y * t - t_prev
    return t


def _cheb_U(k: int, y):
    y = np.asarray(y, dtype=float)
    if k < 0:
        return np.zeros_like(y)  # U_{-1} = 0, and U_{-2} = -1 is never needed here
    u_prev, u = np.ones_like(y), 2 * y
    if k == 0:
        return u_prev
    for _ in range(k - 1):
        u_prev, u = u, 2 * y * u - u_prev
    return u


def gamma_shift(k: int, d: int) -> float:
    """Constant that Gamma_k adds to Phi_k."""
    if k >= 2 and k % 2 == 0:
        return (2 * d - 2) / (2 * d - 1) ** (k // 2)
    return 0.0


def eval_basis(kind: str, k: int, x, d: int | None = None):
    """Evaluate a basis polynomial by three-term recurrence."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if kind in ("Gamma", "p") and (d is None or d < 1):
        raise ValueError(f"basis {kind} needs d >= 1")
    x = np.asarray(x, dtype=float)
    if kind == "T":
        out = _cheb_T(k, x)
    elif kind == "U":
        out = _cheb_U(k, x)
    elif kind == "Phi":
        out = np.ones_like(x) if k == 0 else 2 * _cheb_T(k, x / 2)
    elif kind == "Gamma":
        out = np.ones_like(x) if k == 0 else 2 * _cheb_T(k, x / 2) + gamma_shift(k, d)
    elif kind == "p":
        out = _cheb_U(k, x / 2)
        if k >= 2:
            out = out - _cheb_U(k - 2, x / 2) / (2 * d - 1)
    else:
        raise ValueError(f"unknown basis {kind!r}; choose from {BASES}")
    return out if out.ndim else float(out)


def phi_power_sums(x: np.ndarray, K: int) -> np.ndarray:
    """Rows k = 0..K of Phi_k evaluated at every x (Phi_0 = 1)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((K + 1,) + x.shape)
    out[0] = 1.0
    if K >= 1:
        out[1] = x
    prev2 = np.full_like(x, 2.0)  # 2 T_0
    for k in range(2, K + 1):
        out[k] = x * out[k - 1] - (prev2 if k == 2 else out[k - 2])
    return out


@dataclass
class ChebSeries:
    """Coefficients c_0..c_K of f = sum c_k B_k on [-2, 2], B = Phi or Gamma(d)."""

    basis: str
    coeffs: np.ndarray
    d: int | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.basis not in ("Phi", "Gamma"):
            raise ValueError("series basis must be Phi or Gamma")
        if self.basis == "Gamma" and (self.d is None or self.d < 1):
            raise ValueError("Gamma series need d")

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    @property
    def c0(self) -> float:
        return float(self.coeffs[0])

    def truncate(self, K: int) -> "ChebSeries":
        return ChebSeries(self.basis, self.coeffs[: K + 1].copy(), self.d)

    def to_phi(self) -> "ChebSeries":
        if self.basis == "Phi":
            return ChebSeries("Phi", self.coeffs.copy())
        c = self.coeffs.copy()
        c[0] += sum(c[k] * gamma_shift(k, self.d) for k in range(2, len(c)))
        return ChebSeries("Phi", c)

    def to_gamma(self, d: int) -> "ChebSeries":
        phi = self.to_phi()
        c = phi.coeffs.copy()
        c[0] -= sum(c[k] * gamma_shift(k, d) for k in range(2, len(c)))
        return ChebSeries("Gamma", c, d)

    def basis_values(self, x) -> np.ndarray:
        """(K+1, ...) array of basis polynomials at x."""
        rows = phi_power_sums(x, self.K)
        if self.basis == "Gamma":
            for k in range(2, self.K + 1, 2):
                rows[k] += gamma_shift(k, self.d)
        return rows

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.tensordot(self.coeffs, self.basis_values(x), axes=1)
        return out if out.ndim else float(out)


def expand(f: Callable, K: int, basis: str = "Phi", d: int | None = None, nodes: int | None = None) -> ChebSeries:
    """Chebyshev-Gauss quadrature of f(2 cos theta) at 4K nodes."""
    if K <= 0:
        raise ValueError("K must be positive")
    N = nodes or 4 * K
    theta = np.pi * (np.arange(N) + 0.5) / N
    fx = np.asarray(f(2 * np.cos(theta)), dtype=float)
    ks = np.arange(K + 1)
    c = (2.0 / N) * np.cos(np.outer(ks, theta)) @ fx / 2  # Phi_k = 2 T_k
    c[0] = fx.mean()
    series = ChebSeries("Phi", c)
    if basis == "Phi":
        return series
    if basis == "Gamma":
        return series.to_gamma(d)
    raise ValueError(f"unknown basis {basis!r}")


def truncation_error(f: Callable, series: ChebSeries, K: int, a: float = 2.0, grid: int = 10_001) -> float:
    """sup over a grid of [-a, a] of |f - f_K|."""
    if a < 2:
        raise ValueError("interval bound must be >= 2")
    xs = np.linspace(-a, a, grid)
    return float(np.max(np.abs(np.asarray(f(xs), dtype=float) - series.truncate(K)(xs))))


def rn_rule(n: int, d: int, beta: float) -> int:
    """floor(beta log n / log(2d-1)), at least 1."""
    if not 0 < beta < 0.5:
        raise ValueError(f"beta must lie in (0, 1/2), got {beta}")
    if d < 2:
        raise ValueError("r_n rule needs d >= 2")
    return max(1, math.floor(beta * math.log(n) / math.log(2 * d - 1)))


def kesten_mckay_density(d: int, x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 2):
        raise ValueError("Kesten-McKay density is supported on [-2, 2]")
    out = 2 * d * (2 * d - 1) * np.sqrt(4 - x**2) / (2 * np.pi * (4 * d**2 - (2 * d - 1) * x**2))
    return out if out.ndim else float(out)


def growing_centering(series: ChebSeries, n: int, d: int, r: int) -> float:
    """m^f_r(n) = sum_{i<=r} c_i (2d-1)^{-i/2} (mu_i(d) - 1{i even}(2d-2)n)."""
    total = 0.0
    for i in range(1, min(r, series.K) + 1):
        shift = (2 * d - 2) * n if i % 2 == 0 else 0
        total += series.coeffs[i] * (mean_cnbw_infty(d, i) - shift) / (2 * d - 1) ** (i / 2)
    return total


@dataclass
class LinStatResult:
    raw: float  # sum_i f(lambda_i)
    centered: float
    mode: str
    n: int
    d: int
    K: int
    per_k_contributions: list = field(default_factory=list)
    walk_centered: float | None = None  # same quantity rebuilt from CNBW counts

    def to_dict(self) -> dict:
        return {
            "raw": self.raw,
            "centered": self.centered,
            "mode": self.mode,
            "n": self.n,
            "d": self.d,
            "K": self.K,
            "per_k_contributions": list(self.per_k_contributions),
            "walk_centered": self.walk_centered,
        }


def linear_statistic(
    eigs: Sequence[float],
    series: ChebSeries,
    mode: str,
    n: int,
    d: int,
    r: int | None = None,
    f: Callable | None = None,
    cnbw=None,
) -> LinStatResult:
    """Centered linear eigenvalue statistic.

    ``fixed`` (Gamma series): sum f(lambda_i) - n c_0.
    ``growing`` (Phi series): additionally minus m^f_r(n).

    f defaults to the series itself. With ``cnbw`` counts the same centered
    value is rebuilt from walks, which matches exactly when f is the series.
    """
    if mode == "fixed" and series.basis != "Gamma":
        raise ValueError("fixed-d statistics need a Gamma-basis series")
    if mode == "growing" and series.basis != "Phi":
        raise ValueError("growing-d statistics need a Phi-basis series")
    if mode not in ("fixed", "growing"):
        raise ValueError(f"unknown mode {mode!r}")
    if series.basis == "Gamma" and series.d != d:
        raise ValueError("series d does not match graph d")
    eigs = np.asarray(eigs, dtype=float)
    K = series.K if r is None else min(r, series.K)
    s = series.truncate(K)
    sums = s.basis_values(eigs).sum(axis=-1)
    per_k = [float(s.coeffs[k] * sums[k]) for k in range(1, K + 1)]
    raw = float(np.sum(f(eigs))) if f is not None else float(s.coeffs @ sums)
    centered = raw - n * s.c0
    if mode == "growing":
        centered -= growing_centering(s, n, d, K)

    walk = None
    if cnbw is not None:
        q = 2 * d - 1
        walk = 0.0
        for k in range(1, K + 1):
            count = cnbw[k]
            if mode == "growing":
                count = count - mean_cnbw_infty(d, k)
            walk += s.coeffs[k] * count / q ** (k / 2)
    return LinStatResult(raw, centered, mode, n, d, K, per_k, walk)
