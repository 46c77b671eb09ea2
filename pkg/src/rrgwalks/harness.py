"""Seeded Monte Carlo experiments over the permutation model.

Trial t of an experiment with master seed S draws everything from
``substream(S, t)``; results are merged by trial index, so a parallel run
writes the same bytes as a serial one.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__
from .chebyshev import ChebSeries, eval_basis, expand, linear_statistic, rn_rule, truncation_error
from .graphmodel import (
    adjacency,
    couple_conditioned,
    coupling_shape_ok,
    random_cycle_trail,
    removed_edges,
    sample_graph,
    substream,
)
from .limits import (
    EmpiricalDist,
    bootstrap_tv_se,
    cnbw_infty_pmf,
    ks_statistic,
    poisson_pmf,
    sigma_f_squared,
    tv_distance,
    tv_distance_joint,
    yf_moments,
)
from .spectra import (
    IdentityViolationError,
    discrepancy_check,
    eigbound_constant,
    eigenvalues,
    sample_pairs,
    second_from_eigs,
)
from .walks import CountingInconsistencyError, bad_walks, centered_values, count_cnbw, count_cycles
from .words import a_closed_form, expected_cycle_count_exact, mean_cnbw_infty

STATS = ("cycles", "cnbw", "ntilde", "linstat", "lambda2", "badwalks", "coupling", "discrepancy")
NEEDS_R = ("cycles", "cnbw", "ntilde", "badwalks")
FAILURE_THRESHOLD = 0.01


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    stat: str
    n: int | None = None
    d: int | None = None
    schedule: list | None = None  # explicit [(n, d), ...]
    r: int | None = None
    beta: float | None = None
    trials: int = 100
    seed: int = 0
    function: str = "square"
    K: int = 8
    mode: str = "fixed"
    pairs: int = 100
    m: float = 1.0
    threads: int = 1
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.schedule is not None:
            self.schedule = [tuple(int(x) for x in p) for p in self.schedule]
        self.validate()

    def validate(self) -> None:
        if self.stat not in STATS:
            raise ConfigError(f"unknown statistic {self.stat!r}; choose from {', '.join(STATS)}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.schedule is None and (self.n is None or self.d is None):
            raise ConfigError("give n and d, or a schedule")
        for n, d in self.points_nd():
            if n < 1 or d < 1:
                raise ConfigError(f"invalid (n, d) = ({n}, {d})")
        if self.r is not None and self.beta is not None:
            raise ConfigError("set exactly one of r and beta")
        if self.beta is not None:
            if not 0 < self.beta < 0.5:
                raise ConfigError(f"beta must lie in (0, 1/2), got {self.beta}")
            if any(d < 2 for _, d in self.points_nd()):
                raise ConfigError("the beta rule needs d >= 2")
        if self.r is not None and self.r < 1:
            raise ConfigError("r must be >= 1")
        if self.stat in NEEDS_R and self.r is None and self.beta is None:
            raise ConfigError(f"statistic {self.stat} needs r or beta")
        if self.mode not in ("fixed", "growing"):
            raise ConfigError("mode must be fixed or growing")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.pairs < 1:
            raise ConfigError("pairs must be >= 1")
        if self.m <= 0:
            raise ConfigError("m must be positive")
        parse_function(self.function)

    def points_nd(self) -> list[tuple[int, int]]:
        return list(self.schedule) if self.schedule is not None else [(self.n, self.d)]

    def resolve_r(self, n: int, d: int) -> int | None:
        if self.beta is not None:
            return rn_rule(n, d, self.beta)
        if self.r is not None:
            return self.r
        if self.stat == "coupling":
            return 3
        if self.stat == "linstat":
            return self.K
        return None

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.schedule is not None:
            out["schedule"] = [list(p) for p in self.schedule]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def hash(self) -> str:
        # output location and parallelism do not change results
        core = {k: v for k, v in self.to_dict().items() if k not in ("out", "threads", "format")}
        return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()[:16]


def parse_function(name: str):
    """'square' | 'exp' | 'cheb:k' -> vectorized callable."""
    if name == "square":
        return np.square
    if name == "exp":
        return np.exp
    if name.startswith("cheb:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad function {name!r}") from None
        if k < 0:
            raise ConfigError("cheb:k needs k >= 0")
        return lambda x: eval_basis("Phi", k, x)
    raise ConfigError(f"unknown function {name!r}; use square, exp or cheb:k")


def function_series(cfg: ExperimentConfig, d: int) -> ChebSeries:
    f = parse_function(cfg.function)
    if cfg.mode == "fixed":
        return expand(f, cfg.K, "Gamma", d)
    return expand(f, cfg.K, "Phi")


# ---------------------------------------------------------------- trials


def _trial(cfg: ExperimentConfig, n: int, d: int, r: int | None, t: int) -> dict:
    rng = substream(cfg.seed, t)
    g = sample_graph(n, d, rng=rng)
    stat = cfg.stat
    if stat == "cycles":
        return {"C": list(count_cycles(g, r).values)}
    if stat == "cnbw":
        return {"CNBW": list(count_cnbw(g, r).values)}
    if stat == "ntilde":
        return {"Ntilde": list(centered_values(count_cnbw(g, r)).values)}
    if stat == "badwalks":
        B = bad_walks(g, r)
        return {"B": list(B.values)}
    if stat == "linstat":
        series = function_series(cfg, d)
        spec = eigenvalues(adjacency(g), d)
        res = linear_statistic(spec.eigenvalues, series, cfg.mode, n, d, r=r, f=parse_function(cfg.function))
        return {"raw": res.raw, "centered": res.centered}
    if stat == "lambda2":
        spec = eigenvalues(adjacency(g), d)
        return {"lambda2": second_from_eigs(spec.unscaled())}
    if stat == "coupling":
        s = random_cycle_trail(n, d, r, rng)
        gp = couple_conditioned(g, s, check=False)
        removed = removed_edges(g, gp)
        return {"contains": bool(s.appears_in(gp)), "shape_ok": bool(coupling_shape_ok(s, removed)), "removed": len(removed)}
    if stat == "discrepancy":
        rep = discrepancy_check(g, sample_pairs(n, cfg.pairs, rng), cfg.m)
        c = rep.counts()
        return {"pairs": len(rep.records), "held1": c[1], "held2": c[2], "violations": c[0]}
    raise ConfigError(stat)


_ASSERTION_ERRORS = (CountingInconsistencyError, IdentityViolationError)


def _run_trial(args) -> dict:
    cfg_dict, n, d, r, t = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    try:
        rec = _trial(cfg, n, d, r, t)
        rec["trial"] = t
        return rec
    except _ASSERTION_ERRORS as exc:
        return {"trial": t, "failed": True, "assertion": True, "error": f"{type(exc).__name__}: {exc}"}
    except (np.linalg.LinAlgError, ArithmeticError, MemoryError) as exc:
        return {"trial": t, "failed": True, "assertion": False, "error": f"{type(exc).__name__}: {exc}"}


def run_trials(cfg: ExperimentConfig, n: int, d: int, r: int | None) -> list[dict]:
    jobs = [(cfg.to_dict(), n, d, r, t) for t in range(cfg.trials)]
    if cfg.threads == 1:
        return [_run_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
        chunk = max(1, len(jobs) // (4 * cfg.threads))
        return list(pool.map(_run_trial, jobs, chunksize=chunk))  # map preserves trial order


# ------------------------------------------------------------- aggregation


def mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        return float(x.mean()), float("nan")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def _ref_cycle_mean(n: int, d: int, k: int) -> float:
    if n >= k and (2 * d) ** k <= 10**6:
        return float(expected_cycle_count_exact(n, d, k))
    return a_closed_form(d, k) / (2 * k)


@dataclass
class PointReport:
    n: int
    d: int
    r: int | None
    trial_columns: list
    trial_rows: list
    aggregate_columns: list
    aggregate_rows: list
    comparisons: dict = field(default_factory=dict)
    assertions: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "r": self.r,
            "trials": [dict(zip(self.trial_columns, row)) for row in self.trial_rows],
            "aggregate": [dict(zip(self.aggregate_columns, row)) for row in self.aggregate_rows],
            "comparisons": self.comparisons,
            "assertions": self.assertions,
            "failures": self.failures,
        }


def _series_rows(records, key, r):
    trial_rows = [[rec["trial"], k, v] for rec in records for k, v in enumerate(rec[key], start=1)]
    columns = np.array([rec[key] for rec in records], dtype=float).reshape(len(records), r)
    return trial_rows, columns


def aggregate(cfg: ExperimentConfig, n: int, d: int, r: int | None, results: list[dict]) -> PointReport:
    ok = [rec for rec in results if not rec.get("failed")]
    failures = [rec for rec in results if rec.get("failed")]
    stat = cfg.stat
    comparisons: dict[str, Any] = {}
    assertions: dict[str, bool] = {}
    if any(rec.get("assertion") for rec in failures):
        assertions["counting_identities"] = False

    if stat in ("cycles", "cnbw", "badwalks"):
        key = {"cycles": "C", "cnbw": "CNBW", "badwalks": "B"}[stat]
        trial_rows, X = _series_rows(ok, key, r)
        tcols = ["trial", "k", "count"]
        acols = ["k", "mean", "se", "ref_mean", "tv", "tv_se"]
        rows = []
        for k in range(1, r + 1):
            col = X[:, k - 1].astype(np.int64) if len(ok) else np.zeros(0, dtype=np.int64)
            m, se = mean_se(col) if len(ok) else (float("nan"), float("nan"))
            if stat == "cycles":
                ref = _ref_cycle_mean(n, d, k)
                q = poisson_pmf(a_closed_form(d, k) / (2 * k))
            elif stat == "cnbw":
                ref = float(mean_cnbw_infty(d, k))
                q = cnbw_infty_pmf(d, k)
            else:
                ref, q = 0.0, None
            if q is not None and len(ok):
                tv = tv_distance(EmpiricalDist.from_samples(col), q)
                tv_se = bootstrap_tv_se(col, q, cfg.seed)
            else:
                tv = tv_se = float("nan")
            rows.append([k, m, se, ref, tv, tv_se])
        if stat == "cycles" and len(ok):
            marg = [poisson_pmf(a_closed_form(d, k) / (2 * k)) for k in range(1, r + 1)]
            comparisons["joint_tv_vs_independent_poisson"] = tv_distance_joint(X.astype(np.int64), marg)
        if stat == "badwalks" and len(ok):
            comparisons["freq_any_positive"] = float(np.mean(np.any(X > 0, axis=1)))
        return PointReport(n, d, r, tcols, trial_rows, acols, rows, comparisons, assertions, failures)

    if stat == "ntilde":
        trial_rows, X = _series_rows(ok, "Ntilde", r)
        acols = ["k", "mean", "se", "ref_mean", "var", "ref_var", "ks"]
        rows = []
        for k in range(1, r + 1):
            col = X[:, k - 1]
            m, se = mean_se(col)
            var = float(np.var(col, ddof=1)) if len(col) > 1 else float("nan")
            ks = ks_statistic(col, 0.0, 2 * k) if len(col) >= 100 else float("nan")
            rows.append([k, m, se, 0.0, var, float(2 * k), ks])
        return PointReport(n, d, r, ["trial", "k", "value"], trial_rows, acols, rows, comparisons, assertions, failures)

    if stat == "linstat":
        vals = np.array([rec["centered"] for rec in ok])
        trial_rows = [[rec["trial"], rec["raw"], rec["centered"]] for rec in ok]
        series = function_series(cfg, d)
        if cfg.mode == "fixed":
            ref_mean, ref_var = yf_moments(d, series, r)
        else:
            ref_mean, ref_var = 0.0, sigma_f_squared(series.truncate(r))
        m, se = mean_se(vals)
        var = float(np.var(vals, ddof=1)) if len(vals) > 1 else float("nan")
        row = [m, se, var, ref_mean, ref_var]
        comparisons["c0"] = series.c0
        if cfg.mode == "growing":
            # the coefficient-decay hypothesis is measured here, never certified
            comparisons["truncation_error_at_r"] = truncation_error(parse_function(cfg.function), series, r)
            comparisons["decay_hypothesis_certified"] = False
            if len(vals) >= 100:
                comparisons["ks_vs_normal"] = ks_statistic(vals, 0.0, ref_var)
        return PointReport(
            n, d, r, ["trial", "raw", "centered"], trial_rows, ["mean", "se", "var", "ref_mean", "ref_var"], [row],
            comparisons, assertions, failures,
        )

    if stat == "lambda2":
        vals = np.array([rec["lambda2"] for rec in ok])
        bound = eigbound_constant(cfg.m) * math.sqrt(d)
        soft = 2 * math.sqrt(2 * d - 1) + 0.5
        violations = int(np.sum(vals > bound))
        p95 = float(np.percentile(vals, 95)) if len(vals) else float("nan")
        comparisons.update(
            {"bound": bound, "violations": violations, "p95": p95, "soft_bound": soft,
             "soft_fraction_below": float(np.mean(vals <= soft)) if len(vals) else float("nan")}
        )
        assertions["eigbound"] = violations == 0
        m, se = mean_se(vals) if len(vals) else (float("nan"), float("nan"))
        row = [m, se, float(vals.max()) if len(vals) else float("nan"), p95, bound, soft]
        return PointReport(
            n, d, r, ["trial", "lambda2"], [[rec["trial"], rec["lambda2"]] for rec in ok],
            ["mean", "se", "max", "p95", "bound", "soft_bound"], [row], comparisons, assertions, failures,
        )

    if stat == "coupling":
        rows = [[rec["trial"], int(rec["contains"]), int(rec["shape_ok"]), rec["removed"]] for rec in ok]
        contains = sum(rec["contains"] for rec in ok)
        shape = sum(rec["shape_ok"] for rec in ok)
        assertions["coupling_contains"] = contains == len(ok)
        assertions["coupling_shape"] = shape == len(ok)
        return PointReport(
            n, d, r, ["trial", "contains", "shape_ok", "removed"], rows,
            ["trials", "contains", "shape_ok"], [[len(ok), contains, shape]], comparisons, assertions, failures,
        )

    if stat == "discrepancy":
        rows = [[rec["trial"], rec["pairs"], rec["held1"], rec["held2"], rec["violations"]] for rec in ok]
        total = [sum(rec[k] for rec in ok) for k in ("pairs", "held1", "held2", "violations")]
        assertions["discrepancy"] = total[3] == 0
        return PointReport(
            n, d, r, ["trial", "pairs", "held1", "held2", "violations"], rows,
            ["pairs", "held1", "held2", "violations"], [total], comparisons, assertions, failures,
        )
    raise ConfigError(stat)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    points: list

    @property
    def provenance(self) -> dict:
        return {"seed": self.config.seed, "version": __version__, "config_hash": self.config.hash()}

    @property
    def passed(self) -> bool:
        return all(all(p.assertions.values()) for p in self.points)

    @property
    def failure_fraction(self) -> float:
        return max(len(p.failures) / self.config.trials for p in self.points)

    def exit_code(self) -> int:
        if not self.passed:
            return 3
        if self.failure_fraction > FAILURE_THRESHOLD:
            return 4
        return 0

    def _csv(self, which: str) -> str:
        buf = io.StringIO()
        multi = len(self.points) > 1
        for i, p in enumerate(self.points):
            cols = p.trial_columns if which == "trials" else p.aggregate_columns
            rows = p.trial_rows if which == "trials" else p.aggregate_rows
            if i == 0:
                buf.write(",".join((["n", "d"] if multi else []) + cols) + "\n")
            for row in rows:
                cells = ([p.n, p.d] if multi else []) + list(row)
                buf.write(",".join(_fmt(c) for c in cells) + "\n")
        return buf.getvalue()

    def trials_csv(self) -> str:
        return self._csv("trials")

    def aggregate_csv(self) -> str:
        return self._csv("aggregate")

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "config": self.config.to_dict(),
            "points": [p.to_dict() for p in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True, indent=2) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    return obj


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    cfg.validate()
    points = []
    for n, d in cfg.points_nd():
        r = cfg.resolve_r(n, d)
        results = run_trials(cfg, n, d, r)
        points.append(aggregate(cfg, n, d, r, results))
    return ExperimentReport(cfg, points)
