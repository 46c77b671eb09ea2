"""Command line entry point: ``rrgwalks <subcommand> ...`` or ``python -m rrgwalks``.

Exit codes: 0 success, 2 configuration error, 3 a hard assertion failed,
4 more than 1% of trials failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .chebyshev import linear_statistic, rn_rule
from .graphmodel import (
    PermutationGraph,
    adjacency,
    couple_conditioned,
    coupling_shape_ok,
    random_cycle_trail,
    removed_edges,
    sample_graph,
    substream,
)
from .harness import ConfigError, ExperimentConfig, function_series, parse_function, run_experiment
from .spectra import discrepancy_check, eigenvalues, exhaustive_pairs, sample_pairs, second_from_eigs
from .walks import count_cnbw, count_cycles
from .words import a_closed_form, a_enumerated, a_inclusion_exclusion

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT, EXIT_PARTIAL = 0, 2, 3, 4

_EXPERIMENT_FLAGS = (
    "stat", "n", "d", "schedule", "r", "beta", "trials", "seed", "function", "K", "mode", "pairs", "m",
    "threads", "out", "format",
)


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    return p


def _schedule(text: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(x) for x in item.split(":")) for item in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("schedule is a comma list of n:d pairs") from None


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="rrgwalks", description="Random 2d-regular permutation graphs: walks, cycles, spectra.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("adk", parents=[common], help="number of cyclically reduced words a(d,k)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("closed", "ie", "enum"), default="closed")
    p.add_argument("--table", action="store_true", help="CSV d,k,a for 1..d x 1..k")

    p = sub.add_parser("sample", parents=[common], help="sample a graph as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)

    for name in ("cycles", "cnbw"):
        p = sub.add_parser(name, parents=[common], help=f"{name} counts for k = 1..r")
        p.add_argument("--n", type=int)
        p.add_argument("--d", type=int)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--graph", help="graph JSON instead of sampling")
        if name == "cnbw":
            p.add_argument("--method", choices=("auto", "words", "transfer", "spectral"), default="auto")

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of the scaled adjacency")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--graph")
    p.add_argument("--emit", help="write eigenvalues CSV here")

    p = sub.add_parser("linstat", parents=[common], help="linear eigenvalue statistic")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--graph")
    p.add_argument("--f", default="square")
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--mode", choices=("fixed", "growing"), default="fixed")
    p.add_argument("--beta", type=float)

    p = sub.add_parser("experiment", parents=[common], help="seeded Monte Carlo experiment")
    p.add_argument("--config", help="JSON config; explicit flags override it")
    p.add_argument("--stat")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--schedule", type=_schedule)
    p.add_argument("--r", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--function", "--f", dest="function")
    p.add_argument("--K", type=int)
    p.add_argument("--mode", choices=("fixed", "growing"))
    p.add_argument("--pairs", type=int)
    p.add_argument("--m", type=float)

    p = sub.add_parser("coupling-check", parents=[common], help="audit the size-biased coupling")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--show", action="store_true", help="print the first trail and its removed edges (1-indexed)")

    p = sub.add_parser("discrepancy", parents=[common], help="check the discrepancy property on sampled pairs")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--graph")
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--exhaustive", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in _EXPERIMENT_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    # r and beta are mutually exclusive; a flag for one displaces the other from the file
    if getattr(args, "r", None) is not None and getattr(args, "beta", None) is None:
        data.pop("beta", None)
    if getattr(args, "beta", None) is not None and getattr(args, "r", None) is None:
        data.pop("r", None)
    if "stat" not in data:
        raise ConfigError("experiment needs --stat")
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def parse_cli(argv: list[str]) -> ExperimentConfig:
    """Parse an ``experiment`` command line into a validated config."""
    args = build_parser().parse_args(argv)
    if args.command != "experiment":
        raise ConfigError("parse_cli handles the experiment subcommand")
    return config_from_args(args)


def _graph(args) -> PermutationGraph:
    if getattr(args, "graph", None):
        return PermutationGraph.from_json(Path(args.graph).read_text())
    if args.n is None or args.d is None:
        raise ConfigError("give --n and --d, or --graph")
    return sample_graph(args.n, args.d, args.seed or 0)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_adk(args) -> int:
    methods = {"closed": a_closed_form, "ie": a_inclusion_exclusion, "enum": a_enumerated}
    fn = methods[args.method]
    if args.table:
        lines = ["d,k,a"] + [f"{d},{k},{fn(d, k)}" for d in range(1, args.d + 1) for k in range(1, args.k + 1)]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, f"{fn(args.d, args.k)}\n")
    return EXIT_OK


def _cmd_sample(args) -> int:
    g = sample_graph(args.n, args.d, args.seed or 0)
    _emit(args, g.to_json() + "\n")
    return EXIT_OK


def _counts_out(args, cv) -> str:
    if args.format == "json":
        return json.dumps({"kind": cv.kind, "n": cv.n, "d": cv.d, "values": list(cv.values)}) + "\n"
    return cv.to_csv()


def _cmd_cycles(args) -> int:
    _emit(args, _counts_out(args, count_cycles(_graph(args), args.r)))
    return EXIT_OK


def _cmd_cnbw(args) -> int:
    _emit(args, _counts_out(args, count_cnbw(_graph(args), args.r, args.method)))
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    g = _graph(args)
    spec = eigenvalues(adjacency(g), g.d)
    if args.emit:
        Path(args.emit).write_text("index,eigenvalue\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(spec.eigenvalues.tolist(), 1)))
    summary = {
        "n": g.n,
        "d": g.d,
        "top": spec.top,
        "lambda_2": float(spec.eigenvalues[1]) if g.n > 1 else None,
        "lambda_n": float(spec.eigenvalues[-1]),
        "second_eigenvalue_unscaled": second_from_eigs(spec.unscaled()) if g.n > 1 else None,
        "ramanujan_bound_unscaled": 2 * float(np.sqrt(2 * g.d - 1)),
    }
    _emit(args, json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def _cmd_linstat(args) -> int:
    g = _graph(args)
    cfg = ExperimentConfig(stat="linstat", n=g.n, d=g.d, function=args.f, K=args.K, mode=args.mode, beta=args.beta)
    r = rn_rule(g.n, g.d, args.beta) if args.beta is not None else args.K
    series = function_series(cfg, g.d)
    spec = eigenvalues(adjacency(g), g.d)
    res = linear_statistic(spec.eigenvalues, series, args.mode, g.n, g.d, r=r, f=parse_function(args.f))
    _emit(args, json.dumps(res.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = config_from_args(args)
    report = run_experiment(cfg)
    if cfg.format == "json":
        text = report.to_json()
        if cfg.out:
            Path(cfg.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        if cfg.out:
            out = Path(cfg.out)
            out.write_text(report.trials_csv())
            out.with_name(out.stem + "_aggregate.csv").write_text(report.aggregate_csv())
        else:
            sys.stdout.write(report.aggregate_csv())
    return report.exit_code()


def _cmd_coupling(args) -> int:
    cfg = ExperimentConfig(stat="coupling", n=args.n, d=args.d, r=args.k, trials=args.trials,
                           seed=args.seed or 0, threads=args.threads or 1)
    report = run_experiment(cfg)
    point = report.points[0]
    lines = [",".join(point.aggregate_columns)] + [",".join(str(c) for c in row) for row in point.aggregate_rows]
    if args.show:
        rng = substream(cfg.seed, 0)
        g = sample_graph(args.n, args.d, rng=rng)
        s = random_cycle_trail(args.n, args.d, args.k, rng)
        removed = removed_edges(g, couple_conditioned(g, s))
        lines.append("trail: " + " ".join(f"{v + 1}" for v in s.vertices) + "  word: " + " ".join(str(x) for x in s.word))
        lines += [f"removed: {i + 1} -pi{l + 1}-> {j + 1}  shape_ok={coupling_shape_ok(s, [(i, j, l)])}" for i, j, l in removed]
    _emit(args, "\n".join(lines) + "\n")
    return report.exit_code()


def _cmd_discrepancy(args) -> int:
    g = _graph(args)
    if args.exhaustive:
        pairs = list(exhaustive_pairs(g.n))
    else:
        pairs = sample_pairs(g.n, args.pairs, substream(args.seed or 0, 1))
    rep = discrepancy_check(g, pairs, args.m)
    c = rep.counts()
    out = {"n": g.n, "d": g.d, "m": args.m, "c1": rep.c1, "c2": rep.c2, "pairs": len(rep.records),
           "property_1": c[1], "property_2": c[2], "violations": c[0]}
    _emit(args, json.dumps(out, indent=2) + "\n")
    return EXIT_OK if c[0] == 0 else EXIT_ASSERT


COMMANDS = {
    "adk": _cmd_adk,
    "sample": _cmd_sample,
    "cycles": _cmd_cycles,
    "cnbw": _cmd_cnbw,
    "spectrum": _cmd_spectrum,
    "linstat": _cmd_linstat,
    "experiment": _cmd_experiment,
    "coupling-check": _cmd_coupling,
    "discrepancy": _cmd_discrepancy,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
