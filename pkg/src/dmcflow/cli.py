"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .channel import Channel, read_channel
from .errors import ChannelParseError, InputError, SolverError
from .flow import check_kkt
from .generators import DatasetSpec, canonical_channels, generate_dataset, load_dataset, save_dataset
from .simplex import sample_interior
from .solvers import SolverConfig, run

METHOD_ALIASES = {
    "euler": "euler_adjusted",
    "euler_adjusted": "euler_adjusted",
    "euler_classic": "euler_classic",
    "mwu": "mwu",
    "baa": "baa",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def resolve_channel(spec: str) -> Channel:
    """A file path, or ``builtin:<name>[:<param>]`` for the canonical fixtures."""
    if spec.startswith("builtin:"):
        name, _, param = spec[len("builtin:"):].partition(":")
        makers = canonical_channels()
        if name not in makers:
            raise ChannelParseError(f"unknown builtin channel {name!r}; have {sorted(makers)}")
        try:
            if name == "identity":
                return makers[name](int(param or 2))
            if name == "bsc":
                return makers[name](float(param or 0.1))
        except ValueError as exc:
            raise ChannelParseError(str(exc)) from None
        return makers[name]()
    return read_channel(spec)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _start(ch: Channel, seed: int):
    return sample_interior(ch.n, np.random.default_rng(seed))


def cmd_capacity(args) -> int:
    ch = resolve_channel(args.channel)
    method = METHOD_ALIASES[args.method]
    res = run(ch, _start(ch, args.seed), SolverConfig(method, args.tau, args.tol, args.max_iter))
    est = res.to_estimate(ch)
    diag = check_kkt(ch, res.final_point, args.kkt_tol)
    payload = {**est.to_dict(), "method": method, "tau": args.tau,
               "termination_reason": res.termination_reason, "kkt": diag.to_dict()}
    if args.format == "json":
        _emit(_dump_json(payload), args.out)
        return 0
    if args.out:
        Path(args.out).write_text(_dump_json(payload))
    print(f"capacity: {est.value:.6f} nats ({est.bits:.6f} bits)")
    print("optimal input: " + " ".join(f"{v:.6f}" for v in est.optimal_input.entries))
    print("output distribution: " + " ".join(f"{v:.6f}" for v in est.output_distribution.entries))
    print(f"iterations: {est.iterations} ({res.termination_reason})")
    print(f"kkt: {'ok' if diag.is_kkt else 'FAILED'} (C={diag.kkt_multiplier:.6f}, "
          f"max violation {diag.max_violation:.2e}, tol {args.kkt_tol:g})")
    return 0


def _parse_taus(text: str | None) -> list[float]:
    if not text:
        return harness.default_tau_grid()
    if ":" in text:
        lo, hi, count = text.split(":")
        return harness.default_tau_grid(int(count), float(lo), float(hi))
    return [float(t) for t in text.split(",")]


def _load_entries(path):
    try:
        return load_dataset(path)
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise ChannelParseError(f"cannot load dataset {path}: {exc}") from None


def cmd_sweep(args) -> int:
    entries = _load_entries(args.dataset)
    try:
        taus = _parse_taus(args.taus)
    except ValueError as exc:
        raise ChannelParseError(f"bad --taus: {exc}") from None
    records = harness.sweep(entries, taus, METHOD_ALIASES[args.method], args.seed,
                            args.tol, args.max_iter, args.workers, args.timing)
    if args.format == "json":
        _emit(_dump_json(harness.records_to_json(records, args.timing)), args.out)
    else:
        _emit(harness.records_to_csv(records, args.timing), args.out)
    return 0


def cmd_compare(args) -> int:
    entries = _load_entries(args.dataset)
    rows = harness.compare(entries, args.seed, args.tol, args.max_iter, args.workers)
    if args.format == "json":
        _emit(_dump_json(rows), args.out)
    else:
        _emit(harness.dicts_to_csv("compare", harness.COMPARE_COLUMNS, rows), args.out)
    return 0


def cmd_trajectory(args) -> int:
    ch = resolve_channel(args.channel)
    cfg = SolverConfig(METHOD_ALIASES[args.method], args.tau, args.tol, args.max_iter,
                       record_trajectory=True)
    res = run(ch, _start(ch, args.seed), cfg)
    if args.format == "json":
        header, rows = harness.trajectory_table(ch, res)
        _emit(_dump_json([dict(zip(header, r)) for r in rows]), args.out)
    else:
        _emit(harness.trajectory_csv(ch, res), args.out)
    return 0


def cmd_drift(args) -> int:
    ch = resolve_channel(args.channel)
    method = "euler_adjusted" if args.normalize else "euler_classic"
    cfg = SolverConfig(method, args.tau, args.tol, args.max_iter, record_drift=True)
    res = run(ch, _start(ch, args.seed), cfg)
    if args.format == "json":
        _emit(_dump_json({"termination_reason": res.termination_reason,
                          "iterations": res.iterations,
                          "drift_log": [d._asdict() for d in res.drift_log]}), args.out)
    else:
        _emit(harness.drift_csv(res), args.out)
    return 0


def cmd_gen_dataset(args) -> int:
    try:
        dims = tuple(int(v) for v in args.dims.split(",")) if args.dims else None
        sigmas = tuple(float(v) for v in args.sigmas.split(",")) if args.sigmas else None
        kw = {"channels_per_cell": args.per_cell, "seed": args.seed}
        if dims:
            kw["dimensionalities"] = dims
        if sigmas:
            kw["noise_levels"] = sigmas
        spec = DatasetSpec(**kw)
    except ValueError as exc:
        raise ChannelParseError(str(exc)) from None
    entries = generate_dataset(spec)
    path = save_dataset(entries, spec, args.out)
    print(f"wrote {len(entries)} channels; manifest {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (start points, datasets)")
    common.add_argument("--tol", type=float, default=1e-4, help="L1 stopping tolerance")
    common.add_argument("--max-iter", type=int, default=10_000)
    common.add_argument("--tau", type=float, default=1.0, help="step size (ignored by baa)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    methods = sorted(METHOD_ALIASES)
    p = _Parser(prog="dmcflow", description="DMC capacity via simplex vector flows.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("capacity", parents=[common], help="estimate the capacity of one channel")
    s.add_argument("channel", help="channel file or builtin:<name>[:param]")
    s.add_argument("--method", choices=methods, default="mwu")
    s.add_argument("--kkt-tol", type=float, default=1e-3)
    s.set_defaults(func=cmd_capacity, format="text")

    s = sub.add_parser("sweep", parents=[common], help="step-size sweep over a dataset")
    s.add_argument("dataset", help="directory written by gen-dataset")
    s.add_argument("--method", choices=methods, default="euler")
    s.add_argument("--taus", help="comma list or lo:hi:count (default 0.01:30:25)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--timing", action="store_true", help="add a wall_time column")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("compare", parents=[common], help="MWU(tau=1) vs BAA iteration ratio")
    s.add_argument("dataset")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("trajectory", parents=[common], help="per-iteration trajectory export")
    s.add_argument("channel")
    s.add_argument("--method", choices=methods, default="euler")
    s.set_defaults(func=cmd_trajectory)

    s = sub.add_parser("drift", parents=[common], help="normalization drift of Euler steps")
    s.add_argument("channel")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--normalize", dest="normalize", action="store_true", default=True,
                   help="adjusted Euler (default)")
    g.add_argument("--classic", dest="normalize", action="store_false",
                   help="plain Euler, no normalization")
    s.set_defaults(func=cmd_drift)

    s = sub.add_parser("gen-dataset", parents=[common], help="generate the symmetric benchmark")
    s.add_argument("outdir", nargs="?")
    s.add_argument("--dims", help="comma list (default 2,9,...,100)")
    s.add_argument("--sigmas", help="comma list (default 0,0.25,0.5,0.75,1)")
    s.add_argument("--per-cell", type=int, default=15)
    s.set_defaults(func=cmd_gen_dataset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "gen-dataset":
        args.out = args.outdir or args.out
        if not args.out:
            parser.error("gen-dataset needs an output directory")
    if args.command == "capacity" and args.format not in ("json",):
        args.format = "text"
    try:
        return args.func(args)
    except InputError as exc:
        print(f"dmcflow: input error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"dmcflow: solver failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:  # e.g. invalid SolverConfig values
        print(f"dmcflow: input error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
