"""Experiment harness: step-size sweep, BAA comparison, trajectory and drift
exports.

Every CSV starts with a ``# dmcflow-<kind> v<N>`` comment line, then a header
row. Floats are written with ``repr`` so they re-parse bit-exactly.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional

import numpy as np

from .channel import Channel, mutual_information, output_probabilities
from .errors import DMCFlowError
from .flow import projected_gradient_direction
from .generators import DatasetEntry
from .simplex import SimplexVector, sample_interior
from .solvers import SolverConfig, SolverRun, run

log = logging.getLogger(__name__)

CSV_VERSION = 1
# ground truths at or below this get absolute error only
TRUTH_FLOOR = 1e-12


def default_tau_grid(count: int = 25, lo: float = 0.01, hi: float = 30.0) -> list[float]:
    return [float(t) for t in np.linspace(lo, hi, count)]


def start_point(channel_id: str, n: int, seed: int) -> SimplexVector:
    """Interior start shared by every method run on the same channel."""
    rng = np.random.default_rng([seed, zlib.crc32(channel_id.encode())])
    return sample_interior(n, rng)


@dataclass
class ExperimentRecord:
    channel_id: str
    n: int
    sigma: float
    method: str
    tau: Optional[float]
    capacity_estimate: float
    ground_truth: float
    relative_error: Optional[float]
    absolute_error: float
    iterations: int
    converged: bool
    wall_time: Optional[float] = None
    error: str = ""

    @classmethod
    def from_run(cls, meta: dict, truth: float, method: str, tau, result: SolverRun, wall):
        abs_err = abs(result.capacity_estimate - truth)
        return cls(
            channel_id=meta["channel_id"],
            n=meta["n"],
            sigma=meta["sigma"],
            method=method,
            tau=tau,
            capacity_estimate=result.capacity_estimate,
            ground_truth=truth,
            relative_error=abs_err / truth if truth > TRUTH_FLOOR else None,
            absolute_error=abs_err,
            iterations=result.iterations,
            converged=result.converged,
            wall_time=wall,
        )

    @classmethod
    def failed(cls, meta: dict, truth: float, method: str, tau, exc: Exception):
        return cls(meta["channel_id"], meta["n"], meta["sigma"], method, tau,
                   math.nan, truth, None, math.nan, 0, False, None,
                   f"{type(exc).__name__}: {exc}")

    def sort_key(self):
        return (self.channel_id, self.method, -1.0 if self.tau is None else self.tau)


RECORD_COLUMNS = [f.name for f in fields(ExperimentRecord)]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(stream, kind: str, header: list[str], rows: Iterable) -> None:
    stream.write(f"# dmcflow-{kind} v{CSV_VERSION}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def read_csv(stream) -> tuple[str, list[dict]]:
    """Inverse of :func:`write_csv`; values stay strings."""
    first = stream.readline()
    if not first.startswith("# dmcflow-"):
        raise ValueError("missing dmcflow CSV header comment")
    return first[2:].strip(), list(csv.DictReader(stream))


def records_to_csv(records, timing: bool = False) -> str:
    cols = RECORD_COLUMNS if timing else [c for c in RECORD_COLUMNS if c != "wall_time"]
    buf = io.StringIO()
    write_csv(buf, "records", cols, ([getattr(r, c) for c in cols] for r in records))
    return buf.getvalue()


def records_to_json(records, timing: bool = False) -> list[dict]:
    out = []
    for r in records:
        d = asdict(r)
        if not timing:
            d.pop("wall_time")
        out.append(d)
    return out


def _timed_run(ch, z0, cfg):
    t0 = time.perf_counter()
    res = run(ch, z0, cfg)
    return res, time.perf_counter() - t0


def _sweep_one(entry: DatasetEntry, taus, method, seed, tol, max_iter, timing):
    ch, truth, meta = entry
    z0 = start_point(meta["channel_id"], ch.n, seed)
    out = []
    jobs = [("baa", None)] + [(method, t) for t in taus]
    for m, tau in jobs:
        cfg = SolverConfig(m, tau if tau is not None else 1.0, tol, max_iter)
        try:
            res, wall = _timed_run(ch, z0, cfg)
            out.append(ExperimentRecord.from_run(meta, truth, m, tau, res, wall if timing else None))
        except DMCFlowError as exc:
            log.warning("%s %s tau=%s failed: %s", meta["channel_id"], m, tau, exc)
            out.append(ExperimentRecord.failed(meta, truth, m, tau, exc))
    return out


def _fan_out(fn, entries, args, workers: int):
    if workers <= 1:
        return [fn(e, *args) for e in entries]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(fn, e, *args) for e in entries]
        return [f.result() for f in futs]


def sweep(entries, taus=None, method="euler_adjusted", seed=0, tol=1e-4,
          max_iter=10_000, workers=1, timing=False) -> list[ExperimentRecord]:
    """One record per (channel, tau) plus one BAA baseline per channel.

    All runs on a channel share the same interior start.
    """
    taus = default_tau_grid() if taus is None else list(taus)
    chunks = _fan_out(_sweep_one, entries, (taus, method, seed, tol, max_iter, timing), workers)
    records = [r for chunk in chunks for r in chunk]
    return sorted(records, key=ExperimentRecord.sort_key)


COMPARE_COLUMNS = [
    "channel_id", "n", "sigma", "ground_truth", "estimate_mwu", "estimate_baa",
    "iterations_mwu", "iterations_baa", "ratio", "error",
]


def _compare_one(entry: DatasetEntry, seed, tol, max_iter):
    ch, truth, meta = entry
    z0 = start_point(meta["channel_id"], ch.n, seed)
    row = {"channel_id": meta["channel_id"], "n": meta["n"], "sigma": meta["sigma"],
           "ground_truth": truth, "error": ""}
    try:
        a = run(ch, z0, SolverConfig("mwu", 1.0, tol, max_iter))
        b = run(ch, z0, SolverConfig("baa", 1.0, tol, max_iter))
    except DMCFlowError as exc:
        log.warning("%s compare failed: %s", meta["channel_id"], exc)
        row.update(estimate_mwu=math.nan, estimate_baa=math.nan, iterations_mwu=0,
                   iterations_baa=0, ratio=math.nan, error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(
        estimate_mwu=a.capacity_estimate,
        estimate_baa=b.capacity_estimate,
        iterations_mwu=a.iterations,
        iterations_baa=b.iterations,
        ratio=a.iterations / b.iterations,
    )
    return row


def compare(entries, seed=0, tol=1e-4, max_iter=10_000, workers=1) -> list[dict]:
    """Per-channel iteration ratio MWU(tau=1) / BAA from a shared start."""
    rows = _fan_out(_compare_one, entries, (seed, tol, max_iter), workers)
    return sorted(rows, key=lambda r: r["channel_id"])


def dicts_to_csv(kind: str, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    write_csv(buf, kind, columns, ([r[c] for c in columns] for r in rows))
    return buf.getvalue()


def trajectory_table(ch: Channel, result: SolverRun) -> tuple[list[str], list[list]]:
    """Per-iteration z, q, I(z) and, for three inputs, the projected gradient."""
    if result.trajectory is None:
        raise ValueError("run was not recorded with record_trajectory=True")
    with_dir = ch.n == 3
    header = ["iteration"] + [f"z{i + 1}" for i in range(ch.n)]
    header += [f"q{j + 1}" for j in range(ch.m)] + ["objective"]
    if with_dir:
        header += [f"d{i + 1}" for i in range(ch.n)]
    rows = []
    for k, (z, obj) in enumerate(result.trajectory):
        row = [k, *z.entries, *output_probabilities(ch, z), obj]
        if with_dir:
            try:
                row += list(projected_gradient_direction(ch, z))
            except DMCFlowError:
                row += [math.nan] * ch.n
        rows.append(row)
    return header, rows


def trajectory_csv(ch: Channel, result: SolverRun) -> str:
    header, rows = trajectory_table(ch, result)
    buf = io.StringIO()
    write_csv(buf, "trajectory", header, rows)
    return buf.getvalue()


DRIFT_COLUMNS = ["iteration", "correction", "sum_error"]


def drift_csv(result: SolverRun) -> str:
    """Per-step drift; a trailing comment records how the run ended."""
    buf = io.StringIO()
    write_csv(buf, "drift", DRIFT_COLUMNS,
              ([k + 1, d.correction, d.sum_error] for k, d in enumerate(result.drift_log or [])))
    buf.write(f"# termination={result.termination_reason} iterations={result.iterations}\n")
    return buf.getvalue()


def recompute_objective(ch: Channel, z_values) -> float:
    return mutual_information(ch, np.asarray(z_values, dtype=np.float64))
