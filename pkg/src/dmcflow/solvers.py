"""Discrete dynamics for the capacity flow and the shared iteration driver.

Methods:

* ``euler_adjusted``: forward Euler step, then ReLU and L1 renormalization
* ``euler_classic``: plain forward Euler; may drift off the simplex
* ``mwu``: multiplicative-weight update ``z_i exp(tau dI_i) / Z``
* ``baa``: Blahut-Arimoto map (equals ``mwu`` with ``tau = 1``)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .channel import (
    Q_FLOOR,
    CapacityEstimate,
    Channel,
    mutual_information,
    output_distribution,
    output_probabilities,
)
from .errors import BlowUp, BoundarySingularity
from .flow import vector_field
from .simplex import (
    SimplexVector,
    as_array,
    l1_distance,
    new_simplex,
    relu_l1_normalize,
    sample_interior,
)

METHODS = ("euler_adjusted", "euler_classic", "mwu", "baa")


class DriftStats(NamedTuple):
    correction: float  # L1 distance between the raw Euler point and its normalization
    sum_error: float  # |sum(raw) - 1|


@dataclass(frozen=True)
class SolverConfig:
    method: str = "mwu"
    step_size: float = 1.0
    tolerance: float = 1e-4
    max_iterations: int = 10_000
    record_trajectory: bool = False
    record_drift: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class SolverRun:
    final_point: SimplexVector
    capacity_estimate: float
    iterations: int
    converged: bool
    termination_reason: str
    trajectory: Optional[list] = None  # [(iterate, objective)], starting point included
    drift_log: Optional[list] = None  # [DriftStats] per Euler step
    lower_bounds: list = field(default_factory=list)  # BAA ln S per step

    def to_dict(self, include_trajectory: bool = True) -> dict:
        out = {
            "final_point": self.final_point.to_list(),
            "capacity_estimate": self.capacity_estimate,
            "iterations": self.iterations,
            "converged": self.converged,
            "termination_reason": self.termination_reason,
        }
        if self.lower_bounds:
            out["lower_bounds"] = list(self.lower_bounds)
        if include_trajectory and self.trajectory is not None:
            out["trajectory"] = [
                {"z": z.to_list(), "objective": obj} for z, obj in self.trajectory
            ]
        if self.drift_log is not None:
            out["drift_log"] = [d._asdict() for d in self.drift_log]
        return out

    def to_estimate(self, ch: Channel) -> CapacityEstimate:
        return CapacityEstimate(
            value=self.capacity_estimate,
            optimal_input=self.final_point,
            output_distribution=output_distribution(ch, self.final_point),
            iterations=self.iterations,
            converged=self.converged,
        )


def euler_step(ch: Channel, z, tau: float, normalize: bool = True):
    """One Euler step of length ``tau``; returns ``(next_point, DriftStats)``."""
    zz = as_array(z)
    with np.errstate(over="ignore", invalid="ignore"):
        raw = zz + tau * vector_field(ch, zz).velocity
        sum_error = abs(float(raw.sum()) - 1.0)
    if normalize:
        nxt = relu_l1_normalize(raw)
        return nxt, DriftStats(float(np.abs(raw - nxt.entries).sum()), sum_error)
    if not np.all(np.isfinite(raw)):
        raise BlowUp("non-finite entry in classic Euler iterate")
    pos = np.maximum(raw, 0.0)
    total = pos.sum()
    correction = float(np.abs(raw - pos / total).sum()) if total > 0 else float("inf")
    return SimplexVector.unchecked(raw), DriftStats(correction, sum_error)


def _support_log_gradient(ch: Channel, z: np.ndarray, on: np.ndarray) -> np.ndarray:
    q = output_probabilities(ch, z)
    if np.any(q < Q_FLOOR):
        raise BoundarySingularity(f"output probability {q.min():.3e} is zero")
    P = ch.transition[on]
    return ch.row_constants[on] - 1.0 - P @ np.log(q)


def mwu_step(ch: Channel, z, tau: float) -> SimplexVector:
    zz = as_array(z)
    on = zz > 0
    g = _support_log_gradient(ch, zz, on)
    # off-support coordinates stay exactly 0 and their gradient is never formed
    logw = np.log(zz[on]) + tau * g
    w = np.exp(logw - logw.max())
    out = np.zeros_like(zz)
    out[on] = w / w.sum()
    return new_simplex(out)


def baa_step(ch: Channel, z) -> tuple[SimplexVector, float]:
    """One Blahut-Arimoto update; returns ``(next_point, ln S)``.

    ``m_ij = p(j|i) z_i / q_j``, ``r_i = exp(sum_j p(j|i) ln m_ij)``,
    ``S = sum_i r_i``, next point ``r / S``. ``ln S`` is a lower bound on
    the capacity.
    """
    zz = as_array(z)
    q = output_probabilities(ch, zz)
    if np.any(q < Q_FLOOR):
        raise BoundarySingularity(f"output probability {q.min():.3e} is zero")
    on = zz > 0
    P = ch.transition[on]
    pos = P > 0
    log_m = np.log(np.where(pos, P, 1.0)) + np.log(zz[on])[:, None] - np.log(q)[None, :]
    log_m = np.where(pos, log_m, 0.0)  # 0 ln 0 = 0
    log_r = (P * log_m).sum(axis=1)
    shift = log_r.max()
    r = np.exp(log_r - shift)
    s = r.sum()
    out = np.zeros_like(zz)
    out[on] = r / s
    return new_simplex(out), float(shift + np.log(s))


def run(ch: Channel, z0, cfg: SolverConfig) -> SolverRun:
    """Iterate ``cfg.method`` from ``z0`` until consecutive iterates are
    closer than ``cfg.tolerance`` in L1 or the iteration cap is hit."""
    z = z0 if isinstance(z0, SimplexVector) else new_simplex(z0)
    trajectory = [(z, mutual_information(ch, z))] if cfg.record_trajectory else None
    drift = [] if cfg.record_drift else None
    bounds: list[float] = []
    reason = "max_iterations"
    iterations = 0
    for _ in range(cfg.max_iterations):
        try:
            if cfg.method == "euler_adjusted":
                nxt, stats = euler_step(ch, z, cfg.step_size, normalize=True)
            elif cfg.method == "euler_classic":
                nxt, stats = euler_step(ch, z, cfg.step_size, normalize=False)
            elif cfg.method == "mwu":
                nxt, stats = mwu_step(ch, z, cfg.step_size), None
            else:
                nxt, bound = baa_step(ch, z)
                bounds.append(bound)
                stats = None
        except BlowUp:
            if cfg.method != "euler_classic":
                raise
            reason = "blow_up"
            break
        iterations += 1
        if drift is not None and stats is not None:
            drift.append(stats)
        if trajectory is not None:
            trajectory.append((nxt, mutual_information(ch, nxt)))
        step = l1_distance(z, nxt)
        z = nxt
        if step < cfg.tolerance:
            reason = "tolerance"
            break
        if cfg.method == "euler_classic" and not np.isfinite(step):
            reason = "blow_up"
            break
    with np.errstate(invalid="ignore", divide="ignore"):
        estimate = mutual_information(ch, z)
    return SolverRun(
        final_point=z,
        capacity_estimate=estimate,
        iterations=iterations,
        converged=reason == "tolerance",
        termination_reason=reason,
        trajectory=trajectory,
        drift_log=drift,
        lower_bounds=bounds,
    )


def estimate_capacity(
    ch: Channel,
    z0=None,
    method: str = "mwu",
    step_size: float = 1.0,
    tolerance: float = 1e-4,
    max_iterations: int = 10_000,
    rng: Optional[np.random.Generator] = None,
) -> CapacityEstimate:
    """Convenience wrapper: run a solver and package the result.

    Without ``z0`` the start is drawn uniformly from the open simplex.
    """
    if z0 is None:
        z0 = sample_interior(ch.n, rng if rng is not None else np.random.default_rng(0))
    cfg = SolverConfig(method, step_size, tolerance, max_iterations)
    return run(ch, z0, cfg).to_estimate(ch)
