"""Discrete memoryless channels and the mutual-information objective.

All information quantities are in nats. A channel with ``n`` inputs and
``m`` outputs is stored as a dense row-stochastic ``n x m`` matrix ``P``
with ``P[i, j] = p(j|i)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import xlogy

from .errors import (
    BoundarySingularity,
    ChannelParseError,
    DeadOutputColumn,
    DimensionMismatch,
    NegativeProbability,
    RowNotStochastic,
)
from .simplex import SimplexVector, as_array, new_simplex

ROW_TOL = 1e-12
# below this an output probability counts as zero
Q_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class Channel:
    transition: np.ndarray
    row_constants: np.ndarray
    name: str = ""

    @property
    def n(self) -> int:
        return self.transition.shape[0]

    @property
    def m(self) -> int:
        return self.transition.shape[1]

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "transition": self.transition.tolist()}


@dataclass(frozen=True)
class CapacityEstimate:
    value: float
    optimal_input: SimplexVector
    output_distribution: SimplexVector
    iterations: int
    converged: bool

    @property
    def bits(self) -> float:
        return self.value / math.log(2)

    def to_dict(self) -> dict:
        return {
            "capacity_nats": self.value,
            "capacity_bits": self.bits,
            "optimal_input": self.optimal_input.to_list(),
            "output_distribution": self.output_distribution.to_list(),
            "iterations": self.iterations,
            "converged": self.converged,
        }


def load_channel(matrix, name: str = "") -> Channel:
    """Validate a transition matrix and precompute ``c_i = sum_j p ln p``."""
    try:
        P = np.array(matrix, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ChannelParseError(f"not a numeric matrix: {exc}") from None
    if P.ndim != 2 or P.shape[0] < 1 or P.shape[1] < 1:
        raise ChannelParseError(f"expected a non-empty 2-D matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ChannelParseError("matrix has non-finite entries")
    if np.any(P < 0):
        i, j = np.argwhere(P < 0)[0]
        raise NegativeProbability(f"p({j}|{i}) = {P[i, j]}")
    if np.any(P > 1):
        raise RowNotStochastic("entry greater than 1")
    sums = P.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
    if bad.size:
        raise RowNotStochastic(f"row {bad[0]} sums to {sums[bad[0]]!r}")
    dead = np.flatnonzero(~np.any(P > 0, axis=0))
    if dead.size:
        raise DeadOutputColumn(f"output column {dead[0]} is never produced")
    P.setflags(write=False)
    c = xlogy(P, P).sum(axis=1)
    c.setflags(write=False)
    return Channel(P, c, name)


def parse_channel_text(text: str, name: str = "") -> Channel:
    """Parse either the JSON channel format or a whitespace matrix."""
    stripped = text.strip()
    if not stripped:
        raise ChannelParseError("empty channel file")
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
            rows = obj["transition"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ChannelParseError(f"bad channel JSON: {exc}") from None
        ch = load_channel(rows, name)
        for key, got in (("n", ch.n), ("m", ch.m)):
            if key in obj and obj[key] != got:
                raise ChannelParseError(f"declared {key}={obj[key]} but matrix has {got}")
        return ch
    rows = []
    for line in stripped.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.replace(",", " ").split()])
        except ValueError as exc:
            raise ChannelParseError(str(exc)) from None
    if len({len(r) for r in rows}) != 1:
        raise ChannelParseError("ragged matrix rows")
    return load_channel(rows, name)


def read_channel(path) -> Channel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ChannelParseError(str(exc)) from None
    return parse_channel_text(text, name=path.stem)


def write_channel(ch: Channel, path) -> None:
    Path(path).write_text(json.dumps(ch.to_dict()) + "\n")


def _check_dim(ch: Channel, z: np.ndarray) -> None:
    if z.shape != (ch.n,):
        raise DimensionMismatch(f"channel has {ch.n} inputs, vector has shape {z.shape}")


def output_probabilities(ch: Channel, z) -> np.ndarray:
    zz = as_array(z)
    _check_dim(ch, zz)
    return zz @ ch.transition


def output_distribution(ch: Channel, z) -> SimplexVector:
    q = output_probabilities(ch, z)
    if isinstance(z, SimplexVector) and not z.validated:
        return SimplexVector.unchecked(q)
    return new_simplex(q)


def mutual_information(ch: Channel, z) -> float:
    """I(z) = sum_i c_i z_i - sum_j q_j ln q_j, with 0 ln 0 = 0."""
    zz = as_array(z)
    q = output_probabilities(ch, zz)
    return float(ch.row_constants @ zz - xlogy(q, q).sum())


def gradient(ch: Channel, z) -> np.ndarray:
    """Closed-form partials ``c_k - 1 - sum_j p(j|k) ln q_j``."""
    q = output_probabilities(ch, z)
    if np.any(q < Q_FLOOR):
        raise BoundarySingularity(f"output probability {q.min():.3e} is zero")
    return ch.row_constants - 1.0 - ch.transition @ np.log(q)


def extended_gradient(ch: Channel, z) -> np.ndarray:
    """Gradient on the extended reals.

    Where some ``q_j`` vanishes, coordinates with ``p(j|k) > 0`` get
    ``+inf`` (the limit of ``-p ln q``); coordinates with ``p(j|k) = 0`` are
    unaffected. Those ``+inf`` coordinates are necessarily off the support.
    """
    q = output_probabilities(ch, z)
    dead = q < Q_FLOOR
    logq = np.log(np.where(dead, 1.0, q))
    g = ch.row_constants - 1.0 - ch.transition @ logq
    if dead.any():
        hits = (ch.transition[:, dead] > 0).any(axis=1)
        g = np.where(hits, np.inf, g)
    return g


def extended_field_terms(ch: Channel, z) -> np.ndarray:
    """``z_i * dI/dz_i`` for every i, extended continuously to the boundary.

    Terms ``p(j|i) z_i ln q_j`` with ``q_j = 0`` are dropped: ``q_j = 0`` and
    ``p(j|i) > 0`` force ``z_i = 0`` there.
    """
    zz = as_array(z)
    q = output_probabilities(ch, zz)
    logq = np.where(q < Q_FLOOR, 0.0, np.log(np.where(q < Q_FLOOR, 1.0, q)))
    return zz * (ch.row_constants - 1.0 - ch.transition @ logq)


def extended_field_term(ch: Channel, z, i: int) -> float:
    return float(extended_field_terms(ch, z)[i])
