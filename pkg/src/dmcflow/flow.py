"""Vector field of the capacity flow and optimality diagnostics.

The flow is ``dz_i/dt = z_i (dI_i - mu)`` with ``mu = sum_k z_k dI_k``. Every
function here evaluates it pointwise; nothing integrates in time.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channel import Channel, extended_field_terms, extended_gradient, gradient
from .simplex import as_array

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class FieldValue:
    velocity: np.ndarray
    mean_payoff: float


@dataclass(frozen=True)
class DiagnosticsReport:
    is_stationary: bool
    is_kkt: bool
    kkt_multiplier: float
    max_violation: float
    lyapunov_rate: float

    def to_dict(self) -> dict:
        return asdict(self)


def vector_field(ch: Channel, z) -> FieldValue:
    """Velocity of the flow at ``z``; finite on the whole simplex."""
    zz = as_array(z)
    terms = extended_field_terms(ch, zz)
    mu = float(terms.sum())
    return FieldValue(terms - zz * mu, mu)


def lyapunov_rate(ch: Channel, z) -> float:
    """Rate of increase of I along the flow: ``sum_i z_i (dI_i - mu)^2``."""
    zz = as_array(z)
    g = gradient(ch, zz)
    mu = zz @ g
    return float(zz @ (g - mu) ** 2)


def _support_residuals(ch: Channel, z: np.ndarray):
    g = extended_gradient(ch, z)
    on = z > 0
    # +inf only occurs off the support, so mu is finite
    mu = float(z[on] @ g[on])
    return g, on, mu


def check_stationary(ch: Channel, z, tol: float = DEFAULT_TOL) -> bool:
    zz = as_array(z)
    g, on, mu = _support_residuals(ch, zz)
    return bool(np.max(np.abs(g[on] - mu)) <= tol)


def check_kkt(ch: Channel, z, tol: float = DEFAULT_TOL) -> DiagnosticsReport:
    """First-order optimality test with multiplier ``C = mu``.

    Two residuals, both in nats:

    * stationarity ``max_i z_i |dI_i - C|`` (the flow velocity), so
      coordinates still decaying towards zero do not count as support;
    * dual feasibility ``max_i (dI_i - C)^+`` over every coordinate.

    At a point with exact zeros and exact equalities this is the usual
    "equal to C on the support, at most C off it" condition. An off-support
    partial of ``+inf`` (its output column is unreachable from the support)
    is reported as an infinite violation.
    """
    zz = as_array(z)
    g, on, mu = _support_residuals(ch, zz)
    diff = np.where(on, g - mu, 0.0)
    station_res = float(np.max(np.abs(zz * diff)))
    dual_res = float(np.max(np.maximum(g - mu, 0.0)))
    stationary = station_res <= tol
    rate = float(zz[on] @ (g[on] - mu) ** 2)
    return DiagnosticsReport(
        is_stationary=stationary,
        is_kkt=stationary and dual_res <= tol,
        kkt_multiplier=mu,
        max_violation=max(station_res, dual_res),
        lyapunov_rate=rate,
    )


def projected_gradient_direction(ch: Channel, z) -> np.ndarray:
    """Gradient projected onto the hyperplane ``sum z = 1``."""
    g = gradient(ch, z)
    return g - g.mean()
