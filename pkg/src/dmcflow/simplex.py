"""Probability vectors on the standard simplex."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AllZero, DimensionMismatch, NegativeEntry, NotNormalized

SUM_TOL = 1e-12
NEG_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SimplexVector:
    """A point of the simplex, stored as a read-only float64 array.

    Use :func:`new_simplex` to build a validated instance; the plain
    constructor (``SimplexVector.unchecked``) skips validation and exists for
    the classic Euler mode, whose iterates may leave the simplex.
    """

    entries: np.ndarray
    validated: bool = field(default=True, repr=False)

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def unchecked(cls, raw) -> "SimplexVector":
        return cls(np.asarray(raw, dtype=np.float64), validated=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def support(self) -> np.ndarray:
        """Indices of strictly positive coordinates (0-based)."""
        return np.flatnonzero(self.entries > 0)

    def support_mask(self) -> np.ndarray:
        return self.entries > 0

    def is_interior(self) -> bool:
        return bool(np.all(self.entries > 0))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.entries[i]

    def to_list(self) -> list[float]:
        return [float(v) for v in self.entries]

    def __eq__(self, other):
        if not isinstance(other, SimplexVector):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None


def as_array(z) -> np.ndarray:
    if isinstance(z, SimplexVector):
        return z.entries
    return np.asarray(z, dtype=np.float64)


def new_simplex(raw) -> SimplexVector:
    arr = np.asarray(raw, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise NotNormalized("empty vector")
    if not np.all(np.isfinite(arr)):
        raise NotNormalized("non-finite entry")
    if np.any(arr < -NEG_TOL):
        raise NegativeEntry(f"negative entry {arr.min():.3e}")
    total = arr.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise NotNormalized(f"entries sum to {total!r}")
    # tiny negatives within tolerance are round-off; support needs them at 0
    arr = np.where(arr < 0, 0.0, arr)
    if not np.any(arr > 0):
        raise NotNormalized("empty support")
    return SimplexVector(arr)


def relu_l1_normalize(raw) -> SimplexVector:
    """Clamp negatives to zero, then rescale to unit L1 norm."""
    arr = np.maximum(np.asarray(raw, dtype=np.float64).reshape(-1), 0.0)
    total = arr.sum()
    if not total > 0:
        raise AllZero("no positive mass after clamping")
    return new_simplex(arr / total)


def uniform(n: int) -> SimplexVector:
    return SimplexVector(np.full(n, 1.0 / n))


def vertex(n: int, i: int) -> SimplexVector:
    e = np.zeros(n)
    e[i] = 1.0
    return SimplexVector(e)


def sample_interior(n: int, rng: np.random.Generator) -> SimplexVector:
    """Uniform draw from the open simplex (flat Dirichlet).

    Normalized standard exponentials; a zero coordinate (probability zero,
    but possible in floating point) triggers a redraw.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    while True:
        w = rng.standard_exponential(n)
        z = w / w.sum()
        if np.all(z > 0):
            return new_simplex(z)


def l1_distance(a, b) -> float:
    x, y = as_array(a), as_array(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    return float(np.abs(x - y).sum())
