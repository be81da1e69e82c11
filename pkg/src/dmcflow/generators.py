"""Channel construction: canonical fixtures and random symmetric benchmarks."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .channel import Channel, load_channel, mutual_information, read_channel, write_channel
from .errors import NotSymmetric
from .simplex import sample_interior, uniform

DEFAULT_DIMENSIONS = tuple(range(2, 101, 7))
DEFAULT_SIGMAS = (0.0, 0.25, 0.5, 0.75, 1.0)
SYMMETRY_TOL = 1e-9

PAPER_SYMMETRIC_ROW = (0.3668, 0.5678, 0.0654)


@dataclass(frozen=True)
class DatasetSpec:
    dimensionalities: tuple = DEFAULT_DIMENSIONS
    noise_levels: tuple = DEFAULT_SIGMAS
    channels_per_cell: int = 15
    seed: int = 0

    def __post_init__(self):
        if any(n < 2 for n in self.dimensionalities):
            raise ValueError("dimensionalities must be >= 2")
        if any(not 0.0 <= s <= 1.0 for s in self.noise_levels):
            raise ValueError("noise levels must lie in [0, 1]")
        if self.channels_per_cell < 1:
            raise ValueError("channels_per_cell must be >= 1")


@dataclass
class DatasetEntry:
    channel: Channel
    ground_truth: float
    metadata: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.channel, self.ground_truth, self.metadata))


def circulant(row) -> np.ndarray:
    """Row ``i`` is ``row`` rotated right by ``i`` places."""
    row = np.asarray(row, dtype=np.float64)
    return np.stack([np.roll(row, i) for i in range(row.size)])


def generate_symmetric_channel(n: int, sigma: float, rng: np.random.Generator) -> Channel:
    """``(1 - sigma) I + sigma R`` with ``R`` circulant over a flat-Dirichlet row."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    R = circulant(sample_interior(n, rng).entries)
    P = (1.0 - sigma) * np.eye(n) + sigma * R
    # scrub round-off so each row sums to 1 to machine precision
    P /= P.sum(axis=1, keepdims=True)
    return load_channel(P)


def is_symmetric(ch: Channel, tol: float = SYMMETRY_TOL) -> bool:
    P = ch.transition
    if ch.n != ch.m:
        return False
    ref = np.sort(P[0])
    rows_ok = np.all(np.abs(np.sort(P, axis=1) - ref) <= tol)
    cols_ok = np.all(np.abs(np.sort(P, axis=0).T - np.sort(P[:, 0])) <= tol)
    return bool(rows_ok and cols_ok)


def symmetric_ground_truth(ch: Channel) -> float:
    """Capacity of a symmetric channel: I at the uniform input."""
    if not is_symmetric(ch):
        raise NotSymmetric("rows/columns are not permutations of one another")
    return mutual_information(ch, uniform(ch.n))


def identity_channel(n: int) -> Channel:
    return load_channel(np.eye(n), name=f"identity_{n}")


def bsc(p: float) -> Channel:
    return load_channel([[1 - p, p], [p, 1 - p]], name=f"bsc_{p:g}")


def paper_symmetric_3x3() -> Channel:
    r = PAPER_SYMMETRIC_ROW
    return load_channel([r, r[1:] + r[:1], r[2:] + r[:2]], name="paper_symmetric_3x3")


def ternary_confusion() -> Channel:
    return load_channel([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]], name="ternary_confusion")


def canonical_channels() -> dict:
    """Named constructors; parametrized ones take their parameter."""
    return {
        "identity": identity_channel,
        "bsc": bsc,
        "paper_symmetric_3x3": paper_symmetric_3x3,
        "ternary_confusion": ternary_confusion,
    }


def cell_rng(seed: int, n: int, sigma: float, index: int) -> np.random.Generator:
    """Independent stream per dataset cell, so cells can be built in any order."""
    return np.random.default_rng([seed, n, int(round(sigma * 1_000_000)), index])


def channel_id(n: int, sigma: float, index: int) -> str:
    return f"n{n:03d}_s{sigma:.2f}_i{index:02d}"


def generate_dataset(spec: DatasetSpec) -> list[DatasetEntry]:
    out = []
    for n in spec.dimensionalities:
        for sigma in spec.noise_levels:
            for k in range(spec.channels_per_cell):
                ch = generate_symmetric_channel(n, sigma, cell_rng(spec.seed, n, sigma, k))
                cid = channel_id(n, sigma, k)
                ch = Channel(ch.transition, ch.row_constants, cid)
                meta = {"channel_id": cid, "n": n, "sigma": sigma, "index": k}
                out.append(DatasetEntry(ch, symmetric_ground_truth(ch), meta))
    return out


def save_dataset(entries, spec: DatasetSpec, directory) -> Path:
    """Write ``channels/<id>.json`` plus ``manifest.json``."""
    root = Path(directory)
    (root / "channels").mkdir(parents=True, exist_ok=True)
    items = []
    for e in entries:
        rel = f"channels/{e.metadata['channel_id']}.json"
        write_channel(e.channel, root / rel)
        items.append({**e.metadata, "file": rel, "ground_truth": e.ground_truth})
    manifest = {
        "format": "dmcflow-dataset/1",
        "spec": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(spec).items()},
        "seed_derivation": "numpy default_rng([seed, n, round(sigma*1e6), index])",
        "channels": items,
    }
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1) + "\n")
    return path


def load_dataset(directory) -> list[DatasetEntry]:
    root = Path(directory)
    manifest = json.loads((root / "manifest.json").read_text())
    out = []
    for item in manifest["channels"]:
        ch = read_channel(root / item["file"])
        ch = Channel(ch.transition, ch.row_constants, item["channel_id"])
        meta = {k: item[k] for k in ("channel_id", "n", "sigma", "index")}
        out.append(DatasetEntry(ch, float(item["ground_truth"]), meta))
    return out


def bsc_capacity(p: float) -> float:
    """ln 2 minus the binary entropy of ``p`` (nats)."""
    h = -sum(t * math.log(t) for t in (p, 1 - p) if t > 0)
    return math.log(2) - h
