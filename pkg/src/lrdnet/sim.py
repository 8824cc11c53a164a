"""Sampled trajectories of a network's output process.

Generation is deterministic in the seed: innovations are drawn in one block
from ``numpy.random.default_rng(seed)`` (PCG64), so the recursion route and
the stacked-transfer route consume identical noise streams for the same seed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InsufficientData
from .model import LrdnModel, require_valid
from .polymat import PolynomialMatrix

RNG_ALGORITHM = "numpy-default-pcg64"
DEFAULT_BURN_IN = 500


@dataclass(frozen=True)
class TimeSeries:
    """T x (m + l) sample matrix; columns 1..m are the deterministic block,
    columns m+1..m+l the full-rank block. ``seed`` is 0 for external data."""

    data: np.ndarray
    m: int
    l: int
    seed: int = 0

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("data must be a nonempty 2-d array")
        if arr.shape[1] != self.m + self.l:
            raise ValueError(f"data has {arr.shape[1]} columns, expected m + l = {self.m + self.l}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def num_samples(self) -> int:
        return self.data.shape[0]

    @property
    def y_m(self) -> np.ndarray:
        return self.data[:, : self.m]

    @property
    def y_l(self) -> np.ndarray:
        return self.data[:, self.m :]


def _noise(rng, total: int, sigma: np.ndarray) -> np.ndarray:
    return rng.standard_normal((total, sigma.size)) * np.sqrt(sigma)


def _apply_fir(tf: PolynomialMatrix, inputs: np.ndarray) -> np.ndarray:
    """out[t] = sum_k C_k inputs[t-k], zero-padded before t = 0."""
    total = inputs.shape[0]
    out = np.zeros((total, tf.rows))
    for k in range(tf.degree + 1):
        ck = tf.coeffs[k]
        if not ck.any():
            continue
        if k == 0:
            out += inputs @ ck.T
        else:
            out[k:] += inputs[:-k] @ ck.T
    return out


def simulate(
    model: LrdnModel,
    num_samples: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
) -> TimeSeries:
    """Run the defining recursion with zero pre-history and drop the burn-in.

    The full-rank block evolves as
    y_l(t) = (I - G_0)^-1 [w(t) + sum_{k>=1} G_k y_l(t-k)], and the
    deterministic block is the FIR readout of y_l, computed with the
    pre-burn-in history available so the retained window has no edge effects.
    """
    require_valid(model)
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    rng = np.random.default_rng(seed)
    total = burn_in + num_samples
    w = _noise(rng, total, model.sigma_l)

    g = model.g_l.coeffs
    deg = model.g_l.degree
    lead_inv = np.linalg.inv(np.eye(model.l) - g[0])
    y_l = np.zeros((total, model.l))
    for t in range(total):
        acc = w[t].copy()
        for k in range(1, min(deg, t) + 1):
            acc += g[k] @ y_l[t - k]
        y_l[t] = lead_inv @ acc

    y_m = _apply_fir(model.g_ml, y_l)
    data = np.hstack([y_m[burn_in:], y_l[burn_in:]])
    return TimeSeries(data=data, m=model.m, l=model.l, seed=seed)


def simulate_from_factor(
    full_transfer: PolynomialMatrix,
    sigma: np.ndarray,
    num_samples: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
) -> TimeSeries:
    """Generate directly through the stacked innovation-to-output transfer.

    The last len(sigma) rows of the transfer are taken as the full-rank block.
    """
    sigma = np.asarray(sigma, dtype=float)
    l = sigma.size
    if full_transfer.cols != l:
        raise ValueError(
            f"transfer has {full_transfer.cols} inputs but sigma has length {l}"
        )
    if full_transfer.rows < l:
        raise ValueError("transfer must include the full-rank block rows")
    if (sigma <= 0).any():
        raise ValueError("sigma entries must be positive")
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    rng = np.random.default_rng(seed)
    total = burn_in + num_samples
    e = _noise(rng, total, sigma)
    y = _apply_fir(full_transfer, e)
    return TimeSeries(data=y[burn_in:], m=full_transfer.rows - l, l=l, seed=seed)


# -- CSV round trip -----------------------------------------------------


def write_csv(ts: TimeSeries, path, metadata: dict | None = None) -> Path:
    """Write samples as CSV plus a metadata sidecar <path>.meta.json."""
    path = Path(path)
    n = ts.m + ts.l
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"y{j}" for j in range(1, n + 1)])
        for t in range(ts.num_samples):
            writer.writerow([t + 1] + [repr(float(v)) for v in ts.data[t]])
    meta = {
        "m": ts.m,
        "l": ts.l,
        "T": ts.num_samples,
        "seed": ts.seed,
        "rng": RNG_ALGORITHM,
    }
    if metadata:
        meta.update(metadata)
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return sidecar


def read_csv(path) -> tuple[np.ndarray, dict | None]:
    """Load a sample matrix; returns (array, sidecar metadata or None)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        header = next(reader, None)
        if not header or header[0].strip() != "t":
            raise InsufficientData(f"{path} is not a sample CSV (missing 't' header)")
        rows = [[float(v) for v in row[1:]] for row in reader if row]
    if not rows:
        raise InsufficientData(f"{path} contains no samples")
    data = np.asarray(rows, dtype=float)
    sidecar = path.with_name(path.name + ".meta.json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else None
    return data, meta


def timeseries_from_csv(path) -> TimeSeries:
    """Rebuild a TimeSeries from a CSV that has a partition-bearing sidecar."""
    data, meta = read_csv(path)
    if meta is None or "m" not in meta or "l" not in meta:
        raise InsufficientData(f"{path} has no sidecar with partition info")
    return TimeSeries(data=data, m=int(meta["m"]), l=int(meta["l"]), seed=int(meta.get("seed", 0)))
