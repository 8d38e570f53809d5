"""Raw record dump: channel-interleaved little-endian float64 plus a JSON sidecar."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError
from ..model import SystemParams
from .simulate import TimeSeries

RECORD_DTYPE = np.dtype("<f8")
SIDECAR_SUFFIX = ".json"


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def write_records(path, ts: TimeSeries, params: SystemParams | None = None, seed: int | None = None) -> Path:
    """Write ``ts`` to ``path`` and its metadata to ``path + '.json'``; returns the sidecar path."""
    if not ts.channels:
        raise InvalidInputError("nothing to write: no channels")
    seed = seed if seed is not None else ts.meta.get("seed")
    with RecordWriter(path, ts.dt, ts.channels, ts.t0, params, seed) as writer:
        writer.append(ts.channels)
    return sidecar_path(path)


class RecordWriter:
    """Streaming counterpart of :func:`write_records` for records too long to hold in memory.

    >>> with RecordWriter(path, dt, ["a", "b"]) as w:   # doctest: +SKIP
    ...     w.append(block)
    """

    def __init__(self, path, dt: float, channels, t0: float = 0.0, params: SystemParams | None = None,
                 seed: int | None = None):
        self.path = Path(path)
        self.channels = list(channels)
        self.meta = {
            "format": "synodyne-records v1",
            "dtype": "float64-le",
            "dt": dt,
            "t0": t0,
            "n_samples": 0,
            "channels": self.channels,
            "seed": seed,
            "params": dataclasses.asdict(params) if params is not None else None,
        }
        self._fh = open(self.path, "wb")

    def append(self, columns: dict) -> None:
        data = np.column_stack([np.asarray(columns[name], dtype=float) for name in self.channels])
        self._fh.write(data.astype(RECORD_DTYPE).tobytes())
        self.meta["n_samples"] += len(data)

    def close(self) -> Path:
        self._fh.close()
        side = sidecar_path(self.path)
        side.write_text(json.dumps(self.meta, indent=2) + "\n")
        return side

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records(path) -> tuple[TimeSeries, dict]:
    """Inverse of :func:`write_records`; returns the records and the sidecar dictionary."""
    side = sidecar_path(path)
    try:
        meta = json.loads(side.read_text())
    except FileNotFoundError:
        raise InvalidInputError(f"missing sidecar {side}") from None
    names = meta["channels"]
    flat = np.frombuffer(Path(path).read_bytes(), dtype=RECORD_DTYPE)
    if flat.size != meta["n_samples"] * len(names):
        raise InvalidInputError(f"{path}: expected {meta['n_samples']} x {len(names)} values, found {flat.size}")
    data = flat.reshape(meta["n_samples"], len(names)).astype(float)
    channels = {name: data[:, i].copy() for i, name in enumerate(names)}
    return TimeSeries(meta["dt"], channels, t0=meta["t0"], meta={"seed": meta.get("seed")}), meta
