"""Persistence: field files, JSON/CSV writers and the run manifest.

A field is stored as ``<name>.bin`` (little-endian float64, C order) next to
``<name>.json`` holding the grid header.  The CSV form carries the same header
as a ``#`` comment line followed by one value per line.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np

from . import __version__
from .grid import Field, Grid

OUTPUT_ROOT_ENV = "FRACMIN_OUTPUT_ROOT"
_DTYPE = "<f8"


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def canonical_hash(obj) -> str:
    blob = json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# -- fields -----------------------------------------------------------------


def _header(grid: Grid) -> dict:
    return {**grid.to_dict(), "dtype": "float64", "byte_order": "little", "layout": "C"}


def _grid_from_header(h: dict) -> Grid:
    return Grid(int(h["dim"]), float(h["box_length"]), int(h["points_per_dim"]), float(h["s"]))


def save_field(u: Field, path) -> tuple[Path, Path]:
    """Write ``path.bin`` and ``path.json``; returns both paths."""
    base = Path(path)
    bin_path, hdr_path = base.with_suffix(".bin"), base.with_suffix(".json")
    data = np.ascontiguousarray(u.values, dtype=_DTYPE).tobytes()
    bin_path.write_bytes(data)
    header = _header(u.grid)
    header["sha256"] = hashlib.sha256(data).hexdigest()
    hdr_path.write_text(dumps(header))
    return bin_path, hdr_path


def load_field(path) -> Field:
    base = Path(path)
    header = json.loads(base.with_suffix(".json").read_text())
    grid = _grid_from_header(header)
    vals = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype=_DTYPE)
    if vals.size != grid.size:
        raise ValueError(f"field file has {vals.size} values, header implies {grid.size}")
    return Field(grid, vals.reshape(grid.shape).copy())


def save_field_csv(u: Field, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(_header(u.grid), sort_keys=True) + "\n")
        for v in np.asarray(u.values).reshape(-1):
            fh.write(repr(float(v)) + "\n")
    return path


def load_field_csv(path) -> Field:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("CSV field file lacks its JSON header line")
        grid = _grid_from_header(json.loads(first[1:]))
        vals = np.array([float(line) for line in fh if line.strip()])
    return Field(grid, vals.reshape(grid.shape))


# -- run directories --------------------------------------------------------


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


class RunWriter:
    """Single writer for a run directory; :meth:`finalize` emits the manifest.

    The manifest lists every file written through the writer with its SHA-256.
    Only the manifest carries wall-clock timestamps, so all other outputs are
    byte-identical across reruns with identical inputs.
    """

    MANIFEST = "manifest.json"

    def __init__(self, out_dir, command: str):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.outputs: list[str] = []
        self.started = _dt.datetime.now(_dt.timezone.utc).isoformat()

    def _register(self, path: Path) -> Path:
        rel = path.relative_to(self.dir).as_posix()
        if rel not in self.outputs:
            self.outputs.append(rel)
        return path

    def write_json(self, name: str, obj) -> Path:
        path = self.dir / name
        path.write_text(dumps(obj))
        return self._register(path)

    def write_csv(self, name: str, rows, fieldnames) -> Path:
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore")
            w.writeheader()
            for row in rows:
                w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                            for k, v in row.items()})
        return self._register(path)

    def write_field(self, name: str, u: Field) -> tuple[Path, Path]:
        b, h = save_field(u, self.dir / name)
        self._register(b)
        self._register(h)
        return b, h

    def finalize(self, config: dict, seed: int | None = None, grid: Grid | None = None,
                 spec=None, status: str = "ok", error: str | None = None) -> Path:
        manifest = {
            "command": self.command,
            "config_hash": canonical_hash(config),
            "config": config,
            "seed": seed,
            "grid": None if grid is None else grid.to_dict(),
            "spec": None if spec is None else spec.to_dict(),
            "outputs": {rel: sha256_file(self.dir / rel) for rel in self.outputs},
            "timestamps": {"started": self.started,
                           "finished": _dt.datetime.now(_dt.timezone.utc).isoformat()},
            "artifact_version": __version__,
            "status": status,
            "error": error,
        }
        path = self.dir / self.MANIFEST
        path.write_text(dumps(manifest))
        return path


def load_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / RunWriter.MANIFEST).read_text())
