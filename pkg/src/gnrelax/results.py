"""Result tables, run manifests and flat binary field snapshots."""

import csv
from dataclasses import dataclass, field
import datetime as _dt
import json
import math
from pathlib import Path
import platform
import sys

import numpy as np

from . import __version__, _kernels

SCHEMA_VERSION = "1"


@dataclass
class ResultTable:
    """Rows of scalar results; ``None`` marks a value that was not produced (failed run)."""

    name: str
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def add(self, **row):
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        for key, val in row.items():
            if isinstance(val, float) and not math.isfinite(val):
                raise ValueError(f"non-finite value in column {key!r}")
        self.rows.append({c: row.get(c) for c in self.columns})

    def column(self, name):
        return [r[name] for r in self.rows]

    def sorted_by(self, *keys):
        self.rows.sort(key=lambda r: tuple(r[k] for k in keys))
        return self


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(table, path, config_hash=""):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema_version", "config_hash", *table.columns])
        for row in table.rows:
            writer.writerow([table.schema_version, config_hash, *(_cell(row[c]) for c in table.columns)])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit_results(tables, out_dir, config=None):
    """Write one CSV per table, ``config.json`` and ``manifest.json`` into ``out_dir``.

    Returns the manifest dictionary.
    """
    if isinstance(tables, ResultTable):
        tables = [tables]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_dump = config.model_dump(mode="json") if config is not None else None
    cfg_hash = config.config_hash() if config is not None else ""
    files = []
    for t in tables:
        write_csv(t, out / f"{t.name}.csv", cfg_hash)
        files.append({"name": t.name, "file": f"{t.name}.csv", "rows": len(t.rows), "meta": _jsonable(t.meta)})
    if cfg_dump is not None:
        (out / "config.json").write_text(json.dumps(cfg_dump, indent=2, sort_keys=True))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg_dump,
        "config_hash": cfg_hash,
        "code_version": __version__,
        "kernel_backend": _kernels.backend(),
        "platform": platform.platform(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "tables": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def read_csv(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def save_snapshot(arr, path, **attrs):
    """Raw little-endian dump of ``arr`` plus a JSON sidecar with shape and dtype."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.ascontiguousarray(arr)
    dtype = arr.dtype.newbyteorder("<")
    arr.astype(dtype).tofile(path.with_suffix(".bin"))
    side = {"shape": list(arr.shape), "dtype": dtype.str, "order": "C", **_jsonable(attrs)}
    path.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True))
    return path.with_suffix(".bin")


def load_snapshot(path):
    path = Path(path)
    side = json.loads(path.with_suffix(".json").read_text())
    return np.fromfile(path.with_suffix(".bin"), dtype=np.dtype(side["dtype"])).reshape(side["shape"])
