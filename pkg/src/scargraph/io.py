"""Run configuration and output serialisation.

CSV floats use ``%.17g``; JSON floats use Python's shortest round-trip
representation, which reproduces the binary value exactly. Non-finite floats
become ``null`` in JSON.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__


@dataclass
class RunConfig:
    subcommand: str
    model: str | None = None
    n: int | None = None
    boundary: str = "pbc"
    tmax: float | None = None
    out: str | None = None
    seed: int | None = None
    sectors: list = field(default_factory=list)
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)


def clean(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return clean(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return clean(asdict(obj))
    return obj


def envelope(config: RunConfig, payload: dict) -> dict:
    out = {"version": __version__, "config": config.to_dict()}
    out.update(payload)
    return clean(out)


def dumps(obj, indent: int | None = 1) -> str:
    return json.dumps(clean(obj), indent=indent, allow_nan=False)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


def write_jsonl(path, rows, config: RunConfig | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for row in rows:
            rec = clean(row)
            if config is not None:
                rec = {"version": __version__, "config": config.to_dict(), **rec}
            fh.write(json.dumps(rec, allow_nan=False) + "\n")
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path, header, rows, config: RunConfig | None = None, notes: dict | None = None) -> Path:
    """CSV with the run configuration (and optional notes) as leading ``#`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if config is not None:
            fh.write("# " + json.dumps({"version": __version__, "config": config.to_dict()}) + "\n")
        for k, v in (notes or {}).items():
            fh.write(f"# {k}: {json.dumps(clean(v))}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return ``(header_comments, header, rows)`` with numeric cells as floats."""
    comments, rows, header = [], [], None
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
                continue
            parsed = []
            for c in cells:
                try:
                    parsed.append(float(c))
                except ValueError:
                    parsed.append(c)
            rows.append(parsed)
    return comments, header, rows
