"""Report assembly and atomic JSON/CSV emission."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__


def jsonable(x: Any) -> Any:
    """Convert report values to plain JSON types; Fractions become ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, enum.Enum):
        return x.value
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x) if f.repr}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def exact_cell(value) -> tuple[Optional[str], float]:
    """(exact string or None, float) pair for a possibly exact number."""
    if isinstance(value, Fraction):
        return str(value), float(value)
    return None, float(value)


@dataclass
class Report:
    command: str
    config: dict
    payload: dict
    provenance: dict = field(default_factory=dict)
    seed: Optional[int] = None
    table: Optional[list[dict]] = None
    notes: list[str] = field(default_factory=list)

    def document(self) -> dict:
        return {
            "metadata": {
                "tool": "bdwalk",
                "version": __version__,
                "command": self.command,
                "seed": self.seed,
                "created": datetime.now(timezone.utc).isoformat(),
                "config": jsonable(self.config),
                "notes": list(self.notes),
            },
            "payload": jsonable({**self.payload, **({"table": self.table} if self.table is not None else {})}),
            "provenance": self.provenance,
        }


def payload_bytes(doc: dict) -> bytes:
    return json.dumps(doc["payload"], sort_keys=True).encode()


def render_json(report: Report) -> str:
    return json.dumps(report.document(), indent=2, sort_keys=True) + "\n"


def render_csv(report: Report) -> str:
    rows = jsonable(report.table or [])
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def emit_report(report: Report, out_dir, fmt: str = "json") -> list[Path]:
    """Write ``<command>.json`` and/or ``<command>.csv`` into ``out_dir``."""
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    out_dir = Path(out_dir)
    written = []
    if fmt in ("json", "both"):
        path = out_dir / f"{report.command}.json"
        atomic_write(path, render_json(report))
        written.append(path)
    if fmt in ("csv", "both"):
        path = out_dir / f"{report.command}.csv"
        atomic_write(path, render_csv(report))
        written.append(path)
    return written
