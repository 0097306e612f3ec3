"""CSV and JSON writers; every file records the tool version and config hash."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__


def header_line(config_hash: str) -> str:
    return f"# veronese {__version__} config={config_hash}"


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item"):
        return _clean(v.item())
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence], config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(header_line(config_hash) + "\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return path


def write_json(path: Path, payload: dict, config_hash: str, command: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"meta": {"tool": "veronese", "version": __version__, "config": config_hash, "command": command}}
    doc.update(_clean(payload))
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    return path


def write_table(out_dir: Path, name: str, columns: Sequence[str], rows: list, fmt: str,
                config_hash: str, command: str) -> Path:
    """A table as ``name.csv`` or as ``name.json`` (``{"columns": ..., "rows": ...}``)."""
    if fmt == "csv":
        return write_csv(Path(out_dir) / f"{name}.csv", columns, rows, config_hash)
    return write_json(Path(out_dir) / f"{name}.json", {"columns": list(columns), "rows": [list(r) for r in rows]},
                      config_hash, command)


def read_csv(path: Path) -> tuple[str, list[str], list[list[str]]]:
    """``(header_line, columns, rows)`` of a file written by :func:`write_csv`."""
    with Path(path).open() as fh:
        head = fh.readline().rstrip("\n")
        r = csv.reader(fh)
        cols = next(r)
        return head, cols, list(r)
