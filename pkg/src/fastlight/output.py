"""Deterministic CSV output and the per-run manifest.

CSV files carry one header row, 17-significant-digit decimal floats, LF
line endings and UTF-8 encoding, so identical data always produces
identical bytes.  Every run directory gets a manifest.json recording the
resolved configuration, grid sizes and a sha256 per output file.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import FastlightError

__all__ = ["write_series", "RunManifest", "sha256_of"]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    return format(float(value), ".17g")


def write_series(path, columns, rows) -> Path:
    """Write rectangular rows under a header; returns the path written.

    Raises FastlightError on ragged rows; I/O problems surface as OSError
    with the path in the message.
    """
    path = Path(path)
    n_cols = len(columns)
    lines = [",".join(columns)]
    for r, row in enumerate(rows):
        row = list(row)
        if len(row) != n_cols:
            raise FastlightError(f"row {r} has {len(row)} fields, expected {n_cols}")
        lines.append(",".join(_fmt(v) for v in row))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def sha256_of(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    """Everything needed to reproduce a run plus checksums of what it wrote."""

    mode: str
    config_text: str
    out_dir: str
    code_version: str = __version__
    created_utc: str = ""
    wall_clock_s: float = 0.0
    grid_sizes: dict = field(default_factory=dict)  # n_x, n_t, n_detuning per run label
    outputs: dict = field(default_factory=dict)  # filename -> sha256
    extra: dict = field(default_factory=dict)  # scalar results worth keeping

    def add_output(self, path) -> None:
        path = Path(path)
        self.outputs[path.name] = sha256_of(path)

    def write(self, path=None) -> Path:
        path = Path(path) if path is not None else Path(self.out_dir) / "manifest.json"
        if not self.created_utc:
            self.created_utc = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        payload = {
            "mode": self.mode,
            "code_version": self.code_version,
            "created_utc": self.created_utc,
            "wall_clock_s": round(self.wall_clock_s, 3),
            "grid_sizes": self.grid_sizes,
            "outputs": dict(sorted(self.outputs.items())),
            "extra": self.extra,
            "config": self.config_text,
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path
