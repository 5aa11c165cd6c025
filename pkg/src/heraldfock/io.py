"""Deterministic CSV/JSON emission with config-hash guarded file names.

Data files are CSV with a ``#`` provenance line (tool, verb, config hash)
followed by a column header; floats use 17 significant digits so that every
value round-trips exactly. Each verb also writes a JSON sidecar with units,
the config hash, the tool version and scalar results.
"""

import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

TOOL = "heraldfock"
FLOAT_FMT = "%.17g"
_write_lock = threading.Lock()


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return FLOAT_FMT % v
    return str(v)


def json_safe(v):
    """Make ``v`` JSON-serialisable with deterministic, finite-only floats."""
    if isinstance(v, dict):
        return {str(k): json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [json_safe(x) for x in v]
    if isinstance(v, np.ndarray):
        return [json_safe(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else fmt_value(v)
    return v


@dataclass
class OutputSet:
    """Names of every file one verb writes, resolved against existing outputs."""

    out_dir: Path
    verb: str
    config_hash: str
    force: bool = False
    suffix: str = ""
    written: list = field(default_factory=list)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        sidecar = self.out_dir / f"{self.verb}.json"
        if not self.force and sidecar.exists():
            try:
                prior = json.loads(sidecar.read_text(encoding="utf-8")).get("config_sha256")
            except (OSError, ValueError):
                prior = None
            if prior != self.config_hash:
                # never silently replace results produced from another config
                self.suffix = "." + self.config_hash[:12]

    def path(self, stem: str, ext: str) -> Path:
        return self.out_dir / f"{stem}{self.suffix}.{ext}"

    def header_line(self) -> str:
        return f"# {TOOL} {__version__} verb={self.verb} config_sha256={self.config_hash}\n"

    def write_csv(self, stem: str, columns, rows) -> Path:
        lines = [self.header_line(), ",".join(columns) + "\n"]
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"{stem}: row has {len(row)} fields, expected {len(columns)}")
            lines.append(",".join(fmt_value(v) for v in row) + "\n")
        return self._write(self.path(stem, "csv"), "".join(lines))

    def write_matrix(self, stem: str, matrix: np.ndarray, row_label: str, col_label: str) -> Path:
        """Dense real matrix; the comment line records the axis semantics."""
        matrix = np.asarray(matrix, dtype=float)
        parts = [self.header_line(),
                 f"# rows={row_label} cols={col_label} shape={matrix.shape[0]}x{matrix.shape[1]}\n"]
        for row in matrix:
            parts.append(",".join(FLOAT_FMT % v for v in row) + "\n")
        return self._write(self.path(stem, "csv"), "".join(parts))

    def write_sidecar(self, units: dict, results: dict, extra=None) -> Path:
        doc = {
            "tool": TOOL,
            "version": __version__,
            "verb": self.verb,
            "config_sha256": self.config_hash,
            "files": sorted(p.name for p in self.written),
            "units": units,
            "results": json_safe(results),
        }
        if extra:
            doc.update(json_safe(extra))
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        return self._write(self.path(self.verb, "json"), text)

    def _write(self, path: Path, text: str) -> Path:
        with _write_lock:
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_text(text, encoding="utf-8", newline="\n")
            tmp.replace(path)
            if path not in self.written:
                self.written.append(path)
        return path


def read_csv_header_hash(path) -> str:
    """Config hash embedded in the first line of a data file."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    for token in first.split():
        if token.startswith("config_sha256="):
            return token.split("=", 1)[1]
    raise ValueError(f"{path}: no config hash in header")
