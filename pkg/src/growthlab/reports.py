"""Report emission: deterministic JSON/CSV artifacts plus a timestamped manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from ._version import __version__


def _clean(x):
    """JSON-safe copy: tuples become lists, non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if hasattr(x, "item"):
        return _clean(x.item())
    if isinstance(x, float):
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return str(x)


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(_clean(config), sort_keys=True).encode()).hexdigest()[:16]


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else v for v in r])
    return buf.getvalue()


def atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class Report:
    command: str
    config: dict
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)       # file name -> CSV text
    assertions: dict = field(default_factory=dict)   # assertion name -> bool
    witnesses: list = field(default_factory=list)    # negative artifacts, one text block each
    flagged: list = field(default_factory=list)      # rows skipped after a budget overrun
    started: float = field(default_factory=time.time)

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def body(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "config_hash": self.config_hash,
            "version": __version__,
            "tables": sorted(self.tables),
            "summary": self.summary,
            "assertions": {k: ("pass" if v else "fail") for k, v in self.assertions.items()},
        }

    def write(self, out_dir) -> Path:
        """Write report.json and tables (reproducible bytes) and manifest.json
        (timestamps and environment)."""
        out = Path(out_dir)
        for name, text in sorted(self.tables.items()):
            atomic_write(out / name, text)
        if self.witnesses:
            atomic_write(out / "witnesses.txt", "\n\n".join(self.witnesses) + "\n")
        atomic_write(out / "report.json", dumps(self.body()))
        finished = time.time()
        manifest = {
            "command": self.command,
            "config_hash": self.config_hash,
            "version": __version__,
            "python": platform.python_version(),
            "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(self.started)),
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(finished)),
            "seconds": round(finished - self.started, 3),
        }
        atomic_write(out / "manifest.json", dumps(manifest))
        return out / "report.json"
