"""Machine-readable outputs: atomic CSV and JSON writers.

Artifacts are written to a temp file in the target directory and renamed
into place, so interrupted runs never leave truncated files.  Floats are
serialized with repr (shortest round-trip form): identical runs produce
byte-identical files regardless of thread count.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

__all__ = ["write_csv", "write_json", "format_float"]


def format_float(x) -> str:
    return repr(float(x))


def _atomic_write(path, writer):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    """RFC-4180 CSV with a header row; floats via repr for reproducibility."""

    def _write(fh):
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(x) if isinstance(x, float) else x for x in row])

    _atomic_write(path, _write)


def write_json(path, payload):
    def _write(fh):
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")

    _atomic_write(path, _write)


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dict__"):
        return obj.__dict__
    return str(obj)
