"""CSV / JSON emission of a ResultSet."""
from __future__ import annotations

import io
import json
import math
import os
import sys
from typing import List, Optional

from .errors import ConfigError
from .runner import AXIS_PAIRS, ResultSet

SIG_DIGITS = 12


def fourth_root(x: float) -> float:
    """sign(x) |x|^(1/4); exact on perfect fourth powers such as 16."""
    if x == 0:
        return 0.0
    r = math.sqrt(math.sqrt(abs(x)))
    return math.copysign(r, x)


def _columns(rs: ResultSet, axis_transform: str) -> List[str]:
    cols = list(rs.columns)
    if axis_transform == "fourth_root" and rs.mode in AXIS_PAIRS:
        cols += [f"{c}_ft" for c in AXIS_PAIRS[rs.mode]]
    return cols


def _records(rs: ResultSet, axis_transform: str) -> List[list]:
    out = []
    pair = AXIS_PAIRS.get(rs.mode) if axis_transform == "fourth_root" else None
    idx = [rs.columns.index(c) for c in pair] if pair else []
    for row in rs.rows:
        rec = list(row)
        rec += [None if row[i] is None else fourth_root(row[i]) for i in idx]
        out.append(rec)
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, f".{SIG_DIGITS}g")
    return str(v)


def emit(rs: ResultSet, fmt: str = "csv", axis_transform: str = "none") -> bytes:
    """Serialize deterministically; the resolved config is embedded in both formats.

    CSV carries the config as leading ``#`` comment lines before the header.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}", key="output.format")
    if axis_transform not in ("none", "fourth_root"):
        raise ConfigError(f"unknown axis transform {axis_transform!r}",
                          key="output.axis_transform")
    cols = _columns(rs, axis_transform)
    recs = _records(rs, axis_transform)
    if fmt == "json":
        meta = dict(rs.meta)
        meta["axis_transform"] = axis_transform
        meta["columns"] = cols
        doc = {"meta": meta, "rows": [dict(zip(cols, r)) for r in recs]}
        return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("utf-8")
    buf = io.StringIO()
    buf.write(f"# {rs.meta.get('tool', 'efimov')} {rs.meta.get('version', '')}\n")
    for section, items in rs.meta.get("config", {}).items():
        buf.write(f"# [{section}]\n")
        for k, v in items.items():
            buf.write(f"# {k} = {v}\n")
    buf.write(",".join(cols) + "\n")
    for r in recs:
        buf.write(",".join(_cell(v) for v in r) + "\n")
    return buf.getvalue().encode("utf-8")


def write_output(data: bytes, path: Optional[str]) -> None:
    """Write to ``path``; ``-`` means stdout.  OSError propagates as the I/O failure."""
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"output directory does not exist: {parent}")
    with open(path, "wb") as fh:
        fh.write(data)
