"""CSV and JSON file formats.

Dataset CSV (long form)::

    individual_id,time_index,sample_index,value

Coefficient CSV; the first line is a comment recording the projection::

    # level=3,p=4,source_H=32
    individual_id,time_index,c1,...,cp

Partition CSV::

    individual_id,cluster

All files are UTF-8 with ``\\n`` line endings; floats use Python's shortest
round-trip representation so identical inputs give identical bytes.
Individuals are numbered ``0..n-1`` and time units ``0..d-1``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .types import CoefficientTensor, FunctionalDataset


class FormatError(ValueError):
    """A malformed input file; the message names the offending line."""


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


def _rows_to_text(header, rows, comment=None) -> str:
    buf = _io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def dataset_to_csv(ds: FunctionalDataset) -> str:
    X = ds.curves
    n, d, H = X.shape
    rows = ((i, j, h, _fmt(X[i, j, h])) for i in range(n) for j in range(d) for h in range(H))
    return _rows_to_text(["individual_id", "time_index", "sample_index", "value"], rows)


def coefficients_to_csv(y: CoefficientTensor) -> str:
    n, d, p = y.y.shape
    comment = f"level={y.level},p={p},source_H={y.source_H if y.source_H is not None else ''}"
    header = ["individual_id", "time_index"] + [f"c{r + 1}" for r in range(p)]
    rows = ([i, j] + [_fmt(v) for v in y.y[i, j]] for i in range(n) for j in range(d))
    return _rows_to_text(header, rows, comment)


def partition_to_csv(z) -> str:
    return _rows_to_text(["individual_id", "cluster"], ((i, int(k)) for i, k in enumerate(z)))


def _read_lines(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read().split("\n")


def _parse_table(path, expect_header):
    """Return (comment, [(lineno, fields)]) skipping a leading ``#`` comment."""
    lines = _read_lines(path)
    comment = None
    start = 0
    if lines and lines[0].startswith("#"):
        comment = lines[0][1:].strip()
        start = 1
    if start >= len(lines) or not lines[start].strip():
        raise FormatError(f"{path}: line {start + 1}: missing header")
    header = next(csv.reader([lines[start]]))
    if not expect_header(header):
        raise FormatError(f"{path}: line {start + 1}: unexpected header {header}")
    body = []
    for lineno, line in enumerate(lines[start + 1:], start=start + 2):
        if not line.strip():
            continue
        body.append((lineno, next(csv.reader([line]))))
    return comment, header, body


def _int(path, lineno, s):
    try:
        v = int(s)
    except ValueError:
        raise FormatError(f"{path}: line {lineno}: expected an integer, got {s!r}") from None
    if v < 0:
        raise FormatError(f"{path}: line {lineno}: negative index {v}")
    return v


def _float(path, lineno, s):
    try:
        v = float(s)
    except ValueError:
        raise FormatError(f"{path}: line {lineno}: expected a number, got {s!r}") from None
    if not np.isfinite(v):
        raise FormatError(f"{path}: line {lineno}: non-finite value {s!r}")
    return v


def _fill(path, cells, shape, what):
    arr = np.full(shape, np.nan)
    for lineno, idx, val in cells:
        if any(i >= s for i, s in zip(idx, shape)):
            raise FormatError(f"{path}: line {lineno}: index out of range")
        if not np.all(np.isnan(arr[idx])):
            raise FormatError(f"{path}: line {lineno}: duplicate {what} entry {idx}")
        arr[idx] = val
    if np.isnan(arr).any():
        missing = tuple(int(v) for v in np.argwhere(np.isnan(arr))[0])
        raise FormatError(f"{path}: missing {what} entry {missing}")
    return arr


def read_dataset_csv(path) -> FunctionalDataset:
    _, _, body = _parse_table(path, lambda h: h == ["individual_id", "time_index", "sample_index", "value"])
    if not body:
        raise FormatError(f"{path}: no data rows")
    cells = []
    for lineno, f in body:
        if len(f) != 4:
            raise FormatError(f"{path}: line {lineno}: expected 4 fields, got {len(f)}")
        idx = tuple(_int(path, lineno, s) for s in f[:3])
        cells.append((lineno, idx, _float(path, lineno, f[3])))
    shape = tuple(max(c[1][a] for c in cells) + 1 for a in range(3))
    return FunctionalDataset(_fill(path, cells, shape, "sample"))


def read_coefficients_csv(path) -> CoefficientTensor:
    comment, header, body = _parse_table(
        path, lambda h: h[:2] == ["individual_id", "time_index"] and len(h) > 2)
    p = len(header) - 2
    meta = {}
    if comment:
        for part in comment.split(","):
            if "=" in part:
                key, val = part.split("=", 1)
                meta[key.strip()] = val.strip()
    if "p" in meta and meta["p"] and int(meta["p"]) != p:
        raise FormatError(f"{path}: line 1: header says p={meta['p']} but there are {p} coefficient columns")
    if not body:
        raise FormatError(f"{path}: no data rows")
    cells = []
    for lineno, f in body:
        if len(f) != p + 2:
            raise FormatError(f"{path}: line {lineno}: expected {p + 2} fields, got {len(f)}")
        i, j = _int(path, lineno, f[0]), _int(path, lineno, f[1])
        for r in range(p):
            cells.append((lineno, (i, j, r), _float(path, lineno, f[r + 2])))
    n = max(c[1][0] for c in cells) + 1
    d = max(c[1][1] for c in cells) + 1
    y = _fill(path, cells, (n, d, p), "coefficient")
    level = int(meta.get("level") or 0)
    source_H = int(meta["source_H"]) if meta.get("source_H") else None
    return CoefficientTensor(y=y, level=level, source_H=source_H)


def read_partition_csv(path) -> np.ndarray:
    _, _, body = _parse_table(path, lambda h: h == ["individual_id", "cluster"])
    z = {}
    for lineno, f in body:
        if len(f) != 2:
            raise FormatError(f"{path}: line {lineno}: expected 2 fields")
        i = _int(path, lineno, f[0])
        if i in z:
            raise FormatError(f"{path}: line {lineno}: duplicate individual {i}")
        k = _int(path, lineno, f[1])
        if k < 1:
            raise FormatError(f"{path}: line {lineno}: cluster labels start at 1")
        z[i] = k
    missing = sorted(set(range(len(z))) - set(z))
    if missing:
        raise FormatError(f"{path}: individual ids are not 0..{len(z) - 1}; {missing[0]} is missing")
    return np.array([z[i] for i in range(len(z))], dtype=np.int64)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path, obj) -> None:
    atomic_write(path, dumps(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
