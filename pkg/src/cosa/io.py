"""File formats: data CSV, condensed dissimilarity files, matrices, JSON reports.

Floats are always written with ``repr`` so that parse -> write reproduces a
file byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .distances import CATEGORICAL, NUMERIC, DataMatrix, DissimilarityMatrix
from .errors import DataError

DIST_MAGIC = "cosa-dist v1"


def read_data_csv(path, categorical=(), id_col: str | None = "id") -> tuple[DataMatrix, dict]:
    """Read a header-first CSV into a DataMatrix.

    ``id_col`` names the row-label column if present in the header.
    Categorical columns are coded 0..L-1 in sorted label order; the code
    books come back as the second return value.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    id_pos = header.index(id_col) if id_col and id_col in header else None
    cols = [c for c in range(len(header)) if c != id_pos]
    names = [header[c] for c in cols]
    cats = set(categorical)
    unknown = cats - set(names)
    if unknown:
        raise DataError(f"{path}: categorical column(s) not in header: {sorted(unknown)}")
    kinds = [CATEGORICAL if n in cats else NUMERIC for n in names]

    for r, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"{path}: expected {len(header)} fields, found {len(row)}", row=r + 2)

    values = np.empty((len(body), len(cols)))
    codebooks = {}
    for k, (c, kind) in enumerate(zip(cols, kinds)):
        if kind == CATEGORICAL:
            levels = sorted({row[c].strip() for row in body})
            code = {lev: i for i, lev in enumerate(levels)}
            values[:, k] = [code[row[c].strip()] for row in body]
            codebooks[names[k]] = levels
            continue
        for r, row in enumerate(body):
            cell = row[c].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: cannot parse {cell!r} as a number", row=r + 2, col=header[c]) from None
            if not np.isfinite(v):
                raise DataError(f"{path}: non-finite value {cell!r}", row=r + 2, col=header[c])
            values[r, k] = v
    row_ids = [row[id_pos] for row in body] if id_pos is not None else []
    return DataMatrix(values, kinds=kinds, row_ids=row_ids, col_ids=names), codebooks


def write_matrix_csv(path, M: np.ndarray, row_ids, col_ids, id_col: str = "id"):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([id_col, *col_ids])
        for rid, row in zip(row_ids, np.asarray(M, dtype=float)):
            w.writerow([rid, *map(repr, row.tolist())])


def write_data_csv(path, X: DataMatrix, id_col: str = "id"):
    write_matrix_csv(path, X.values, X.row_ids, X.col_ids, id_col)


def format_dist(D: DissimilarityMatrix, ids=None, flags: dict | None = None) -> str:
    """Serialise to the text format.

    Line 1 is the magic ``cosa-dist v1``, then ``n <N>``, ``flags k=v;...``
    (``-`` when empty), ``ids <json list>``, and one value per line in
    condensed pair order.
    """
    ids = [str(i) for i in ids] if ids is not None else [str(i + 1) for i in range(D.n)]
    flag_str = ";".join(f"{k}={v}" for k, v in sorted((flags or {}).items())) or "-"
    lines = [DIST_MAGIC, f"n {D.n}", f"flags {flag_str}", "ids " + json.dumps(ids, ensure_ascii=False)]
    lines.extend(repr(float(v)) for v in D.values)
    return "\n".join(lines) + "\n"


def parse_dist(text: str, source="<string>") -> tuple[DissimilarityMatrix, list, dict]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 4 or lines[0] != DIST_MAGIC:
        raise DataError(f"{source}: not a '{DIST_MAGIC}' file", row=1)
    try:
        tag, n_str = lines[1].split(" ", 1)
        n = int(n_str)
        assert tag == "n"
    except (ValueError, AssertionError):
        raise DataError(f"{source}: bad size line {lines[1]!r}", row=2) from None
    if not lines[2].startswith("flags "):
        raise DataError(f"{source}: bad flags line", row=3)
    flag_str = lines[2][len("flags "):]
    flags = {}
    if flag_str != "-":
        for item in flag_str.split(";"):
            k, _, v = item.partition("=")
            flags[k] = v
    if not lines[3].startswith("ids "):
        raise DataError(f"{source}: bad ids line", row=4)
    ids = json.loads(lines[3][4:])
    body = lines[4:]
    m = n * (n - 1) // 2
    if len(body) != m or len(ids) != n:
        raise DataError(f"{source}: expected {m} values and {n} ids, found {len(body)} and {len(ids)}")
    vals = np.empty(m)
    for t, s in enumerate(body):
        try:
            vals[t] = float(s)
        except ValueError:
            raise DataError(f"{source}: cannot parse {s!r}", row=t + 5) from None
    return DissimilarityMatrix(n, vals), ids, flags


def write_dist(path, D, ids=None, flags=None):
    Path(path).write_text(format_dist(D, ids, flags))


def read_dist(path):
    return parse_dist(Path(path).read_text(), source=str(path))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def read_labels(path) -> np.ndarray:
    """Object labels from a groups JSON (``grps``) or a truth JSON (``object_labels``)."""
    d = read_json(path)
    for key in ("grps", "object_labels", "labels"):
        if key in d:
            return np.asarray(d[key], dtype=int)
    raise DataError(f"{path}: no 'grps' or 'object_labels' entry")


def read_weights_csv(path, col_ids) -> np.ndarray:
    """External attribute weights: CSV with columns ``attribute,weight``."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0][:2]] != ["attribute", "weight"]:
        raise DataError(f"{path}: expected header 'attribute,weight'", row=1)
    pos = {c: k for k, c in enumerate(col_ids)}
    w = np.zeros(len(col_ids))
    for r, row in enumerate(rows[1:]):
        if len(row) < 2:
            raise DataError(f"{path}: short row", row=r + 2)
        name = row[0].strip()
        if name not in pos:
            raise DataError(f"{path}: unknown attribute {name!r}", row=r + 2, col="attribute")
        try:
            w[pos[name]] = float(row[1])
        except ValueError:
            raise DataError(f"{path}: cannot parse weight {row[1]!r}", row=r + 2, col="weight") from None
    return w
