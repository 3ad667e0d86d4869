"""CSV input, and JSON reports plus TSV tables as output."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .simgen import LabeledDataset

SCHEMA_VERSION = 1


class DataFormatError(ValueError):
    """Malformed input file; ``row`` and ``col`` are 1-based when known."""

    def __init__(self, msg, row=None, col=None):
        super().__init__(msg)
        self.row = row
        self.col = col


def _read_rows(path):
    with open(path, newline="") as fh:
        return [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]


def load_csv(path, has_header=False, truth_path=None):
    """Read a numeric matrix (rows are samples) and an optional truth column.

    Row numbers in errors count data rows from 1, after any header.
    """
    rows = _read_rows(path)
    header = None
    if has_header and rows:
        header, rows = rows[0], rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    p = len(rows[0])
    X = np.empty((len(rows), p))
    for i, row in enumerate(rows, start=1):
        if len(row) != p:
            raise DataFormatError(f"{path}: row {i} has {len(row)} fields, expected {p}", row=i)
        for j, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(f"{path}: non-numeric cell {cell!r} at ({i},{j})",
                                      row=i, col=j) from None
            if not math.isfinite(v):
                raise DataFormatError(f"{path}: non-finite value at ({i},{j})", row=i, col=j)
            X[i - 1, j - 1] = v
    if X.shape[0] < 2:
        raise DataFormatError(f"{path}: need at least 2 samples")
    truth = None
    if truth_path is not None:
        truth = load_truth(truth_path)
        if truth.shape[0] != X.shape[0]:
            raise DataFormatError(f"truth has {truth.shape[0]} labels but data has "
                                  f"{X.shape[0]} rows")
    params = {"path": str(path)}
    if header is not None:
        params["columns"] = header
    return LabeledDataset(X, truth, "csv", 0, None, params)


def load_truth(path):
    rows = _read_rows(path)
    out = []
    for i, row in enumerate(rows, start=1):
        if len(row) != 1:
            raise DataFormatError(f"{path}: truth row {i} must have one field", row=i)
        try:
            out.append(int(row[0]))
        except ValueError:
            raise DataFormatError(f"{path}: non-integer label {row[0]!r} at row {i}",
                                  row=i, col=1) from None
    return np.array(out, dtype=np.intp)


def write_csv(path, X):
    """Write with shortest round-trip float formatting."""
    X = np.atleast_2d(np.asarray(X))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def write_truth(path, labels):
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in labels)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def write_report(path, kind, body):
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **to_jsonable(body)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
    return doc


def read_report(path):
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DataFormatError(f"{path}: unsupported schema version {doc.get('schema_version')!r}")
    return doc


def _cell(v):
    if v is None:
        return "NA"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_tsv(path, rows, columns=None):
    """``rows`` is a list of dicts; missing or None values are written as ``NA``."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w") as fh:
        fh.write("\t".join(columns) + "\n")
        for r in rows:
            fh.write("\t".join(_cell(r.get(c)) for c in columns) + "\n")


def read_tsv(path):
    lines = Path(path).read_text().splitlines()
    cols = lines[0].split("\t")
    return [dict(zip(cols, ln.split("\t"))) for ln in lines[1:]]
