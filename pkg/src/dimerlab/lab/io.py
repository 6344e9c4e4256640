"""CSV and JSON emission and ingestion."""

import csv
import json
import math
import os
from dataclasses import dataclass

from dimerlab.records import Stat, SweepRecord, columns_for, record_row

REFERENCE_HEADER = ("T_K", "ergotropy_norm")
REFERENCE_MAX = 1.05


class OutputError(OSError):
    pass


def _format(x) -> str:
    # repr gives the shortest string that round-trips, always with a '.' decimal
    return repr(float(x))


def write_sweep_csv(path: str, records) -> list:
    columns = columns_for(records)
    _ensure_parent(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for rec in records:
                w.writerow([_format(v) for v in record_row(rec, columns)])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return columns


def read_sweep_csv(path: str) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "T_K":
        raise ValueError(f"{path}: first column must be T_K")
    header = rows[0]
    records = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
        values = dict(zip(header, (float(v) for v in row)))
        stats = {}
        for col in header:
            if col.endswith("_mean") and col != "n_evals_mean":
                name = col[:-5]
                stats[name] = Stat(values[col], values.get(f"{name}_std", 0.0))
        records.append(SweepRecord(values["T_K"], stats, values.get("n_evals_mean", math.nan)))
    return records


@dataclass(frozen=True)
class ReferenceCurve:
    T: tuple
    ergotropy_normalized: tuple
    source: str = "unknown"

    def __post_init__(self):
        T = tuple(float(t) for t in self.T)
        e = tuple(float(v) for v in self.ergotropy_normalized)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "ergotropy_normalized", e)
        if len(T) != len(e) or not T:
            raise ValueError("reference curve needs equal, non-zero numbers of T and value entries")
        if any(b <= a for a, b in zip(T, T[1:])):
            raise ValueError("reference temperatures must be strictly ascending")
        bad = [v for v in e if not (0.0 <= v <= REFERENCE_MAX)]
        if bad:
            raise ValueError(f"reference values must lie in [0, {REFERENCE_MAX}], got {bad[0]}")

    def __len__(self):
        return len(self.T)


def read_reference_csv(path: str, source: str = None) -> ReferenceCurve:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0][:2]) != REFERENCE_HEADER:
        raise ValueError(f"{path}: header must start with {','.join(REFERENCE_HEADER)}")
    T, e = [], []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            T.append(float(row[0]))
            e.append(float(row[1]))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{line_no}: {exc}") from exc
    return ReferenceCurve(T, e, source or os.path.basename(path))


def write_reference_csv(path: str, curve: ReferenceCurve) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REFERENCE_HEADER)
        for t, v in zip(curve.T, curve.ergotropy_normalized):
            w.writerow([_format(t), _format(v)])


def write_json(path: str, doc) -> None:
    _ensure_parent(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(parent, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create directory {parent}: {exc}") from exc
