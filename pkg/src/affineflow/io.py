"""Serialization: support functions (binary and JSON), trajectory CSV, monitor JSON."""

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .body import SupportFunction
from .flow import CSV_COLUMNS, FunctionalRecord

FORMAT_VERSION = 1
MAGIC = b"AFSF"
_HEADER = struct.Struct("<4sHI")


def support_to_bytes(support):
    support = getattr(support, "support", support)
    return _HEADER.pack(MAGIC, FORMAT_VERSION, support.n) + support.samples.astype("<f8").tobytes()


def support_from_bytes(data):
    magic, version, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError("not a support-function file")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {version}")
    body = data[_HEADER.size:]
    if len(body) != 8 * n:
        raise ValueError(f"expected {n} samples, found {len(body) / 8:g}")
    return SupportFunction(np.frombuffer(body, dtype="<f8").astype(float))


def support_to_json(support):
    support = getattr(support, "support", support)
    # json writes floats with repr, which round-trips exactly
    return json.dumps({"format_version": FORMAT_VERSION, "N": support.n, "samples": support.samples.tolist()})


def support_from_json(text):
    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    samples = doc["samples"]
    if len(samples) != doc["N"]:
        raise ValueError(f"header says N={doc['N']} but {len(samples)} samples given")
    return SupportFunction(np.array(samples, dtype=float))


def save_support(path, support):
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(support_to_json(support))
    else:
        path.write_bytes(support_to_bytes(support))


def load_support(path):
    path = Path(path)
    if path.suffix == ".json":
        return support_from_json(path.read_text())
    return support_from_bytes(path.read_bytes())


def _fmt(x):
    return format(float(x), ".17g")


def write_trajectory_csv(path, trajectory):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec in trajectory:
            w.writerow([_fmt(getattr(rec, c)) for c in CSV_COLUMNS])


def read_trajectory_csv(path):
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = tuple(next(rows))
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns {header}")
        return [FunctionalRecord(*map(float, row)) for row in rows]


def write_reports_json(path, reports, samples_ref=None):
    docs = []
    for rep in reports:
        d = rep.to_dict()
        if samples_ref is not None and d["samples_ref"] is None:
            d["samples_ref"] = samples_ref
        docs.append(d)
    Path(path).write_text(json.dumps(docs, indent=2))


def write_columns(path, header, blocks):
    """Whitespace-separated columns under a '#' header; blocks are split by two blank lines (gnuplot ``index``)."""
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for i, rows in enumerate(blocks):
            if i:
                fh.write("\n\n")
            for row in rows:
                fh.write(" ".join(_fmt(x) for x in row) + "\n")
