"""File formats: dendrogram JSON, Newick, headered CSV, canonical JSON.

CSV files are comma-separated with a required header row.  Lines starting
with ``#`` are metadata comments; readers skip them.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .core import Dendrogram, Node
from .errors import InputFormatError


# -- canonical JSON --------------------------------------------------------

def _encode(obj) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        return text if ("." in text or "e" in text) else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Sorted keys, no whitespace, floats at 17 significant digits."""
    return _encode(obj) + "\n"


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: invalid JSON ({exc})") from exc


# -- dendrogram JSON -------------------------------------------------------

def dendrogram_to_dict(h: Dendrogram) -> dict:
    return {
        "terminals": list(h.terminals),
        "nodes": [
            {"rank": nd.rank, "height": float(nd.height),
             "left": h.ref_name(nd.left), "right": h.ref_name(nd.right)}
            for nd in h.nodes
        ],
    }


def _parse_ref(ref, n, where):
    if not isinstance(ref, str) or ":" not in ref:
        raise InputFormatError(f"{where}: reference {ref!r} is not 't:<index>' or 'n:<rank>'")
    kind, _, num = ref.partition(":")
    try:
        k = int(num)
    except ValueError:
        raise InputFormatError(f"{where}: reference {ref!r} has a non-integer index") from None
    if kind == "t":
        if not 0 <= k < n:
            raise InputFormatError(f"{where}: terminal index {k} out of range")
        return k
    if kind == "n":
        if not 1 <= k < n:
            raise InputFormatError(f"{where}: node rank {k} out of range")
        return n + k - 1
    raise InputFormatError(f"{where}: unknown reference kind {kind!r}")


def dendrogram_from_dict(doc: dict) -> Dendrogram:
    try:
        terminals = doc["terminals"]
        raw_nodes = doc["nodes"]
    except (KeyError, TypeError):
        raise InputFormatError("dendrogram JSON needs 'terminals' and 'nodes'") from None
    n = len(terminals)
    nodes = []
    for i, nd in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        try:
            rank, height = int(nd["rank"]), float(nd["height"])
            left, right = nd["left"], nd["right"]
        except (KeyError, TypeError, ValueError):
            raise InputFormatError(f"{where}: needs integer 'rank', numeric 'height', 'left', 'right'") from None
        nodes.append(Node(rank, height, _parse_ref(left, n, where), _parse_ref(right, n, where)))
    meta = doc.get("metadata") or {}
    allow = {"inversions": bool(meta.get("inversions", False))} if isinstance(meta, dict) else {}
    return Dendrogram(terminals, nodes, allow)


def write_dendrogram(h: Dendrogram, path, metadata: dict | None = None) -> None:
    doc = dendrogram_to_dict(h)
    meta = dict(metadata or {})
    if h.metadata.get("inversions"):
        meta["inversions"] = True
    if meta:
        doc["metadata"] = meta
    Path(path).write_text(dumps_canonical(doc), encoding="utf-8")


def read_dendrogram(path) -> Dendrogram:
    return dendrogram_from_dict(load_json(path))


# -- Newick ----------------------------------------------------------------

def _newick_label(s: str) -> str:
    if any(c in s for c in " ():;,[]'\t"):
        return "'" + s.replace("'", "''") + "'"
    return s


def to_newick(h: Dendrogram, precision: int = 10) -> str:
    """Newick string; branch lengths are parent minus child heights.

    Internal nodes are labelled ``n<rank>`` so ranks survive the export.
    """
    def fmt(x):
        return f"{x:.{precision}g}"

    def rec(ref, parent_height):
        length = parent_height - h.height_of(ref)
        if h.is_terminal(ref):
            return f"{_newick_label(h.terminals[ref])}:{fmt(length)}"
        left, right = h.children(ref)
        hh = h.height_of(ref)
        rank = ref - h.n_terminals + 1
        return f"({rec(left, hh)},{rec(right, hh)})n{rank}:{fmt(length)}"

    if h.n_terminals == 1:
        return f"{_newick_label(h.terminals[0])};"
    left, right = h.children(h.root)
    hr = h.height_of(h.root)
    return f"({rec(left, hr)},{rec(right, hr)})n{h.n_terminals - 1};"


# -- CSV -------------------------------------------------------------------

def _rows(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{path}: not UTF-8 ({exc})") from exc
    return list(csv.reader(lines))


def _float(cell, path, r, c, header):
    try:
        return float(cell)
    except ValueError:
        col = header[c] if c < len(header) else c
        raise InputFormatError(f"{path}: row {r}, column {col!r}: {cell!r} is not a number") from None


def read_table(path, id_column: bool = False):
    """Read a numeric CSV table.

    Returns ``(row_ids, column_names, values)``.  Without ``id_column`` the
    row ids are ``"0", "1", ...``.
    """
    rows = _rows(path)
    if not rows:
        raise InputFormatError(f"{path}: empty file (a header row is required)")
    header, body = rows[0], rows[1:]
    if not body:
        raise InputFormatError(f"{path}: no data rows")
    width = len(header)
    ids, values = [], []
    for r, row in enumerate(body, start=1):
        if len(row) != width:
            raise InputFormatError(f"{path}: row {r} has {len(row)} fields, header has {width}")
        if id_column:
            ids.append(row[0])
            cells = row[1:]
        else:
            ids.append(str(r - 1))
            cells = row
        offset = 1 if id_column else 0
        values.append([_float(v, path, r, c + offset, header) for c, v in enumerate(cells)])
    names = header[1:] if id_column else header
    if not names:
        raise InputFormatError(f"{path}: no value columns")
    return ids, list(names), np.array(values, dtype=float)


def read_matrix(path):
    """Read a square labelled matrix written by :func:`write_matrix`."""
    ids, names, values = read_table(path, id_column=True)
    if values.shape[0] != values.shape[1]:
        raise InputFormatError(f"{path}: matrix is {values.shape[0]}x{values.shape[1]}, not square")
    return ids, values


def read_signal(path):
    """One-column (or first numeric column) signal CSV."""
    _, _, values = read_table(path)
    return values[:, 0]


def format_float(x) -> str:
    return format(float(x), ".17g")


def metadata_lines(metadata: dict | None) -> str:
    if not metadata:
        return ""
    out = []
    for key in sorted(metadata):
        out.append(f"# {key}: {_encode(metadata[key])}\n")
    return "".join(out)


def format_csv(header, rows, metadata: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(metadata_lines(metadata))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, metadata: dict | None = None) -> None:
    Path(path).write_text(format_csv(header, rows, metadata), encoding="utf-8")


def write_matrix(path, labels, m, metadata: dict | None = None) -> None:
    m = np.asarray(m, dtype=float)
    rows = [[lab, *map(float, row)] for lab, row in zip(labels, m)]
    write_csv(path, ["", *labels], rows, metadata)

