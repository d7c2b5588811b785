"""Dense matrix files: Matrix Market ``array real general`` and plain CSV.

Values are written with 17 significant digits, so a save/load round trip
reproduces every float64 exactly.
"""

import os

import numpy as np

from .errors import InvalidInputError, ParseError

MM_HEADER = "%%MatrixMarket matrix array real general"
FORMATS = ("matrix-market", "csv")


def infer_format(path):
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".mtx", ".mm"):
        return "matrix-market"
    if ext in (".csv", ".txt"):
        return "csv"
    raise InvalidInputError(f"cannot infer matrix format from {path!r}; use .mtx or .csv")


def _float(token, lineno, path):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"non-numeric token {token!r}", lineno, path) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", lineno, path)
    return value


def _load_mm(lines, path):
    if not lines:
        raise ParseError("empty file", 1, path)
    banner = lines[0].split()
    if (len(banner) != 5 or banner[0] != "%%MatrixMarket"
            or [b.lower() for b in banner[1:]] != ["matrix", "array", "real", "general"]):
        raise ParseError("expected '%s' header" % MM_HEADER, 1, path)
    body = [(n, ln.strip()) for n, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", len(lines), path)
    lineno, size = body[0]
    parts = size.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ParseError(f"bad size line {size!r}", lineno, path)
    rows, cols = int(parts[0]), int(parts[1])
    entries = body[1:]
    if len(entries) != rows * cols:
        where = entries[rows * cols][0] if len(entries) > rows * cols else lineno
        raise ParseError(
            f"size line declares {rows}x{cols} = {rows * cols} entries, "
            f"found {len(entries)}", where, path)
    values = []
    for n, text in entries:
        toks = text.split()
        if len(toks) != 1:
            raise ParseError(f"expected one value per line, got {len(toks)}", n, path)
        values.append(_float(toks[0], n, path))
    # array format stores entries column by column
    return np.array(values, dtype=np.float64).reshape((cols, rows)).T.copy()


def _load_csv(lines, path):
    rows = []
    width = None
    for n, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        vals = [_float(tok.strip(), n, path) for tok in text.split(",")]
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise ParseError(f"expected {width} columns, got {len(vals)}", n, path)
        rows.append(vals)
    if not rows:
        raise ParseError("no data rows", 1, path)
    return np.array(rows, dtype=np.float64)


def load_matrix(path, format=None):
    format = format or infer_format(path)
    if format not in FORMATS:
        raise InvalidInputError(f"unknown matrix format {format!r}")
    with open(path) as fh:
        lines = fh.read().splitlines()
    if format == "matrix-market":
        return _load_mm(lines, path)
    return _load_csv(lines, path)


def save_matrix(M, path, format=None):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise InvalidInputError("save_matrix expects a 2-D array")
    format = format or infer_format(path)
    if format not in FORMATS:
        raise InvalidInputError(f"unknown matrix format {format!r}")
    with open(path, "w") as fh:
        if format == "matrix-market":
            fh.write(MM_HEADER + "\n")
            fh.write(f"{M.shape[0]} {M.shape[1]}\n")
            for v in M.T.ravel():
                fh.write("%.17g\n" % v)
        else:
            for row in M:
                fh.write(",".join("%.17g" % v for v in row) + "\n")
