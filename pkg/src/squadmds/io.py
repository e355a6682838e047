"""Matrix files, structured key:value records and dataset fingerprints.

Two matrix formats are understood:

``delimited``
    One point per line, fields separated by commas, tabs or runs of blanks
    (detected from the first data line unless given). Blank lines and lines
    starting with ``#`` are skipped. Values are written with 17 significant
    digits, which round-trips every float64 exactly.
``raw-f64``
    A 16-byte header holding n and m as unsigned 64-bit little-endian
    integers, followed by the n * m values as little-endian float64 in row
    order.

Records (manifests, telemetry, error reports, summaries) are single lines of
tab-separated ``key:value`` fields whose values are JSON literals.
"""

import hashlib
import json
import struct

import numpy as np

from .core import validate_dataset
from .errors import IoError, ParseError, RaggedRows

FORMATS = ("delimited", "raw-f64")
RAW_HEADER = struct.Struct("<QQ")


def _open(path, mode):
    try:
        return open(path, mode) if "b" in mode else open(path, mode, newline="")
    except OSError as exc:
        raise IoError(f"cannot open {path}: {exc.strerror or exc}") from exc


def _split(line, delimiter):
    if delimiter is None:
        return line.split()
    return [field.strip() for field in line.split(delimiter)]


def _sniff(line):
    for candidate in (",", "\t", ";"):
        if candidate in line:
            return candidate
    return None


def read_delimited(path, delimiter=None, skip_header=False, label_column=None):
    """Parse a delimited text matrix.

    Parameters
    ----------
    delimiter : str, optional
        Field separator; detected from the first data line when omitted
        (comma, tab, semicolon, else whitespace).
    skip_header : bool
        Ignore the first non-comment line.
    label_column : int, optional
        Index of a column holding labels rather than features; negative
        indices count from the end.

    Returns
    -------
    values : ndarray, shape (n, m)
    labels : tuple of str or None

    Raises
    ------
    ParseError
        With 1-based line and column of the first non-numeric field.
    RaggedRows
        With the line number of the first row whose width differs.
    """
    rows = []
    labels = [] if label_column is not None else None
    width = None
    header_pending = skip_header
    with _open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header_pending:
                header_pending = False
                continue
            if delimiter is None and width is None:
                delimiter = _sniff(line)
            fields = _split(line, delimiter)
            if width is None:
                width = len(fields)
                if label_column is not None and not -width <= label_column < width:
                    raise ParseError(lineno, label_column + 1, f"no label column {label_column} in {width} fields")
                label_at = None if label_column is None else label_column % width
            elif len(fields) != width:
                raise RaggedRows(lineno, width, len(fields))
            row = []
            for col, field in enumerate(fields):
                if col == label_at:
                    labels.append(field)
                    continue
                try:
                    row.append(float(field))
                except ValueError:
                    raise ParseError(lineno, col + 1, f"cannot parse {field!r} as a number") from None
            rows.append(row)
    if not rows:
        return np.empty((0, 0)), None
    return np.array(rows, dtype=np.float64), None if labels is None else tuple(labels)


def read_raw(path):
    """Read a ``raw-f64`` matrix; the file size must match its header exactly."""
    with _open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < RAW_HEADER.size:
        raise ParseError(1, 1, f"raw file shorter than its {RAW_HEADER.size}-byte header")
    n, m = RAW_HEADER.unpack_from(blob)
    expected = RAW_HEADER.size + 8 * n * m
    if len(blob) != expected:
        raise ParseError(1, 1, f"header promises {n} x {m} values ({expected} bytes), file has {len(blob)} bytes")
    return np.frombuffer(blob, dtype="<f8", offset=RAW_HEADER.size).reshape(n, m).astype(np.float64)


def load_matrix(path, format="delimited", delimiter=None, skip_header=False, label_column=None):
    """Load a data file as a validated :class:`~squadmds.core.Dataset`.

    ``delimiter``, ``skip_header`` and ``label_column`` apply to the
    delimited format only; see :func:`read_delimited`.
    """
    if format == "delimited":
        values, labels = read_delimited(path, delimiter, skip_header, label_column)
    elif format == "raw-f64":
        values, labels = read_raw(path), None
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
    return validate_dataset(values, labels)


def format_value(x):
    """17 significant digits: always reads back as the same float64."""
    return f"{x:.17g}"


def write_matrix(path, values, format="delimited", labels=None, delimiter=","):
    """Write a matrix, optionally followed by a label column (delimited only)."""
    values = np.asarray(getattr(values, "points", values), dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {values.shape}")
    if format == "raw-f64":
        if labels is not None:
            raise ValueError("raw-f64 files cannot carry labels")
        with _open(path, "wb") as fh:
            fh.write(RAW_HEADER.pack(*values.shape))
            fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
        return
    if format != "delimited":
        raise ValueError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
    if labels is not None and len(labels) != values.shape[0]:
        raise ValueError(f"{len(labels)} labels for {values.shape[0]} rows")
    with _open(path, "w") as fh:
        for i, row in enumerate(values):
            fields = [format_value(x) for x in row]
            if labels is not None:
                fields.append(str(labels[i]))
            fh.write(delimiter.join(fields) + "\n")


def format_record(record):
    """One line of tab-separated ``key:json`` fields, in insertion order."""
    parts = []
    for key, value in record.items():
        if isinstance(value, np.generic):
            value = value.item()
        parts.append(f"{key}:{json.dumps(value, sort_keys=True, separators=(',', ':'))}")
    return "\t".join(parts)


def parse_record(line):
    """Inverse of :func:`format_record`."""
    record = {}
    for part in line.rstrip("\n").split("\t"):
        key, sep, value = part.partition(":")
        if not sep:
            raise ParseError(1, 1, f"record field {part!r} lacks a ':'")
        try:
            record[key] = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ParseError(1, exc.colno, f"bad value for {key!r}") from None
    return record


def read_records(path):
    with _open(path, "r") as fh:
        return [parse_record(line) for line in fh if line.strip()]


def fingerprint(dataset):
    """SHA-256 over the shape and little-endian bytes of the data matrix."""
    points = np.ascontiguousarray(getattr(dataset, "points", dataset), dtype="<f8")
    digest = hashlib.sha256()
    digest.update(RAW_HEADER.pack(*points.shape))
    digest.update(points.tobytes())
    return "sha256:" + digest.hexdigest()
