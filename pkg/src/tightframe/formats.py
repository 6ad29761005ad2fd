"""Plain-text matrix and frame files, JSON reports, atomic writes.

Matrix file::

    n
    a11 a12 ... a1n
    ...
    an1 an2 ... ann

Frame file::

    n N
    u11 ... u1n
    ...
    uN1 ... uNn

Reals are written in shortest round-trip form (``repr``), so a write
followed by a read reproduces every value bit for bit.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .frames import UnitVectorSystem
from .linalg import sym_matrix


class FormatError(ValueError):
    """Malformed input file, with 1-based line and column of the problem."""

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where = f"{source}:{where}: " if source else f"{where}: "
        super().__init__(where + message)


def format_real(x):
    x = float(x)
    if x == 0.0:
        return "0.0"  # no negative zero in files
    return repr(x)


def _tokens(line):
    # (column, text) pairs, columns 1-based
    out = []
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((i + 1, line[i:j]))
        i = j
    return out


def _split_lines(text):
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def _parse_int(tok, lineno, source, what):
    col, s = tok
    try:
        value = int(s)
    except ValueError:
        raise FormatError(f"expected integer {what}, got {s!r}", lineno, col, source) from None
    if value < 1:
        raise FormatError(f"{what} must be positive, got {value}", lineno, col, source)
    return value


def _parse_rows(lines, first, count, width, source):
    rows = np.empty((count, width))
    for r in range(count):
        lineno = first + r + 1
        if first + r >= len(lines):
            raise FormatError(f"expected {count} data rows, found {r}", lineno, None, source)
        toks = _tokens(lines[first + r])
        if len(toks) != width:
            col = toks[width][0] if len(toks) > width else len(lines[first + r]) + 1
            raise FormatError(f"expected {width} values, found {len(toks)}", lineno, col, source)
        for c, (col, s) in enumerate(toks):
            try:
                value = float(s)
            except ValueError:
                raise FormatError(f"not a real number: {s!r}", lineno, col, source) from None
            if not np.isfinite(value):
                raise FormatError(f"non-finite value {s!r}", lineno, col, source)
            rows[r, c] = value
    if len(lines) > first + count:
        raise FormatError("unexpected extra data after last row", first + count + 1, 1, source)
    return rows


def parse_matrix(text, source=None):
    lines = _split_lines(text)
    if not lines:
        raise FormatError("empty matrix file", 1, 1, source)
    head = _tokens(lines[0])
    if len(head) != 1:
        raise FormatError("first line must hold the single integer n", 1, 1, source)
    n = _parse_int(head[0], 1, source, "dimension n")
    rows = _parse_rows(lines, 1, n, n, source)
    asym = float(np.max(np.abs(rows - rows.T)))
    if asym > 1e-9:
        raise FormatError(f"matrix is not symmetric (max |a_ij - a_ji| = {asym:.3g})", None, None, source)
    return sym_matrix(rows)


def parse_rows(text, source=None):
    """Parse a frame-shaped file into an ``(N, n)`` array without normalizing."""
    lines = _split_lines(text)
    if not lines:
        raise FormatError("empty frame file", 1, 1, source)
    head = _tokens(lines[0])
    if len(head) != 2:
        raise FormatError("first line must hold two integers 'n N'", 1, 1, source)
    n = _parse_int(head[0], 1, source, "dimension n")
    count = _parse_int(head[1], 1, source, "count N")
    return _parse_rows(lines, 1, count, n, source)


def parse_frame(text, source=None):
    rows = parse_rows(text, source)
    norms = np.linalg.norm(rows, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-6)
    if bad.size:
        i = int(bad[0])
        raise FormatError(f"row is not unit norm (norm {norms[i]!r})", i + 2, 1, source)
    return UnitVectorSystem.from_rows(rows)


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), source=str(path))


def read_frame(path):
    with open(path, encoding="utf-8") as fh:
        return parse_frame(fh.read(), source=str(path))


def format_rows(rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    count, n = rows.shape
    out = [f"{n} {count}"]
    out.extend(" ".join(format_real(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def format_matrix(m):
    m = np.asarray(m, dtype=float)
    out = [str(m.shape[0])]
    out.extend(" ".join(format_real(v) for v in row) for row in m)
    return "\n".join(out) + "\n"


def format_report(report):
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_frame(path, rows):
    if isinstance(rows, UnitVectorSystem):
        rows = rows.vectors
    atomic_write(path, format_rows(rows))


def write_matrix(path, m):
    atomic_write(path, format_matrix(m))
