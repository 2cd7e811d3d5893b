"""MatrixMarket readers and writers.

Dense matrices travel in array format (column-major entries, one per
line); support sets and sparse matrices in coordinate format with 1-based
indices, pattern flavor when there are no values.  Writers emit a stable
byte layout (``%.17g``, ``\\n`` endings, entries sorted row-major) so
reruns diff clean.  Readers validate strictly and raise ParseError with
a 1-based line and column.
"""

import numpy as np

from .errors import ParseError
from .linalg import SupportSet, as_matrix

_ARRAY_HEADER = "%%MatrixMarket matrix array real general"
_COORD_REAL_HEADER = "%%MatrixMarket matrix coordinate real general"
_COORD_PATTERN_HEADER = "%%MatrixMarket matrix coordinate pattern general"


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_dense(path, m) -> None:
    """Write a dense matrix in array format (column-major, one entry/line)."""
    m = as_matrix(m, "m")
    n1, n2 = m.shape
    lines = [_ARRAY_HEADER, f"{n1} {n2}"]
    lines.extend(_fmt(v) for v in m.flatten(order="F"))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_coordinate(path, support: SupportSet, values=None) -> None:
    """Write a support set (pattern) or sparse values (real) in coordinate format.

    ``values``, when given, is a full-shape matrix sampled at the support.
    Entries are 1-based and sorted row-major.
    """
    if values is None:
        lines = [_COORD_PATTERN_HEADER,
                 f"{support.n_rows} {support.n_cols} {support.m}"]
        lines.extend(f"{i + 1} {j + 1}"
                     for i, j in zip(support.rows, support.cols))
    else:
        values = as_matrix(values, "values")
        if values.shape != (support.n_rows, support.n_cols):
            raise ValueError("values shape does not match support")
        vals = values[support.rows, support.cols]
        lines = [_COORD_REAL_HEADER,
                 f"{support.n_rows} {support.n_cols} {support.m}"]
        lines.extend(f"{i + 1} {j + 1} {_fmt(v)}"
                     for i, j, v in zip(support.rows, support.cols, vals))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().split("\n")
    except OSError as exc:
        raise ParseError(path, 0, 0, f"cannot read file: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(path, 0, 0, "file is not valid UTF-8") from exc


def _data_lines(path, raw):
    """Yield (line_number, stripped_text) skipping comments and blanks."""
    out = []
    for k, text in enumerate(raw, start=1):
        stripped = text.strip()
        if k == 1:
            out.append((k, stripped))
            continue
        if not stripped or stripped.startswith("%"):
            continue
        out.append((k, stripped))
    return out


def _token_col(text: str, index: int) -> int:
    # 1-based column of the index-th whitespace-separated token
    col = 0
    in_tok = False
    count = -1
    for pos, ch in enumerate(text):
        if ch.isspace():
            in_tok = False
        elif not in_tok:
            in_tok = True
            count += 1
            if count == index:
                col = pos + 1
                break
    return col or 1


def _parse_int(path, lineno, text, tokens, idx, what, minimum=None):
    try:
        value = int(tokens[idx])
    except ValueError:
        raise ParseError(path, lineno, _token_col(text, idx),
                         f"expected integer {what}, got {tokens[idx]!r}")
    if minimum is not None and value < minimum:
        raise ParseError(path, lineno, _token_col(text, idx),
                         f"{what} must be >= {minimum}, got {value}")
    return value


def _parse_float(path, lineno, text, tokens, idx, what):
    try:
        value = float(tokens[idx])
    except ValueError:
        raise ParseError(path, lineno, _token_col(text, idx),
                         f"expected number for {what}, got {tokens[idx]!r}")
    if not np.isfinite(value):
        raise ParseError(path, lineno, _token_col(text, idx),
                         f"{what} must be finite, got {tokens[idx]!r}")
    return value


def _header_and_dims(path, expect_kind):
    raw = _read_lines(path)
    lines = _data_lines(path, raw)
    if not lines or not lines[0][1]:
        raise ParseError(path, 1, 1, "empty file, expected a MatrixMarket header")
    lineno, header = lines[0]
    fields = header.lower().split()
    if len(fields) != 5 or fields[0] != "%%matrixmarket" or fields[1] != "matrix":
        raise ParseError(path, lineno, 1,
                         "malformed header, expected '%%MatrixMarket matrix ...'")
    kind, scalar, symmetry = fields[2], fields[3], fields[4]
    if kind != expect_kind:
        raise ParseError(path, lineno, 1,
                         f"expected {expect_kind} format, file declares {kind!r}")
    if expect_kind == "array" and scalar != "real":
        raise ParseError(path, lineno, 1,
                         f"only real matrices are supported, got {scalar!r}")
    if expect_kind == "coordinate" and scalar not in ("real", "pattern"):
        raise ParseError(path, lineno, 1,
                         f"only real or pattern coordinates are supported, got {scalar!r}")
    if symmetry != "general":
        raise ParseError(path, lineno, 1,
                         f"only general symmetry is supported, got {symmetry!r}")
    if len(lines) < 2:
        raise ParseError(path, lineno, 1, "missing size line after header")
    return lines, scalar


def read_dense(path) -> np.ndarray:
    """Read an array-format real matrix."""
    lines, _ = _header_and_dims(path, "array")
    lineno, text = lines[1]
    tokens = text.split()
    if len(tokens) != 2:
        raise ParseError(path, lineno, 1,
                         f"size line must be 'rows cols', got {len(tokens)} tokens")
    n1 = _parse_int(path, lineno, text, tokens, 0, "row count", minimum=1)
    n2 = _parse_int(path, lineno, text, tokens, 1, "column count", minimum=1)
    entries = lines[2:]
    if len(entries) != n1 * n2:
        where = entries[-1][0] if entries else lineno
        raise ParseError(path, where, 0,
                         f"expected {n1 * n2} entries, found {len(entries)}")
    values = np.empty(n1 * n2)
    for k, (eln, etext) in enumerate(entries):
        tok = etext.split()
        if len(tok) != 1:
            raise ParseError(path, eln, _token_col(etext, 1),
                             "array entries must be one value per line")
        values[k] = _parse_float(path, eln, etext, tok, 0, "matrix entry")
    return values.reshape((n1, n2), order="F")


def read_coordinate(path):
    """Read a coordinate-format file.

    Returns ``(support, values)`` where values is a full-shape matrix for
    the real flavor and None for pattern.  Duplicate coordinates are a
    parse error.
    """
    lines, scalar = _header_and_dims(path, "coordinate")
    lineno, text = lines[1]
    tokens = text.split()
    if len(tokens) != 3:
        raise ParseError(path, lineno, 1,
                         f"size line must be 'rows cols nnz', got {len(tokens)} tokens")
    n1 = _parse_int(path, lineno, text, tokens, 0, "row count", minimum=1)
    n2 = _parse_int(path, lineno, text, tokens, 1, "column count", minimum=1)
    nnz = _parse_int(path, lineno, text, tokens, 2, "entry count", minimum=0)
    entries = lines[2:]
    if len(entries) != nnz:
        where = entries[-1][0] if entries else lineno
        raise ParseError(path, where, 0,
                         f"expected {nnz} entries, found {len(entries)}")
    want = 3 if scalar == "real" else 2
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz) if scalar == "real" else None
    seen = set()
    for k, (eln, etext) in enumerate(entries):
        tok = etext.split()
        if len(tok) != want:
            raise ParseError(path, eln, 1,
                             f"expected {want} tokens per entry, got {len(tok)}")
        i = _parse_int(path, eln, etext, tok, 0, "row index", minimum=1)
        j = _parse_int(path, eln, etext, tok, 1, "column index", minimum=1)
        if i > n1:
            raise ParseError(path, eln, _token_col(etext, 0),
                             f"row index {i} exceeds {n1}")
        if j > n2:
            raise ParseError(path, eln, _token_col(etext, 1),
                             f"column index {j} exceeds {n2}")
        if (i, j) in seen:
            raise ParseError(path, eln, _token_col(etext, 0),
                             f"duplicate entry ({i}, {j})")
        seen.add((i, j))
        rows[k], cols[k] = i - 1, j - 1
        if vals is not None:
            vals[k] = _parse_float(path, eln, etext, tok, 2, "entry value")
    support = SupportSet.from_pairs(n1, n2, np.column_stack([rows, cols]))
    if vals is None:
        return support, None
    full = np.zeros((n1, n2))
    full[rows, cols] = vals
    return support, full
