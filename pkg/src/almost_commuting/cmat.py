"""Plain-text matrix files and CSV output.

CMAT v1 layout::

    CMAT <n>
    <n whitespace-separated tokens like 0.5-0.25j>   (n lines)

Numbers are written with 17 significant digits, so a write/read round trip
reproduces every finite double exactly.
"""

import csv
import io

import numpy as np

from .errors import DimensionMismatch, NonFinite, ParseError


def format_entry(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}j"


def dumps_cmat(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"CMAT needs a square matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFinite("refusing to write non-finite entries")
    n = M.shape[0]
    lines = [f"CMAT {n}"]
    lines += [" ".join(format_entry(z) for z in row) for row in M]
    return "\n".join(lines) + "\n"


def write_cmat(path, M):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_cmat(M))


def _parse_token(tok, lineno, path):
    try:
        z = complex(tok)
    except ValueError:
        raise ParseError(f"bad entry {tok!r}", lineno, path) from None
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ParseError(f"non-finite entry {tok!r}", lineno, path)
    return z


def loads_cmat(text, path=None):
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", 1, path)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "CMAT":
        raise ParseError("expected header 'CMAT <n>'", 1, path)
    try:
        n = int(head[1])
    except ValueError:
        raise ParseError(f"bad dimension {head[1]!r}", 1, path) from None
    if n < 0:
        raise ParseError("negative dimension", 1, path)
    body = [(k + 2, ln) for k, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != n:
        raise DimensionMismatch(f"{path or 'input'}: header says {n} rows, found {len(body)}")
    M = np.empty((n, n), dtype=complex)
    for r, (lineno, ln) in enumerate(body):
        toks = ln.split()
        if len(toks) != n:
            raise DimensionMismatch(
                f"{path or 'input'}:{lineno}: expected {n} entries, found {len(toks)}")
        M[r] = [_parse_token(t, lineno, path) for t in toks]
    return M


def read_cmat(path):
    with open(path, encoding="ascii") as fh:
        return loads_cmat(fh.read(), path=str(path))


# -- CSV --------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def dumps_csv(rows, columns, header=None):
    """Comment header (``# key: value``), a column row, then one line per row."""
    buf = io.StringIO()
    for key, val in (header or {}).items():
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def emit_csv(rows, columns, path, header=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_csv(rows, columns, header))
