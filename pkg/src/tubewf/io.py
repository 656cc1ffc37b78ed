"""Artifact files: versioned CSV tables, grid-signal serialization and plain PGM images.

Every writer goes through a temporary file in the target directory followed
by an atomic rename, and formats numbers with ``repr`` precision so that
identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io as _io
import os
import struct
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .signals import GridError, GridSignal

__all__ = [
    "CSV_TAG",
    "SchemaError",
    "fmt",
    "atomic_write",
    "write_table",
    "read_table",
    "write_grid_csv",
    "read_grid_csv",
    "write_grid_binary",
    "read_grid_binary",
    "write_pgm",
    "read_pgm",
    "log_scale_image",
]

CSV_TAG = "# tubewf-csv v1"
_BIN_MAGIC = 0x54574246  # "TWBF"
_DOMAINS = ("space", "frequency")


class SchemaError(ValueError):
    """File does not follow the expected layout."""


def fmt(v: Any) -> str:
    """Deterministic text for table cells."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (tuple, list, np.ndarray)):
        return " ".join(fmt(x) for x in np.asarray(v).ravel().tolist())
    return str(v)


def atomic_write(path: str | os.PathLike, data: bytes | str) -> Path:
    """Write ``data`` to ``path`` through a sibling temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence[Any]],
                meta: Mapping[str, Any] | None = None) -> Path:
    """CSV with the schema tag, ``# key=value`` metadata lines, a header and rows."""
    buf = _io.StringIO()
    buf.write(CSV_TAG + "\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return atomic_write(path, buf.getvalue())


def read_table(path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """(metadata, header, rows) of a file written by :func:`write_table`."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_TAG:
        raise SchemaError(f"{path}: missing {CSV_TAG!r} header line")
    meta = {}
    i = 1
    while i < len(lines) and lines[i].startswith("# "):
        k, _, v = lines[i][2:].partition("=")
        meta[k] = v
        i += 1
    body = list(csv.reader(lines[i:]))
    if not body:
        raise SchemaError(f"{path}: no column header")
    return meta, body[0], body[1:]


# ---------------------------------------------------------------------------
# Grid signals


def write_grid_csv(path, g: GridSignal) -> Path:
    """Header ``dim,n,spacing,origin`` (plus domain) then one ``re,im`` row per sample (C order)."""
    flat = g.samples.ravel()
    buf = _io.StringIO()
    buf.write(CSV_TAG + "\n")
    buf.write(f"# domain={g.domain}\n")
    buf.write("dim,n,spacing,origin\n")
    buf.write(f"{g.dim},{g.n},{fmt(g.spacing)},{fmt(g.origin)}\n")
    buf.write("re,im\n")
    for z in flat:
        buf.write(f"{fmt(z.real)},{fmt(z.imag)}\n")
    return atomic_write(path, buf.getvalue())


def read_grid_csv(path) -> GridSignal:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_TAG:
        raise SchemaError(f"{path}: missing {CSV_TAG!r} header line")
    i, domain = 1, "space"
    while lines[i].startswith("# "):
        k, _, v = lines[i][2:].partition("=")
        if k == "domain":
            domain = v
        i += 1
    if lines[i] != "dim,n,spacing,origin" or lines[i + 2] != "re,im":
        raise SchemaError(f"{path}: unexpected grid header")
    dim_s, n_s, sp_s, org_s = lines[i + 1].split(",")
    dim, n = int(dim_s), int(n_s)
    origin = np.array([float(v) for v in org_s.split()])
    data = np.array([[float(v) for v in row.split(",")] for row in lines[i + 3:]])
    if data.shape != (n**dim, 2):
        raise SchemaError(f"{path}: expected {n**dim} samples, found {len(data)}")
    samples = (data[:, 0] + 1j * data[:, 1]).reshape((n,) * dim)
    return GridSignal(dim, samples, float(sp_s), origin, domain)


def write_grid_binary(path, g: GridSignal) -> Path:
    """Eight little-endian float64 header values, then complex64 samples (C order).

    Header: magic, version, dim, n, spacing, origin_0, origin_1 (0 in d = 1), domain code.
    """
    org = list(g.origin) + [0.0] * (2 - g.dim)
    head = struct.pack("<8d", _BIN_MAGIC, 1, g.dim, g.n, g.spacing, org[0], org[1], _DOMAINS.index(g.domain))
    body = np.ascontiguousarray(g.samples.ravel(), dtype="<c8").tobytes()
    return atomic_write(path, head + body)


def read_grid_binary(path) -> GridSignal:
    raw = Path(path).read_bytes()
    if len(raw) < 64:
        raise SchemaError(f"{path}: truncated header")
    magic, version, dim, n, spacing, o0, o1, dom = struct.unpack("<8d", raw[:64])
    if int(magic) != _BIN_MAGIC or int(version) != 1:
        raise SchemaError(f"{path}: not a tubewf grid file")
    dim, n = int(dim), int(n)
    vals = np.frombuffer(raw[64:], dtype="<c8")
    if vals.size != n**dim:
        raise SchemaError(f"{path}: expected {n**dim} samples, found {vals.size}")
    origin = np.array([o0, o1][:dim])
    return GridSignal(dim, vals.astype(complex).reshape((n,) * dim), spacing, origin, _DOMAINS[int(dom)])


# ---------------------------------------------------------------------------
# Images


def log_scale_image(values: np.ndarray, floor: float = 1e-300) -> tuple[np.ndarray, float, float]:
    """Map |values| to 0..255 on a log scale; returns (pixels, log10 min, log10 max)."""
    a = np.log10(np.maximum(np.abs(np.asarray(values)), floor))
    finite = a[np.isfinite(a)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 0.0)
    if hi > lo:
        px = np.rint(255 * (a - lo) / (hi - lo))
    else:
        px = np.zeros_like(a)
    return np.clip(px, 0, 255).astype(np.uint8), lo, hi


def write_pgm(path, pixels: np.ndarray, comment: str | None = None) -> Path:
    """Plain (P2) 8-bit PGM; rows of the array are image rows."""
    px = np.asarray(pixels)
    if px.ndim != 2 or px.dtype != np.uint8:
        raise GridError("PGM needs a 2-d uint8 array")
    h, w = px.shape
    lines = ["P2"]
    if comment:
        lines.append("# " + comment.replace("\n", " "))
    lines.append(f"{w} {h}")
    lines.append("255")
    lines.extend(" ".join(str(int(v)) for v in row) for row in px)
    return atomic_write(path, "\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise SchemaError(f"{path}: not a plain PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if vals.size != w * h or maxval != 255:
        raise SchemaError(f"{path}: bad PGM payload")
    return vals.reshape(h, w).astype(np.uint8)
