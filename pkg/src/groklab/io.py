"""File formats: atomic writes, the GLAB matrix bundle, trace CSV, barcode CSV.

Bundle layout (all integers little-endian)::

    b"GLAB"  u8 version=1  u32 n_entries
    per entry:  u16 name_len  name(utf-8)  u32 rows  u32 cols  u8 is_complex  u64 offset
    payload:    float64 values, row-major; complex entries interleave re, im

Offsets are relative to the start of the payload.
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .sfm import TRACE_COLUMNS, TraceRow, TrainTrace

MAGIC = b"GLAB"
VERSION = 1


class BundleError(ValueError):
    """Malformed bundle. ``entry`` names the offending entry when known."""

    def __init__(self, message: str, entry: str | None = None):
        self.entry = entry
        super().__init__(f"{message} (entry {entry!r})" if entry is not None else message)


class TraceFormatError(ValueError):
    pass


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# -- matrix bundle ------------------------------------------------------------

class BundleEntry(NamedTuple):
    name: str
    array: np.ndarray


def _normalise_entries(entries) -> list[BundleEntry]:
    items = entries.items() if isinstance(entries, dict) else entries
    out, seen = [], set()
    for name, arr in items:
        if name in seen:
            raise BundleError("duplicate name", name)
        seen.add(name)
        a = np.asarray(arr)
        if a.ndim != 2:
            raise BundleError(f"expected a 2-D matrix, got shape {a.shape}", name)
        a = a.astype(complex if np.iscomplexobj(a) else float)
        out.append(BundleEntry(name, a))
    return out


def encode_bundle(entries) -> bytes:
    items = _normalise_entries(entries)
    header = [MAGIC, struct.pack("<BI", VERSION, len(items))]
    payload = []
    offset = 0
    for name, a in items:
        raw = name.encode("utf-8")
        is_complex = np.iscomplexobj(a)
        header.append(struct.pack("<H", len(raw)) + raw)
        header.append(struct.pack("<IIBQ", a.shape[0], a.shape[1], int(is_complex), offset))
        if is_complex:
            vals = np.empty(a.shape + (2,), dtype="<f8")
            vals[..., 0], vals[..., 1] = a.real, a.imag
        else:
            vals = a.astype("<f8")
        blob = np.ascontiguousarray(vals).tobytes()
        payload.append(blob)
        offset += len(blob)
    return b"".join(header + payload)


def decode_bundle(data: bytes) -> list[BundleEntry]:
    if len(data) < 9 or data[:4] != MAGIC:
        raise BundleError("bad magic: not a GLAB bundle")
    version, count = struct.unpack_from("<BI", data, 4)
    if version != VERSION:
        raise BundleError(f"unsupported bundle version {version}")
    pos = 9
    manifest = []
    for i in range(count):
        try:
            (nlen,) = struct.unpack_from("<H", data, pos)
            name = data[pos + 2:pos + 2 + nlen].decode("utf-8")
            if len(name.encode("utf-8")) != nlen:
                raise struct.error("short name")
            pos += 2 + nlen
            rows, cols, is_complex, offset = struct.unpack_from("<IIBQ", data, pos)
            pos += struct.calcsize("<IIBQ")
        except (struct.error, UnicodeDecodeError) as exc:
            raise BundleError(f"truncated manifest at entry #{i}: {exc}") from None
        manifest.append((name, rows, cols, bool(is_complex), offset))
    payload = data[pos:]
    out, seen, spans = [], set(), []
    for name, rows, cols, is_complex, offset in manifest:
        if name in seen:
            raise BundleError("duplicate name", name)
        seen.add(name)
        nbytes = rows * cols * 8 * (2 if is_complex else 1)
        if offset + nbytes > len(payload):
            raise BundleError(f"truncated payload: need bytes [{offset}, {offset + nbytes}) "
                              f"of {len(payload)}", name)
        spans.append((offset, offset + nbytes, name))
        vals = np.frombuffer(payload, dtype="<f8", count=nbytes // 8, offset=offset)
        if is_complex:
            arr = (vals[0::2] + 1j * vals[1::2]).reshape(rows, cols)
        else:
            arr = vals.astype(float).reshape(rows, cols)
        out.append(BundleEntry(name, arr))
    spans.sort()
    for (s0, e0, n0), (s1, e1, n1) in zip(spans, spans[1:]):
        if s1 < e0:
            raise BundleError(f"payload overlaps entry {n0!r}", n1)
    return out


def write_bundle(path: str | Path, entries) -> None:
    atomic_write_bytes(path, encode_bundle(entries))


def read_bundle(path: str | Path) -> list[BundleEntry]:
    return decode_bundle(Path(path).read_bytes())


# -- traces -------------------------------------------------------------------

TRACE_HEADER = ",".join(TRACE_COLUMNS)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def trace_to_csv(trace: TrainTrace) -> str:
    lines = [TRACE_HEADER] + [",".join(_fmt(v) for v in row) for row in trace.rows]
    return "\n".join(lines) + "\n"


def write_trace(trace: TrainTrace, path: str | Path) -> None:
    atomic_write_text(path, trace_to_csv(trace))


def read_trace(path: str | Path) -> TrainTrace:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != TRACE_HEADER:
            raise TraceFormatError(f"{path}: expected header {TRACE_HEADER!r}, got {header!r}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(TRACE_COLUMNS):
                raise TraceFormatError(f"{path}:{lineno}: expected {len(TRACE_COLUMNS)} fields")
            rows.append(TraceRow(int(rec[0]), float(rec[1]), float(rec[2]), float(rec[3]),
                                 float(rec[4]), float(rec[5]), float(rec[6]), float(rec[7]),
                                 int(rec[8])))
    return TrainTrace(rows=rows)


# -- barcodes -----------------------------------------------------------------

def write_barcode(bars, path: str | Path) -> None:
    lines = ["dim,birth,death"] + [f"{b.dim},{_fmt(b.birth)},{_fmt(b.death)}" for b in bars]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_barcode(path: str | Path):
    from .geometry import Bar

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["dim", "birth", "death"]:
            raise ValueError(f"{path}: expected header dim,birth,death")
        return [Bar(int(r["dim"]), float(r["birth"]), float(r["death"])) for r in reader]
