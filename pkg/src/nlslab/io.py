"""Result files: CSV tables, JSON records and raw binary field dumps.

CSV numbers use ``%.17g`` (round-trip exact, '.' decimal, locale independent).
JSON is written with sorted keys and a fixed indent so equal results give
byte-identical files.

Binary field layout (all little-endian)::

    b"NLSF" | u32 version | u32 n | u32 N (n times) | f64 L | complex128 values

with the values in row-major order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .grid import Grid, make_grid

FIELD_MAGIC = b"NLSF"
FIELD_VERSION = 1


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if x is None:
        return ""
    return str(x)


def write_csv(path, rows: Iterable[Mapping], columns: list[str] | None = None) -> Path:
    rows = list(rows)
    path = Path(path)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_number(r.get(c)) for c in columns])
    return path


def read_csv(path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan; keep them readable as strings
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(record) -> str:
    return json.dumps(_jsonable(record), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, record) -> Path:
    path = Path(path)
    path.write_text(dumps_json(record), encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def pack_field(g: Grid, u: np.ndarray) -> bytes:
    u = np.ascontiguousarray(g.check(u), dtype="<c16")
    header = FIELD_MAGIC + struct.pack("<II", FIELD_VERSION, g.n)
    header += struct.pack(f"<{g.n}I", *([g.N] * g.n)) + struct.pack("<d", g.L)
    return header + u.tobytes(order="C")


def unpack_field(data: bytes) -> tuple[Grid, np.ndarray]:
    if data[:4] != FIELD_MAGIC:
        raise ValueError("not a field dump (bad magic)")
    version, n = struct.unpack_from("<II", data, 4)
    if version != FIELD_VERSION:
        raise ValueError(f"unsupported field dump version {version}")
    if n not in (1, 2):
        raise ValueError(f"bad dimension {n} in field dump")
    Ns = struct.unpack_from(f"<{n}I", data, 12)
    if len(set(Ns)) != 1:
        raise ValueError("anisotropic grids are not supported")
    off = 12 + 4 * n
    (L,) = struct.unpack_from("<d", data, off)
    off += 8
    count = int(np.prod(Ns))
    if len(data) - off != 16 * count:
        raise ValueError("field dump is truncated or has trailing bytes")
    u = np.frombuffer(data, dtype="<c16", count=count, offset=off).reshape(Ns).astype(complex)
    return make_grid(n, L, Ns[0]), u


def write_field(path, g: Grid, u: np.ndarray) -> Path:
    path = Path(path)
    path.write_bytes(pack_field(g, u))
    return path


def read_field(path) -> tuple[Grid, np.ndarray]:
    return unpack_field(Path(path).read_bytes())


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
