"""Binary field container and the CSV/JSON writers for run artifacts.

Field container layout (little-endian):
    magic  b"PHI4", u32 version, u32 dim, u32 cutoff, u8 mean-zero flag,
    u64 seed, 16-byte config digest prefix (ascii hex, zero padded),
    then the coefficient payload as float64 (re, im) pairs in C order.

CSV dialect everywhere: comma, dot decimal, header row, LF line ends;
every table carries a config_digest column so downstream tooling can
refuse mixed-provenance inputs.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from pathlib import Path

import numpy as np

from .fields import FourierField, frequency_grid

__all__ = [
    "write_field",
    "read_field",
    "field_to_csv",
    "write_csv",
    "write_json_report",
]

_MAGIC = b"PHI4"
_VERSION = 1
_HEADER = struct.Struct("<4sIIIBQ16s")


def write_field(path, field: FourierField, seed: int = 0,
                digest: str = "") -> None:
    payload = np.ascontiguousarray(field.coeffs.astype(np.complex128))
    buf = _HEADER.pack(_MAGIC, _VERSION, field.dim, field.cutoff,
                       1 if field.mean_zero else 0, seed & (2**64 - 1),
                       digest[:16].encode().ljust(16, b"\0"))
    re_im = np.empty(payload.size * 2, dtype="<f8")
    re_im[0::2] = payload.real.reshape(-1)
    re_im[1::2] = payload.imag.reshape(-1)
    Path(path).write_bytes(buf + re_im.tobytes())


def read_field(path) -> tuple[FourierField, dict]:
    raw = Path(path).read_bytes()
    magic, version, dim, cutoff, mz, seed, digest = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"not a field container: {path}")
    if version != _VERSION:
        raise ValueError(f"unsupported container version {version}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    coeffs = (data[0::2] + 1j * data[1::2]).reshape((2 * cutoff + 1,) * dim)
    meta = {"seed": seed, "digest": digest.rstrip(b"\0").decode()}
    return FourierField(dim, cutoff, coeffs.copy(), mean_zero=bool(mz)), meta


def field_to_csv(path, field: FourierField, digest: str = "") -> None:
    """Debug listing (k-tuple, re, im) of every coefficient."""
    ks = frequency_grid(field.dim, field.cutoff).reshape(field.dim, -1).T
    flat = field.coeffs.reshape(-1)
    header = [f"k{j+1}" for j in range(field.dim)] + ["re", "im",
                                                      "config_digest"]
    rows = [list(map(int, k)) + [repr(flat[i].real), repr(flat[i].imag), digest]
            for i, k in enumerate(ks)]
    write_csv(path, header, rows)


def write_norm_report(path, entries: list[dict], digest: str = "") -> None:
    """Norm-report table: (field-id, alpha, p, q, value, partition-id)."""
    rows = [[e["field_id"], repr(float(e["alpha"])), str(e["p"]), str(e["q"]),
             repr(float(e["value"])), e["partition_id"], digest]
            for e in entries]
    write_csv(path, ["field_id", "alpha", "p", "q", "value", "partition_id",
                     "config_digest"], rows)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(out.getvalue())


def write_json_report(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
