"""Flat binary container for named float64 tensors.

Layout: 4-byte magic "GNL1", uint32 little-endian header length, UTF-8 JSON
header, then the raw tensor bytes back to back. The header records format
version, tensor names/shapes/offsets and a free-form "meta" object. All
tensor data is 64-bit float, little-endian, C order; nothing else is
representable on purpose. Checkpoints and binary trial batches both use this.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

__all__ = ["write_container", "read_container", "FORMAT_VERSION"]

_MAGIC = b"GNL1"
FORMAT_VERSION = 1


def write_container(path, tensors: dict[str, np.ndarray], meta: dict | None = None) -> None:
    """Write named tensors plus a JSON-serializable meta dict to path."""
    entries = []
    blobs = []
    offset = 0
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        raw = arr.tobytes()
        blobs.append(raw)
        offset += len(raw)
    header = {
        "version": FORMAT_VERSION,
        "dtype": "<f8",
        "tensors": entries,
        "meta": meta or {},
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(head)))
        fh.write(head)
        for raw in blobs:
            fh.write(raw)


def read_container(path) -> tuple[dict[str, np.ndarray], dict]:
    """Read a container written by write_container. Returns (tensors, meta)."""
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ValueError(f"{path}: not a gnodelab tensor container (bad magic)")
    (head_len,) = struct.unpack("<I", data[4:8])
    header = json.loads(data[8 : 8 + head_len].decode("utf-8"))
    if header.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported container version {header.get('version')}")
    base = 8 + head_len
    tensors: dict[str, np.ndarray] = {}
    for ent in header["tensors"]:
        shape = tuple(ent["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = base + ent["offset"]
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=start)
        tensors[ent["name"]] = arr.reshape(shape).astype(np.float64).copy()
    return tensors, header.get("meta", {})
