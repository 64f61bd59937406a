"""Binary parameter checkpoints.

Layout: magic ``DGC1``, u16 version, 8-byte layout hash, u32 store count,
then per store (name, per-tensor name/shape/float64 little-endian payload),
and a trailing CRC32 of everything after the magic.
"""
from __future__ import annotations

import hashlib
import struct
import zlib

import numpy as np

from ..errors import FormatError
from .nets import ParamStore

MAGIC = b"DGC1"
VERSION = 1


def layout_hash(stores: dict) -> bytes:
    h = hashlib.sha256()
    for store_name in sorted(stores):
        h.update(store_name.encode())
        for name, shape in stores[store_name].layout():
            h.update(name.encode())
            h.update(repr(shape).encode())
    return h.digest()[:8]


def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("<H", len(b)) + b


def save_params(path, stores: dict):
    """Write a dict of named ParamStores to ``path``."""
    body = bytearray()
    body += struct.pack("<H", VERSION)
    body += layout_hash(stores)
    body += struct.pack("<I", len(stores))
    for store_name in sorted(stores):
        store = stores[store_name]
        body += _pack_str(store_name)
        body += struct.pack("<I", len(store))
        for name, t in store.items():
            body += _pack_str(name)
            body += struct.pack("<B", t.data.ndim)
            for d in t.data.shape:
                body += struct.pack("<I", d)
            body += t.data.astype("<f8").tobytes()
    crc = zlib.crc32(bytes(body))
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(body)
        f.write(struct.pack("<I", crc))


def load_params(path, stores: dict):
    """Load a checkpoint written by :func:`save_params` into ``stores``.

    The stores must already have the matching layout; raises FormatError on
    corruption, truncation, version or layout mismatch.
    """
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise FormatError("not a parameter checkpoint (bad magic)")
    body, (crc,) = blob[4:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) != crc:
        raise FormatError("checkpoint checksum failure")
    off = 0

    def take(n):
        nonlocal off
        if off + n > len(body):
            raise FormatError("truncated checkpoint")
        out = body[off:off + n]
        off += n
        return out

    def take_str():
        (n,) = struct.unpack("<H", take(2))
        return take(n).decode("utf-8")

    (version,) = struct.unpack("<H", take(2))
    if version != VERSION:
        raise FormatError(f"checkpoint version {version} != {VERSION}")
    file_hash = take(8)
    if file_hash != layout_hash(stores):
        raise FormatError("checkpoint layout hash does not match these stores")
    (n_stores,) = struct.unpack("<I", take(4))
    if n_stores != len(stores):
        raise FormatError("store count mismatch")
    for _ in range(n_stores):
        store_name = take_str()
        if store_name not in stores:
            raise FormatError(f"unknown store {store_name!r}")
        store = stores[store_name]
        (n_params,) = struct.unpack("<I", take(4))
        if n_params != len(store):
            raise FormatError(f"parameter count mismatch in {store_name!r}")
        for _ in range(n_params):
            name = take_str()
            (ndim,) = struct.unpack("<B", take(1))
            shape = tuple(struct.unpack("<I", take(4))[0] for _ in range(ndim))
            n_vals = int(np.prod(shape)) if shape else 1
            payload = take(8 * n_vals)
            arr = np.frombuffer(payload, dtype="<f8").reshape(shape)
            if name not in store or store[name].data.shape != shape:
                raise FormatError(f"layout mismatch for {store_name}/{name}")
            store[name].data[...] = arr
    return stores
