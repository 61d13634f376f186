"""Reader/writer for IDX image files (the MNIST container format).

Layout: big-endian uint32 magic ``0x00000803``, then uint32 item, row and
column counts, then ``items * rows * cols`` unsigned bytes in row-major order.
Gzip-compressed files are detected by their header and read transparently.
"""

from __future__ import annotations

import gzip
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
_HEADER = struct.Struct(">IIII")


class BadMagic(ValueError):
    pass


class TruncatedFile(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ImageDataset:
    images: np.ndarray  # (count, rows, cols) uint8
    digest: str  # sha256 of the raw (decompressed) file bytes

    @property
    def count(self):
        return self.images.shape[0]

    @property
    def shape(self):
        return self.images.shape[1:]


def _read_bytes(path):
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def parse_idx_images(raw: bytes, digest=None):
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"header needs {_HEADER.size} bytes, file has {len(raw)}")
    magic, count, rows, cols = _HEADER.unpack_from(raw)
    if magic != IDX_IMAGE_MAGIC:
        raise BadMagic(f"magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}")
    need = count * rows * cols
    body = raw[_HEADER.size:]
    if len(body) < need:
        raise TruncatedFile(f"expected {need} pixel bytes, found {len(body)}")
    images = np.frombuffer(body, dtype=np.uint8, count=need).reshape(count, rows, cols).copy()
    return ImageDataset(images, digest or hashlib.sha256(raw).hexdigest())


def load_idx_images(path):
    return parse_idx_images(_read_bytes(path))


def write_idx_images(images, path):
    images = np.asarray(images)
    if images.ndim != 3 or images.dtype != np.uint8:
        raise ValueError("images must be a (count, rows, cols) uint8 array")
    data = _HEADER.pack(IDX_IMAGE_MAGIC, *images.shape) + images.tobytes(order="C")
    Path(path).write_bytes(data)
    return Path(path)
