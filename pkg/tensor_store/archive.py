# tensor_store/archive.py
from __future__ import annotations

import json
import logging
import os
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional

import numpy as np

from core.errors import (
    BadMagicError, DuplicateNameError, HeaderCorruptError, NonFiniteError,
    ShapeMismatchError, ShapePayloadMismatchError, TruncatedPayloadError,
    UsageError, VersionMismatchError,
)
from core.files import write_bytes_atomic
from tensor_store.constants import DTYPES, FIXED_HEADER_FORMAT, FIXED_HEADER_SIZE, MAGIC, VERSION

logger = logging.getLogger("tensor_store")

_CODE_BY_DTYPE = {np.dtype(v): k for k, v in DTYPES.items()}


def dtype_code(dtype) -> str:
    """'f32' / 'f64' for a numpy float dtype, regardless of byte order."""
    dt = np.dtype(dtype).newbyteorder("<")
    try:
        return _CODE_BY_DTYPE[dt]
    except KeyError:
        raise UsageError(f"Unsupported dtype {np.dtype(dtype)}; only f32 and f64 tensors are stored.") from None


@dataclass(frozen=True, eq=False)
class Tensor:
    """
    Named, dense, row-major float tensor. The buffer is copied on construction
    and marked read-only, so instances are safe to share.
    """
    name: str
    data: np.ndarray
    allow_nonfinite: bool = False

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise UsageError("Tensor name must be a non-empty string.")
        arr = np.array(self.data, copy=True, order="C")
        if arr.dtype.kind != "f":
            arr = arr.astype(np.float64)
        code = dtype_code(arr.dtype)
        arr = arr.astype(DTYPES[code], copy=False)
        if arr.ndim == 0 or any(d < 1 for d in arr.shape):
            raise UsageError(f"Tensor {self.name!r} needs a non-empty shape with every dimension >= 1, got {arr.shape}.")
        if not self.allow_nonfinite and not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"Tensor {self.name!r} contains NaN or Inf.")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> List[int]:
        return list(self.data.shape)

    @property
    def dtype(self) -> str:
        return dtype_code(self.data.dtype)

    @property
    def rank(self) -> int:
        return self.data.ndim

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.name == other.name
            and self.dtype == other.dtype
            and self.shape == other.shape
            and np.array_equal(self.data, other.data, equal_nan=True)
        )

    __hash__ = None


@dataclass(eq=False)
class TensorArchive:
    entries: Dict[str, Tensor] = field(default_factory=dict)
    metadata: Dict[str, str] = field(default_factory=dict)

    def add(self, tensor: Tensor) -> None:
        if tensor.name in self.entries:
            raise DuplicateNameError(f"Tensor {tensor.name!r} already present in archive.")
        self.entries[tensor.name] = tensor

    def get(self, name: str) -> Tensor:
        try:
            return self.entries[name]
        except KeyError:
            raise UsageError(f"Tensor {name!r} not found in archive.") from None

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorArchive):
            return NotImplemented
        return (
            list(self.entries) == list(other.entries)
            and all(self.entries[k] == other.entries[k] for k in self.entries)
            and self.metadata == other.metadata
        )

    __hash__ = None


def reshape_2d(t: Tensor, split_axis: int) -> np.ndarray:
    """
    View tensor `t` as an (m x n) matrix with m = prod(shape[:split_axis]) and
    n = prod(shape[split_axis:]). Row-major element order is preserved.
    """
    if not 1 <= split_axis < t.rank:
        raise UsageError(f"split_axis must be in [1, {t.rank - 1}] for tensor {t.name!r} of rank {t.rank}, got {split_axis}.")
    m = int(np.prod(t.shape[:split_axis]))
    n = int(np.prod(t.shape[split_axis:]))
    return t.data.reshape(m, n)


def restore_shape(matrix: np.ndarray, shape: List[int]) -> np.ndarray:
    """Inverse of reshape_2d for a tensor of the given shape."""
    if int(np.prod(shape)) != matrix.size:
        raise ShapeMismatchError(f"Cannot restore a {matrix.shape} matrix to shape {list(shape)}.")
    return np.asarray(matrix).reshape(shape)


# -------- encoding

def archive_to_bytes(archive: TensorArchive) -> bytes:
    tensors = []
    payloads = []
    offset = 0
    for t in archive:
        raw = t.data.tobytes(order="C")
        tensors.append({"name": t.name, "dtype": t.dtype, "shape": t.shape, "offset": offset})
        payloads.append(raw)
        offset += len(raw)

    if tensors or archive.metadata:
        header = json.dumps(
            {"metadata": dict(archive.metadata), "tensors": tensors},
            sort_keys=True, separators=(",", ":"), ensure_ascii=False,
        ).encode("utf-8")
    else:
        header = b""

    fixed = struct.pack(FIXED_HEADER_FORMAT, MAGIC, VERSION, 0, 0, len(header), zlib.crc32(header))
    return fixed + header + b"".join(payloads)


def archive_from_bytes(blob: bytes, *, allow_nonfinite: bool = False) -> TensorArchive:
    if len(blob) < FIXED_HEADER_SIZE:
        if not blob.startswith(MAGIC[: len(blob)]):
            raise BadMagicError("Not a GFXT archive.")
        raise TruncatedPayloadError(f"File is {len(blob)} bytes, shorter than the {FIXED_HEADER_SIZE}-byte header.")

    magic, version, flags, reserved, header_len, crc = struct.unpack_from(FIXED_HEADER_FORMAT, blob, 0)
    if magic != MAGIC:
        raise BadMagicError(f"Bad magic {magic!r}; expected {MAGIC!r}.")
    if version != VERSION:
        raise VersionMismatchError(f"Archive version {version} is not supported (expected {VERSION}).")
    if flags or reserved:
        raise HeaderCorruptError("Reserved header fields are non-zero.")

    end = FIXED_HEADER_SIZE + header_len
    if end > len(blob):
        raise TruncatedPayloadError(f"Header claims {header_len} bytes but only {len(blob) - FIXED_HEADER_SIZE} remain.")
    header = blob[FIXED_HEADER_SIZE:end]
    if zlib.crc32(header) != crc:
        raise HeaderCorruptError("Header checksum mismatch.")

    archive = TensorArchive()
    if not header:
        if len(blob) != FIXED_HEADER_SIZE:
            raise ShapePayloadMismatchError("Empty archive carries trailing payload bytes.")
        return archive

    try:
        doc = json.loads(header.decode("utf-8"))
        metadata = doc["metadata"]
        entries = doc["tensors"]
    except (UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
        raise HeaderCorruptError(f"Unreadable archive header: {exc}") from exc

    if not isinstance(metadata, dict) or not isinstance(entries, list):
        raise HeaderCorruptError("Archive header has the wrong structure.")
    archive.metadata = {str(k): str(v) for k, v in metadata.items()}
    payload = memoryview(blob)[end:]
    expected_offset = 0
    for entry in entries:
        try:
            name, code, shape, offset = entry["name"], entry["dtype"], list(entry["shape"]), int(entry["offset"])
            np_dtype = np.dtype(DTYPES[code])
        except (KeyError, TypeError, ValueError) as exc:
            raise HeaderCorruptError(f"Malformed tensor entry {entry!r}") from exc
        if not isinstance(name, str) or not name or name in archive:
            raise HeaderCorruptError(f"Tensor name {name!r} is empty, not a string or repeated.")
        if not shape or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in shape):
            raise HeaderCorruptError(f"Tensor {name!r} has invalid shape {shape!r}.")
        if offset != expected_offset:
            raise ShapePayloadMismatchError(f"Tensor {name!r} starts at {offset}, expected {expected_offset}.")
        nbytes = int(np.prod(shape)) * np_dtype.itemsize
        if offset + nbytes > len(payload):
            raise TruncatedPayloadError(f"Payload for {name!r} is truncated.")
        data = np.frombuffer(payload[offset: offset + nbytes], dtype=np_dtype).reshape(shape)
        archive.add(Tensor(name, data, allow_nonfinite=allow_nonfinite))
        expected_offset = offset + nbytes

    if expected_offset != len(payload):
        raise ShapePayloadMismatchError(
            f"Payload is {len(payload)} bytes but tensor shapes account for {expected_offset}."
        )
    return archive


def write_archive(archive: TensorArchive, path: str | os.PathLike) -> None:
    blob = archive_to_bytes(archive)
    write_bytes_atomic(path, blob)
    logger.info("Wrote archive %s tensors=%d bytes=%d", path, len(archive), len(blob))


def read_archive(path: str | os.PathLike, *, allow_nonfinite: bool = False) -> TensorArchive:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"File not found: {p}")
    archive = archive_from_bytes(p.read_bytes(), allow_nonfinite=allow_nonfinite)
    logger.info("Read archive %s tensors=%d", p, len(archive))
    return archive


def describe(archive: TensorArchive) -> List[dict]:
    """One row per tensor (name, dtype, shape) for listings."""
    return [{"name": t.name, "dtype": t.dtype, "shape": t.shape} for t in archive]


def single_tensor(archive: TensorArchive, name: Optional[str] = None) -> Tensor:
    """The named tensor, or the first one when no name is given."""
    if name:
        return archive.get(name)
    if not len(archive):
        raise UsageError("Archive holds no tensors.")
    return next(iter(archive))
