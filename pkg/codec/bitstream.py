# codec/bitstream.py
"""
GFXB container.

    magic "GFXB" | version u8 | u16 length + UTF-8 tool version | group count u32
    per group:
        rank u32 | count u32 | count x (u16 length + UTF-8 layer id) | step f64
        precision u8 | alphabet size u32 | symbols i32[] | frequencies u32[]
        payload length u32 | payload

All integers little-endian. A group whose alphabet has one symbol has an
empty payload: its symbols are implied by the table.

Declared group sizes are checked before anything is allocated: every layer
id takes at least two bytes, and every coded symbol costs at least
-log2(max_freq / 2**precision) bits of payload.
"""
from __future__ import annotations

import logging
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from codec.groups import QuantizedGroup
from codec.pmf import build_pmf, rate_estimate
from codec.range_coder import RangeDecoder, RangeEncoder
from core.conf import gfix_setting, gfix_version
from core.errors import (
    BadMagicError, FormatError, PmfPayloadMismatchError, SymbolCountMismatchError,
    TruncatedPayloadError, UsageError, VersionMismatchError,
)
from core.files import write_bytes_atomic

logger = logging.getLogger("codec")

MAGIC = b"GFXB"
VERSION = 1
# range-coder start-up and flush slack, in bits
_PAYLOAD_SLACK_BITS = 128


@dataclass(frozen=True)
class GroupStats:
    layer_ids: Tuple[str, ...]
    symbols: int
    alphabet: int
    estimate_bits: float
    payload_bytes: int
    header_bytes: int


def encode_group(q: QuantizedGroup, *, precision_bits: int | None = None) -> Tuple[bytes, GroupStats]:
    pmf = build_pmf(q.symbols)
    bits = pmf.precision_bits(precision_bits)
    freqs = pmf.frequencies(bits)

    if pmf.size == 1:
        payload = b""
    else:
        enc = RangeEncoder(freqs.tolist(), bits)
        enc.encode_indices(pmf.indices(q.symbols).tolist())
        payload = enc.finish()

    head = bytearray(struct.pack("<II", q.rank, q.count))
    for lid in q.layer_ids:
        raw = lid.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise UsageError(f"Layer id {lid[:40]!r}... is too long to serialize.")
        head += struct.pack("<H", len(raw)) + raw
    head += struct.pack("<d", q.step)
    head += struct.pack("<BI", bits, pmf.size)
    head += pmf.alphabet.astype("<i4").tobytes()
    head += freqs.astype("<u4").tobytes()
    head += struct.pack("<I", len(payload))

    stats = GroupStats(
        layer_ids=tuple(q.layer_ids),
        symbols=int(q.symbols.size),
        alphabet=pmf.size,
        estimate_bits=rate_estimate(pmf, q.symbols),
        payload_bytes=len(payload),
        header_bytes=len(head),
    )
    return bytes(head) + payload, stats


def encode_bytes(groups: Sequence[QuantizedGroup], *, precision_bits: int | None = None) -> Tuple[bytes, List[GroupStats]]:
    tool = gfix_version().encode("utf-8")
    out = bytearray(MAGIC + struct.pack("<BH", VERSION, len(tool)) + tool + struct.pack("<I", len(groups)))
    stats = []
    for q in groups:
        blob, st = encode_group(q, precision_bits=precision_bits)
        out += blob
        stats.append(st)
    return bytes(out), stats


def encode(groups: Sequence[QuantizedGroup], path: str | os.PathLike, *,
           precision_bits: int | None = None) -> List[GroupStats]:
    blob, stats = encode_bytes(groups, precision_bits=precision_bits)
    write_bytes_atomic(path, blob)
    logger.info(
        "Encoded %d groups to %s bytes=%d payload=%d",
        len(groups), path, len(blob), sum(s.payload_bytes for s in stats),
    )
    return stats


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedPayloadError(f"Bitstream ended at byte {len(self.blob)}, needed {self.pos + n}.")
        chunk = self.blob[self.pos: self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    @property
    def remaining(self) -> int:
        return len(self.blob) - self.pos


def _decode_group(r: _Reader) -> QuantizedGroup:
    rank, count = r.unpack("<II")
    if rank < 1 or count < 1:
        raise FormatError(f"Group declares rank={rank}, count={count}.")
    if 2 * count > r.remaining:
        raise TruncatedPayloadError(f"Group declares {count} layers but only {r.remaining} bytes remain.")
    n_symbols = rank * rank * count
    limit = int(gfix_setting("MAX_GROUP_SYMBOLS"))
    if n_symbols > limit:
        raise SymbolCountMismatchError(f"Group declares {n_symbols} symbols, above the {limit}-symbol limit.")
    layer_ids = []
    for _ in range(count):
        (n,) = r.unpack("<H")
        try:
            layer_ids.append(r.take(n).decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise FormatError("Layer id is not valid UTF-8.") from exc
    (step,) = r.unpack("<d")
    bits, size = r.unpack("<BI")
    if size < 1 or bits > 32:
        raise PmfPayloadMismatchError(f"Invalid PMF table (precision={bits}, size={size}).")
    alphabet = np.frombuffer(r.take(4 * size), dtype="<i4").astype(np.int64)
    freqs = np.frombuffer(r.take(4 * size), dtype="<u4").astype(np.int64)
    (payload_len,) = r.unpack("<I")
    payload = r.take(payload_len)

    if np.any(np.diff(alphabet) <= 0) or int(freqs.sum()) != (1 << bits) or np.any(freqs < 1):
        raise PmfPayloadMismatchError("PMF table is not a valid fixed-point distribution.")

    if size == 1:
        if payload_len:
            raise PmfPayloadMismatchError("Single-symbol group carries a payload.")
        symbols = np.full(n_symbols, alphabet[0], dtype=np.int64)
    else:
        min_bits = -math.log2(int(freqs.max()) / (1 << bits))
        if n_symbols * min_bits > 8 * payload_len + _PAYLOAD_SLACK_BITS:
            raise SymbolCountMismatchError(
                f"A {payload_len}-byte payload cannot hold {n_symbols} symbols under this PMF."
            )
        dec = RangeDecoder(freqs.tolist(), bits, payload)
        idx = dec.decode_indices(n_symbols)
        dec.check_exhausted()
        symbols = alphabet[np.asarray(idx, dtype=np.int64)]

    try:
        return QuantizedGroup(symbols=symbols, step=step, rank=rank, count=count, layer_ids=tuple(layer_ids))
    except UsageError as exc:
        raise FormatError(f"Decoded group is inconsistent: {exc}") from exc


def _read_preamble(r: _Reader) -> Tuple[str, int]:
    if len(r.blob) < len(MAGIC) or r.take(len(MAGIC)) != MAGIC:
        raise BadMagicError("Not a GFXB bitstream.")
    (version,) = r.unpack("<B")
    if version != VERSION:
        raise VersionMismatchError(f"Bitstream version {version} is not supported (expected {VERSION}).")
    (n,) = r.unpack("<H")
    try:
        tool = r.take(n).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("Tool version is not valid UTF-8.") from exc
    (n_groups,) = r.unpack("<I")
    return tool, n_groups


def stream_tool_version(blob: bytes) -> str:
    """Version string of the gfix build that wrote the stream."""
    return _read_preamble(_Reader(blob))[0]


def decode_bytes(blob: bytes) -> List[QuantizedGroup]:
    r = _Reader(blob)
    _, n_groups = _read_preamble(r)
    groups = [_decode_group(r) for _ in range(n_groups)]
    if r.pos != len(blob):
        raise SymbolCountMismatchError(f"{len(blob) - r.pos} trailing bytes after the last group.")
    return groups


def decode(path: str | os.PathLike) -> List[QuantizedGroup]:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"File not found: {p}")
    groups = decode_bytes(p.read_bytes())
    logger.info("Decoded %d groups from %s", len(groups), p)
    return groups


def coded_size(groups: Sequence[QuantizedGroup]) -> int:
    """Size in bytes of the full GFXB stream for these groups."""
    return len(encode_bytes(groups)[0])
