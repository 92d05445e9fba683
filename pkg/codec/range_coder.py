"""Carry-less 64-bit range coder with byte-wise renormalization.

Frequencies are fixed-point: they sum to ``1 << precision_bits``.

Examples
--------
>>> freqs = [3, 1, 12]          # sums to 16 -> precision_bits = 4
>>> enc = RangeEncoder(freqs, precision_bits=4)
>>> enc.encode_indices([0, 2, 2, 1])
>>> payload = enc.finish()
>>> RangeDecoder(freqs, 4, payload).decode_indices(4)
[0, 2, 2, 1]
"""
from __future__ import annotations

from bisect import bisect_right
from itertools import accumulate
from typing import List, Sequence

from core.errors import PmfPayloadMismatchError, SymbolCountMismatchError, TruncatedPayloadError

RANGE_BITS = 64
MASK = (1 << RANGE_BITS) - 1
TOP = 1 << (RANGE_BITS - 8)
BOT = 1 << (RANGE_BITS - 16)
SHIFT = RANGE_BITS - 8

# decoder builds a direct value -> index table up to this precision
LOOKUP_MAX_BITS = 20


class _Base:
    def __init__(self, freqs: Sequence[int], precision_bits: int):
        self._freq: List[int] = [int(f) for f in freqs]
        self._cum: List[int] = [0] + list(accumulate(self._freq))[:-1]
        self._bits = int(precision_bits)
        if sum(self._freq) != (1 << self._bits) or min(self._freq) < 1:
            raise PmfPayloadMismatchError(
                f"Frequencies must be positive and sum to 2**{self._bits}."
            )
        self._low = 0
        self._range = MASK


class RangeEncoder(_Base):
    def __init__(self, freqs: Sequence[int], precision_bits: int):
        super().__init__(freqs, precision_bits)
        self._out = bytearray()

    def encode_indices(self, indices) -> None:
        freq, cum, bits, out = self._freq, self._cum, self._bits, self._out
        low, rng = self._low, self._range
        for i in indices:
            r = rng >> bits
            low += cum[i] * r
            rng = freq[i] * r
            while True:
                if (low ^ (low + rng)) >= TOP:
                    if rng >= BOT:
                        break
                    rng = -low & (BOT - 1)
                out.append(low >> SHIFT)
                low = (low << 8) & MASK
                rng = (rng << 8) & MASK
        self._low, self._range = low, rng

    def finish(self) -> bytes:
        self._out += self._low.to_bytes(RANGE_BITS // 8, "big")
        return bytes(self._out)


class RangeDecoder(_Base):
    def __init__(self, freqs: Sequence[int], precision_bits: int, payload: bytes):
        super().__init__(freqs, precision_bits)
        self._buf = payload
        self._pos = RANGE_BITS // 8
        if len(payload) < self._pos:
            raise TruncatedPayloadError("Range-coded payload shorter than the coder state.")
        self._code = int.from_bytes(payload[: self._pos], "big")
        if self._bits <= LOOKUP_MAX_BITS:
            self._lookup = [i for i, f in enumerate(self._freq) for _ in range(f)]
        else:
            self._lookup = None

    def decode_indices(self, count: int) -> List[int]:
        freq, cum, bits, buf = self._freq, self._cum, self._bits, self._buf
        lookup = self._lookup
        total = 1 << bits
        n_buf = len(buf)
        low, rng, code, pos = self._low, self._range, self._code, self._pos
        result = []
        append = result.append
        for _ in range(count):
            r = rng >> bits
            value = (code - low) // r
            if not 0 <= value < total:
                raise PmfPayloadMismatchError("Payload does not decode under the transmitted PMF.")
            i = lookup[value] if lookup is not None else bisect_right(cum, value) - 1
            append(i)
            low += cum[i] * r
            rng = freq[i] * r
            while True:
                if (low ^ (low + rng)) >= TOP:
                    if rng >= BOT:
                        break
                    rng = -low & (BOT - 1)
                if pos >= n_buf:
                    raise TruncatedPayloadError("Range-coded payload ended early.")
                code = ((code << 8) | buf[pos]) & MASK
                pos += 1
                low = (low << 8) & MASK
                rng = (rng << 8) & MASK
        self._low, self._range, self._code, self._pos = low, rng, code, pos
        return result

    def check_exhausted(self) -> None:
        if self._pos != len(self._buf):
            raise SymbolCountMismatchError(
                f"Decoded the declared symbol count but {len(self._buf) - self._pos} payload bytes remain."
            )
