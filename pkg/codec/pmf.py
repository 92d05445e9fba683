# codec/pmf.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.conf import gfix_setting
from core.errors import UnknownSymbolError, UsageError

MAX_PRECISION_BITS = 24

# serialized table: precision u8 + alphabet size u32 + (i32 symbol, u32 freq) per entry
TABLE_FIXED_BITS = 8 * (1 + 4)
TABLE_ENTRY_BITS = 8 * (4 + 4)


@dataclass(frozen=True)
class EmpiricalPmf:
    """Histogram-based probability table. `alphabet` is sorted, `counts` are all positive."""
    alphabet: np.ndarray  # int64
    counts: np.ndarray    # int64

    def __post_init__(self):
        if self.alphabet.ndim != 1 or self.alphabet.shape != self.counts.shape or not self.alphabet.size:
            raise UsageError("PMF needs matching, non-empty alphabet and counts.")
        if np.any(np.diff(self.alphabet) <= 0):
            raise UsageError("PMF alphabet must be strictly increasing.")
        if np.any(self.counts <= 0):
            raise UsageError("PMF counts must be positive.")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def size(self) -> int:
        return int(self.alphabet.size)

    def probabilities(self) -> np.ndarray:
        return self.counts / self.total

    def indices(self, symbols: np.ndarray) -> np.ndarray:
        """Alphabet index of each symbol; raises if any symbol is not in the alphabet."""
        symbols = np.asarray(symbols, dtype=np.int64)
        idx = np.searchsorted(self.alphabet, symbols)
        idx_clipped = np.minimum(idx, self.alphabet.size - 1)
        missing = self.alphabet[idx_clipped] != symbols
        if np.any(missing):
            bad = int(symbols[np.argmax(missing)])
            raise UnknownSymbolError(f"Symbol {bad} is not in the PMF alphabet and no escape is configured.")
        return idx_clipped

    def precision_bits(self, minimum: Optional[int] = None) -> int:
        """Smallest precision >= the configured one with 2 * alphabet <= 2**bits."""
        bits = gfix_setting("PMF_PRECISION_BITS") if minimum is None else minimum
        while (1 << bits) < 2 * self.size:
            bits += 1
        if bits > MAX_PRECISION_BITS:
            raise UsageError(f"Alphabet of {self.size} symbols exceeds the coder's {MAX_PRECISION_BITS}-bit tables.")
        return bits

    def frequencies(self, precision_bits: Optional[int] = None) -> np.ndarray:
        """
        Fixed-point frequencies summing to exactly 2**precision_bits, every one >= 1:
        floor(count * (2**P - K) / total) + 1, the remainder going to the most
        frequent symbol (lowest index on ties).
        """
        bits = precision_bits or self.precision_bits()
        scale = 1 << bits
        k = self.size
        if 2 * k > scale:
            raise UsageError(f"Precision of {bits} bits is too small for {k} symbols.")
        counts = self.counts.astype(object)
        budget = scale - k
        total = self.total
        freqs = np.array([int(c) * budget // total + 1 for c in counts], dtype=np.int64)
        freqs[int(np.argmax(self.counts))] += scale - int(freqs.sum())
        return freqs


def build_pmf(symbols, *, alphabet=None, smoothing: bool = False) -> EmpiricalPmf:
    """
    Count symbols. With `alphabet` the table covers exactly those symbols; with
    `smoothing` every alphabet entry gets +1 so unseen symbols stay codable.
    """
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    if alphabet is None:
        if not symbols.size:
            raise UsageError("build_pmf needs at least one symbol.")
        values, counts = np.unique(symbols, return_counts=True)
        if smoothing:
            counts = counts + 1
        return EmpiricalPmf(alphabet=values.astype(np.int64), counts=counts.astype(np.int64))

    alphabet = np.unique(np.asarray(alphabet, dtype=np.int64))
    table = EmpiricalPmf(alphabet=alphabet, counts=np.ones_like(alphabet))
    counts = np.bincount(table.indices(symbols), minlength=alphabet.size).astype(np.int64)
    if smoothing:
        counts = counts + 1
    elif np.any(counts == 0):
        # zero-count entries cannot be coded; drop them from an unsmoothed table
        keep = counts > 0
        alphabet, counts = alphabet[keep], counts[keep]
    return EmpiricalPmf(alphabet=alphabet, counts=counts)


def rate_estimate(pmf: EmpiricalPmf, symbols) -> float:
    """Ideal code length in bits, sum of -log2(count(s) / total)."""
    idx = pmf.indices(symbols)
    if not idx.size:
        return 0.0
    bits_per = -np.log2(pmf.counts / pmf.total)
    return float(np.sum(bits_per[idx]))


def empirical_rate(symbols) -> float:
    """N * H(empirical distribution of `symbols`): rate_estimate under their own PMF."""
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    if not symbols.size:
        return 0.0
    _, counts = np.unique(symbols, return_counts=True)
    n = symbols.size
    return float(n * np.log2(n) - np.sum(counts * np.log2(counts)))


def table_bits(pmf: EmpiricalPmf) -> int:
    """Header cost of transmitting the PMF table."""
    return TABLE_FIXED_BITS + TABLE_ENTRY_BITS * pmf.size
