import struct

import numpy as np
import pytest

from codec.bitstream import (
    MAGIC, coded_size, decode, decode_bytes, encode, encode_bytes, stream_tool_version,
)
from codec.groups import ModulationGroup, QuantizedGroup, quantize
from core.conf import gfix_version
from core.errors import (
    BadMagicError, FormatError, SymbolCountMismatchError, TruncatedPayloadError, UsageError,
    VersionMismatchError,
)


def _group(rng, rank, count, step=0.05, prefix="layer"):
    maps = tuple(rng.standard_normal((count, rank, rank)) * 0.2)
    g = ModulationGroup(rank=rank, maps=maps, layer_ids=tuple(f"{prefix}.{i}" for i in range(count)))
    return quantize(g, step)


def test_multi_group_stream_is_lossless(rng, tmp_path):
    groups = [_group(rng, 8, 3, prefix="a"), _group(rng, 2, 5, step=0.3, prefix="b"), _group(rng, 1, 1, prefix="c")]
    path = tmp_path / "stream.gfxb"
    stats = encode(groups, path)
    assert decode(path) == groups
    assert [s.layer_ids for s in stats] == [g.layer_ids for g in groups]
    assert path.stat().st_size == coded_size(groups)


def test_empty_stream():
    blob, stats = encode_bytes([])
    tool = gfix_version().encode("utf-8")
    assert blob == MAGIC + struct.pack("<BH", 1, len(tool)) + tool + struct.pack("<I", 0)
    assert decode_bytes(blob) == [] and stats == []


def test_stream_records_tool_version(rng):
    blob, _ = encode_bytes([_group(rng, 2, 1)])
    assert stream_tool_version(blob) == gfix_version() == "1.0.0"


def _preamble_size():
    return len(MAGIC) + 3 + len(gfix_version().encode("utf-8")) + 4


def test_declared_symbols_beyond_the_limit_are_rejected(rng, settings):
    blob, _ = encode_bytes([_group(rng, 4, 1)])
    settings.GFIX = {**settings.GFIX, "MAX_GROUP_SYMBOLS": 10}
    with pytest.raises(SymbolCountMismatchError):
        decode_bytes(blob)


def test_huge_declared_rank_fails_before_allocating():
    tool = gfix_version().encode("utf-8")
    head = MAGIC + struct.pack("<BH", 1, len(tool)) + tool + struct.pack("<I", 1)
    with pytest.raises(SymbolCountMismatchError):
        decode_bytes(head + struct.pack("<II", 60_000, 1) + struct.pack("<H", 1) + b"x")
    with pytest.raises(TruncatedPayloadError):
        decode_bytes(head + struct.pack("<II", 1, 2**31))


def test_symbol_count_must_fit_the_payload(rng):
    blob = bytearray(encode_bytes([_group(rng, 4, 1)])[0])
    struct.pack_into("<I", blob, _preamble_size(), 400)
    with pytest.raises(SymbolCountMismatchError):
        decode_bytes(bytes(blob))


def test_all_zero_group_has_empty_payload():
    symbols = np.zeros(512 * 512 * 20, dtype=np.int64)
    q = QuantizedGroup(symbols=symbols, step=0.01, rank=512, count=20, layer_ids=tuple(f"l{i}" for i in range(20)))
    blob, stats = encode_bytes([q])
    assert stats[0].payload_bytes == 0
    assert stats[0].payload_bytes < 64
    assert decode_bytes(blob) == [q]


def test_unicode_layer_ids_survive(rng):
    q = _group(rng, 3, 2)
    q = QuantizedGroup(symbols=q.symbols, step=q.step, rank=3, count=2, layer_ids=("блок.0", "層.1"))
    assert decode_bytes(encode_bytes([q])[0])[0].layer_ids == ("блок.0", "層.1")


def test_step_is_bit_exact(rng):
    q = _group(rng, 4, 2, step=0.1 + 1e-17 * 3)
    assert decode_bytes(encode_bytes([q])[0])[0].step == q.step


def test_output_is_deterministic(rng, tmp_path):
    groups = [_group(rng, 6, 4)]
    encode(groups, tmp_path / "a")
    encode(groups, tmp_path / "b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_bad_magic(rng):
    blob, _ = encode_bytes([_group(rng, 2, 2)])
    with pytest.raises(BadMagicError):
        decode_bytes(b"XXXX" + blob[4:])
    with pytest.raises(BadMagicError):
        decode_bytes(b"GF")


def test_unknown_version(rng):
    blob, _ = encode_bytes([_group(rng, 2, 2)])
    with pytest.raises(VersionMismatchError):
        decode_bytes(blob[:4] + bytes([9]) + blob[5:])


def test_every_truncation_is_a_format_error(rng):
    blob, _ = encode_bytes([_group(rng, 3, 2), _group(rng, 2, 1, prefix="x")])
    for cut in range(len(blob)):
        with pytest.raises(FormatError):
            decode_bytes(blob[:cut])


def test_truncated_payload_is_reported(rng):
    blob, _ = encode_bytes([_group(rng, 16, 4)])
    with pytest.raises(TruncatedPayloadError):
        decode_bytes(blob[:-40])


def test_trailing_bytes_rejected(rng):
    blob, _ = encode_bytes([_group(rng, 3, 1)])
    with pytest.raises(SymbolCountMismatchError):
        decode_bytes(blob + b"\x00")


def test_missing_file(tmp_path):
    with pytest.raises(UsageError):
        decode(tmp_path / "nope.gfxb")


@pytest.mark.slow
def test_sparse_forty_megabyte_group_codes_small(rng):
    # rank 150 x 445 maps: 10,012,500 symbols, 40.05 MB as float32
    rank, count = 150, 445
    n = rank * rank * count
    symbols = np.zeros(n, dtype=np.int64)
    hits = rng.choice(n, size=int(n * 0.003), replace=False)
    symbols[hits] = rng.choice([-1, 1], size=hits.size)
    q = QuantizedGroup(
        symbols=symbols, step=0.01, rank=rank, count=count,
        layer_ids=tuple(f"layer.{i:03d}" for i in range(count)),
    )
    assert n * 4 == 40_050_000
    blob, _ = encode_bytes([q])
    assert len(blob) <= 100_000
    assert decode_bytes(blob) == [q]
