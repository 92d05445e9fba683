import pytest

from core.errors import UsageError
from mlora.sizing import MEGABYTE, layers_for_ratio, size_report, size_table


def test_single_layer_formulas():
    rep = size_report([(512, 512, 64)])
    assert rep.lora_params == 65_536
    assert rep.mlora_params == 4_096
    assert rep.ratio == 16
    assert rep.lora_bytes == 65_536 * 4 and rep.mlora_bytes == 4_096 * 4


def test_square_full_rank_layer_is_not_clamped():
    """r = m = n: LoRA carries 2r^2 values against r^2."""
    assert size_report([(8, 8, 8)]).ratio == 2.0


def test_mlora_larger_than_lora_is_reported_as_is():
    rep = size_report([(1, 1, 4)])
    assert rep.lora_params == 8 and rep.mlora_params == 16
    assert rep.ratio == 0.5


def test_ratio_above_one_when_rank_is_small(rng):
    for _ in range(20):
        m, n = (int(x) for x in rng.integers(1, 200, size=2))
        r = int(rng.integers(1, m + n))
        assert size_report([(m, n, r)]).ratio > 1


def test_random_layer_sets_match_independent_arithmetic(rng):
    for _ in range(100):
        layers = [tuple(int(x) for x in rng.integers(1, 300, size=3)) for _ in range(rng.integers(1, 8))]
        rep = size_report(layers, dtype="f16")
        lora = sum(r * (m + n) for m, n, r in layers)
        mlora = sum(r * r for _, _, r in layers)
        assert (rep.lora_params, rep.mlora_params) == (lora, mlora)
        assert rep.lora_bytes == 2 * lora and rep.mlora_bytes == 2 * mlora
        assert rep.ratio == lora / mlora


def test_size_ratio_fixture_matches_ablation():
    """242.04 MB of LoRA against 40.05 MB of mLoRA is a 6.04x reduction."""
    layers = layers_for_ratio(6.04, rank=100, count=16)
    rep = size_report(layers)
    assert rep.ratio == pytest.approx(242.04 / 40.05, abs=0.05)
    assert rep.ratio == pytest.approx(6.04, abs=0.05)


def test_megabytes_and_size_table():
    rep = size_report([(302, 302, 100)])
    lora_mb, mlora_mb = rep.megabytes()
    assert lora_mb == rep.lora_bytes / MEGABYTE and mlora_mb == rep.mlora_bytes / MEGABYTE
    rows = size_table(rep, coded_bytes=93_000, reference_bytes=1_000_000)
    assert [r["method"] for r in rows] == ["LoRA", "mLoRA", "mLoRA + entropy model"]
    assert rows[2]["megabytes"] == 0.093
    assert rows[2]["share_of_reference"] == 0.093
    assert "share_of_reference" not in size_table(rep)[0]


def test_bad_inputs():
    with pytest.raises(UsageError):
        size_report([(0, 3, 1)])
    with pytest.raises(UsageError):
        size_report([(3, 3, 1)], dtype="i8")
    with pytest.raises(UsageError):
        layers_for_ratio(-1, rank=4)
