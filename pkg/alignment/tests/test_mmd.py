import numpy as np
import pytest

from alignment.mmd import (
    ScanPoint, argmin_point, median_bandwidth, mmd2, mmd_scan, offset_profile, select_stepsize,
)
from alignment.noise import NoiseSchedule, SampleSet, forward_noise
from core.errors import ShapeMismatchError, UsageError

T_LIST = list(range(0, 1000, 50))


@pytest.fixture
def schedule():
    return NoiseSchedule.linear(1000, 1e-4, 0.02)


def _clean(rng, n, d, label="x0"):
    return SampleSet(3 + 0.5 * rng.standard_normal((n, d)), label=label)


def _degraded(rng, schedule, t_star, n, d):
    return forward_noise(_clean(rng, n, d, "degraded"), t_star, schedule, seed=int(rng.integers(1 << 30)))


# -------- mmd2

def test_identical_sets_give_zero(rng):
    x = SampleSet(rng.standard_normal((40, 3)))
    assert mmd2(x, x) == 0.0


def test_two_tight_clusters():
    x = SampleSet(np.zeros((6, 2)))
    y = SampleSet(np.tile([3.0, 4.0], (6, 1)))
    assert mmd2(x, y, 2.0) == pytest.approx(2 - 2 * np.exp(-25 / 8), rel=1e-12)


def test_shifted_gaussian_is_farther(rng):
    x = SampleSet(rng.standard_normal((200, 1)))
    same = SampleSet(rng.standard_normal((200, 1)))
    shifted = SampleSet(3 + rng.standard_normal((200, 1)))
    assert mmd2(x, shifted, 1.0) > mmd2(x, same, 1.0)


def test_symmetric_bit_for_bit(rng):
    for _ in range(20):
        x = SampleSet(rng.standard_normal((30, 5)))
        y = SampleSet(rng.standard_normal((45, 5)) + rng.random())
        assert mmd2(x, y) == mmd2(y, x)
        assert mmd2(x, y, 0.7) == mmd2(y, x, 0.7)


def test_never_negative(rng):
    for _ in range(50):
        x = SampleSet(rng.standard_normal((10, 2)))
        y = SampleSet(rng.standard_normal((12, 2)))
        assert mmd2(x, y) >= 0.0


@pytest.mark.parametrize("scale", [0.01, 3.7, 250.0])
@pytest.mark.parametrize("unbiased", [False, True])
def test_explicit_bandwidth_scales_with_the_samples(rng, scale, unbiased):
    x = SampleSet(rng.standard_normal((50, 6)))
    y = SampleSet(0.5 + rng.standard_normal((70, 6)))
    xs, ys = SampleSet(scale * x.samples), SampleSet(scale * y.samples)
    assert mmd2(xs, ys, scale * 1.3, unbiased=unbiased) == pytest.approx(
        mmd2(x, y, 1.3, unbiased=unbiased), rel=1e-9, abs=1e-12
    )


def test_median_bandwidth_is_scale_invariant(rng):
    x = SampleSet(rng.standard_normal((60, 4)))
    y = SampleSet(1 + rng.standard_normal((60, 4)))
    xs, ys = SampleSet(3.7 * x.samples), SampleSet(3.7 * y.samples)
    assert mmd2(xs, ys) == pytest.approx(mmd2(x, y), abs=1e-10)
    assert median_bandwidth(xs, ys) == pytest.approx(3.7 * median_bandwidth(x, y))


def test_degenerate_pool_falls_back_to_unit_bandwidth():
    x = SampleSet(np.ones((3, 2)))
    assert median_bandwidth(x, x) == 1.0


def test_unbiased_estimate_is_centered(rng):
    x = SampleSet(rng.standard_normal((300, 2)))
    y = SampleSet(rng.standard_normal((300, 2)))
    u = mmd2(x, y, 1.0, unbiased=True)
    assert abs(u) < 0.01
    assert u < mmd2(x, y, 1.0)


def test_input_errors(rng):
    x = SampleSet(rng.standard_normal((5, 2)))
    with pytest.raises(ShapeMismatchError):
        mmd2(x, SampleSet(rng.standard_normal((5, 3))))
    with pytest.raises(UsageError):
        mmd2(x, SampleSet(rng.standard_normal((1, 2))))
    for bw in (0.0, -1.0, float("inf")):
        with pytest.raises(UsageError):
            mmd2(x, x, bw)


# -------- scan

def test_scan_normalization(schedule, rng):
    ref = _clean(rng, 100, 4)
    deg = _degraded(rng, schedule, 200, 100, 4)
    points = mmd_scan(deg, ref, schedule, T_LIST, seed=5)
    assert [p.t for p in points] == T_LIST
    assert max(p.normalized for p in points) == 1.0
    assert all(0.0 <= p.normalized <= 1.0 for p in points)
    peak = max(p.mmd2 for p in points)
    assert all(p.normalized == p.mmd2 / peak for p in points)


def test_scan_is_deterministic(schedule, rng):
    ref = _clean(rng, 60, 4)
    deg = _degraded(rng, schedule, 300, 60, 4)
    assert mmd_scan(deg, ref, schedule, T_LIST, seed=9) == mmd_scan(deg, ref, schedule, T_LIST, seed=9)


def test_clean_input_prefers_no_noise(schedule, rng):
    ref = _clean(rng, 256, 8)
    deg = _clean(rng, 256, 8, "clean")
    assert select_stepsize(deg, ref, schedule, list(range(0, 1000, 100)), seed=3) == 0


def test_sweep_grows_with_noise_for_clean_input(schedule, rng):
    ref = _clean(rng, 256, 8)
    deg = _clean(rng, 256, 8, "clean")
    values = [p.mmd2 for p in mmd_scan(deg, ref, schedule, [0, 100, 200, 300, 400], seed=3)]
    assert all(b > a for a, b in zip(values, values[1:]))


def _planted_fixtures():
    # 50 planted problems cycling through dimensions and steps; d=256 is slow
    for i in range(50):
        d = (8, 64, 256)[i % 3]
        t_star = 100 + 50 * (i % 7)
        marks = [pytest.mark.slow] if d == 256 else []
        yield pytest.param(i, d, t_star, marks=marks, id=f"fixture{i}-d{d}-t{t_star}")


VALLEY_T = list(range(0, 700, 100))


@pytest.mark.parametrize("index, d, t_star", list(_planted_fixtures()))
def test_planted_step_is_recovered_with_one_valley(schedule, index, d, t_star):
    rng = np.random.default_rng(1000 + index)
    ref = _clean(rng, 256, d)
    deg = _degraded(rng, schedule, t_star, 256, d)

    chosen = select_stepsize(deg, ref, schedule, T_LIST, seed=index)
    assert abs(T_LIST.index(chosen) - T_LIST.index(t_star)) <= 1

    values = [p.mmd2 for p in mmd_scan(deg, ref, schedule, VALLEY_T, seed=index)]
    lowest = int(np.argmin(values))
    assert all(b < a for a, b in zip(values[:lowest], values[1:lowest + 1]))
    assert all(b > a for a, b in zip(values[lowest:], values[lowest + 1:]))


def test_stronger_degradation_never_selects_a_smaller_step(schedule, rng):
    ref = _clean(rng, 256, 64)
    base = _clean(rng, 256, 64, "degraded")
    chosen = [
        select_stepsize(forward_noise(base, t, schedule, seed=21), ref, schedule, T_LIST, seed=5)
        for t in (0, 100, 200, 300, 400)
    ]
    assert chosen == sorted(chosen)


def test_scan_rejects_bad_steps(schedule, rng):
    x = _clean(rng, 10, 2)
    with pytest.raises(UsageError):
        mmd_scan(x, x, schedule, [])
    with pytest.raises(UsageError):
        mmd_scan(x, x, schedule, [0, 1000])


def test_argmin_breaks_ties_toward_smaller_step():
    points = [ScanPoint(t=30, mmd2=0.1, normalized=0.5), ScanPoint(t=10, mmd2=0.1, normalized=0.5),
              ScanPoint(t=20, mmd2=0.2, normalized=1.0)]
    assert argmin_point(points).t == 10


# -------- offsets around the chosen step

def test_offset_profile_defaults_and_clipping(schedule, rng):
    ref = _clean(rng, 60, 4)
    deg = _degraded(rng, schedule, 100, 60, 4)
    profile = offset_profile(deg, ref, schedule, 10, seed=2)
    assert [p.offset for p in profile] == [-20, -15, -10, 0, 10, 20, 50]
    assert [p.t for p in profile] == [0, 0, 0, 10, 20, 30, 60]
    assert max(p.normalized for p in profile) == 1.0


def test_offset_profile_matches_scan(schedule, rng):
    ref = _clean(rng, 60, 4)
    deg = _degraded(rng, schedule, 300, 60, 4)
    profile = offset_profile(deg, ref, schedule, 300, offsets=[-50, 0, 50], seed=2)
    scan = mmd_scan(deg, ref, schedule, [250, 300, 350], seed=2)
    assert [p.mmd2 for p in profile] == [p.mmd2 for p in scan]


def test_offset_profile_top_clip(schedule, rng):
    x = _clean(rng, 10, 2)
    profile = offset_profile(x, x, schedule, 990, offsets=[0, 50], seed=1)
    assert [p.t for p in profile] == [990, 999]


def test_offset_profile_errors(schedule, rng):
    x = _clean(rng, 10, 2)
    with pytest.raises(UsageError):
        offset_profile(x, x, schedule, 10, offsets=[])
    with pytest.raises(UsageError):
        offset_profile(x, x, schedule, 5000)
