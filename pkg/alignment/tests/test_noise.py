import numpy as np
import pytest

from alignment.noise import NoiseSchedule, SampleSet, forward_noise
from core.errors import NonFiniteError, ShapeMismatchError, UsageError


@pytest.fixture
def schedule():
    return NoiseSchedule.linear(1000, 1e-4, 0.02)


def test_linear_schedule(schedule):
    assert schedule.total_steps == 1000
    assert schedule.betas[0] == pytest.approx(1e-4) and schedule.betas[-1] == pytest.approx(0.02)
    assert schedule.alpha_bars[0] == pytest.approx(1 - 1e-4)
    assert np.all(np.diff(schedule.alpha_bars) < 0)
    assert 0 < schedule.alpha_bars[-1] < 1e-3


def test_schedule_defaults_come_from_settings():
    assert NoiseSchedule.linear().total_steps == 1000


def test_schedule_is_read_only(schedule):
    with pytest.raises(ValueError):
        schedule.alpha_bars[0] = 0.5


@pytest.mark.parametrize("betas", [[], [0.0, 0.1], [0.5, 1.0], [0.1, float("nan")]])
def test_schedule_rejects_bad_betas(betas):
    with pytest.raises(UsageError):
        NoiseSchedule(betas=betas)


@pytest.mark.parametrize("kwargs", [{"total_steps": 0}, {"beta_start": 0.0}, {"beta_end": 0.0}])
def test_explicit_zero_arguments_are_not_defaulted(kwargs):
    with pytest.raises(UsageError):
        NoiseSchedule.linear(**kwargs)


@pytest.mark.parametrize("t", [-1, 1000, 2.5, "3"])
def test_step_out_of_range(schedule, t):
    with pytest.raises(UsageError):
        schedule.check_step(t)


def test_numpy_integer_steps_are_accepted(schedule):
    assert schedule.check_step(np.int64(999)) == 999


def test_sample_set_shapes():
    assert SampleSet(np.arange(5.0)).samples.shape == (5, 1)
    s = SampleSet(np.ones((4, 3)), label="x")
    assert (s.n, s.dim) == (4, 3)
    with pytest.raises(ShapeMismatchError):
        SampleSet(np.ones((2, 2, 2)))
    with pytest.raises(NonFiniteError):
        SampleSet(np.array([[0.0, np.inf]]))


def test_step_zero_barely_moves_samples(schedule, rng):
    x0 = SampleSet(3 + 0.5 * rng.standard_normal((2000, 4)))
    xt = forward_noise(x0, 0, schedule, seed=1)
    assert np.std(xt.samples - x0.samples) == pytest.approx(0.01, rel=0.1)


def test_last_step_is_nearly_standard_normal(schedule, rng):
    x0 = SampleSet(3 + 0.5 * rng.standard_normal(100_000))
    xt = forward_noise(x0, 999, schedule, seed=2).samples.ravel()
    abar = schedule.alpha_bars[999]
    assert np.var(xt) == pytest.approx(1.0, abs=0.02)
    assert np.mean(xt) == pytest.approx(3 * np.sqrt(abar), abs=0.015)


def test_forward_noise_is_seeded(schedule, rng):
    x0 = SampleSet(rng.standard_normal((50, 3)), label="ref")
    a = forward_noise(x0, 300, schedule, seed=7)
    assert np.array_equal(a.samples, forward_noise(x0, 300, schedule, seed=7).samples)
    assert not np.array_equal(a.samples, forward_noise(x0, 300, schedule, seed=8).samples)
    assert a.label == "ref@t=300"


def test_forward_noise_rejects_bad_step(schedule, rng):
    with pytest.raises(UsageError):
        forward_noise(SampleSet(rng.standard_normal((5, 2))), 1000, schedule)
