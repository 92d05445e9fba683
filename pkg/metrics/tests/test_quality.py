import math

import numpy as np
import pytest

from core.errors import ShapeMismatchError, UsageError
from metrics.quality import IDENTICAL, psnr, psnr_label
from tensor_store.archive import Tensor


def test_identical_inputs():
    a = np.arange(12.0).reshape(3, 4)
    assert psnr(a, a.copy()) == math.inf
    assert psnr_label(psnr(a, a)) == IDENTICAL == "identical"


def test_uniform_error_of_a_tenth():
    a = np.zeros((8, 8))
    assert psnr(a, a + 0.1, peak=1.0) == pytest.approx(20.0)


def test_matches_direct_formula(rng):
    for _ in range(50):
        a, b = rng.random((5, 7)), rng.random((5, 7))
        peak = float(rng.uniform(0.5, 4.0))
        mse = np.mean((a - b) ** 2)
        assert psnr(a, b, peak) == pytest.approx(10 * np.log10(peak ** 2 / mse), rel=1e-12)


def test_symmetric_and_shift_invariant(rng):
    a, b = rng.random((6, 6)), rng.random((6, 6))
    assert psnr(a, b) == psnr(b, a)
    assert psnr(a + 5.0, b + 5.0) == pytest.approx(psnr(a, b), rel=1e-10)


def test_default_peak_is_one(rng):
    a, b = rng.random(20), rng.random(20)
    assert psnr(a, b) == psnr(a, b, 1.0)


def test_accepts_tensors(rng):
    a = rng.random((3, 3))
    b = a + 0.01
    assert psnr(Tensor("a", a), Tensor("b", b)) == pytest.approx(psnr(a, b))


def test_errors():
    with pytest.raises(ShapeMismatchError):
        psnr(np.zeros(3), np.zeros(4))
    with pytest.raises(UsageError):
        psnr(np.zeros(3), np.zeros(3), peak=0.0)
    with pytest.raises(UsageError):
        psnr(np.zeros(0), np.zeros(0))


def test_label_rounds_finite_values():
    assert psnr_label(31.234567) == 31.2346
    assert psnr_label(-2.0) == -2.0
