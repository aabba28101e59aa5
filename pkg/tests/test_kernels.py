import numpy as np
import pytest

from pairlink import _sweep_numpy

_sweepcore = pytest.importorskip(
    "pairlink._sweepcore", reason="compiled kernel backend not built"
)


@pytest.mark.parametrize("na,nb", [(0, 10), (10, 0), (1000, 1300), (5000, 200)])
def test_count_lags_backends_identical(rng, na, nb):
    a = np.sort(rng.random(na) * 1e7)
    b = np.sort(rng.random(nb) * 1e7)
    args = (a, b, -4000.0, 8.0, 1000)
    assert np.array_equal(np.asarray(_sweepcore.count_lags(*args)),
                          _sweep_numpy.count_lags(*args))


@pytest.mark.parametrize("lo,hi", [(-35.0, 35.0), (-1000.0, -900.0), (0.0, 0.0)])
def test_match_mask_backends_identical(rng, lo, hi):
    a = np.sort(rng.random(3000) * 1e6)
    b = np.sort(rng.random(2500) * 1e6)
    assert np.array_equal(np.asarray(_sweepcore.match_mask(a, b, lo, hi)),
                          _sweep_numpy.match_mask(a, b, lo, hi))


def test_exact_boundary_inclusion():
    # herald windows are closed intervals on both ends
    a = np.array([100.0])
    b = np.array([90.0, 110.0])
    for impl in (_sweepcore, _sweep_numpy):
        assert np.asarray(impl.match_mask(a, b, -10.0, -10.0)).tolist() == [True]
        assert np.asarray(impl.match_mask(a, b, 10.0, 10.0)).tolist() == [True]
        assert np.asarray(impl.match_mask(a, b, -9.0, 9.0)).tolist() == [False]
