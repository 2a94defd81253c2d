import os
import subprocess
import sys

import numpy as np
import pytest

from ipdp import kernels
from ipdp._backend import NUMBA_ENABLED


def brute_rolling_max(values, window):
    return np.array([values[max(0, t - window + 1): t + 1].max() for t in range(len(values))])


@pytest.mark.parametrize("window", [1, 3, 17, 1000])
def test_rolling_max_variants_match_brute_force(rng, window):
    values = rng.normal(size=600)
    expected = brute_rolling_max(values, window)
    np.testing.assert_array_equal(kernels._rolling_max_numpy(values, window), expected)
    np.testing.assert_array_equal(kernels._rolling_max_numba(values, window), expected)
    np.testing.assert_array_equal(kernels.rolling_min(values, window), -brute_rolling_max(-values, window))


def test_ema_scan_variants_identical(rng):
    values = rng.normal(size=(300, 7))
    init = rng.normal(size=7)
    a = kernels._ema_scan_numpy(values, 0.07, init)
    b = kernels._ema_scan_numba(values, 0.07, init)
    np.testing.assert_array_equal(a, b)
    # row t equals repeated scalar recursion
    state = init.copy()
    for t in range(values.shape[0]):
        state = (1 - 0.07) * state + 0.07 * values[t]
    np.testing.assert_array_equal(a[-1], state)


def test_ema_update_variants_identical(rng):
    s1 = rng.normal(size=20)
    s2 = s1.copy()
    v = rng.normal(size=20)
    kernels._ema_update_numpy(s1, v, 0.3)
    kernels._ema_update_numba(s2, v, 0.3)
    np.testing.assert_array_equal(s1, s2)


def test_ema_step_variants_agree(rng):
    args = [rng.normal(size=12) for _ in range(4)]
    outs = []
    for impl in (kernels._ema_step_numpy, kernels._ema_step_numba):
        g, e, p, i = (a.copy() for a in args)
        og, oe = np.empty(12), np.empty(12)
        imp = impl(g, e, p, i, 0.2, 0.5, og, oe)
        outs.append((g, e, og, oe, imp))
    for a, b in zip(outs[0][:4], outs[1][:4]):
        np.testing.assert_array_equal(a, b)
    assert outs[0][4] == pytest.approx(outs[1][4], rel=1e-14)
    assert outs[0][4] == pytest.approx(np.std(outs[0][3], ddof=1), rel=1e-14)


@pytest.mark.parametrize("lo, hi, m", [(0.0, 1.0, 2), (0.0, 10.0, 5), (3.0, 3.0, 4), (-7.3, 1e5, 20), (0.1, 0.3, 7)])
def test_equidistant_variants(lo, hi, m):
    a = kernels._equidistant_numpy(lo, hi, m)
    b = kernels._equidistant_numba(lo, hi, m)
    np.testing.assert_array_equal(a, b)
    assert a[0] == lo and a[-1] == hi
    assert np.all(np.diff(a) >= 0)


def test_backend_flag_selects_numpy():
    env = dict(os.environ, IPDP_DISABLE_NUMBA="1")
    code = "import ipdp, ipdp.kernels as k; print(ipdp.BACKEND, k._ema_scan_impl is k._ema_scan_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


@pytest.mark.skipif(not NUMBA_ENABLED, reason="numba backend disabled")
def test_numba_backend_active():
    assert kernels._ema_scan_impl is kernels._ema_scan_numba
