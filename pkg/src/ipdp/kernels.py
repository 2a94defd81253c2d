"""Hot numeric kernels.

Each kernel has two implementations with identical floating point
semantics: a loop version compiled with ``numba.njit`` and a vectorised
numpy version. The public names bind to the numba variant when the backend
is enabled (see ``ipdp._backend``), otherwise to the numpy one. Both
variants stay importable under ``*_numba`` / ``*_numpy`` for benchmarking
and cross-checking.
"""

import numpy as np

from ._backend import NUMBA_ENABLED, njit

__all__ = [
    "ema_update",
    "ema_step",
    "ema_scan",
    "rolling_max",
    "rolling_min",
    "equidistant",
]


def _ema_update_loops(state, values, alpha):
    beta = 1.0 - alpha
    for i in range(state.shape[0]):
        state[i] = beta * state[i] + alpha * values[i]


def _ema_update_numpy(state, values, alpha):
    state[:] = (1.0 - alpha) * state + alpha * values


def _ema_scan_loops(values, alpha, init):
    n, m = values.shape
    out = np.empty((n, m))
    beta = 1.0 - alpha
    prev = init.copy()
    for t in range(n):
        for k in range(m):
            prev[k] = beta * prev[k] + alpha * values[t, k]
            out[t, k] = prev[k]
    return out


def _ema_scan_numpy(values, alpha, init):
    out = np.empty(values.shape)
    prev = np.array(init, dtype=float)
    beta = 1.0 - alpha
    for t in range(values.shape[0]):
        prev = beta * prev + alpha * values[t]
        out[t] = prev
    return out


def _rolling_max_loops(values, window):
    # monotonic deque laid out in two flat index/value buffers
    n = values.shape[0]
    out = np.empty(n)
    idx = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for t in range(n):
        while tail > head and idx[head] <= t - window:
            head += 1
        x = values[t]
        while tail > head and values[idx[tail - 1]] <= x:
            tail -= 1
        idx[tail] = t
        tail += 1
        out[t] = values[idx[head]]
    return out


def _rolling_max_numpy(values, window):
    n = values.shape[0]
    if n == 0:
        return np.empty(0)
    w = min(window, n)
    padded = np.concatenate((np.full(w - 1, -np.inf), values))
    views = np.lib.stride_tricks.sliding_window_view(padded, w)
    return views.max(axis=1)


def _equidistant_loops(lo, hi, m):
    out = np.empty(m)
    span = hi - lo
    for k in range(m):
        v = lo + (k / (m - 1)) * span
        out[k] = min(max(v, lo), hi)
    out[m - 1] = hi
    return out


def _equidistant_numpy(lo, hi, m):
    out = np.clip(lo + (np.arange(m) / (m - 1)) * (hi - lo), lo, hi)
    out[-1] = hi
    return out


def _ema_step_loops(raw_grid, raw_est, points, ice, alpha, factor, out_grid, out_est):
    m = raw_grid.shape[0]
    beta = 1.0 - alpha
    total = 0.0
    for k in range(m):
        raw_grid[k] = beta * raw_grid[k] + alpha * points[k]
        raw_est[k] = beta * raw_est[k] + alpha * ice[k]
        out_grid[k] = raw_grid[k] / factor
        out_est[k] = raw_est[k] / factor
        total += out_est[k]
    mean = total / m
    ss = 0.0
    for k in range(m):
        d = out_est[k] - mean
        ss += d * d
    return np.sqrt(ss / (m - 1))


def _ema_step_numpy(raw_grid, raw_est, points, ice, alpha, factor, out_grid, out_est):
    _ema_update_numpy(raw_grid, points, alpha)
    _ema_update_numpy(raw_est, ice, alpha)
    np.divide(raw_grid, factor, out=out_grid)
    np.divide(raw_est, factor, out=out_est)
    return float(np.std(out_est, ddof=1))


if NUMBA_ENABLED:
    _ema_update_numba = njit(cache=True)(_ema_update_loops)
    _ema_scan_numba = njit(cache=True)(_ema_scan_loops)
    _rolling_max_numba = njit(cache=True)(_rolling_max_loops)
    _equidistant_numba = njit(cache=True)(_equidistant_loops)
    _ema_step_numba = njit(cache=True)(_ema_step_loops)
else:
    _ema_update_numba = _ema_update_loops
    _ema_scan_numba = _ema_scan_loops
    _rolling_max_numba = _rolling_max_loops
    _equidistant_numba = _equidistant_loops
    _ema_step_numba = _ema_step_loops

_ema_update_impl = _ema_update_numba if NUMBA_ENABLED else _ema_update_numpy
_ema_scan_impl = _ema_scan_numba if NUMBA_ENABLED else _ema_scan_numpy
_rolling_max_impl = _rolling_max_numba if NUMBA_ENABLED else _rolling_max_numpy
_equidistant_impl = _equidistant_numba if NUMBA_ENABLED else _equidistant_numpy
_ema_step_impl = _ema_step_numba if NUMBA_ENABLED else _ema_step_numpy


def ema_update(state: np.ndarray, values: np.ndarray, alpha: float) -> None:
    """In place: ``state <- (1 - alpha) * state + alpha * values``."""
    _ema_update_impl(state, np.asarray(values, dtype=float), float(alpha))


def ema_scan(values: np.ndarray, alpha: float, init: np.ndarray | None = None) -> np.ndarray:
    """Run the exponential moving average recursion over the rows of ``values``.

    Row ``t`` of the result is the state after absorbing ``values[t]``.
    """
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("values must be a 2-D array (time x points)")
    if init is None:
        init = np.zeros(values.shape[1])
    return _ema_scan_impl(values, float(alpha), np.asarray(init, dtype=float))


def rolling_max(values: np.ndarray, window: int) -> np.ndarray:
    """Maximum of the trailing ``min(window, t + 1)`` values at every position."""
    if window < 1:
        raise ValueError("window must be >= 1")
    return _rolling_max_impl(np.ascontiguousarray(values, dtype=float), int(window))


def rolling_min(values: np.ndarray, window: int) -> np.ndarray:
    return -rolling_max(-np.asarray(values, dtype=float), window)


def equidistant(lo: float, hi: float, m: int) -> np.ndarray:
    """``lo + (k / (m - 1)) * (hi - lo)`` for ``k = 0..m-1``; the last point is exactly ``hi``."""
    return _equidistant_impl(float(lo), float(hi), int(m))


def ema_step(raw_grid, raw_est, points, ice, alpha: float, factor: float):
    """One fused explainer step.

    Updates both moving averages in place, divides them by ``factor`` and
    returns ``(grid, estimates, sample_std_of_estimates)``.
    """
    m = raw_grid.shape[0]
    out_grid = np.empty(m)
    out_est = np.empty(m)
    imp = _ema_step_impl(raw_grid, raw_est, np.asarray(points, dtype=float), np.asarray(ice, dtype=float),
                         float(alpha), float(factor), out_grid, out_est)
    return out_grid, out_est, float(imp)
