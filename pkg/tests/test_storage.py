import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ipdp.errors import ConfigError, EmptyStoreError, InvalidQuantileError, InvalidValueError
from ipdp.storage import ExtremeValueStore, FrequencyReservoir, MinMaxStore, rolling_extremes


def feed(store, values):
    for t, v in enumerate(values, start=1):
        store.update(v, t)
    return store


def test_increasing_stream_collapses():
    store = feed(ExtremeValueStore(3), [1, 2, 3])
    assert store.values() == [3]
    assert store.query_max() == 3


def test_decreasing_stream_fills_store():
    store = feed(ExtremeValueStore(3), [3, 2, 1])
    assert store.values() == [3, 2, 1]
    assert len(store) == 3


def test_single_update_and_min_twin():
    assert feed(ExtremeValueStore(5), [7]).query_max() == 7
    mm = MinMaxStore(3)
    for v in [3, 2, 1]:
        mm.update(v)
    assert mm.query_min() == 1 and mm.query_max() == 3


def test_ties_keep_newest():
    store = feed(ExtremeValueStore(10), [5, 5, 5])
    assert store.entries[0] == (5.0, 3)


def test_errors():
    with pytest.raises(EmptyStoreError):
        ExtremeValueStore(2).query_max()
    with pytest.raises(InvalidValueError):
        ExtremeValueStore(2).update(math.inf, 1)
    store = feed(ExtremeValueStore(2), [1.0])
    with pytest.raises(ValueError):
        store.update(2.0, 1)
    with pytest.raises(ConfigError):
        ExtremeValueStore(0)


@pytest.mark.parametrize("k", [1, 2, 500])
def test_rolling_max_matches_brute_force(rng, k):
    values = rng.uniform(size=100_000) if k == 500 else rng.uniform(size=5000)
    store = ExtremeValueStore(k)
    for t, v in enumerate(values.tolist(), start=1):
        store.update(v, t)
        if t % 7 == 0 or t < 600:
            assert store.query_max() == values[max(0, t - k): t].max()
        assert len(store) <= k


@settings(max_examples=80, deadline=None)
@given(values=st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=80), k=st.integers(1, 12))
def test_store_properties(values, k):
    store = ExtremeValueStore(k)
    mm = MinMaxStore(k)
    for t, v in enumerate(values, start=1):
        store.update(v, t)
        mm.update(v)
        window = values[max(0, t - k): t]
        assert store.query_max() == max(window)
        assert mm.query_min() == min(window)
        vals = store.values()
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert all(t - born < k for _, born in store.entries)


def test_vectorised_rolling_extremes_match_store(rng):
    values = rng.normal(size=3000)
    lo, hi = rolling_extremes(values, 50)
    mm = MinMaxStore(50)
    for i, v in enumerate(values):
        mm.update(v)
        assert (lo[i], hi[i]) == mm.range()


def test_reservoir_oldest_first_trace():
    res = FrequencyReservoir(3, p_inc=1.0, policy="oldest")
    for v in [1, 2, 3, 4]:
        res.update(v)
    assert list(res.slots) == [2, 3, 4]


def test_reservoir_holds_full_stream_when_large():
    res = FrequencyReservoir(10, p_inc=1.0)
    for v in range(7):
        res.update(v)
    assert list(res.slots) == list(range(7))


def test_effective_window():
    assert FrequencyReservoir(100, p_inc=0.05).effective_window == pytest.approx(2000)


def test_quantiles():
    res = FrequencyReservoir(100)
    for v in range(1, 101):
        res.update(v)
    assert res.quantile(0.5) == 50
    assert res.quantile(0.0) == 1
    assert res.quantile(1.0) == 100
    const = FrequencyReservoir(5)
    for _ in range(9):
        const.update(2.5)
    assert {const.quantile(q) for q in (0, 0.3, 0.5, 1)} == {2.5}


def test_full_reservoir_quantile_is_exact(rng):
    data = rng.uniform(size=500)
    res = FrequencyReservoir(500)
    for v in data:
        res.update(v)
    exact = np.percentile(data, 95, method="inverted_cdf")
    assert abs(res.quantile(0.95) - exact) == 0


def test_quantile_errors():
    res = FrequencyReservoir(3)
    with pytest.raises(EmptyStoreError):
        res.quantile(0.5)
    res.update(1.0)
    with pytest.raises(InvalidQuantileError):
        res.quantile(1.5)
    with pytest.raises(InvalidValueError):
        res.update(float("nan"))
    with pytest.raises(ConfigError):
        FrequencyReservoir(3, p_inc=0.0)
    with pytest.raises(ConfigError):
        FrequencyReservoir(3, policy="newest")


@settings(max_examples=50, deadline=None)
@given(values=st.lists(st.floats(-100, 100), max_size=60), cap=st.integers(1, 8),
       p=st.floats(0.05, 1.0), policy=st.sampled_from(["oldest", "uniform"]))
def test_reservoir_capacity_and_window(values, cap, p, policy):
    res = FrequencyReservoir(cap, p_inc=p, policy=policy, seed=3)
    exact = FrequencyReservoir(cap, p_inc=1.0, policy="oldest")
    for i, v in enumerate(values):
        res.update(v)
        exact.update(v)
        assert len(res) <= cap
        assert list(exact.slots) == values[max(0, i + 1 - cap): i + 1]


def test_reservoir_seed_determinism(rng):
    data = rng.normal(size=2000)
    a = FrequencyReservoir(50, p_inc=0.3, policy="uniform", seed=11)
    b = FrequencyReservoir(50, p_inc=0.3, policy="uniform", seed=11)
    for v in data:
        a.update(v)
        b.update(v)
    assert list(a.slots) == list(b.slots)


def test_uniform_victim_survival_probability():
    # survival of a tagged element over m replacement events should be (1 - 1/L)^m
    L, m, trials = 10, 15, 20_000
    survived = 0
    for seed in range(trials):
        res = FrequencyReservoir(L, p_inc=1.0, policy="uniform", seed=seed)
        for v in range(L - 1):
            res.update(0.0)
        res.update(1.0)  # tagged value, fills the reservoir
        for _ in range(m):
            res.update(0.0)
        survived += 1.0 in res.slots
    p = (1 - 1 / L) ** m
    se = math.sqrt(p * (1 - p) / trials)
    assert abs(survived / trials - p) <= 3 * se
