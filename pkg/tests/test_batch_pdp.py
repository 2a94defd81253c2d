import numpy as np
import pytest

from ipdp.batch_pdp import Dataset, batch_pdp, default_grid, ice_curve, ice_matrix
from ipdp.errors import ConfigError, SchemaError
from ipdp.model_api import ConstantModel, LinearModel, from_function


@pytest.fixture
def data(rng):
    return Dataset(rng.normal(size=(400, 3)), ["x1", "x2", "x3"])


def test_identity_model_pdp_is_grid(data):
    grid = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(batch_pdp(from_function(lambda x: x["x1"]), data, "x1", grid), grid)


def test_product_model_hand_value():
    data = Dataset([[0.0, 1.0], [5.0, 3.0], [-1.0, 1.0], [2.0, 3.0]], ["x1", "x2"])
    grid = [-1.0, 0.0, 2.5]
    np.testing.assert_allclose(batch_pdp(from_function(lambda x: x["x1"] * x["x2"]), data, "x1", grid),
                               [-2.0, 0.0, 5.0])


def test_constant_model(data):
    np.testing.assert_array_equal(batch_pdp(ConstantModel(1.5), data, "x2", [0, 1, 2]), 1.5)
    np.testing.assert_array_equal(ice_curve(ConstantModel(1.5), {"x1": 0.0}, "x1", [0, 1]), 1.5)


def test_ice_curve_direct():
    model = from_function(lambda x: x["x1"] + x["x2"])
    np.testing.assert_array_equal(ice_curve(model, {"x1": 9.0, "x2": 5.0}, "x1", [0, 1]), [5, 6])


@pytest.mark.parametrize("vectorised", [True, False])
def test_ice_mean_identity(data, vectorised):
    fn = lambda x: np.tanh(x["x1"] * x["x2"]) + x["x3"] ** 2
    model = from_function(fn)
    if vectorised:
        model = LinearModel({"x1": 0.3, "x2": -1.0, "x3": 2.0}, 0.1)
    grid = default_grid(data, "x1", 20)
    curves = np.array([ice_curve(model, row, "x1", grid) for row in data.rows()])
    np.testing.assert_allclose(curves.mean(axis=0), batch_pdp(model, data, "x1", grid), rtol=0, atol=1e-12)
    np.testing.assert_allclose(ice_matrix(model, data, "x1", grid), curves, rtol=0, atol=1e-12)


def test_permutation_invariance(data, rng):
    model = from_function(lambda x: np.sin(x["x1"]) * x["x2"] + x["x3"])
    grid = np.linspace(-1, 1, 7)
    shuffled = Dataset(data.X[rng.permutation(len(data))], data.schema)
    np.testing.assert_allclose(batch_pdp(model, data, "x1", grid), batch_pdp(model, shuffled, "x1", grid),
                               rtol=0, atol=1e-12)


def test_subsample_consistency(rng):
    X = rng.normal(size=(4000, 2))
    model = LinearModel({"x1": 1.0, "x2": 2.0})
    grid = np.linspace(-1, 1, 5)
    halves = [Dataset(X[:2000], ["x1", "x2"]), Dataset(X[2000:], ["x1", "x2"])]
    a, b = (batch_pdp(model, h, "x1", grid) for h in halves)
    ice_std = ice_matrix(model, halves[0], "x1", grid).std(axis=0)
    assert np.all(np.abs(a - b) <= 3 * ice_std / np.sqrt(2000))


def test_default_grid(data):
    grid = default_grid(data, "x2")
    assert len(grid) == 20
    assert grid[0] == data.column("x2").min() and grid[-1] == data.column("x2").max()


def test_errors(data):
    with pytest.raises(ConfigError):
        Dataset(np.empty((0, 2)), ["a", "b"])
    with pytest.raises(SchemaError):
        batch_pdp(ConstantModel(0.0), data, "nope", [0.0])
    with pytest.raises(ConfigError):
        batch_pdp(ConstantModel(0.0), data, "x1", [])
    with pytest.raises(SchemaError):
        Dataset.from_records([{"a": 1.0}, {"b": 2.0}])
