import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from humbert_volterra.errors import RegimeError
from humbert_volterra.estimators import ForwardTransformer, InverseTransformer
from humbert_volterra.operators import GridFunction, Parameters, forward_N

GRID = np.linspace(0.0, 0.95, 39)


def test_params_round_trip_through_clone():
    est = ForwardTransformer(GRID, alpha=-0.05, beta=-0.45, lam=2.0, n_nodes=32)
    params = est.get_params()
    assert params["lam"] == 2.0 and params["n_nodes"] == 32
    twin = clone(est)
    assert twin.get_params()["beta"] == -0.45
    assert not hasattr(twin, "params_")


def test_transform_matches_operator():
    X = np.vstack([1 + GRID**2, np.cos(GRID)])
    est = ForwardTransformer(GRID, lam=1.0).fit()
    out = est.transform(X)
    assert out.shape == X.shape
    assert np.all(out[:, 0] == 0)
    ref = forward_N(GridFunction(GRID, X[1]), GRID[1:], Parameters(-0.1, -0.3, 1.0))
    np.testing.assert_allclose(out[1, 1:], ref, rtol=1e-14)


def test_round_trip_away_from_origin():
    X = (1 + GRID**2)[None, :]
    est = ForwardTransformer(GRID, lam=-1.0).fit()
    back = est.inverse_transform(est.transform(X))
    inner = GRID >= 0.2
    # splining the x^(1 - 2 beta) image costs accuracy, not correctness
    assert np.max(np.abs(back[0, inner] - X[0, inner])) < 2e-2


def test_inverse_transformer_is_mirror():
    X = (GRID**2)[None, :]
    fwd = ForwardTransformer(GRID).fit()
    inv = InverseTransformer(GRID).fit()
    np.testing.assert_array_equal(inv.transform(X), fwd.inverse_transform(X))
    np.testing.assert_array_equal(inv.inverse_transform(X), fwd.transform(X))


def test_fit_transform():
    X = (1 + GRID**2)[None, :]
    est = ForwardTransformer(GRID)
    np.testing.assert_array_equal(est.fit_transform(X), est.transform(X))


def test_validation():
    with pytest.raises(NotFittedError):
        ForwardTransformer(GRID).transform(GRID[None, :])
    with pytest.raises(ValueError):
        ForwardTransformer(GRID).fit().transform(np.ones((1, 5)))
    with pytest.raises(ValueError):
        ForwardTransformer(GRID[::-1]).fit()
    with pytest.raises(RegimeError):
        ForwardTransformer(GRID, alpha=0.1).fit()
