import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from levyshrink.basis import PeriodicSignal, l2_norm_sq
from levyshrink.noise import LevyNoiseSpec, simulate_path
from levyshrink.regressor import ShrinkageSeriesRegressor
from levyshrink.selection import GridParams


@pytest.fixture(scope="module")
def fitted():
    path = simulate_path(LevyNoiseSpec.reference(), PeriodicSignal.reference(), 100, 1e-3, seed=31)
    return ShrinkageSeriesRegressor().fit(path), path


def test_fit_sets_state(fitted):
    reg, path = fitted
    assert reg.n_ == 100
    assert reg.sigma_hat_ > 0
    assert reg.coef_.shape == (100,)
    assert reg.selection_.chosen.weights.size == 100


def test_predict_tracks_signal(fitted):
    reg, _ = fitted
    t = np.linspace(0, 1, 2001)
    pred = reg.predict(t)
    truth = PeriodicSignal.reference()(t)
    mse = float(np.mean((pred - truth) ** 2))
    assert mse < 0.5 * l2_norm_sq(PeriodicSignal.reference())
    # periodic extension
    np.testing.assert_allclose(reg.predict(t + 1.0), pred, atol=1e-10)
    assert np.isscalar(float(np.asarray(reg.predict(0.5))))


def test_requires_sample_path():
    with pytest.raises(TypeError):
        ShrinkageSeriesRegressor().fit(np.zeros(101))


def test_not_fitted_error():
    with pytest.raises(NotFittedError):
        ShrinkageSeriesRegressor().predict([0.1])


def test_sklearn_params_roundtrip():
    reg = ShrinkageSeriesRegressor(sigma_lower=0.1, delta=0.05,
                                   grid=GridParams(k_n=3, rho_n=0.5, sigma_bar=0.5))
    params = reg.get_params()
    assert params["sigma_lower"] == 0.1
    assert params["delta"] == 0.05
    cloned = clone(reg)
    assert cloned.get_params() == params
    cloned.set_params(shrink=False)
    assert cloned.shrink is False


def test_shrink_toggle_changes_nothing_on_short_heads():
    """On the reference grid at n = 60 the head is at most 1, so both match."""
    path = simulate_path(LevyNoiseSpec.reference(), PeriodicSignal.reference(), 60, 0.01, seed=8)
    a = ShrinkageSeriesRegressor(shrink=True).fit(path)
    b = ShrinkageSeriesRegressor(shrink=False).fit(path)
    np.testing.assert_array_equal(a.coef_, b.coef_)
