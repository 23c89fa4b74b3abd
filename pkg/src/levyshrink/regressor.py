"""Scikit-learn style wrapper around the selection pipeline."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .noise import SamplePath
from .risk import default_delta, default_r
from .selection import GridParams, pinsker_grid, select, sigma_from_coeffs
from .shrinkage import ShrinkageConfig, estimate_fourier, eval_series, shrink_coeffs


class ShrinkageSeriesRegressor(BaseEstimator, RegressorMixin):
    """Adaptive series estimator fitted on a continuous-time sample path.

    fit() takes a SamplePath, selects weights on the Pinsker grid by
    penalized cost minimization with the shrinkage correction, and stores
    the reconstruction coefficients.  predict() evaluates the fitted
    signal at time points (interpreted modulo the unit period).
    """

    def __init__(self, sigma_lower: float = 0.25, sigma_upper: float = 0.5,
                 r_n: Optional[float] = None, delta: Optional[float] = None,
                 grid: Optional[GridParams] = None, shrink: bool = True):
        self.sigma_lower = sigma_lower
        self.sigma_upper = sigma_upper
        self.r_n = r_n
        self.delta = delta
        self.grid = grid
        self.shrink = shrink

    def fit(self, path: SamplePath, y=None):
        if not isinstance(path, SamplePath):
            raise TypeError("fit expects a SamplePath")
        n = path.n
        est = estimate_fourier(path)
        sigma_hat = sigma_from_coeffs(est.coeffs, n)
        grid = pinsker_grid(n, self.grid if self.grid is not None else GridParams.reference(n))
        cfg = ShrinkageConfig(self.sigma_lower, self.sigma_upper,
                              self.r_n if self.r_n is not None else default_r(n))
        delta = self.delta if self.delta is not None else default_delta(n)
        outcome = select(est, grid, cfg, sigma_hat, delta, shrink=self.shrink)
        star = shrink_coeffs(est, outcome.chosen, outcome.threshold)
        self.n_ = n
        self.sigma_hat_ = sigma_hat
        self.selection_ = outcome
        self.coef_ = outcome.chosen.weights * star
        return self

    def predict(self, t) -> np.ndarray:
        if not hasattr(self, "coef_"):
            raise NotFittedError("call fit before predict")
        return eval_series(self.coef_, np.asarray(t, dtype=float) % 1.0)
