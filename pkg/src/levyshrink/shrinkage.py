"""Fourier-coefficient estimation and the shrinkage (improved) estimator.

Coefficient estimates are stochastic integrals of the basis against the
observed path, divided by the horizon.  The shrinkage step scales the
first d estimates towards zero by a data-independent threshold divided by
their Euclidean norm, leaving all later coordinates untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import basis_matrix
from .noise import SamplePath


class DegenerateHeadError(ValueError):
    """Raised when the shrinkage head has exactly zero norm but a positive threshold."""


@dataclass(eq=False)
class FourierEstimate:
    """Estimated coefficients theta_hat_1..theta_hat_n for a horizon-n path."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.n,):
            raise ValueError(f"expected {self.n} coefficients, got {self.coeffs.size}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficient estimates contain non-finite values")


@dataclass(eq=False)
class WeightVector:
    """Weights in [0, 1]^n whose first `head` entries equal one.

    Optional metadata (beta, r, omega) records the grid point the vector
    came from, when applicable.
    """

    weights: np.ndarray
    head: int
    beta: Optional[int] = None
    r: Optional[float] = None
    omega: Optional[float] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        w = self.weights
        if w.ndim != 1:
            raise ValueError("weights must be a 1-d vector")
        if np.any(w < -1e-12) or np.any(w > 1.0 + 1e-12):
            raise ValueError("weights must lie in [0, 1]")
        if self.head < 0 or self.head > w.size:
            raise ValueError(f"head length {self.head} out of range")
        if self.head and np.any(w[: self.head] != 1.0):
            raise ValueError("the first `head` weights must equal one")

    @classmethod
    def from_weights(cls, weights, **meta) -> "WeightVector":
        w = np.asarray(weights, dtype=float)
        below = np.flatnonzero(w < 1.0)
        head = int(below[0]) if below.size else w.size
        return cls(weights=w, head=head, **meta)

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def L(self) -> float:
        """Sum of the weights."""
        return float(self.weights.sum())

    @property
    def norm_sq(self) -> float:
        """Sum of squared weights."""
        return float(np.dot(self.weights, self.weights))

    @property
    def last_nonzero(self) -> int:
        nz = np.flatnonzero(self.weights)
        return int(nz[-1]) + 1 if nz.size else 0


@dataclass(frozen=True)
class ShrinkageConfig:
    """Variance bounds and the norm-bound sequence entering the threshold."""

    sigma_lower: float
    sigma_upper: float
    r_n: float

    def __post_init__(self):
        if self.sigma_lower <= 0 or self.sigma_upper <= 0:
            raise ValueError("variance bounds must be positive")
        if self.sigma_lower > self.sigma_upper:
            raise ValueError("sigma_lower must not exceed sigma_upper")
        if self.r_n <= 0:
            raise ValueError("r_n must be positive")


_BASIS_CACHE: dict = {}


def _fold_basis(jmax: int, p: int, dt: float) -> np.ndarray:
    key = (jmax, p)
    mat = _BASIS_CACHE.get(key)
    if mat is None:
        mat = basis_matrix(jmax, np.arange(p) * dt)
        if len(_BASIS_CACHE) > 8:
            _BASIS_CACHE.clear()
        _BASIS_CACHE[key] = mat
    return mat


def estimate_fourier(path: SamplePath, jmax: Optional[int] = None) -> FourierEstimate:
    """Coefficient estimates (1/n) * integral of each basis element against dy.

    Uses the periodicity of the basis: increments are folded over periods
    before a single matrix product, which reproduces the left-endpoint
    Riemann-Stieltjes sum exactly up to round-off.
    """
    if path.n < 2:
        raise ValueError(f"horizon must be >= 2, got {path.n}")
    j = path.n if jmax is None else jmax
    folded = path.folded_increments()
    mat = _fold_basis(j, path.steps_per_unit, path.dt)
    coeffs = mat @ folded / path.n
    return FourierEstimate(n=j, coeffs=coeffs)


def weighted_lse(est: FourierEstimate, wv: WeightVector) -> np.ndarray:
    """Componentwise product lambda(j) * theta_hat_j."""
    if wv.n != est.coeffs.size:
        raise ValueError(f"weight length {wv.n} does not match {est.coeffs.size} coefficients")
    return wv.weights * est.coeffs


def shrink_threshold(wv: WeightVector, cfg: ShrinkageConfig, n: int) -> float:
    """Shrinkage threshold c_n(lambda); zero whenever the head has length <= 1."""
    d = wv.head
    if d <= 1:
        return 0.0
    return (d - 1) * cfg.sigma_lower / ((cfg.r_n + math.sqrt(d * cfg.sigma_upper / n)) * n)


def shrink_coeffs(est: FourierEstimate, wv: WeightVector, c: float) -> np.ndarray:
    """Scale the first `head` coefficient estimates by (1 - c / |head norm|)."""
    if c < 0:
        raise ValueError(f"threshold must be nonnegative, got {c}")
    out = est.coeffs.copy()
    d = wv.head
    if c == 0.0 or d == 0:
        return out
    norm = float(np.linalg.norm(out[:d]))
    if norm == 0.0:
        raise DegenerateHeadError(
            "head coefficients are exactly zero; shrinkage factor is undefined"
        )
    out[:d] *= 1.0 - c / norm
    return out


def improved_estimator(est: FourierEstimate, wv: WeightVector,
                       cfg: ShrinkageConfig, n: int) -> np.ndarray:
    """Weighted reconstruction coefficients of the shrinkage estimator."""
    c = shrink_threshold(wv, cfg, n)
    return wv.weights * shrink_coeffs(est, wv, c)


def eval_series(coeffs, t) -> np.ndarray:
    """Evaluate sum_j coeffs_j * basis_j(t); trailing zero coefficients are skipped."""
    ca = np.asarray(coeffs, dtype=float)
    nz = np.flatnonzero(ca)
    if not nz.size:
        out = np.zeros_like(np.asarray(t, dtype=float))
        return float(out) if np.ndim(t) == 0 else out
    jmax = int(nz[-1]) + 1
    out = ca[:jmax] @ basis_matrix(jmax, t)
    if np.ndim(t) == 0:
        return float(out[0])
    return out
