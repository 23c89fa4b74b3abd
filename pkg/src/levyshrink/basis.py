"""Trigonometric basis, periodic signals and quadrature helpers.

The basis is orthonormal on [0, 1] and extended 1-periodically: the first
element is the constant 1, then pairs of cosines and sines at integer
frequencies.  All elements are bounded by sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

SQRT2 = math.sqrt(2.0)

#: sup-norm bound shared by every basis element
SUP_BOUND = SQRT2

#: number of quadrature nodes used by default (uniform grid on [0, 1])
DEFAULT_QUAD_POINTS = 100_001


def trig_basis(j: int, x):
    """Evaluate the j-th basis element at x (scalar or array).

    j = 1 is the constant 1; even j gives sqrt(2)*cos(2*pi*(j//2)*x),
    odd j >= 3 gives sqrt(2)*sin(2*pi*(j//2)*x).
    """
    if j < 1:
        raise ValueError(f"basis index must be >= 1, got {j}")
    xa = np.asarray(x, dtype=float)
    if j == 1:
        out = np.ones_like(xa)
    else:
        k = j // 2
        if j % 2 == 0:
            out = SQRT2 * np.cos(2.0 * np.pi * k * xa)
        else:
            out = SQRT2 * np.sin(2.0 * np.pi * k * xa)
    if np.ndim(x) == 0:
        return float(out)
    return out


def basis_matrix(jmax: int, x) -> np.ndarray:
    """Stack the first jmax basis elements evaluated at x, shape (jmax, len(x))."""
    if jmax < 1:
        raise ValueError(f"jmax must be >= 1, got {jmax}")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((jmax, xa.size))
    out[0] = 1.0
    ang = 2.0 * np.pi * xa
    for j in range(2, jmax + 1):
        k = j // 2
        if j % 2 == 0:
            out[j - 1] = SQRT2 * np.cos(k * ang)
        else:
            out[j - 1] = SQRT2 * np.sin(k * ang)
    return out


def reference_signal(t):
    """Reference test signal t*sin(2*pi*t) + t^2*(1-t)*cos(4*pi*t), 1-periodic."""
    ta = np.asarray(t, dtype=float) % 1.0
    out = ta * np.sin(2.0 * np.pi * ta) + ta**2 * (1.0 - ta) * np.cos(4.0 * np.pi * ta)
    if np.ndim(t) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PeriodicSignal:
    """A 1-periodic real signal, evaluated through `evaluator` on [0, 1)."""

    evaluator: Callable
    label: Optional[str] = None

    def __call__(self, t):
        ta = np.asarray(t, dtype=float) % 1.0
        out = np.asarray(self.evaluator(ta), dtype=float)
        if np.ndim(t) == 0:
            return float(out)
        return out

    @classmethod
    def zero(cls) -> "PeriodicSignal":
        return cls(lambda t: np.zeros_like(np.asarray(t, dtype=float)), label="zero")

    @classmethod
    def reference(cls) -> "PeriodicSignal":
        return cls(reference_signal, label="reference")

    @classmethod
    def from_basis(cls, j: int) -> "PeriodicSignal":
        return cls(lambda t, j=j: trig_basis(j, t), label=f"trig:{j}")

    @classmethod
    def from_samples(cls, t: Sequence[float], values: Sequence[float],
                     label: Optional[str] = None) -> "PeriodicSignal":
        """Periodic linear interpolant of a sampled table, t strictly increasing in [0, 1)."""
        ta = np.asarray(t, dtype=float)
        va = np.asarray(values, dtype=float)
        if ta.ndim != 1 or ta.shape != va.shape or ta.size < 2:
            raise ValueError("sample table needs two equal-length 1-d columns")
        if np.any(np.diff(ta) <= 0) or ta[0] < 0 or ta[-1] >= 1:
            raise ValueError("sample times must be strictly increasing within [0, 1)")
        if not (np.all(np.isfinite(ta)) and np.all(np.isfinite(va))):
            raise ValueError("sample table contains non-finite entries")
        return cls(lambda x: np.interp(x, ta, va, period=1.0), label=label or "table")


def signal_from_name(name: str) -> PeriodicSignal:
    """Resolve a registered signal name: 'reference', 'zero' or 'trig:<j>'."""
    if name == "reference":
        return PeriodicSignal.reference()
    if name == "zero":
        return PeriodicSignal.zero()
    if name.startswith("trig:"):
        return PeriodicSignal.from_basis(int(name.split(":", 1)[1]))
    raise ValueError(f"unknown signal name {name!r}")


def _grid_values(S, num_points: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(0.0, 1.0, num_points)
    vals = np.asarray(S(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise ValueError(f"signal evaluator returned a non-finite value at t={x[bad]:.6g}")
    return x, vals


def fourier_coeffs(S, J: int, num_points: int = DEFAULT_QUAD_POINTS) -> np.ndarray:
    """First J coefficients of S against the basis, by composite Simpson quadrature."""
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    x, vals = _grid_values(S, num_points)
    phi = basis_matrix(J, x)
    return np.array([simpson(vals * phi[j], x=x) for j in range(J)])


def l2_norm_sq(S, num_points: int = DEFAULT_QUAD_POINTS) -> float:
    """Squared L2 norm of S over one period."""
    x, vals = _grid_values(S, num_points)
    return float(simpson(vals * vals, x=x))
