"""Simulation of the observation process dy = S(t) dt + d(xi).

The noise xi is a Brownian motion scaled by sigma1 plus a centered compound
Poisson mixture scaled by sigma2.  Jump times are drawn exactly (Poisson
count, uniform times); only the drift and the Brownian part live on the
step grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .basis import basis_matrix

JUMP_LAWS = ("normal", "two_point", "uniform")

# second / fourth / sixth moments of each unit-scale jump law
_LAW_MOMENTS = {
    "normal": (1.0, 3.0, 15.0),
    "two_point": (1.0, 1.0, 1.0),
    "uniform": (1.0 / 3.0, 1.0 / 5.0, 1.0 / 7.0),
}


@dataclass(frozen=True)
class ImpulseSource:
    """One compound-Poisson jump source: arrival intensity plus a centered jump law."""

    intensity: float
    law: str = "normal"
    scale: float = 1.0

    def __post_init__(self):
        if self.intensity <= 0:
            raise ValueError(f"source intensity must be > 0, got {self.intensity}")
        if self.law not in JUMP_LAWS:
            raise ValueError(f"unknown jump law {self.law!r}, expected one of {JUMP_LAWS}")
        if self.scale <= 0:
            raise ValueError(f"jump scale must be > 0, got {self.scale}")

    def moment(self, p: int) -> float:
        """E|Y|^p for p in {2, 4, 6}, in closed form."""
        if p not in (2, 4, 6):
            raise ValueError(f"only moments 2, 4, 6 are available, got {p}")
        m2, m4, m6 = _LAW_MOMENTS[self.law]
        return {2: m2, 4: m4, 6: m6}[p] * self.scale**p

    @property
    def jump_variance(self) -> float:
        return self.moment(2)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.law == "normal":
            return self.scale * rng.standard_normal(size)
        if self.law == "two_point":
            return self.scale * (2.0 * rng.integers(0, 2, size) - 1.0)
        return rng.uniform(-self.scale, self.scale, size)


@dataclass(frozen=True)
class LevyNoiseSpec:
    """Noise specification: Brownian coefficient, jump coefficient and jump sources.

    When jump sources are present their total second moment must be
    normalized to one, so sigma2 alone carries the jump amplitude.
    """

    sigma1: float
    sigma2: float
    sources: Tuple[ImpulseSource, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("sigma1 and sigma2 must be nonnegative")
        if self.sigma2 > 0 and not self.sources:
            raise ValueError("sigma2 > 0 requires at least one jump source")
        if self.sources:
            total = self.pi_moment(2)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(
                    f"jump measure is not normalized: sum of intensity*variance = {total!r}"
                )

    def pi_moment(self, p: int) -> float:
        """p-th absolute moment of the jump measure (0 without sources)."""
        return float(sum(s.intensity * s.moment(p) for s in self.sources))

    @property
    def sigma(self) -> float:
        """Limiting noise variance sigma1^2 + sigma2^2 (jump measure normalized)."""
        return self.sigma1**2 + self.sigma2**2

    @classmethod
    def reference(cls) -> "LevyNoiseSpec":
        """The reference scenario: 0.5 w_t + 0.5 z_t, unit-rate standard normal jumps."""
        return cls(0.5, 0.5, (ImpulseSource(1.0, "normal", 1.0),))

    @classmethod
    def gaussian(cls, sigma1: float = 1.0) -> "LevyNoiseSpec":
        return cls(sigma1, 0.0, ())


def _steps_per_unit(dt: float) -> int:
    p = round(1.0 / dt)
    if p < 1 or abs(p * dt - 1.0) > 1e-9:
        raise ValueError(f"step {dt!r} does not divide the unit interval")
    return p


@dataclass(eq=False)
class SamplePath:
    """A discretized trajectory of the observation process on [0, n]."""

    n: int
    dt: float
    values: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    jump_sizes: np.ndarray = field(default_factory=lambda: np.empty(0))
    jump_sources: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    seed: Optional[int] = None

    def __post_init__(self):
        p = _steps_per_unit(self.dt)
        if self.values.shape != (self.n * p + 1,):
            raise ValueError(
                f"values must have length n/dt + 1 = {self.n * p + 1}, got {self.values.size}"
            )
        if self.values[0] != 0.0:
            raise ValueError("path must start at 0")

    @property
    def steps_per_unit(self) -> int:
        return _steps_per_unit(self.dt)

    @property
    def num_steps(self) -> int:
        return self.values.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt

    @property
    def jump_record(self):
        """Realized jumps of the (unscaled) compound-Poisson part, time-ordered."""
        return list(zip(self.jump_times.tolist(), self.jump_sizes.tolist()))

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def folded_increments(self) -> np.ndarray:
        """Increments summed over periods, one slot per phase of the unit interval."""
        return self.increments().reshape(self.n, self.steps_per_unit).sum(axis=0)


def simulate_path(spec: LevyNoiseSpec, S, n: int, dt: float = 1e-3,
                  seed=0) -> SamplePath:
    """Simulate the observation path; identical arguments reproduce it bit-exactly.

    The drift is integrated by the midpoint rule on each step, Brownian
    increments are exact normals, and jumps are placed exactly (Poisson
    count on [0, n], uniform times, i.i.d. sizes) then binned into steps.
    """
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    if dt > 0.01:
        raise ValueError(f"step must be <= 0.01, got {dt}")
    p = _steps_per_unit(dt)
    m = n * p
    rng = np.random.default_rng(seed)

    incr = np.zeros(m)
    if S is not None:
        mid = (np.arange(p) + 0.5) * dt
        drift = np.asarray(S(mid), dtype=float) * dt
        if not np.all(np.isfinite(drift)):
            raise ValueError("signal evaluator returned non-finite drift values")
        incr += np.tile(drift, n)

    if spec.sigma1 > 0:
        incr += spec.sigma1 * math.sqrt(dt) * rng.standard_normal(m)

    times_all, sizes_all, src_all = [], [], []
    if spec.sigma2 > 0:
        for k, src in enumerate(spec.sources):
            count = int(rng.poisson(src.intensity * n))
            times = rng.uniform(0.0, n, count)
            sizes = src.sample(rng, count)
            times_all.append(times)
            sizes_all.append(sizes)
            src_all.append(np.full(count, k, dtype=int))
        times = np.concatenate(times_all) if times_all else np.empty(0)
        sizes = np.concatenate(sizes_all) if sizes_all else np.empty(0)
        srcs = np.concatenate(src_all) if src_all else np.empty(0, dtype=int)
        order = np.argsort(times, kind="stable")
        times, sizes, srcs = times[order], sizes[order], srcs[order]
        bins = np.minimum((times / dt).astype(int), m - 1)
        np.add.at(incr, bins, spec.sigma2 * sizes)
    else:
        times = np.empty(0)
        sizes = np.empty(0)
        srcs = np.empty(0, dtype=int)

    values = np.concatenate(([0.0], np.cumsum(incr)))
    return SamplePath(n=n, dt=dt, values=values, jump_times=times,
                      jump_sizes=sizes, jump_sources=srcs,
                      seed=seed if isinstance(seed, int) else None)


def stochastic_integral(path: SamplePath, f) -> float:
    """Left-endpoint Riemann-Stieltjes sum of f against the path increments."""
    t = path.times[:-1]
    vals = np.asarray(f(t), dtype=float) if callable(f) else np.asarray(f, dtype=float)
    if vals.shape != t.shape:
        raise ValueError("integrand values must match the number of steps")
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand is not finite on the path grid")
    return float(vals @ path.increments())


def conditional_gram(path: SamplePath, spec: LevyNoiseSpec, d: int) -> np.ndarray:
    """Jump-conditional covariance matrix of the first d coefficient noises.

    Returns sigma1^2 * I + sigma2^2 * D where D averages the outer products
    of the basis at the realized jump times, weighted by squared jump sizes.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if d > path.n:
        raise ValueError(f"dimension {d} exceeds the horizon {path.n}")
    g = spec.sigma1**2 * np.eye(d)
    if path.jump_times.size and spec.sigma2 > 0:
        phi = basis_matrix(d, path.jump_times % 1.0)
        dmat = (phi * path.jump_sizes**2) @ phi.T / path.n
        g += spec.sigma2**2 * dmat
    return g
