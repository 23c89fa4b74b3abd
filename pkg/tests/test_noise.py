import math

import numpy as np
import pytest

from levyshrink.basis import PeriodicSignal, trig_basis
from levyshrink.noise import (
    ImpulseSource,
    LevyNoiseSpec,
    SamplePath,
    conditional_gram,
    simulate_path,
    stochastic_integral,
)


def test_impulse_source_validation():
    with pytest.raises(ValueError):
        ImpulseSource(0.0)
    with pytest.raises(ValueError):
        ImpulseSource(1.0, law="cauchy")
    with pytest.raises(ValueError):
        ImpulseSource(1.0, scale=-1.0)


def test_impulse_source_moments():
    src = ImpulseSource(2.0, "normal", 0.5)
    assert src.moment(2) == pytest.approx(0.25)
    assert src.moment(4) == pytest.approx(3 * 0.5**4)
    assert src.moment(6) == pytest.approx(15 * 0.5**6)
    assert ImpulseSource(1.0, "two_point", 2.0).moment(4) == pytest.approx(16.0)
    assert ImpulseSource(1.0, "uniform", 1.0).moment(2) == pytest.approx(1.0 / 3.0)
    with pytest.raises(ValueError):
        src.moment(3)


def test_impulse_source_sample_moments_match_closed_form():
    rng = np.random.default_rng(5)
    for law, scale in (("normal", 0.7), ("two_point", 1.3), ("uniform", 2.0)):
        src = ImpulseSource(1.0, law, scale)
        draws = src.sample(rng, 200_000)
        m2 = float(np.mean(draws**2))
        se = float(np.std(draws**2, ddof=1) / math.sqrt(draws.size))
        assert abs(m2 - src.moment(2)) <= 4 * se + 1e-12
        assert abs(float(draws.mean())) <= 4 * float(np.std(draws)) / math.sqrt(draws.size)


def test_noise_spec_normalization():
    with pytest.raises(ValueError, match="normalized"):
        LevyNoiseSpec(0.5, 0.5, (ImpulseSource(2.0, "normal", 1.0),))
    with pytest.raises(ValueError, match="jump source"):
        LevyNoiseSpec(0.5, 0.5, ())
    # two sources whose intensity-weighted variances sum to one
    spec = LevyNoiseSpec(0.3, 0.4, (
        ImpulseSource(0.5, "normal", 1.0),
        ImpulseSource(1.5, "uniform", 1.0),
    ))
    assert spec.pi_moment(2) == pytest.approx(1.0)
    assert spec.sigma == pytest.approx(0.25)


def test_reference_noise_spec():
    spec = LevyNoiseSpec.reference()
    assert spec.sigma == pytest.approx(0.5)
    assert spec.pi_moment(2) == pytest.approx(1.0)
    assert spec.pi_moment(4) == pytest.approx(3.0)


def test_simulate_zero_noise_zero_signal_is_flat():
    path = simulate_path(LevyNoiseSpec(0.0, 0.0), PeriodicSignal.zero(), n=3, dt=0.01)
    np.testing.assert_array_equal(path.values, np.zeros(301))
    assert path.jump_times.size == 0


def test_simulate_determinism():
    spec = LevyNoiseSpec.reference()
    sig = PeriodicSignal.reference()
    a = simulate_path(spec, sig, 5, 0.01, seed=42)
    b = simulate_path(spec, sig, 5, 0.01, seed=42)
    c = simulate_path(spec, sig, 5, 0.01, seed=43)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.jump_times, b.jump_times)
    assert not np.array_equal(a.values, c.values)


def test_simulate_step_validation():
    spec = LevyNoiseSpec.gaussian()
    with pytest.raises(ValueError, match="divide"):
        simulate_path(spec, None, 2, dt=0.003)
    with pytest.raises(ValueError, match="step"):
        simulate_path(spec, None, 2, dt=0.02)
    with pytest.raises(ValueError, match="horizon"):
        simulate_path(spec, None, 0, dt=0.01)


def test_pure_jump_path_decomposition():
    """Without Brownian noise, increments = drift + sigma2 * binned jump sizes exactly."""
    spec = LevyNoiseSpec(0.0, 0.5, (ImpulseSource(1.0, "normal", 1.0),))
    sig = PeriodicSignal.reference()
    n, dt = 7, 0.01
    path = simulate_path(spec, sig, n, dt, seed=3)
    p = path.steps_per_unit
    mid = (np.arange(p) + 0.5) * dt
    drift = np.tile(sig(mid) * dt, n)
    jumps = np.zeros(n * p)
    bins = np.minimum((path.jump_times / dt).astype(int), n * p - 1)
    np.add.at(jumps, bins, 0.5 * path.jump_sizes)
    np.testing.assert_allclose(path.increments(), drift + jumps, rtol=0, atol=1e-15)
    assert np.all(path.jump_times >= 0) and np.all(path.jump_times <= n)
    # jump record is time ordered and unscaled
    assert list(path.jump_times) == sorted(path.jump_times)
    rec = path.jump_record
    assert len(rec) == path.jump_times.size


def test_brownian_increment_variance():
    spec = LevyNoiseSpec.gaussian(1.0)
    path = simulate_path(spec, None, n=100, dt=1e-3, seed=9)
    incr = path.increments()
    v = float(np.var(incr, ddof=1)) / 1e-3
    se = math.sqrt(2.0 / (incr.size - 1))
    assert abs(v - 1.0) <= 4 * se
    assert abs(float(incr.mean())) <= 4 * math.sqrt(1e-3 / incr.size)


def test_jump_count_matches_intensity():
    spec = LevyNoiseSpec.reference()
    n, reps = 20, 200
    counts = [simulate_path(spec, None, n, 0.01, seed=s).jump_times.size
              for s in range(reps)]
    mean = float(np.mean(counts))
    se = math.sqrt(n / reps)
    assert abs(mean - n) <= 3 * se


def test_terminal_value_moments():
    """E[xi_n] ~ 0 and Var[xi_n] ~ sigma * n over many replicates."""
    spec = LevyNoiseSpec.reference()
    n, reps = 20, 500
    ends = np.array([simulate_path(spec, None, n, 0.01, seed=1000 + s).values[-1]
                     for s in range(reps)])
    target_var = spec.sigma * n
    se_mean = math.sqrt(target_var / reps)
    assert abs(float(ends.mean())) <= 3 * se_mean
    second = ends**2
    se_var = float(second.std(ddof=1) / math.sqrt(reps))
    assert abs(float(second.mean()) - target_var) <= 3 * se_var


def test_stochastic_integral_of_constant_drift():
    sig = PeriodicSignal(lambda t: np.full_like(np.asarray(t, dtype=float), 0.7))
    path = simulate_path(LevyNoiseSpec(0.0, 0.0), sig, n=5, dt=0.01)
    val = stochastic_integral(path, lambda t: np.ones_like(t))
    assert val == pytest.approx(0.7 * 5, abs=1e-10)


def test_stochastic_integral_moments():
    """Mean ~ 0 and variance ~ sigma * t * |f|^2 for a basis integrand over pure noise."""
    spec = LevyNoiseSpec.reference()
    t, reps = 10, 400
    vals = np.array([
        stochastic_integral(
            simulate_path(spec, None, t, 0.01, seed=50 + s),
            lambda x: trig_basis(2, x))
        for s in range(reps)
    ])
    target_var = spec.sigma * t  # basis element has unit norm per period
    se_mean = math.sqrt(target_var / reps)
    assert abs(float(vals.mean())) <= 3 * se_mean
    sq = vals**2
    se_var = float(sq.std(ddof=1) / math.sqrt(reps))
    assert abs(float(sq.mean()) - target_var) <= 3 * se_var


def test_stochastic_integral_validation():
    path = simulate_path(LevyNoiseSpec.gaussian(), None, 2, 0.01, seed=1)
    with pytest.raises(ValueError):
        stochastic_integral(path, np.ones(5))


def test_sample_path_validation():
    with pytest.raises(ValueError, match="length"):
        SamplePath(n=2, dt=0.01, values=np.zeros(5))
    with pytest.raises(ValueError, match="start"):
        SamplePath(n=1, dt=0.01, values=np.ones(101))


def test_folded_increments_sum():
    path = simulate_path(LevyNoiseSpec.reference(), PeriodicSignal.reference(), 6, 0.01, seed=2)
    folded = path.folded_increments()
    assert folded.shape == (path.steps_per_unit,)
    assert folded.sum() == pytest.approx(path.values[-1], abs=1e-12)


def test_conditional_gram_gaussian_case():
    path = simulate_path(LevyNoiseSpec.gaussian(0.7), None, 10, 0.01, seed=4)
    g = conditional_gram(path, LevyNoiseSpec.gaussian(0.7), 6)
    np.testing.assert_allclose(g, 0.49 * np.eye(6), rtol=0, atol=1e-15)
    eig = np.linalg.eigvalsh(g)
    assert np.trace(g) - eig[-1] == pytest.approx((6 - 1) * 0.49, abs=1e-12)


def test_conditional_gram_trace_inequality():
    """tr G - lambda_max(G) >= (d - 1) sigma1^2 on every simulated jump record."""
    spec = LevyNoiseSpec.reference()
    d = 10
    for s in range(50):
        path = simulate_path(spec, None, 12, 0.01, seed=100 + s)
        g = conditional_gram(path, spec, d)
        eig = np.linalg.eigvalsh(g)
        assert eig[0] >= -1e-12  # positive semidefinite
        assert float(np.trace(g) - eig[-1]) >= (d - 1) * spec.sigma1**2 - 1e-10


def test_conditional_gram_validation():
    path = simulate_path(LevyNoiseSpec.reference(), None, 5, 0.01, seed=0)
    with pytest.raises(ValueError):
        conditional_gram(path, LevyNoiseSpec.reference(), 0)
    with pytest.raises(ValueError):
        conditional_gram(path, LevyNoiseSpec.reference(), 6)
