import math

import numpy as np
import pytest
from scipy.integrate import quad

from levyshrink.basis import (
    PeriodicSignal,
    SUP_BOUND,
    basis_matrix,
    fourier_coeffs,
    l2_norm_sq,
    reference_signal,
    signal_from_name,
    trig_basis,
)

SQRT2 = math.sqrt(2.0)

# coefficients of the reference signal, frozen from adaptive quadrature
# (scipy.integrate.quad at epsabs=1e-13)
REF_THETA_10 = np.array([
    -1.65487517e-01, -7.61711298e-02, 3.70023870e-01, 1.32832473e-01,
    -2.67249360e-04, 9.50721191e-03, -1.72407907e-02, 1.00299319e-02,
    -2.21717987e-03, 7.02262378e-03,
])
REF_NORM_SQ = 0.18836012464386648


def test_trig_basis_values():
    assert trig_basis(1, 0.37) == 1.0
    assert trig_basis(2, 0.0) == pytest.approx(SQRT2, abs=1e-14)
    assert trig_basis(3, 0.25) == pytest.approx(SQRT2, abs=1e-12)


def test_trig_basis_rejects_zero_index():
    with pytest.raises(ValueError):
        trig_basis(0, 0.1)


@pytest.mark.parametrize("j", [1, 2, 3, 4, 7, 10])
def test_trig_basis_periodic(j):
    x = np.linspace(0, 1, 101)
    np.testing.assert_allclose(trig_basis(j, x + 1.0), trig_basis(j, x), atol=1e-12)


def test_orthonormality_matrix_identity():
    x = np.linspace(0, 1, 100_001)
    phi = basis_matrix(20, x)
    from scipy.integrate import simpson
    gram = np.array([[simpson(phi[i] * phi[j], x=x) for j in range(20)] for i in range(20)])
    np.testing.assert_allclose(gram, np.eye(20), atol=1e-8)


def test_uniform_bound():
    x = np.linspace(0, 1, 20_001)
    for j in range(1, 51):
        assert np.max(np.abs(trig_basis(j, x))) <= SUP_BOUND + 1e-12


def test_reference_signal_values():
    assert reference_signal(0.0) == 0.0
    assert reference_signal(1.0) == pytest.approx(0.0, abs=1e-15)
    assert reference_signal(0.5) == pytest.approx(0.125, abs=1e-14)
    assert reference_signal(1.3) == pytest.approx(reference_signal(0.3), abs=1e-14)


def test_fourier_coeffs_of_basis_element():
    sig = PeriodicSignal.from_basis(5)
    coeffs = fourier_coeffs(sig, 8)
    expected = np.zeros(8)
    expected[4] = 1.0
    np.testing.assert_allclose(coeffs, expected, atol=1e-8)


def test_fourier_coeffs_zero_signal():
    np.testing.assert_array_equal(fourier_coeffs(PeriodicSignal.zero(), 4), np.zeros(4))


def test_fourier_coeffs_reference_signal_vs_quadrature_oracle():
    coeffs = fourier_coeffs(PeriodicSignal.reference(), 10)
    np.testing.assert_allclose(coeffs, REF_THETA_10, atol=1e-8)
    # recompute the oracle values with adaptive quadrature, independent of simpson
    for j in (1, 3, 7):
        ref, _ = quad(lambda x: reference_signal(x) * trig_basis(j, x), 0, 1,
                      limit=200, epsabs=1e-12, epsrel=1e-12)
        assert coeffs[j - 1] == pytest.approx(ref, abs=1e-10)


def test_fourier_coeffs_rejects_non_finite():
    bad = PeriodicSignal(lambda t: np.where(t > 0.5, np.inf, 0.0))
    with pytest.raises(ValueError, match="non-finite"):
        fourier_coeffs(bad, 3)


def test_l2_norm_values():
    assert l2_norm_sq(PeriodicSignal.zero()) == 0.0
    assert l2_norm_sq(PeriodicSignal.from_basis(2)) == pytest.approx(1.0, abs=1e-8)
    assert l2_norm_sq(PeriodicSignal.reference()) == pytest.approx(REF_NORM_SQ, abs=1e-9)


def test_parseval_tail_nonnegative_and_decreasing():
    sig = PeriodicSignal.reference()
    norm = l2_norm_sq(sig)
    coeffs = fourier_coeffs(sig, 200)
    tails = norm - np.cumsum(coeffs**2)
    sampled = tails[[4, 9, 19, 49, 199]]
    assert np.all(sampled > -1e-10)
    assert np.all(np.diff(sampled) <= 1e-12)
    assert tails[-1] < 1e-6


def test_signal_registry():
    assert signal_from_name("reference").label == "reference"
    assert signal_from_name("zero")(0.3) == 0.0
    assert signal_from_name("trig:4")(0.0) == pytest.approx(SQRT2)
    with pytest.raises(ValueError):
        signal_from_name("wavelet")


def test_signal_from_samples_interpolates_periodically():
    t = np.linspace(0, 0.99, 100)
    sig = PeriodicSignal.from_samples(t, reference_signal(t))
    x = np.linspace(0, 2, 57)
    np.testing.assert_allclose(sig(x), reference_signal(x), atol=5e-3)


def test_signal_from_samples_rejects_bad_tables():
    with pytest.raises(ValueError):
        PeriodicSignal.from_samples([0.0, 0.5, 0.4], [1, 2, 3])
    with pytest.raises(ValueError):
        PeriodicSignal.from_samples([0.0, 1.0], [1, 2])
