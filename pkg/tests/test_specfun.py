"""Tests for the special-function layer.

Independent oracles: scipy.special / mpmath cross-checks, trapezoid
quadrature for normalization and orthogonality, and a high-resolution
Dawson-integral quadrature for the confluent hypergeometric function.
"""

import math

import numpy as np
import pytest
import scipy.special

from homodyne_phase.specfun import (
    OscillatorBasisCache,
    RangeError,
    UnsupportedParameterError,
    bessel_i0,
    default_grid,
    hermite,
    hermite_table,
    kummer_phi,
    osc_eigenfunction,
    osc_eigenfunction_table,
)


# ---------------------------------------------------------------------------
# Hermite polynomials


def test_hermite_low_orders():
    assert hermite(0, 3.7) == 1.0
    assert hermite(1, 2.0) == 4.0
    assert hermite(4, 1.0) == -20.0  # 16 - 48 + 12


def test_hermite_matches_scipy():
    x = np.linspace(-4.0, 4.0, 33)
    for n in (2, 5, 12, 25):
        expected = scipy.special.eval_hermite(n, x)
        np.testing.assert_allclose(hermite(n, x), expected, rtol=1e-11)


def test_hermite_recurrence_consistency():
    # H_{n+1} - 2x H_n + 2n H_{n-1} = 0 to relative 1e-12 for n <= 60
    x = np.arange(-3.0, 3.5, 0.5)
    table = hermite_table(61, x)
    for n in range(1, 60):
        resid = table[n + 1] - 2.0 * x * table[n] + 2.0 * n * table[n - 1]
        scale = np.max(np.abs(table[n + 1])) + 1.0
        assert np.max(np.abs(resid)) / scale < 1e-12


def test_hermite_overflow_raises_range_error():
    with pytest.raises(RangeError):
        hermite(400, 30.0)
    with pytest.raises(RangeError):
        hermite_table(400, np.array([30.0]))


def test_hermite_rejects_negative_order():
    with pytest.raises(ValueError):
        hermite(-1, 0.0)


# ---------------------------------------------------------------------------
# oscillator eigenfunctions


def test_osc_eigenfunction_at_origin():
    assert osc_eigenfunction(0, 0.0) == pytest.approx(math.pi ** -0.25, rel=1e-14)
    assert osc_eigenfunction(1, 0.0) == 0.0


def test_osc_eigenfunction_row_50_normalized():
    grid = default_grid(100, step=0.01)
    psi = osc_eigenfunction(50, grid)
    norm = np.trapezoid(psi ** 2, grid)
    assert abs(norm - 1.0) < 1e-8


def test_osc_eigenfunction_orthogonality():
    grid = default_grid(40, step=0.01)
    table = osc_eigenfunction_table(40, grid)
    gram = np.trapezoid(table[:, None, :] * table[None, :, :], grid, axis=-1)
    np.testing.assert_allclose(gram, np.eye(41), atol=1e-7)


def test_osc_eigenfunction_parity_exact():
    # psi_n(-x) = (-1)^n psi_n(x) bitwise on a symmetric grid
    grid = default_grid(30, step=0.05)
    table = osc_eigenfunction_table(30, grid)
    for n in range(31):
        sign = (-1.0) ** n
        np.testing.assert_array_equal(table[n], sign * table[n][::-1])


def test_osc_eigenfunction_high_order_no_overflow():
    # the naive Hermite-over-factorial form overflows long before n = 500
    grid = np.linspace(-35.0, 35.0, 701)
    psi = osc_eigenfunction(500, grid)
    assert np.all(np.isfinite(psi))
    assert np.max(np.abs(psi)) < 1.0


def test_osc_eigenfunction_matches_hermite_form():
    x = np.linspace(-3.0, 3.0, 25)
    for n in (0, 1, 4, 9):
        expected = (
            scipy.special.eval_hermite(n, x)
            * np.exp(-0.5 * x * x)
            / math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi))
        )
        np.testing.assert_allclose(osc_eigenfunction(n, x), expected, atol=1e-12)


def test_basis_cache_build():
    cache = OscillatorBasisCache.build(20)
    assert cache.values.shape == (21, cache.grid.size)
    assert not cache.values.flags.writeable
    norms = np.trapezoid(cache.values ** 2, cache.grid, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-8)


# ---------------------------------------------------------------------------
# confluent hypergeometric function


def test_kummer_phi_trivial_values():
    assert kummer_phi(1, 0.5, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert kummer_phi(1, 1, -3.0) == pytest.approx(math.exp(-3.0), rel=1e-12)


def _dawson(x):
    # F(x) = int_0^x exp(t^2 - x^2) dt by fine trapezoid quadrature
    t = np.linspace(0.0, x, 200001)
    return float(np.trapezoid(np.exp(t * t - x * x), t))


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 3.0, 10.0])
def test_kummer_phi_against_dawson_integral(x):
    # Phi(1, 1/2, -x^2) = 1 - 2 x F(x), F the Dawson integral.  At large
    # x the subtraction cancels, so the quadrature oracle loses digits
    # there; the closed-form cross-check below stays tight.
    expected = 1.0 - 2.0 * x * _dawson(x)
    got = kummer_phi(1, 0.5, -x * x)
    assert got == pytest.approx(expected, rel=1e-8 if x <= 3.0 else 1e-4, abs=1e-12)
    tight = 1.0 - 2.0 * x * float(scipy.special.dawsn(x))
    assert got == pytest.approx(tight, rel=1e-9, abs=1e-14)


def test_kummer_phi_leading_asymptote_at_10():
    # Phi(1, 1/2, -100) ~ -1/(2 x^2) to leading order
    val = kummer_phi(1, 0.5, -100.0)
    assert val < 0.0
    assert val == pytest.approx(-1.0 / 200.0, rel=0.05)


def _phi_direct_series(a, b, z, n_terms=400):
    # raw alternating Kummer series, summed in extended precision: the
    # cancellation at z = -20 eats ~9 float64 digits, so the oracle side
    # must carry spare ones
    mpmath = pytest.importorskip("mpmath")
    with mpmath.workdps(40):
        total = term = mpmath.mpf(1)
        zz = mpmath.mpf(z)
        for m in range(n_terms):
            term *= (a + m) * zz / ((b + m) * (m + 1))
            total += term
        return float(total)


@pytest.mark.parametrize("a,b", [(1, 0.5), (2, 0.5), (2, 1.5), (1, 1)])
def test_kummer_transform_self_consistency(a, b):
    for z in np.arange(-20.0, 0.5, 2.5):
        direct = _phi_direct_series(a, b, z)
        assert kummer_phi(a, b, z) == pytest.approx(direct, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("a,b", [(1, 0.5), (2, 0.5), (2, 1.5)])
def test_kummer_phi_deep_negative_matches_mpmath(a, b):
    mpmath = pytest.importorskip("mpmath")
    for z in (-50.0, -150.0, -600.0, -2000.0):
        expected = float(mpmath.hyp1f1(a, b, z))
        assert kummer_phi(a, b, z) == pytest.approx(expected, rel=1e-10)


def test_kummer_phi_branch_overlap():
    # both branches must agree where they overlap
    for z in (-55.0, -60.0, -65.0):
        low = kummer_phi(2, 0.5, z, switch=100.0)
        high = kummer_phi(2, 0.5, z, switch=10.0)
        assert low == pytest.approx(high, rel=1e-10)


def test_kummer_phi_rejects_unsupported_parameters():
    with pytest.raises(UnsupportedParameterError):
        kummer_phi(3, 0.5, -1.0)
    with pytest.raises(UnsupportedParameterError):
        kummer_phi(1, 0.5, 1.0)  # z > 0 not supported


def test_kummer_phi_vectorized():
    z = -np.linspace(0.0, 120.0, 61)
    vals = kummer_phi(1, 0.5, z)
    assert vals.shape == z.shape
    for zi, vi in zip(z, vals):
        assert vi == kummer_phi(1, 0.5, float(zi))


# ---------------------------------------------------------------------------
# modified Bessel function


def test_bessel_i0_trivial():
    assert bessel_i0(0.0) == 1.0


def test_bessel_i0_series_oracle_at_1():
    expected = sum((0.5) ** (2 * m) / math.factorial(m) ** 2 for m in range(30))
    assert bessel_i0(1.0) == pytest.approx(expected, rel=1e-12)
    assert bessel_i0(1.0) == pytest.approx(1.26606588, abs=5e-9)


def test_bessel_i0_asymptotic_oracle_at_30():
    # e^30 / sqrt(60 pi) (1 + 1/240 + 9/115200 + ...)
    t = 30.0
    series = 1.0
    term = 1.0
    for m in range(10):
        term *= (2 * m + 1) ** 2 / (8.0 * t * (m + 1))
        series += term
    expected = math.exp(t) / math.sqrt(2.0 * math.pi * t) * series
    assert bessel_i0(t) == pytest.approx(expected, rel=1e-8)


def test_bessel_i0_matches_scipy():
    t = np.concatenate([np.linspace(0.0, 39.0, 40), np.linspace(41.0, 700.0, 30)])
    np.testing.assert_allclose(bessel_i0(t), scipy.special.i0(t), rtol=1e-10)


def test_bessel_i0_overflow_raises():
    with pytest.raises(RangeError):
        bessel_i0(710.0)
    with pytest.raises(ValueError):
        bessel_i0(-1.0)
