#!/usr/bin/env python3
"""
Tests for the special-function kernel: gamma family, scaled Bessel functions and the
non-central chi-squared survival function and density
"""
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st
from scipy import integrate, special

from src.cev.errors import DomainError, NonConvergence
from src.cev.oracle import bessel_i_scaled_bruteforce, nc_chi2_pdf_bruteforce, nc_chi2_sf_bruteforce
from src.cev.specfun import (
    NcChi2Query,
    SeriesControl,
    _log_bessel_i_scaled_uniform,
    bessel_i_scaled,
    chi2_cdf,
    chi2_pdf,
    chi2_sf,
    ln_gamma,
    nc_chi2_pdf,
    nc_chi2_sf,
    nc_chi2_sf_complement_df,
    reg_gamma_upper,
)


def test_ln_gamma_known_values():
    assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert ln_gamma(2.0) == pytest.approx(0.0, abs=1e-15)
    assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)


@pytest.mark.parametrize("a", [1e-3, 0.37, 7.5, 123.0, 1e3])
def test_ln_gamma_matches_lgamma(a):
    assert ln_gamma(a) == pytest.approx(math.lgamma(a), rel=1e-14)


@pytest.mark.parametrize("a", [0.0, -1.5])
def test_ln_gamma_rejects_nonpositive(a):
    with pytest.raises(DomainError) as info:
        ln_gamma(a)
    assert info.value.field == "a"


def test_reg_gamma_upper_known_values():
    assert reg_gamma_upper(1.0, 0.0) == 1.0
    assert reg_gamma_upper(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_reg_gamma_upper_matches_quadrature():
    integral, _ = integrate.quad(
        lambda t: math.exp(-t) * t ** 1.5, 3.7, np.inf, epsabs=0.0, epsrel=1e-13, limit=200
    )
    assert reg_gamma_upper(2.5, 3.7) == pytest.approx(integral / math.gamma(2.5), abs=1e-11)


def test_reg_gamma_upper_decreasing_in_y():
    values = [reg_gamma_upper(3.3, y) for y in np.linspace(0.0, 20.0, 41)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_reg_gamma_upper_domain():
    with pytest.raises(DomainError):
        reg_gamma_upper(0.0, 1.0)
    with pytest.raises(DomainError):
        reg_gamma_upper(1.0, -0.1)


def test_bessel_i_scaled_at_zero():
    assert bessel_i_scaled(0.0, 0.0) == 1.0
    assert bessel_i_scaled(1.0, 0.0) == 0.0


def test_bessel_i_scaled_matches_power_series():
    assert bessel_i_scaled(0.5, 10.0) == pytest.approx(bessel_i_scaled_bruteforce(0.5, 10.0), rel=1e-12)
    assert bessel_i_scaled(2.3, 0.7) == pytest.approx(bessel_i_scaled_bruteforce(2.3, 0.7), rel=1e-12)


@pytest.mark.parametrize("order", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("z", [100.0, 1000.0])
def test_bessel_i_scaled_large_argument(order, z):
    assert bessel_i_scaled(order, z) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi * z), rel=1e-2)


@pytest.mark.parametrize("order", [0.5, 1.0, 2.5])
@pytest.mark.parametrize("z", [1e-3, 1e-5])
def test_bessel_i_scaled_small_argument(order, z):
    leading = (0.5 * z) ** order / math.gamma(order + 1.0) * math.exp(-z)
    assert bessel_i_scaled(order, z) == pytest.approx(leading, rel=1e-6)


def test_bessel_i_scaled_stays_finite():
    assert math.isfinite(bessel_i_scaled(3.0, 1e6))
    assert bessel_i_scaled(3.0, 1e6) > 0.0


def test_bessel_i_scaled_large_order_and_argument():
    # scipy's ive gives NaN here; e^{-z} I(z) ~ e^{-order^2 / 2z} / sqrt(2 pi z)
    order, z = 10001.0, 2e10
    value = bessel_i_scaled(order, z)
    assert math.isfinite(value)
    expected = math.exp(-order * order / (2.0 * z)) / math.sqrt(2.0 * math.pi * z)
    assert value == pytest.approx(expected, rel=1e-8)


def test_uniform_expansion_matches_scipy_where_both_work():
    cases = [(50.0, 80.0), (60.0, 3.0), (200.0, 350.0), (500.0, 1e5), (2000.0, 3e6)]
    uniform = np.array([_log_bessel_i_scaled_uniform(order, z) for order, z in cases])
    reference = np.array([math.log(float(special.ive(order, z))) for order, z in cases])
    np.testing.assert_allclose(uniform, reference, rtol=1e-10, atol=1e-7)


def test_bessel_i_scaled_domain():
    with pytest.raises(DomainError) as info:
        bessel_i_scaled(0.0, -1.0)
    assert info.value.field == "z"
    with pytest.raises(DomainError):
        bessel_i_scaled(-1.5, 1.0)


def test_chi2_sf_trivial_values():
    assert nc_chi2_sf(NcChi2Query(w=0.0, df=2.0, noncentrality=5.0)) == 1.0
    assert nc_chi2_sf(NcChi2Query(w=2.0, df=2.0, noncentrality=0.0)) == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_chi2_sf_matches_bruteforce_single_point():
    q = NcChi2Query(w=4.0, df=2.0, noncentrality=2.0)
    assert nc_chi2_sf(q) == pytest.approx(nc_chi2_sf_bruteforce(q, 200), abs=1e-13)


def test_chi2_sf_matches_bruteforce_grid():
    points = np.linspace(0.1, 50.0, 5)
    dfs = np.linspace(0.5, 12.0, 5)
    worst = 0.0
    for w in points:
        for df in dfs:
            for lam in points:
                q = NcChi2Query(w=float(w), df=float(df), noncentrality=float(lam))
                worst = max(worst, abs(nc_chi2_sf(q) - nc_chi2_sf_bruteforce(q, 200)))
    assert worst <= 1e-10


def test_chi2_sf_large_noncentrality_matches_bruteforce():
    # Poisson mean 2000, past the saddle-point switch
    q = NcChi2Query(w=4100.0, df=3.0, noncentrality=4000.0)
    assert nc_chi2_sf(q) == pytest.approx(nc_chi2_sf_bruteforce(q, 3000), abs=1e-10)


def test_chi2_sf_monotone():
    w_values = [chi2_sf(w, 3.0, 7.0) for w in np.linspace(0.0, 60.0, 61)]
    assert all(b <= a for a, b in zip(w_values, w_values[1:]))
    lam_values = [chi2_sf(9.0, 3.0, lam) for lam in np.linspace(0.0, 60.0, 61)]
    assert all(b >= a for a, b in zip(lam_values, lam_values[1:]))


@pytest.mark.parametrize("df,lam", [(0.5, 0.1), (2.0, 10.0), (7.0, 50.0)])
def test_chi2_sf_vanishes_far_right(df, lam):
    w = lam + df + 40.0 * math.sqrt(2.0 * lam + df)
    assert chi2_sf(w, df, lam) < 1e-6


@hypothesis_settings(max_examples=60, deadline=None)
@given(
    w=st.floats(min_value=0.0, max_value=300.0),
    df=st.floats(min_value=0.05, max_value=30.0),
    lam=st.floats(min_value=0.0, max_value=300.0),
)
def test_chi2_sf_in_unit_interval(w, df, lam):
    value = chi2_sf(w, df, lam)
    assert 0.0 <= value <= 1.0


def test_chi2_sf_rejects_nonpositive_df():
    with pytest.raises(DomainError) as info:
        chi2_sf(1.0, 0.0, 1.0)
    assert info.value.field == "df"


def test_chi2_sf_reports_exhausted_budget():
    with pytest.raises(NonConvergence) as info:
        chi2_sf(1000.0, 2.0, 1000.0, SeriesControl(max_terms=5))
    assert info.value.terms == 5


def test_query_rejects_negative_argument():
    with pytest.raises(ValueError):
        NcChi2Query(w=-1.0, df=2.0, noncentrality=1.0)


@pytest.mark.parametrize("w,df,lam", [(4.0, 3.0, 2.0), (11.0, 1.5, 8.0), (30.0, 6.0, 25.0)])
def test_sf_derivative_in_w_is_minus_density(w, df, lam):
    h = 1e-5 * w
    slope = (chi2_sf(w + h, df, lam) - chi2_sf(w - h, df, lam)) / (2.0 * h)
    assert slope == pytest.approx(-chi2_pdf(w, df, lam), rel=1e-6)


@pytest.mark.parametrize("w,df,lam", [(4.0, 3.0, 2.0), (11.0, 1.5, 8.0), (30.0, 6.0, 25.0)])
def test_sf_derivative_in_noncentrality(w, df, lam):
    h = 1e-5 * lam
    slope = (chi2_sf(w, df, lam + h) - chi2_sf(w, df, lam - h)) / (2.0 * h)
    assert slope == pytest.approx(chi2_pdf(w, df + 2.0, lam), rel=1e-6)


@pytest.mark.parametrize("w,df,lam", [(4.0, 3.0, 2.0), (9.0, 5.5, 8.0), (30.0, 8.0, 25.0)])
def test_density_derivative_recurrence(w, df, lam):
    h = 1e-5 * w
    slope = (chi2_pdf(w + h, df, lam) - chi2_pdf(w - h, df, lam)) / (2.0 * h)
    expected = 0.5 * (chi2_pdf(w, df - 2.0, lam) - chi2_pdf(w, df, lam))
    assert slope == pytest.approx(expected, rel=1e-6)


def test_density_integrates_to_one():
    total, _ = integrate.quad(lambda w: chi2_pdf(w, 4.0, 3.0), 0.0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_density_central_fallback():
    assert nc_chi2_pdf(NcChi2Query(w=1.0, df=2.0, noncentrality=0.0)) == pytest.approx(0.5 * math.exp(-0.5), rel=1e-14)
    assert chi2_pdf(1.0, 2.0, 1e-12) == pytest.approx(0.5 * math.exp(-0.5), rel=1e-9)


def test_density_matches_bruteforce():
    q = NcChi2Query(w=5.0, df=3.0, noncentrality=4.0)
    assert nc_chi2_pdf(q) == pytest.approx(nc_chi2_pdf_bruteforce(q), rel=1e-12)


def test_density_large_arguments_in_log_space():
    # e^{-(w + lambda)/2} and I(sqrt(lambda w)) both overflow on their own here
    q = NcChi2Query(w=1800.0, df=5.0, noncentrality=1600.0)
    assert nc_chi2_pdf(q) == pytest.approx(nc_chi2_pdf_bruteforce(q, dps=60), rel=1e-10)


def test_density_domain():
    with pytest.raises(DomainError) as info:
        chi2_pdf(0.0, 2.0, 1.0)
    assert info.value.field == "w"


def test_complement_identity():
    w, df, lam = 3.1, -0.5, 2.2
    assert nc_chi2_sf_complement_df(w, df, lam) + chi2_sf(lam, 2.0 - df, w) == pytest.approx(1.0, abs=1e-13)


def test_complement_matches_bruteforce():
    reference = 1.0 - nc_chi2_sf_bruteforce(NcChi2Query(w=2.2, df=2.5, noncentrality=3.1), 200)
    assert nc_chi2_sf_complement_df(3.1, -0.5, 2.2) == pytest.approx(reference, abs=1e-12)


def test_complement_at_zero_argument():
    v, x = 0.75, 1.3
    assert nc_chi2_sf_complement_df(0.0, 2.0 - 2.0 * v, 2.0 * x) == pytest.approx(
        1.0 - reg_gamma_upper(v, x), abs=1e-14
    )


def lower_tail_reference(w, df, lam, n_terms, dps=40):
    with mpmath.workdps(dps):
        mean = mpmath.mpf(lam) / 2
        half_w = mpmath.mpf(w) / 2
        order = mpmath.mpf(df) / 2
        terms = (
            mpmath.exp(-mean) * mean**j / mpmath.factorial(j) * mpmath.gammainc(order + j, 0, half_w, regularized=True)
            for j in range(n_terms)
        )
        return float(mpmath.fsum(terms))


def test_cdf_complements_sf():
    q = NcChi2Query(w=7.0, df=3.0, noncentrality=5.0)
    assert chi2_cdf(q.w, q.df, q.noncentrality) == pytest.approx(1.0 - nc_chi2_sf_bruteforce(q, 200), abs=1e-13)
    assert chi2_cdf(0.0, 3.0, 5.0) == 0.0
    assert chi2_cdf(2.0, 2.0, 0.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-14)


def test_cdf_keeps_relative_accuracy_in_far_tail():
    # 1 - Q rounds to zero here
    value = chi2_cdf(2.0, 4.0, 400.0)
    assert 0.0 < value < 1e-60
    assert value == pytest.approx(lower_tail_reference(2.0, 4.0, 400.0, 300), rel=1e-10)


def test_cdf_far_tail_decreases_without_noise():
    values = [chi2_cdf(50.0, 2.0, lam) for lam in (200.0, 400.0, 800.0, 1600.0)]
    assert all(v > 0.0 for v in values)
    assert all(later < earlier for earlier, later in zip(values, values[1:]))


def test_cdf_reports_exhausted_budget():
    with pytest.raises(NonConvergence) as info:
        chi2_cdf(1000.0, 2.0, 1000.0, SeriesControl(max_terms=5))
    assert info.value.what == "chi2_cdf"
    assert info.value.terms == 5


def test_density_at_large_order_matches_sf_slope():
    # order 10001, argument near 1e10: the Bessel factor needs the uniform expansion
    df, lam = 20004.0, 1.0001e10
    w = lam + df
    h = 1e3
    ctl = SeriesControl(max_terms=4_000_000)
    slope = (chi2_sf(w + h, df, lam, ctl) - chi2_sf(w - h, df, lam, ctl)) / (2.0 * h)
    density = chi2_pdf(w, df, lam)
    assert density > 0.0
    assert density == pytest.approx(-slope, rel=1e-4)
