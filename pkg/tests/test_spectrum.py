"""Spectrum estimators, the analytic collapse correction, and power-law fits."""

import numpy as np
import pytest
from conftest import ds_closed_f

from collapsim.background import BackgroundModel
from collapsim.csl import CollapseSpec, evolve_ensemble
from collapsim.spectrum import (
    REGIME_EXPONENTS,
    analytic_csl_spectrum,
    collapse_correction,
    estimate_point,
    estimate_spectrum,
    fit_power_law,
    fit_spectral_index,
    standard_spectrum,
)


# ------------------------------------------------ Monte-Carlo estimator

def test_estimate_point_hand_oracle():
    zb = np.array([0.1, -0.3, 0.2, 0.4, -0.1])
    k = 2.0
    n = zb.size
    var = np.sum((zb - zb.mean()) ** 2) / (n - 1)
    p, err = estimate_point(k, zb)
    assert np.isclose(p, k ** 3 / (2.0 * np.pi ** 2) * var, rtol=1e-14)
    assert np.isclose(err, np.sqrt(2.0 / (n - 1)) * p, rtol=1e-14)


def test_estimate_point_needs_two():
    with pytest.raises(ValueError, match="at least 2"):
        estimate_point(1.0, np.array([0.5]))


def test_estimate_spectrum_sorts_and_zero_gamma_vanishes(bg_desk):
    spec = CollapseSpec(gamma=0.0)
    ens = [evolve_ensemble(bg_desk, k, spec, 8, points_per_decade=512,
                           n_out=3, mode_index=i)
           for i, k in enumerate([3.0, 1.0, 2.0])]
    tab = estimate_spectrum(ens)
    np.testing.assert_array_equal(tab.k, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(tab.p, np.zeros(3))
    np.testing.assert_array_equal(tab.n_traj, [8, 8, 8])
    with pytest.raises(ValueError, match="no ensembles"):
        estimate_spectrum([])


def test_standard_spectrum_against_closed_form(bg_desk):
    # P = k^2 |f(eta_end)|^2 / (4 pi^2 z_end^2), with the exact de Sitter
    # mode function carrying the same Bunch-Davies data
    ks = np.array([0.5, 1.0, 4.0])
    got = standard_spectrum(bg_desk, ks, points_per_decade=64)
    z_end = bg_desk.z_of(bg_desk.eta_end)
    for kk, p in zip(ks, got):
        f, _ = ds_closed_f(kk, bg_desk.eta_ini, bg_desk.eta_end)
        p_exact = kk ** 2 * np.abs(f) ** 2 / (4.0 * np.pi ** 2 * z_end ** 2)
        assert abs(p - p_exact) / p_exact < 1e-6


def test_standard_spectrum_scale_invariant_per_mode_windows():
    # with the window scaled per mode (fixed k eta), P depends on k only
    # through the frozen amplitude H^2 / (8 pi^2 eps1)
    h_star, eps1 = 1e-5, 0.01
    ps = []
    for k in (0.5, 2.0, 8.0):
        bg = BackgroundModel(h_star=h_star, eps1=eps1, eta_ini=-400.0 / k,
                             eta_end=-1e-3 / k)
        ps.append(standard_spectrum(bg, [k], points_per_decade=48)[0])
    ps = np.asarray(ps)
    assert np.max(np.abs(ps / ps[0] - 1.0)) < 1e-6


# --------------------------------------------------- analytic correction

def test_collapse_correction_arithmetic(bg_desk):
    k = np.array([0.5, 1.0, 2.0])
    gamma, m0, r_c, rho, o1 = 3e-9, 2.0, 1.0 / (20.0 * bg_desk.hubble), 1e-12, 0.7
    corr = collapse_correction(bg_desk, gamma, m0, r_c, k, rho, o1,
                               "inflation_crossing")
    hand = o1 * (gamma / m0 ** 2) * rho * bg_desk.eps1 * \
        (r_c * bg_desk.hubble) ** 0 * (k * -bg_desk.eta_end) ** -1
    np.testing.assert_allclose(corr, hand, rtol=1e-13)

    corr_r = collapse_correction(bg_desk, gamma, m0, r_c, k, rho, o1,
                                 "radiation_crossing")
    hand_r = hand * (r_c * bg_desk.hubble) ** -9 * \
        (k * -bg_desk.eta_end) ** -9
    np.testing.assert_allclose(corr_r, hand_r, rtol=1e-12)


def test_regime_exponent_table():
    assert REGIME_EXPONENTS["inflation_crossing"] == (0.0, -1.0)
    assert REGIME_EXPONENTS["radiation_crossing"] == (-9.0, -10.0)


def test_analytic_spectrum_composition(bg_desk):
    spec = CollapseSpec(gamma=1e-9, m0=1.5, r_c=2e4)
    k = np.array([0.5, 1.0, 2.0])
    p_std = np.array([2.0e-9, 2.1e-9, 2.2e-9])
    out = analytic_csl_spectrum(bg_desk, spec, k, rho_end=1e-12,
                                o1_prefactor=2.0, p_std=p_std)
    corr = collapse_correction(bg_desk, 1e-9, 1.5, 2e4, k, 1e-12, 2.0,
                               "inflation_crossing")
    np.testing.assert_array_equal(out.p_std, p_std)
    np.testing.assert_allclose(out.p_csl, p_std * (1.0 + corr), rtol=1e-14)
    np.testing.assert_array_equal(out.correction, corr)
    assert out.regime == "inflation_crossing"


def test_analytic_spectrum_computes_p_std_when_missing(bg_desk):
    spec = CollapseSpec(gamma=0.0)
    k = np.array([1.0])
    out = analytic_csl_spectrum(bg_desk, spec, k, rho_end=1e-12)
    np.testing.assert_allclose(out.p_std, standard_spectrum(bg_desk, k),
                               rtol=1e-12)
    np.testing.assert_array_equal(out.p_csl, out.p_std)  # gamma = 0


@pytest.mark.parametrize("kwargs, match", [
    (dict(regime="nope"), "unknown regime"),
    (dict(rho_end=-1.0), "rho_end"),
    (dict(k=[0.0, 1.0]), "k grid"),
    (dict(p_std=np.ones(3)), "p_std grid"),
])
def test_analytic_spectrum_validation(bg_desk, kwargs, match):
    args = dict(k=np.array([1.0, 2.0]), rho_end=1e-12)
    args.update(kwargs)
    with pytest.raises(ValueError, match=match):
        analytic_csl_spectrum(bg_desk, CollapseSpec(gamma=1e-9), **args)


# --------------------------------------------------------- log-log fits

def test_fit_power_law_recovers_exact_law():
    x = np.logspace(-1, 2, 12)
    y = 3.7 * x ** -1.25
    slope, intercept, err = fit_power_law(x, y)
    assert np.isclose(slope, -1.25, rtol=1e-12)
    assert np.isclose(np.exp(intercept), 3.7, rtol=1e-10)
    assert err < 1e-12


def test_fit_power_law_matches_polyfit_unweighted():
    rng = np.random.default_rng(12)
    x = np.logspace(0, 1, 9)
    y = 2.0 * x ** 0.7 * np.exp(rng.normal(0.0, 0.05, 9))
    slope, intercept, _ = fit_power_law(x, y)
    ref = np.polyfit(np.log(x), np.log(y), 1)
    assert np.isclose(slope, ref[0], rtol=1e-10)
    assert np.isclose(intercept, ref[1], rtol=1e-10)


def test_fit_power_law_weighted_prefers_precise_points():
    # two-cluster construction: the tight cluster pins the fit
    x = np.array([1.0, 2.0, 4.0, 8.0])
    y = np.array([1.0, 0.5, 0.25, 0.125])       # slope -1 exactly
    y_outlier = y.copy()
    y_outlier[-1] *= 1.5                          # pulled off the law
    err_tight_last = np.array([1e-4, 1e-4, 1e-4, 1e3])
    slope, _, slope_err = fit_power_law(x, y_outlier, err_tight_last)
    assert np.isclose(slope, -1.0, atol=1e-3)    # outlier downweighted
    # analytic slope error: 1 / sqrt(sum w (lx - mx)^2)
    w = 1.0 / (err_tight_last / y_outlier) ** 2
    mx = np.sum(w * np.log(x)) / np.sum(w)
    expect = 1.0 / np.sqrt(np.sum(w * (np.log(x) - mx) ** 2))
    assert np.isclose(slope_err, expect, rtol=1e-12)


@pytest.mark.parametrize("x, y, err", [
    ([1.0], [1.0], None),
    ([1.0, 2.0], [1.0, -1.0], None),
    ([0.0, 2.0], [1.0, 1.0], None),
    ([1.0, 2.0], [1.0, 1.0], [1.0, 0.0]),
])
def test_fit_power_law_validation(x, y, err):
    with pytest.raises(ValueError):
        fit_power_law(np.asarray(x), np.asarray(y),
                      None if err is None else np.asarray(err))


def test_fit_spectral_index():
    k = np.logspace(-2, 0, 20)
    p = 2.1e-9 * k ** (0.9649 - 1.0)
    ns, err = fit_spectral_index(k, p)
    assert np.isclose(ns, 0.9649, atol=1e-12)
    assert err < 1e-10
