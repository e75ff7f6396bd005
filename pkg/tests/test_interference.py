"""Two-photon interference: the two-crystal coincidence dip (analytic vs
reduced-kernel numeric vs brute-force quadruple sum), Bell-analyzer rates,
and polarization fringes."""

import math

import numpy as np
import pytest

from biphoton import interference, schmidt, spectra
from biphoton.errors import ValidationError
from tests.conftest import transpose_jsa

V_EQUAL = math.sqrt(3.0) / 2.0
R0_EQUAL = 2.0 / 3.0
RESID_EQUAL = 7.0 - 4.0 * math.sqrt(3.0)   # 1 - lambda_0 = mu^2 at sigma = sigma_F


def _separable_jsa(n=64):
    grid = spectra.FrequencyGrid(omega0=0.0, half_span=2e14, n_points=n)
    ns = grid.detunings[:, None]
    ni = grid.detunings[None, :]
    vals = np.exp(-(ns / 5e13) ** 2 - (ni / 3e13) ** 2)
    return spectra.JointSpectralAmplitude(grid, grid, vals.astype(complex)).normalized()


# ----------------------------------------------------------------------
# analytic dip
# ----------------------------------------------------------------------

def test_analytic_visibility_and_baseline(model_equal):
    assert interference.homi_visibility_analytic(model_equal) == pytest.approx(
        V_EQUAL, rel=1e-14)
    assert interference.homi_baseline_analytic(model_equal) == pytest.approx(
        R0_EQUAL, rel=1e-14)


def test_analytic_no_filter_sentinel():
    m = spectra.GaussianSourceModel(sigma=4e13, sigma_F=math.inf)
    assert interference.homi_visibility_analytic(m) == 0.0
    assert interference.homi_baseline_analytic(m) == 1.0
    curve = interference.homi_dip_analytic(m, [0.0, 1e-13])
    assert np.all(curve.rates == 1.0)


def test_analytic_strong_filter_limit():
    m = spectra.GaussianSourceModel(sigma=4e13, sigma_F=4e9)
    assert interference.homi_visibility_analytic(m) > 0.999999
    assert interference.homi_baseline_analytic(m) < 1e-5


def test_visibility_monotone_in_filter():
    sigma = 4e13
    vs = [interference.homi_visibility_analytic(
        spectra.GaussianSourceModel(sigma=sigma, sigma_F=f))
        for f in np.logspace(12, 15, 40)]
    assert np.all(np.diff(vs) < 0)     # wider filter, less pure, lower V


def test_analytic_dip_shape(model_equal):
    w = interference.analytic_dip_width(model_equal)
    curve = interference.homi_dip_analytic(
        model_equal, [0.0, w * math.sqrt(math.log(2.0)), w, 50.0 * w])
    r0, v = curve.baseline, curve.visibility
    assert curve.rates[0] == pytest.approx(r0 * (1.0 - v), rel=1e-12)
    assert curve.rates[1] == pytest.approx(r0 * (1.0 - 0.5 * v), rel=1e-12)
    assert curve.rates[2] == pytest.approx(r0 * (1.0 - v / math.e), rel=1e-12)
    assert curve.rates[3] == pytest.approx(r0, rel=1e-12)


def test_default_tau_grid(model_equal):
    taus = interference.default_tau_grid(model_equal, n=41, span_widths=4.0)
    assert len(taus) == 41
    assert taus[0] == -taus[-1]
    assert taus[-1] == pytest.approx(
        4.0 * interference.analytic_dip_width(model_equal), rel=1e-12)


# ----------------------------------------------------------------------
# numeric dip
# ----------------------------------------------------------------------

def test_reduced_kernel_trace_and_hermiticity(jsa_equal):
    rho = interference.reduced_signal_kernel(jsa_equal)
    assert float(np.trace(rho).real) * jsa_equal.grid_s.spacing == pytest.approx(
        1.0, abs=1e-10)
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-14 * np.max(np.abs(rho))


def test_rank_one_source_interferes_perfectly():
    curve = interference.two_crystal_homi_numeric(_separable_jsa(), [0.0])
    assert curve.visibility == pytest.approx(1.0, abs=1e-8)
    assert curve.rates[0] < 1e-8


def test_numeric_dip_matches_analytic(model_equal, jsa_equal):
    taus = interference.default_tau_grid(model_equal, n=21)
    num = interference.two_crystal_homi_numeric(jsa_equal, taus)
    ana = interference.homi_dip_analytic(model_equal, taus)
    assert num.visibility == pytest.approx(ana.visibility, rel=1e-6)
    # numeric curve is normalized to unit baseline
    assert np.max(np.abs(num.rates - ana.rates / ana.baseline)) < 1e-6


def test_numeric_dip_against_quadruple_sum():
    # brute-force evaluation of the four-frequency integral on a small grid
    model = spectra.GaussianSourceModel(sigma=4e13, sigma_F=4e13)
    jsa = spectra.gaussian_model_jsa(
        model, spectra.default_model_grid(model, n_points=16))
    ds, di = jsa.grid_s.spacing, jsa.grid_i.spacing
    f = jsa.values
    nu = jsa.grid_s.detunings
    taus = [0.0, 2e-14, 1e-13]
    curve = interference.two_crystal_homi_numeric(jsa, taus)
    for tau, rate in zip(taus, curve.rates):
        cosm = np.cos((nu[:, None] - nu[None, :]) * tau)
        quad = np.einsum("ac,bc,ad,bd,ab->", f, f.conj(), f.conj(), f, cosm)
        brute = 1.0 - float(quad.real) * ds**2 * di**2
        assert rate == pytest.approx(brute, abs=1e-10)


def test_visibility_equals_schmidt_purity(jsa_equal, jsa_typeII):
    for jsa in (jsa_equal, jsa_typeII):
        v = interference.two_crystal_homi_numeric(jsa, [0.0]).visibility
        lam = schmidt.schmidt_svd(jsa).eigenvalues
        assert v == pytest.approx(float(np.sum(lam**2)), abs=1e-6)


# ----------------------------------------------------------------------
# factorability / symmetry diagnostics
# ----------------------------------------------------------------------

def test_factorability_residual_cases(jsa_equal, bbo):
    assert interference.factorability_residual(_separable_jsa()) < 1e-10
    assert interference.factorability_residual(jsa_equal) == pytest.approx(
        RESID_EQUAL, rel=1e-3)
    pump = spectra.PumpEnvelope.from_pump_fwhm(0.8, 0.05)
    grid = spectra.default_pump_grid(pump, n_points=128, span_factor=10.0)
    cw = spectra.build_jsa_collinear(bbo, "II_eoe", 1e-3, pump, grid)
    assert interference.factorability_residual(cw) > 0.5


def test_symmetry_residual_cases(jsa_equal, jsa_typeII):
    assert interference.symmetry_residual(jsa_equal) < 1e-12
    r = interference.symmetry_residual(jsa_typeII)
    assert r > 0.1
    assert interference.symmetry_residual(transpose_jsa(jsa_typeII)) == \
        pytest.approx(r, rel=1e-12)


def test_symmetry_residual_needs_square_grids():
    ga = spectra.FrequencyGrid(omega0=0.0, half_span=1e14, n_points=16)
    gb = spectra.FrequencyGrid(omega0=0.0, half_span=1e14, n_points=24)
    jsa = spectra.JointSpectralAmplitude(
        ga, gb, np.ones((16, 24), dtype=complex))
    with pytest.raises(ValidationError):
        interference.symmetry_residual(jsa)


def test_effective_mode_factorization():
    sep = _separable_jsa()
    p, q, resid = interference.effective_mode_factorization(sep)
    assert resid < 1e-10
    peak = np.max(np.abs(sep.values))
    assert np.max(np.abs(np.outer(p, q) - sep.values)) < 1e-8 * peak


def test_effective_mode_residuals_by_source(jsa_equal, jsa_factorable):
    _, _, r_model = interference.effective_mode_factorization(jsa_equal)
    assert r_model == pytest.approx(RESID_EQUAL, rel=1e-3)
    _, _, r_eng = interference.effective_mode_factorization(jsa_factorable)
    assert r_eng < 0.05                    # engineered source is near-factorable


# ----------------------------------------------------------------------
# Bell analyzer
# ----------------------------------------------------------------------

def _pair(f, g=None, sign="+"):
    return interference.PolarizedPairState(
        f=f, g=transpose_jsa(f) if g is None else g, sign=sign)


def test_bell_rates_ideal_pairing(jsa_typeII):
    pair = _pair(jsa_typeII)               # g = f transposed
    r_plus, r_minus = interference.bell_analyzer_rates(pair, 0.0)
    assert r_plus < 1e-8
    assert r_minus == pytest.approx(1.0, abs=1e-8)


def test_bell_rates_sum_to_one(jsa_typeII):
    pair = _pair(jsa_typeII)
    for tau in np.random.default_rng(11).uniform(-2e-12, 2e-12, 20):
        r_plus, r_minus = interference.bell_analyzer_rates(pair, float(tau))
        assert r_plus + r_minus == pytest.approx(1.0, abs=1e-10)


def test_bell_rates_lose_coherence_at_large_delay(jsa_typeII):
    pair = _pair(jsa_typeII)
    r_plus, r_minus = interference.bell_analyzer_rates(pair, 3e-13)
    assert r_plus == pytest.approx(0.5, abs=0.05)
    assert r_minus == pytest.approx(0.5, abs=0.05)


def test_bell_rates_expose_exchange_asymmetry(jsa_typeII):
    # without the transposition trick the analyzer leaks: the residual is
    # set by the exchange asymmetry of the amplitude
    pair = interference.PolarizedPairState(f=jsa_typeII, g=jsa_typeII)
    r_plus, _ = interference.bell_analyzer_rates(pair, 0.0)
    assert r_plus > 1e-3
    expected = 0.25 * interference.symmetry_residual(jsa_typeII) ** 2
    assert r_plus == pytest.approx(expected, rel=1e-9)


def test_condition_residuals_and_hwp(jsa_typeII, jsa_equal):
    pair = _pair(jsa_typeII)
    assert interference.bell_condition_residual(pair) < 1e-12
    assert interference.pol_pairing_residual(pair) > 0.1
    swapped = interference.hwp_transform(pair)
    assert swapped.family == "phi"
    assert interference.pol_pairing_residual(swapped) < 1e-12
    assert interference.bell_condition_residual(swapped) == pytest.approx(
        interference.pol_pairing_residual(pair), rel=1e-12)
    # exchange-symmetric amplitude satisfies both conditions at once
    sym = interference.PolarizedPairState(f=jsa_equal, g=jsa_equal)
    assert interference.bell_condition_residual(sym) < 1e-10
    assert interference.pol_pairing_residual(sym) < 1e-14


def test_pair_state_validation(jsa_typeII):
    with pytest.raises(ValidationError):
        interference.PolarizedPairState(f=jsa_typeII, g=jsa_typeII, sign="x")
    with pytest.raises(ValidationError):
        interference.PolarizedPairState(
            f=jsa_typeII, g=jsa_typeII, family="chi")
    raw = spectra.JointSpectralAmplitude(
        jsa_typeII.grid_s, jsa_typeII.grid_i, 2.0 * jsa_typeII.values)
    with pytest.raises(ValidationError):
        interference.PolarizedPairState(f=raw, g=raw)


# ----------------------------------------------------------------------
# polarization fringes
# ----------------------------------------------------------------------

def test_fringe_closed_form_when_paired(jsa_equal):
    thetas = np.linspace(0.0, math.pi, 19)
    for sign, combine in (("+", lambda a, b: a + b), ("-", lambda a, b: a - b)):
        pair = interference.PolarizedPairState(
            f=jsa_equal, g=jsa_equal, sign=sign)
        for ta in thetas:
            for tb in thetas:
                want = math.sin(combine(ta, tb)) ** 2
                got = interference.polarization_fringe(pair, ta, tb)
                assert got == pytest.approx(want, abs=1e-9)


def test_fringe_specific_settings(jsa_equal):
    pair = interference.PolarizedPairState(f=jsa_equal, g=jsa_equal, sign="-")
    assert interference.polarization_fringe(
        pair, math.pi / 4, -math.pi / 4) == pytest.approx(1.0, abs=1e-9)
    for tb in (0.1, 0.7, 1.3):
        assert interference.polarization_fringe(pair, 0.0, tb) == \
            pytest.approx(math.sin(tb) ** 2, abs=1e-12)


def test_fringe_swap_symmetry(jsa_typeII):
    pair = _pair(jsa_typeII)
    for ta, tb in ((0.3, 1.1), (0.9, 0.2), (1.4, 1.4)):
        assert interference.polarization_fringe(pair, ta, tb) == \
            pytest.approx(interference.polarization_fringe(pair, tb, ta),
                          abs=1e-14)


def test_fringe_visibility_orthogonal_pairing():
    # f and g built from orthogonal mode profiles: the fringe washes out
    grid = spectra.FrequencyGrid(omega0=0.0, half_span=6.0, n_points=96)
    u = schmidt.hermite_modes_upto(1, grid.detunings)
    f = spectra.JointSpectralAmplitude(
        grid, grid, np.outer(u[0], u[0]).astype(complex)).normalized()
    g = spectra.JointSpectralAmplitude(
        grid, grid, np.outer(u[1], u[1]).astype(complex)).normalized()
    pair = interference.PolarizedPairState(f=f, g=g)
    assert abs(interference.pair_overlap(pair)) < 1e-12
    assert interference.fringe_visibility(pair) < 1e-6


def test_fringe_visibility_unit_when_paired(jsa_equal):
    pair = interference.PolarizedPairState(f=jsa_equal, g=jsa_equal)
    assert interference.fringe_visibility(pair) == pytest.approx(1.0, abs=1e-6)
