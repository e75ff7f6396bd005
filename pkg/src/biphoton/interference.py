"""Two-photon interference observables.

All rates are reported normalized: the two-crystal coincidence dip has unit
baseline (its tau -> inf value), and the Bell-analyzer / polarization rates
are probabilities conditioned on one pair per source, so that
Rc+ + Rc- = 1.  Absolute pair-production rates are out of scope.

Closed forms for the two-width Gaussian model source (sigma along the sum
frequency, per-arm filter sigma_F):

    V   = sqrt(1 - sigma_F^4 / (sigma_F^2 + sigma^2)^2)
    R0  = 2 sigma_F^2 / (2 sigma_F^2 + sigma^2)
    Rc(tau) = R0 [1 - V exp(-sigma^2 sigma_F^2 tau^2 / (8 (sigma_F^2 + sigma^2)))]

The numeric dip evaluates the four-frequency coincidence integral through
the reduced single-photon kernel rho(w, w') = int f(w, v) conj(f(w', v)) dv,
which turns the quadruple integral into one matrix contraction; the test
suite checks this against the brute-force quadruple sum on small grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .schmidt import schmidt_svd
from .spectra import GaussianSourceModel, JointSpectralAmplitude


@dataclass(frozen=True)
class PolarizedPairState:
    """Polarization-entangled pair (|HV> amplitude f, |VH> amplitude g) with
    relative sign and family tag: "psi" for f a1 b2 +/- g b1 a2 states,
    "phi" for the cascaded-crystal analogue."""

    f: JointSpectralAmplitude
    g: JointSpectralAmplitude
    sign: str = "+"
    family: str = "psi"

    def __post_init__(self):
        if self.sign not in ("+", "-"):
            raise ValidationError("sign must be '+' or '-'")
        if self.family not in ("psi", "phi"):
            raise ValidationError("family must be 'psi' or 'phi'")
        if (self.f.grid_s, self.f.grid_i) != (self.g.grid_s, self.g.grid_i):
            raise ValidationError("f and g must share the same grid pair")
        self.f.require_normalized(tol=1e-8)
        self.g.require_normalized(tol=1e-8)


@dataclass(frozen=True)
class DipCurve:
    taus: np.ndarray
    rates: np.ndarray
    visibility: float
    baseline: float


# ----------------------------------------------------------------------
# Analytic model-source results
# ----------------------------------------------------------------------

def homi_visibility_analytic(model: GaussianSourceModel) -> float:
    if math.isinf(model.sigma_F):
        return 0.0
    q = model.sigma_F**2 / (model.sigma_F**2 + model.sigma**2)
    return math.sqrt(max(0.0, 1.0 - q * q))


def homi_baseline_analytic(model: GaussianSourceModel) -> float:
    if math.isinf(model.sigma_F):
        return 1.0
    return 2.0 * model.sigma_F**2 / (2.0 * model.sigma_F**2 + model.sigma**2)


def _dip_exponent_coeff(model: GaussianSourceModel) -> float:
    """c in Rc = R0 (1 - V exp(-c tau^2))."""
    if math.isinf(model.sigma_F):
        return model.sigma**2 / 8.0
    return (model.sigma**2 * model.sigma_F**2
            / (8.0 * (model.sigma_F**2 + model.sigma**2)))


def analytic_dip_width(model: GaussianSourceModel) -> float:
    """1/e half-width of the dip: sqrt(8 (sigma^2+sigma_F^2)) / (sigma sigma_F)."""
    return 1.0 / math.sqrt(_dip_exponent_coeff(model))


def default_tau_grid(model: GaussianSourceModel, n: int = 41,
                     span_widths: float = 4.0) -> np.ndarray:
    w = analytic_dip_width(model)
    return np.linspace(-span_widths * w, span_widths * w, n)


def homi_dip_analytic(model: GaussianSourceModel,
                      taus: Sequence[float]) -> DipCurve:
    taus = np.asarray(taus, dtype=float)
    r0 = homi_baseline_analytic(model)
    v = homi_visibility_analytic(model)
    c = _dip_exponent_coeff(model)
    rates = r0 * (1.0 - v * np.exp(-c * taus**2))
    return DipCurve(taus=taus, rates=rates, visibility=v, baseline=r0)


# ----------------------------------------------------------------------
# Numeric two-crystal dip
# ----------------------------------------------------------------------

def reduced_signal_kernel(jsa: JointSpectralAmplitude) -> np.ndarray:
    """rho(w, w') = int f(w, v) conj(f(w', v)) dv; trace(rho) dnu_s = 1 for a
    normalized input."""
    return (jsa.values @ jsa.values.conj().T) * jsa.grid_i.spacing


def two_crystal_homi_numeric(jsa: JointSpectralAmplitude,
                             taus: Sequence[float]) -> DipCurve:
    """Coincidence dip of two identical single-pair sources whose signal
    photons meet on a 50:50 splitter with relative delay tau:

        Rc(tau) = 1 - sum_ab |rho_ab|^2 cos((nu_a - nu_b) tau) ds^2,

    normalized to unit baseline.  Visibility = 1 - Rc(0) = Tr rho^2 (the
    single-source spectral purity)."""
    jsa.require_normalized(tol=1e-8)
    taus = np.asarray(taus, dtype=float)
    rho = reduced_signal_kernel(jsa)
    ds = jsa.grid_s.spacing
    w2 = np.abs(rho) ** 2
    nu = jsa.grid_s.detunings
    diff = nu[:, None] - nu[None, :]
    rates = np.empty_like(taus)
    for j, tau in enumerate(taus):
        rates[j] = 1.0 - float(np.sum(w2 * np.cos(diff * tau))) * ds**2
    visibility = float(np.sum(w2)) * ds**2  # = 1 - Rc(0) = Tr rho^2
    return DipCurve(taus=taus, rates=rates, visibility=visibility, baseline=1.0)


def factorability_residual(jsa: JointSpectralAmplitude) -> float:
    """Mass outside the leading Schmidt mode, 1 - lambda_0; zero iff the
    four-frequency factorization condition holds exactly."""
    dec = schmidt_svd(jsa)
    return float(1.0 - dec.eigenvalues[0])


def symmetry_residual(jsa: JointSpectralAmplitude) -> float:
    """L2 norm of S(nu_s, nu_i) - S(nu_i, nu_s); requires a square grid pair."""
    if (jsa.grid_s.n_points != jsa.grid_i.n_points
            or jsa.grid_s.half_span != jsa.grid_i.half_span):
        raise ValidationError("symmetry residual needs identical square grids")
    d = jsa.values - jsa.values.T
    return float(math.sqrt(np.sum(np.abs(d) ** 2) * jsa.measure))


# ----------------------------------------------------------------------
# Bell analyzer and polarization fringes
# ----------------------------------------------------------------------

def bell_analyzer_rates(pair: PolarizedPairState, tau: float):
    """(Rc for psi+ input, Rc for psi- input) of the beamsplitter +
    polarizing-splitter analyzer with relative delay tau in one cross term:

        Rc+-(tau) = 1/4 intint |f(w1,w2) -+ e^{i (w1-w2) tau} g(w2,w1)|^2.

    For normalized f, g the two rates always sum to 1.
    """
    f, g = pair.f.values, pair.g.values
    nu_s = pair.f.grid_s.detunings
    nu_i = pair.f.grid_i.detunings
    dw = (pair.f.grid_s.omega0 - pair.f.grid_i.omega0) \
        + nu_s[:, None] - nu_i[None, :]
    cross = np.exp(1j * dw * tau) * g.T
    meas = pair.f.measure
    r_plus = 0.25 * float(np.sum(np.abs(f - cross) ** 2)) * meas
    r_minus = 0.25 * float(np.sum(np.abs(f + cross) ** 2)) * meas
    return r_plus, r_minus


def bell_condition_residual(pair: PolarizedPairState) -> float:
    """L2 norm of g - f-transposed: zero iff the analyzer distinguishes the
    two Bell states perfectly at tau = 0."""
    d = pair.g.values - pair.f.values.T
    return float(math.sqrt(np.sum(np.abs(d) ** 2) * pair.f.measure))


def pol_pairing_residual(pair: PolarizedPairState) -> float:
    """L2 norm of g - f: zero iff the polarization-fringe rate reduces to
    sin^2(theta_a +/- theta_b) with unit visibility."""
    d = pair.g.values - pair.f.values
    return float(math.sqrt(np.sum(np.abs(d) ** 2) * pair.f.measure))


def hwp_transform(pair: PolarizedPairState) -> PolarizedPairState:
    """Half-wave-plate relabeling of one arm: swaps the roles of the two
    pairing conditions by transposing g and toggling the family tag."""
    gt = replace(pair.g, grid_s=pair.g.grid_i, grid_i=pair.g.grid_s,
                 values=pair.g.values.T.copy())
    return PolarizedPairState(
        f=pair.f, g=gt, sign=pair.sign,
        family="phi" if pair.family == "psi" else "psi")


def pair_overlap(pair: PolarizedPairState) -> complex:
    """<f, g> under the grid measure."""
    return complex(np.sum(pair.f.values.conj() * pair.g.values) * pair.f.measure)


def polarization_fringe(pair: PolarizedPairState, theta_a: float,
                        theta_b: float) -> float:
    """Coincidence rate behind polarizers rotated by theta_a, theta_b:

        Rc = intint |cos(ta) sin(tb) f +/- sin(ta) cos(tb) g|^2

    (sign from the pair).  Reduces to sin^2(ta +/- tb) when f = g."""
    a = math.cos(theta_a) * math.sin(theta_b)
    b = math.sin(theta_a) * math.cos(theta_b)
    if pair.sign == "-":
        b = -b
    # expand |a f + b g|^2 with unit-norm f, g and their overlap
    ov = pair_overlap(pair).real
    return a * a + b * b + 2.0 * a * b * ov


def fringe_visibility(pair: PolarizedPairState, theta_b: float = math.pi / 4,
                      n_scan: int = 721) -> float:
    """(max - min)/(max + min) of the fringe over a theta_a scan."""
    thetas = np.linspace(0.0, math.pi, n_scan)
    rates = np.array([polarization_fringe(pair, t, theta_b) for t in thetas])
    hi, lo = float(rates.max()), float(rates.min())
    return (hi - lo) / (hi + lo)


def effective_mode_factorization(jsa: JointSpectralAmplitude):
    """Best rank-1 factorization S ~= p(nu_s) q(nu_i): leading Schmidt pair
    with the sqrt(lambda_0) weight split evenly, plus the residual 1 - lambda_0.
    A residual below ~1e-6 certifies the effective single-mode-pair operator
    picture of the source."""
    dec = schmidt_svd(jsa)
    w = dec.eigenvalues[0] ** 0.25
    p = w * dec.signal_modes[0]
    q = w * dec.idler_modes[0]
    return p, q, float(1.0 - dec.eigenvalues[0])
