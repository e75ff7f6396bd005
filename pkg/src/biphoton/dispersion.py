"""Crystal dispersion: refractive indices, wavevectors, group slopes and
phase-matching solvers for the uniaxial crystals shipped in ``data/materials.txt``.

Conventions
-----------
* Wavelengths handed to this module are **vacuum wavelengths in micrometres**
  (the natural unit of Sellmeier fits); everything returned is SI
  (rad/s, rad/m, s/m).
* A ray is ``"o"`` (ordinary), ``"e"`` (principal extraordinary) or
  ``("e", theta)`` — extraordinary at polar angle ``theta`` [rad] from the
  optic axis, using the index ellipsoid
  ``n_e(theta)^-2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2``
  so that ``("e", 0.0)`` coincides with the ordinary index.
* All functions are pure; materials are immutable records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Sequence, Union

import numpy as np
from scipy.constants import c as C_LIGHT  # m/s
from scipy.optimize import brentq

from .errors import PhaseMatchError, RangeError, ValidationError

Ray = Union[str, tuple]

_FORM = "sellmeier_v1"


@dataclass(frozen=True)
class Material:
    """Uniaxial dispersion record: one Sellmeier coefficient list per axis."""

    name: str
    sellmeier_o: tuple
    sellmeier_e: tuple
    range_um: tuple  # (lo, hi), inclusive

    def check_range(self, wavelength_um) -> None:
        lam = np.asarray(wavelength_um, dtype=float)
        lo, hi = self.range_um
        if np.any(lam < lo) or np.any(lam > hi):
            bad = float(np.min(lam)) if np.any(lam < lo) else float(np.max(lam))
            raise RangeError(
                f"wavelength {bad:.6g} um outside validity range "
                f"[{lo:g}, {hi:g}] um of material {self.name}"
            )


@dataclass(frozen=True)
class WaveProps:
    """Plane-wave properties at one frequency: k [rad/m] and dk/domega [s/m]."""

    omega: float
    k: float
    k_prime: float


# ----------------------------------------------------------------------
# Materials file handling
# ----------------------------------------------------------------------

def _parse_block(lines, path, blockno):
    kv = {}
    for ln in lines:
        if "=" not in ln:
            raise ValidationError(f"{path}: malformed line {ln!r} in block {blockno}")
        key, val = ln.split("=", 1)
        kv[key.strip()] = val.strip()
    missing = {"material", "axis", "form", "coeffs", "range_um"} - set(kv)
    if missing:
        raise ValidationError(f"{path}: block {blockno} missing keys {sorted(missing)}")
    if kv["form"] != _FORM:
        raise ValidationError(f"{path}: unsupported form {kv['form']!r} (expected {_FORM})")
    if kv["axis"] not in ("o", "e"):
        raise ValidationError(f"{path}: axis must be 'o' or 'e', got {kv['axis']!r}")
    coeffs = tuple(float(x) for x in kv["coeffs"].split(","))
    if len(coeffs) < 2 or (len(coeffs) - 2) % 3 != 0:
        raise ValidationError(f"{path}: coeffs must be c0,c1 plus (A,B,C) triples")
    lo, hi = (float(x) for x in kv["range_um"].split(","))
    if not 0 < lo < hi:
        raise ValidationError(f"{path}: bad range_um {lo},{hi}")
    return kv["material"], kv["axis"], coeffs, (lo, hi)


def load_materials(path_or_text, *, is_text: bool = False) -> dict:
    """Parse a materials file into ``{name: Material}``.

    Each (material, axis) block supplies one coefficient list; a material is
    complete once both axes are present.  The stored validity range is the
    intersection of the two axis ranges.
    """
    if is_text:
        text, label = path_or_text, "<builtin>"
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
        label = str(path_or_text)

    blocks, cur = [], []
    for raw in text.splitlines():
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            if cur:
                blocks.append(cur)
                cur = []
            continue
        cur.append(ln)
    if cur:
        blocks.append(cur)

    partial: dict = {}
    for i, block in enumerate(blocks):
        name, axis, coeffs, rng = _parse_block(block, label, i)
        partial.setdefault(name, {})[axis] = (coeffs, rng)

    out = {}
    for name, axes in partial.items():
        if set(axes) != {"o", "e"}:
            raise ValidationError(f"{label}: material {name} needs both 'o' and 'e' blocks")
        (co, rng_o), (ce, rng_e) = axes["o"], axes["e"]
        rng = (max(rng_o[0], rng_e[0]), min(rng_o[1], rng_e[1]))
        out[name] = Material(name=name, sellmeier_o=co, sellmeier_e=ce, range_um=rng)
    return out


def builtin_materials() -> dict:
    text = resources.files("biphoton.data").joinpath("materials.txt").read_text("utf-8")
    return load_materials(text, is_text=True)


_BUILTIN_CACHE: dict = {}


def get_material(name: str, materials_path: str | None = None) -> Material:
    """Look up a material by name, from ``materials_path`` if given, else the
    built-in table (cached)."""
    if materials_path is not None:
        table = load_materials(materials_path)
    else:
        if not _BUILTIN_CACHE:
            _BUILTIN_CACHE.update(builtin_materials())
        table = _BUILTIN_CACHE
    try:
        return table[name]
    except KeyError:
        raise ValidationError(
            f"unknown material {name!r}; available: {sorted(table)}"
        ) from None


# ----------------------------------------------------------------------
# Sellmeier evaluation
# ----------------------------------------------------------------------

def _n2(coeffs: Sequence[float], lam_um):
    """n^2(lambda) for the sellmeier_v1 form (lambda in um)."""
    lam2 = np.asarray(lam_um, dtype=float) ** 2
    val = coeffs[0] + coeffs[1] * lam2
    for i in range(2, len(coeffs), 3):
        a, b, cc = coeffs[i], coeffs[i + 1], coeffs[i + 2]
        val = val + (a * lam2 + b) / (lam2 - cc)
    return val


def _dn2_dlam2(coeffs: Sequence[float], lam_um):
    """d(n^2)/d(lambda^2); each pole term (A l^2 + B)/(l^2 - C) differentiates
    to -(A C + B)/(l^2 - C)^2."""
    lam2 = np.asarray(lam_um, dtype=float) ** 2
    val = np.full_like(lam2, coeffs[1], dtype=float)
    for i in range(2, len(coeffs), 3):
        a, b, cc = coeffs[i], coeffs[i + 1], coeffs[i + 2]
        val = val - (a * cc + b) / (lam2 - cc) ** 2
    return val


def _principal(coeffs, lam_um):
    """(n, dn/dlam) for one principal axis, lam in um."""
    n = np.sqrt(_n2(coeffs, lam_um))
    # dn/dl = l * d(n^2)/d(l^2) / n
    dn = np.asarray(lam_um, dtype=float) * _dn2_dlam2(coeffs, lam_um) / n
    return n, dn


def _ray_kind(ray: Ray):
    if ray == "o" or ray == "ordinary":
        return "o", None
    if ray == "e" or ray == "extraordinary":
        return "e", None
    if isinstance(ray, tuple) and len(ray) == 2 and ray[0] in ("e", "extraordinary"):
        return "e", float(ray[1])
    raise ValidationError(f"unknown ray spec {ray!r}; use 'o', 'e' or ('e', theta)")


def _index_and_slope(material: Material, lam_um, ray: Ray):
    """(n, dn/dlam_um) for any ray spec, range-checked."""
    material.check_range(lam_um)
    kind, theta = _ray_kind(ray)
    if kind == "o":
        return _principal(material.sellmeier_o, lam_um)
    no, dno = _principal(material.sellmeier_o, lam_um)
    ne, dne = _principal(material.sellmeier_e, lam_um)
    if theta is None:
        return ne, dne
    ct2, st2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    n = 1.0 / np.sqrt(ct2 / no**2 + st2 / ne**2)
    # dn/dl of the ellipsoid index at fixed theta
    dn = n**3 * (ct2 * dno / no**3 + st2 * dne / ne**3)
    return n, dn


def refractive_index(material: Material, wavelength_um, ray: Ray):
    """Phase index n(lambda) for the requested ray.  Raises RangeError outside
    the shipped validity window of the fit."""
    n, _ = _index_and_slope(material, wavelength_um, ray)
    return n


def wave_props(material: Material, wavelength_um: float, ray: Ray) -> WaveProps:
    """k = n(omega) * omega / c and the analytic group slope
    k' = dk/domega = (n - lambda * dn/dlambda) / c."""
    n, dn = _index_and_slope(material, wavelength_um, ray)
    lam_m = wavelength_um * 1e-6
    omega = 2.0 * math.pi * C_LIGHT / lam_m
    k = n * omega / C_LIGHT
    k_prime = (n - wavelength_um * dn) / C_LIGHT
    return WaveProps(omega=float(omega), k=float(k), k_prime=float(k_prime))


def group_slope(material: Material, wavelength_um, ray: Ray):
    """Vector-friendly dk/domega [s/m] (same formula as wave_props)."""
    n, dn = _index_and_slope(material, wavelength_um, ray)
    return (n - np.asarray(wavelength_um, dtype=float) * dn) / C_LIGHT


def wavevector(material: Material, wavelength_um, ray: Ray):
    """Vector-friendly k(lambda) [rad/m]."""
    n = refractive_index(material, wavelength_um, ray)
    lam_m = np.asarray(wavelength_um, dtype=float) * 1e-6
    return 2.0 * math.pi * n / lam_m


# ----------------------------------------------------------------------
# Phase-matching solvers
# ----------------------------------------------------------------------

def degenerate_noncollinear_angle(material: Material, pump_um: float,
                                  theta_pm: float) -> float:
    """Internal emission angle theta >= 0 of degenerate type-I PDC,
    solving kp(2*omega0, e at theta_pm) = 2 k(omega0, o) cos(theta).

    pump_um is the pump wavelength; the degenerate photons sit at 2*pump_um.
    """
    lam0 = 2.0 * pump_um
    n_p = refractive_index(material, pump_um, ("e", theta_pm))
    n_o = refractive_index(material, lam0, "o")
    ratio = float(n_p / n_o)
    if ratio > 1.0:
        raise PhaseMatchError(
            f"not phase-matchable: kp exceeds 2k for {material.name} at "
            f"theta_pm={math.degrees(theta_pm):.3f} deg (n_p/n_o = {ratio:.6f})"
        )
    return math.acos(ratio)


def collinear_degenerate_cut_angle(material: Material, pump_um: float) -> float:
    """Cut angle theta_pm at which degenerate *collinear* type-I PDC phase
    matches: n_e(pump, theta_pm) = n_o(2*pump)."""
    lam0 = 2.0 * pump_um
    target = refractive_index(material, lam0, "o")

    def f(th):
        return refractive_index(material, pump_um, ("e", th)) - target

    lo, hi = 1e-9, math.pi / 2 - 1e-9
    if f(lo) * f(hi) > 0:
        raise PhaseMatchError(
            f"no collinear degenerate type-I cut angle for {material.name} "
            f"at pump {pump_um:g} um"
        )
    return brentq(f, lo, hi, xtol=1e-14)


def typeII_cut_angle(material: Material, degenerate_um: float) -> float:
    """Cut angle for degenerate collinear type-II (e -> o + e) matching:
    2 n_e(lam/2, theta) = n_o(lam) + n_e(lam, theta)."""
    lam = degenerate_um
    lam_p = 0.5 * lam

    def f(th):
        return (2.0 * refractive_index(material, lam_p, ("e", th))
                - refractive_index(material, lam, "o")
                - refractive_index(material, lam, ("e", th)))

    lo, hi = 1e-9, math.pi / 2 - 1e-9
    if f(lo) * f(hi) > 0:
        raise PhaseMatchError(
            f"no collinear type-II cut angle for {material.name} at {lam:g} um"
        )
    return brentq(f, lo, hi, xtol=1e-14)


def _typeII_group_slopes(material: Material, lam_um: float):
    """(kp', ko', ke') for degenerate collinear type-II PDC at lam_um.

    Preferred geometry: birefringent angle matching, with the pump and the
    extraordinary daughter evaluated at the solved cut angle.  If no cut
    angle exists (e.g. KTP in the uniaxial approximation), fall back to
    principal-axis propagation with an ordinary-polarized pump.
    """
    lam_p = 0.5 * lam_um
    try:
        th = typeII_cut_angle(material, lam_um)
        kp = group_slope(material, lam_p, ("e", th))
        ko = group_slope(material, lam_um, "o")
        ke = group_slope(material, lam_um, ("e", th))
    except PhaseMatchError:
        kp = group_slope(material, lam_p, "o")
        ko = group_slope(material, lam_um, "o")
        ke = group_slope(material, lam_um, "e")
    return float(kp), float(ko), float(ke)


def gvm_wavelength(material: Material, scan_step_um: float = 0.02) -> float:
    """Degenerate PDC wavelength at which the pump group slope equals the
    mean of the signal/idler slopes for collinear type-II operation:
    kp' = (ko' + ke')/2.  Scan-and-bracket root search over the validity
    window, then brentq refinement."""
    lo = 2.0 * material.range_um[0]
    hi = material.range_um[1]
    if lo >= hi:
        raise PhaseMatchError(f"validity window of {material.name} cannot host "
                              "a degenerate pair and its pump simultaneously")

    def resid(lam):
        kp, ko, ke = _typeII_group_slopes(material, lam)
        return kp - 0.5 * (ko + ke)

    lam = lo + 1e-9
    prev_lam, prev_val = None, None
    while lam < hi - 1e-9:
        try:
            val = resid(lam)
        except PhaseMatchError:
            val = None
        if val is not None and prev_val is not None and prev_val * val < 0:
            root = brentq(resid, prev_lam, lam, xtol=1e-12)
            return float(root)
        prev_lam, prev_val = lam, val
        lam += scan_step_um
    raise PhaseMatchError(
        f"no group-velocity-matched wavelength for {material.name} in "
        f"[{lo:g}, {hi:g}] um"
    )


def typeII_contour_slope(material: Material, degenerate_um: float) -> float:
    """Linearized slope of the type-II phase-matching contours in the
    (nu_s, nu_i) plane: -(kp' - ko') / (kp' - ke') with the signal ordinary
    and the idler extraordinary."""
    kp, ko, ke = _typeII_group_slopes(material, degenerate_um)
    denom = kp - ke
    if abs(denom) < 1e-15:
        raise ValidationError(
            f"degenerate contour slope at {degenerate_um:g} um: |kp'-ke'| < 1e-15 s/m"
        )
    return -(kp - ko) / denom
