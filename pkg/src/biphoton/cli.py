"""Command-line front end.

Subcommands build joint spectral amplitudes, decompose them, evaluate the
interference observables, run the design calculators, drive the Fock
simulator, and emit the data tables behind the standard figures
(`reproduce fig1|fig3|fig5|fig7|fig9`).  Figure reproduction means
emitting data as CSV (plot with any two/three-column tool), not images.

Units are parsed at the boundary with explicit suffixes: lengths `nm`,
`um`, `mm`, `m`; angles `deg`, `rad`; pump bandwidths `nm_fwhm` or
`rad_s`; delays `fs`, `ps`, `s`.  Everything internal is SI (rad/s, m, s).

All artifacts land under --out with fixed names, embed the resolved
configuration, and are byte-identical across reruns of the same
configuration (fixed 17-digit float formatting, sorted keys).  A JSON
config file (--config) supplies defaults for any long option of the same
subcommand, with explicit command-line flags winning; unknown keys are
rejected.  Exit codes: 0 success, 2 validation/usage error, 3 the
requested configuration is outside a model's validity regime.  Errors are
mirrored as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import design, dispersion, focksim, interference, schmidt, spectra
from .errors import RegimeError, ValidationError
from .serialize import to_json_text

# ----------------------------------------------------------------------
# Unit parsing
# ----------------------------------------------------------------------

_LENGTH_SUFFIXES = (("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9), ("m", 1.0))
_TIME_SUFFIXES = (("fs", 1e-15), ("ps", 1e-12), ("ns", 1e-9), ("s", 1.0))


def _suffixed(text: str, suffixes, what: str) -> float:
    t = text.strip()
    for suf, scale in suffixes:
        if t.endswith(suf):
            try:
                return float(t[: -len(suf)]) * scale
            except ValueError:
                break
    units = "|".join(s for s, _ in suffixes)
    raise argparse.ArgumentTypeError(
        f"{what} needs a number with unit suffix ({units}), got {text!r}")


def parse_length_m(text: str) -> float:
    return _suffixed(text, _LENGTH_SUFFIXES, "length")


def parse_time_s(text: str) -> float:
    return _suffixed(text, _TIME_SUFFIXES, "delay")


def parse_angle_rad(text: str) -> float:
    t = text.strip()
    if t.endswith("deg"):
        return math.radians(float(t[:-3]))
    if t.endswith("rad"):
        return float(t[:-3])
    raise argparse.ArgumentTypeError(
        f"angle needs a deg or rad suffix, got {text!r}")


def parse_bandwidth(text: str):
    """('nm_fwhm', value) or ('rad_s', value)."""
    t = text.strip()
    if t.endswith("nm_fwhm"):
        return ("nm_fwhm", float(t[: -len("nm_fwhm")]))
    if t.endswith("rad_s"):
        return ("rad_s", float(t[: -len("rad_s")]))
    raise argparse.ArgumentTypeError(
        f"bandwidth needs an nm_fwhm or rad_s suffix, got {text!r}")


def parse_sigma_rad_s(text: str) -> float:
    """Model widths are always rad/s; the suffix is optional."""
    t = text.strip()
    if t.endswith("rad_s"):
        t = t[: -len("rad_s")]
    if t.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad width {text!r}")


# ----------------------------------------------------------------------
# Parser construction with a per-subcommand option registry
# ----------------------------------------------------------------------

class _Registry:
    """Remembers each option's default and parser so a JSON config file can
    be merged under explicit flags and unknown keys rejected."""

    def __init__(self, sub):
        self.sub = sub
        self.defaults = {}
        self.types = {}

    def add(self, *names, **kw):
        action = self.sub.add_argument(*names, **kw)
        self.defaults[action.dest] = action.default
        self.types[action.dest] = kw.get("type")
        return action


def _add_common(reg: _Registry):
    reg.add("--out", default=".", help="output directory (default: .)")
    reg.add("--config", default=None,
            help="JSON file of option defaults for this subcommand")
    reg.add("--materials", default=None,
            help="materials definition file overriding the built-ins")
    reg.add("--seed", type=int, default=0,
            help="seed echoed into artifacts (reserved for randomized sweeps)")


def _add_builder(reg: _Registry):
    reg.add("--builder", default="model",
            choices=["model", "collinear", "noncollinear-sinc",
                     "gaussian-beam"],
            help="joint-amplitude construction (default: model)")
    reg.add("--sigma", type=parse_sigma_rad_s, default=4e13,
            help="model sum-frequency width in rad/s (model builder)")
    reg.add("--sigma-f", type=parse_sigma_rad_s, default=4e13,
            help="model per-arm filter width in rad/s (the model is only "
                 "normalizable with a finite value)")
    reg.add("--material", default="BBO", help="crystal name (default: BBO)")
    reg.add("--pump", type=parse_length_m, default=400e-9,
            help="pump center wavelength, e.g. 400nm")
    reg.add("--bandwidth", type=parse_bandwidth, default=("nm_fwhm", 10.0),
            help="pump bandwidth, e.g. 10nm_fwhm or 1.5e14rad_s")
    reg.add("--length", type=parse_length_m, default=1e-3,
            help="crystal length, e.g. 1mm")
    reg.add("--theta", type=parse_angle_rad, default=math.radians(3.0),
            help="internal emission angle, e.g. 3deg")
    reg.add("--pdc-type", default="II_eoe", choices=["I_eoo", "II_eoe"],
            help="collinear builder interaction type")
    reg.add("--w0", type=parse_length_m, default=None,
            help="pump waist (gaussian-beam builder); default: the "
                 "factorable-design value")
    reg.add("--filter-sigma", type=parse_sigma_rad_s, default=None,
            help="apply a per-arm Gaussian filter of this width afterwards")
    reg.add("--grid", type=int, default=256, help="grid points per axis")
    reg.add("--span-factor", type=float, default=None,
            help="grid half-span in units of the natural width "
                 "(default 2.5 model / 3.0 pump)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="biphoton",
        description="Joint-spectrum engineering toolkit for "
                    "parametric down-conversion photon pairs.")
    subs = parser.add_subparsers(dest="command")
    registries = {}

    def new(cmd, func, help_text, builder=False):
        sub = subs.add_parser(cmd, help=help_text)
        reg = _Registry(sub)
        _add_common(reg)
        if builder:
            _add_builder(reg)
        sub.set_defaults(func=func)
        registries[cmd] = reg
        return reg

    reg = new("jsa", cmd_jsa, "build a joint spectral amplitude -> CSV/JSON",
              builder=True)

    reg = new("schmidt", cmd_schmidt,
              "mode decomposition of a built amplitude", builder=True)
    reg.add("--n-report", type=int, default=16,
            help="how many eigenvalues to list in the summary")

    reg = new("homi", cmd_homi, "two-crystal coincidence-dip curves")
    reg.add("--sigma", type=parse_sigma_rad_s, default=4e13)
    reg.add("--sigma-f", type=parse_sigma_rad_s, default=4e13,
            help="per-arm filter width in rad/s (inf = unfiltered limit)")
    reg.add("--tau-points", type=int, default=81)
    reg.add("--tau-span", type=float, default=4.0,
            help="half-range of the delay grid in dip 1/e widths")
    reg.add("--numeric", action="store_true",
            help="add the grid-based dip next to the closed form")
    reg.add("--grid", type=int, default=256)

    reg = new("bell", cmd_bell,
              "two-polarization analyzer rates vs delay", builder=True)
    reg.add("--pairing", default="transpose", choices=["transpose", "same"],
            help="how the second amplitude g relates to f")
    reg.add("--tau-max", type=parse_time_s, default=1e-12)
    reg.add("--tau-points", type=int, default=81)

    reg = new("polcorr", cmd_polcorr,
              "polarizer-angle fringes of a polarization-entangled pair",
              builder=True)
    reg.add("--pairing", default="same", choices=["transpose", "same"])
    reg.add("--sign", default="+", choices=["+", "-"])
    reg.add("--theta-b", type=parse_angle_rad, default=math.radians(45.0))
    reg.add("--scan-points", type=int, default=181)

    reg = new("design", cmd_design, "source-engineering calculators")
    reg.sub.add_argument("what", choices=["factorable", "bandwidth",
                                          "margin", "regime", "report"])
    reg.add("--material", default="BBO")
    reg.add("--pump", type=parse_length_m, default=400e-9)
    reg.add("--L", dest="length", type=parse_length_m, default=1e-3)
    reg.add("--theta", type=parse_angle_rad, default=math.radians(3.0))
    reg.add("--w0", type=parse_length_m, default=None)
    reg.add("--bandwidth", type=parse_bandwidth, default=None)

    reg = new("nsgate", cmd_nsgate,
              "conditional-sign gate map, search, and the "
              "interferometer phase test")
    reg.add("--r", type=float, default=focksim.IDEAL_NS_R)
    reg.add("--s", type=float, default=focksim.IDEAL_NS_S)
    reg.add("--search", action="store_true",
            help="run the grid+simplex recovery of the ideal reflectivities")
    reg.add("--mz", type=parse_angle_rad, default=None,
            help="also run the two-photon interferometer at this phase")

    reg = new("economy", cmd_economy, "photon-economy figure of merit table")
    reg.add("--csv", default=None,
            help="CSV of rows label,L_mm,P_W,Rs_Hz,ratio[,R_printed_Hz] "
                 "(default: built-in benchmark table)")
    reg.add("--rel-tol", type=float, default=0.05,
            help="relative mismatch against a quoted R before flagging")

    reg = new("reproduce", cmd_reproduce, "emit the data behind a figure")
    reg.sub.add_argument("figure",
                         choices=["fig1", "fig3", "fig5", "fig7", "fig9"])
    reg.add("--grid", type=int, default=256)
    reg.add("--n-modes", type=int, default=8)

    return parser, registries


def _merge_config(args, reg: _Registry):
    if not getattr(args, "config", None):
        return
    with open(args.config, "r") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValidationError("config file must hold a JSON object")
    for key, val in doc.items():
        dest = key.replace("-", "_")
        if dest in ("config", "func", "command") or dest not in reg.defaults:
            raise ValidationError(f"unknown config key {key!r}")
        if getattr(args, dest) != reg.defaults[dest]:
            continue  # explicit flag wins
        parser_fn = reg.types[dest]
        if isinstance(val, str) and parser_fn is not None:
            try:
                val = parser_fn(val)
            except argparse.ArgumentTypeError as exc:
                raise ValidationError(f"config key {key!r}: {exc}")
        setattr(args, dest, val)


def _resolved_config(args, reg: _Registry) -> dict:
    cfg = {"command": args.command}
    for dest in sorted(reg.defaults):
        if dest in ("config", "out"):   # I/O plumbing, not configuration
            continue
        val = getattr(args, dest)
        cfg[dest] = list(val) if isinstance(val, tuple) else val
    for extra in ("what", "figure"):
        if hasattr(args, extra):
            cfg[extra] = getattr(args, extra)
    return cfg


# ----------------------------------------------------------------------
# Shared construction helpers
# ----------------------------------------------------------------------

def _get_material(args):
    if args.materials:
        mats = dispersion.load_materials(args.materials)
        if args.material not in mats:
            raise ValidationError(
                f"material {args.material!r} not in {args.materials}")
        return mats[args.material]
    return dispersion.get_material(args.material)


def _pump_envelope(args) -> spectra.PumpEnvelope:
    kind, val = args.bandwidth
    pump_um = args.pump * 1e6
    if kind == "nm_fwhm":
        return spectra.PumpEnvelope.from_pump_fwhm(pump_um, val)
    omega0 = math.pi * spectra.C_LIGHT / args.pump
    return spectra.PumpEnvelope(omega0=omega0, sigma_p=val)


def _build_jsa(args):
    """(jsa, extras dict) from the common builder options."""
    extras = {}
    if args.builder == "model":
        if not math.isfinite(args.sigma_f):
            raise ValidationError(
                "the model builder needs a finite --sigma-f "
                "(an unfiltered sum-frequency Gaussian is not normalizable)")
        model = spectra.GaussianSourceModel(sigma=args.sigma,
                                            sigma_F=args.sigma_f)
        grid = spectra.default_model_grid(
            model, n_points=args.grid,
            span_factor=args.span_factor if args.span_factor else 2.5)
        jsa = spectra.gaussian_model_jsa(model, grid)
        extras["model"] = {"sigma": model.sigma, "sigma_F": model.sigma_F,
                           "mu": schmidt.analytic_mu(model),
                           "K_analytic": schmidt.analytic_K(
                               schmidt.analytic_mu(model))}
    else:
        material = _get_material(args)
        pump = _pump_envelope(args)
        grid = spectra.default_pump_grid(
            pump, n_points=args.grid,
            span_factor=args.span_factor if args.span_factor else 3.0)
        if args.builder == "collinear":
            jsa = spectra.build_jsa_collinear(material, args.pdc_type,
                                              args.length, pump, grid)
        elif args.builder == "noncollinear-sinc":
            jsa = spectra.build_jsa_noncollinear_sinc(
                material, args.length, pump, args.theta, grid)
        else:  # gaussian-beam
            pump_um = args.pump * 1e6
            w0 = args.w0 if args.w0 is not None else design.factorable_waist(
                material, pump_um, args.length, args.theta)
            extras["w0"] = w0
            beam = spectra.BeamGeometry(w0=w0, theta=args.theta,
                                        L=args.length)
            jsa = spectra.build_jsa_noncollinear_gaussian_beam(
                material, pump, beam, grid)
    if args.filter_sigma is not None:
        jsa, frac = spectra.apply_gaussian_filter(jsa, args.filter_sigma)
        extras["filter_transmitted_fraction"] = frac
    return jsa, extras


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write(path: str, text: str):
    with open(path, "w", newline="") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _surface_csv(grid_s, grid_i, values) -> str:
    out = io.StringIO()
    out.write("# columns: nu_s_rad_s,nu_i_rad_s,value\n")
    out.write("# omega0_s_rad_s=%.17g omega0_i_rad_s=%.17g\n"
              % (grid_s.omega0, grid_i.omega0))
    w = csv.writer(out, lineterminator="\n")
    for i, ns in enumerate(grid_s.detunings):
        for j, ni in enumerate(grid_i.detunings):
            w.writerow(["%.17g" % ns, "%.17g" % ni, "%.17g" % values[i, j]])
    return out.getvalue()


# ----------------------------------------------------------------------
# Subcommand handlers
# ----------------------------------------------------------------------

def cmd_jsa(args, reg) -> int:
    jsa, extras = _build_jsa(args)
    out = _outdir(args)
    spectra.write_jsa_csv(jsa, os.path.join(out, "jsa.csv"))
    print(f"wrote {os.path.join(out, 'jsa.csv')}")
    summary = {
        "config": _resolved_config(args, reg),
        "metadata": spectra.jsa_metadata(jsa),
        "intensity_correlation": spectra.intensity_correlation(jsa),
    }
    summary.update(extras)
    _write(os.path.join(out, "jsa.json"), to_json_text(summary))
    return 0


def cmd_schmidt(args, reg) -> int:
    jsa, extras = _build_jsa(args)
    dec = schmidt.schmidt_svd(jsa)
    out = _outdir(args)
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["n", "eigenvalue"])
    for n, lam in enumerate(dec.eigenvalues):
        w.writerow([n, "%.17g" % lam])
    _write(os.path.join(out, "schmidt_eigenvalues.csv"), rows.getvalue())
    summary = {
        "config": _resolved_config(args, reg),
        "K": dec.K,
        "eigenvalues_head": [float(v)
                             for v in dec.eigenvalues[: args.n_report]],
        "n_modes_kept": dec.n_modes,
        "truncated_mass": dec.truncated_mass,
    }
    summary.update(extras)
    _write(os.path.join(out, "schmidt.json"), to_json_text(summary))
    print(f"K = {dec.K:.6f}")
    return 0


def cmd_homi(args, reg) -> int:
    model = spectra.GaussianSourceModel(sigma=args.sigma, sigma_F=args.sigma_f)
    taus = interference.default_tau_grid(model, n=args.tau_points,
                                         span_widths=args.tau_span)
    ana = interference.homi_dip_analytic(model, taus)
    num = None
    if args.numeric:
        grid = spectra.default_model_grid(model, n_points=args.grid)
        jsa = spectra.gaussian_model_jsa(model, grid)
        num = interference.two_crystal_homi_numeric(jsa, taus)
    out = _outdir(args)
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["tau_s", "rate_analytic"] + (["rate_numeric"] if num else []))
    for i, tau in enumerate(taus):
        row = ["%.17g" % tau, "%.17g" % ana.rates[i]]
        if num:
            row.append("%.17g" % num.rates[i])
        w.writerow(row)
    _write(os.path.join(out, "homi.csv"), rows.getvalue())
    mu = schmidt.analytic_mu(model)
    summary = {
        "config": _resolved_config(args, reg),
        "visibility_analytic": ana.visibility,
        "baseline_analytic": ana.baseline,
        "dip_width_s": interference.analytic_dip_width(model),
        "K_analytic": math.inf if mu >= 1.0 else schmidt.analytic_K(mu),
        "mu": mu,
    }
    if num:
        summary["visibility_numeric"] = num.visibility
    _write(os.path.join(out, "homi.json"), to_json_text(summary))
    print(f"V = {ana.visibility:.6f}, baseline = {ana.baseline:.6f}")
    return 0


def _make_pair(args, jsa) -> interference.PolarizedPairState:
    from dataclasses import replace
    if args.pairing == "transpose":
        g = replace(jsa, grid_s=jsa.grid_i, grid_i=jsa.grid_s,
                    values=jsa.values.T.copy())
    else:
        g = jsa
    sign = getattr(args, "sign", "+")
    return interference.PolarizedPairState(f=jsa, g=g, sign=sign)


def cmd_bell(args, reg) -> int:
    jsa, _ = _build_jsa(args)
    pair = _make_pair(args, jsa)
    taus = np.linspace(-args.tau_max, args.tau_max, args.tau_points)
    out = _outdir(args)
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["tau_s", "rate_plus", "rate_minus"])
    for tau in taus:
        rp, rm = interference.bell_analyzer_rates(pair, float(tau))
        w.writerow(["%.17g" % tau, "%.17g" % rp, "%.17g" % rm])
    _write(os.path.join(out, "bell.csv"), rows.getvalue())
    rp0, rm0 = interference.bell_analyzer_rates(pair, 0.0)
    summary = {
        "config": _resolved_config(args, reg),
        "rate_plus_at_zero": rp0,
        "rate_minus_at_zero": rm0,
        "exchange_residual": interference.bell_condition_residual(pair),
        "pairing_residual": interference.pol_pairing_residual(pair),
    }
    _write(os.path.join(out, "bell.json"), to_json_text(summary))
    print(f"Rc+(0) = {rp0:.3e}, Rc-(0) = {rm0:.6f}")
    return 0


def cmd_polcorr(args, reg) -> int:
    jsa, _ = _build_jsa(args)
    pair = _make_pair(args, jsa)
    thetas = np.linspace(0.0, math.pi, args.scan_points)
    out = _outdir(args)
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["theta_a_rad", "rate"])
    for th in thetas:
        w.writerow(["%.17g" % th,
                    "%.17g" % interference.polarization_fringe(
                        pair, float(th), args.theta_b)])
    _write(os.path.join(out, "polcorr.csv"), rows.getvalue())
    summary = {
        "config": _resolved_config(args, reg),
        "visibility": interference.fringe_visibility(pair, args.theta_b),
        "overlap_re": interference.pair_overlap(pair).real,
        "pairing_residual": interference.pol_pairing_residual(pair),
    }
    _write(os.path.join(out, "polcorr.json"), to_json_text(summary))
    print(f"fringe visibility = {summary['visibility']:.6f}")
    return 0


def cmd_design(args, reg) -> int:
    material = _get_material(args)
    pump_um = args.pump * 1e6
    sigma_p = None
    if args.bandwidth is not None:
        kind, val = args.bandwidth
        sigma_p = (spectra.sigma_p_from_fwhm(val * 1e-9, args.pump)
                   if kind == "nm_fwhm" else val)
    rep = design.design_report(material, pump_um, args.length, args.theta,
                               w0=args.w0, sigma_p=sigma_p)
    out = _outdir(args)
    summary = {"config": _resolved_config(args, reg), "report": rep}
    _write(os.path.join(out, "design.json"), to_json_text(summary))
    lines = {
        "factorable": f"factorable waist w0 = {rep.factorable_waist * 1e6:.2f} um",
        "bandwidth": f"pump bandwidth threshold = {rep.sigma_p_min:.6g} rad/s",
        "margin": f"margin = {rep.margin:.4g} "
                  f"({'frequency-correlated' if rep.freq_correlated else 'below the factor-10 bar'})",
        "regime": f"waist-regime ratio = {rep.waist_regime_ratio:.4g} "
                  f"({'ok' if rep.waist_regime_ok else 'outside validity'})",
    }
    if args.what == "report":
        for line in lines.values():
            print(line)
    else:
        print(lines[args.what])
    return 0


def cmd_nsgate(args, reg) -> int:
    cfg = focksim.NSGateConfig(r=args.r, s=args.s)
    cmap = focksim.ns_conditional_map(cfg)
    summary = {
        "config": _resolved_config(args, reg),
        "map": {"c0": cmap.c0, "c1": cmap.c1, "c2": cmap.c2,
                "success": cmap.success,
                "c1_over_c0": cmap.c1 / cmap.c0,
                "c2_over_c0": cmap.c2 / cmap.c0},
        "topology": cfg.topology,
        "convention": cfg.convention,
    }
    if args.search:
        res = focksim.ns_search()
        summary["search"] = {"r": res.r, "s": res.s,
                             "objective": res.objective,
                             "success": res.map.success}
    if args.mz is not None:
        rep = focksim.homi_mz_stage_states(args.mz)
        summary["mz"] = {
            "phase": rep.phase,
            "coincidence_probability": rep.coincidence_probability,
            "after_input_splitter": {str(k): v for k, v
                                     in rep.after_input_splitter.items()},
            "output_state": {str(k): v for k, v
                             in rep.output_state.items()},
        }
    out = _outdir(args)
    _write(os.path.join(out, "nsgate.json"), to_json_text(summary))
    print(f"(c0, c1, c2) = ({cmap.c0.real:+.6f}, {cmap.c1.real:+.6f}, "
          f"{cmap.c2.real:+.6f}), success = {cmap.success:.6f}")
    return 0


def cmd_economy(args, reg) -> int:
    if args.csv:
        records = design.load_economy_csv(args.csv)
        if args.rel_tol != 0.05:
            records = [design.economy_figure(
                r.label, r.crystal_length_mm, r.pump_power_w,
                r.singles_rate_hz, r.coincidence_ratio,
                r_printed=r.r_printed, rel_tol=args.rel_tol)
                for r in records]
    else:
        records = design.builtin_economy_records()
    out = _outdir(args)
    _write(os.path.join(out, "economy.csv"),
           design.economy_csv_text(records))
    summary = {"config": _resolved_config(args, reg), "records": records}
    _write(os.path.join(out, "economy.json"), to_json_text(summary))
    for r in records:
        flag = "  [flagged: quoted value disagrees]" if r.flagged else ""
        print(f"{r.label}: R = {r.r_figure:.4g} Hz/(mm W){flag}")
    return 0


# ----------------------------------------------------------------------
# Figure data
# ----------------------------------------------------------------------

def _fig1(args, reg, out) -> dict:
    material = dispersion.get_material("BBO")
    pump = spectra.PumpEnvelope.from_pump_fwhm(0.8, 15.0)
    grid = spectra.default_pump_grid(pump, n_points=args.grid,
                                     span_factor=3.0)
    j1 = spectra.build_jsa_noncollinear_sinc(material, 1e-3, pump,
                                             math.radians(3.0), grid)
    j2 = spectra.build_jsa_collinear(material, "II_eoe", 1e-3, pump, grid)
    spectra.write_jsa_csv(j1, os.path.join(out, "fig1_typeI_noncollinear.csv"))
    spectra.write_jsa_csv(j2, os.path.join(out, "fig1_typeII_collinear.csv"))
    return {"K_typeI_noncollinear": schmidt.schmidt_svd(j1).K,
            "K_typeII_collinear": schmidt.schmidt_svd(j2).K}


def _fig3(args, reg, out) -> dict:
    sigma = 4e13
    ratios = np.logspace(-2.0, 2.0, 81)   # sigma_F / sigma
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["sigma_F_rad_s", "visibility", "baseline"])
    for x in ratios:
        model = spectra.GaussianSourceModel(sigma=sigma, sigma_F=sigma * x)
        w.writerow(["%.17g" % (sigma * x),
                    "%.17g" % interference.homi_visibility_analytic(model),
                    "%.17g" % interference.homi_baseline_analytic(model)])
    _write(os.path.join(out, "fig3.csv"), rows.getvalue())
    eq = spectra.GaussianSourceModel(sigma=sigma, sigma_F=sigma)
    return {"sigma": sigma,
            "at_equal_widths": {
                "visibility": interference.homi_visibility_analytic(eq),
                "baseline": interference.homi_baseline_analytic(eq)}}


def _beam_figure(args, out, tag, L, w0, fwhm_nm) -> dict:
    material = dispersion.get_material("BBO")
    pump_um = 0.4
    theta = math.radians(3.0)
    pump = spectra.PumpEnvelope.from_pump_fwhm(pump_um, fwhm_nm)
    grid = spectra.default_pump_grid(pump, n_points=args.grid,
                                     span_factor=2.5)
    if w0 is None:
        w0 = design.factorable_waist(material, pump_um, L, theta)
    beam = spectra.BeamGeometry(w0=w0, theta=theta, L=L)
    pump_f, long_f, trans_f = spectra.noncollinear_gaussian_beam_factors(
        material, pump, beam, grid)
    for name, surf in (("pump", pump_f), ("longitudinal", long_f),
                       ("transverse", trans_f),
                       ("product", pump_f * long_f * trans_f)):
        _write(os.path.join(out, f"{tag}_{name}.csv"),
               _surface_csv(grid, grid, surf))
    jsa = spectra.build_jsa_noncollinear_gaussian_beam(material, pump, beam,
                                                       grid)
    return {"w0": w0, "L": L, "theta": theta, "pump_fwhm_nm": fwhm_nm,
            "K": schmidt.schmidt_svd(jsa).K,
            "margin": design.freq_correlated_margin(material, pump_um, L,
                                                    theta, w0),
            "intensity_correlation": spectra.intensity_correlation(jsa)}


def _fig9(args, reg, out) -> dict:
    mus = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["K", "rate", "trunc_mass"])
    for mu in mus:
        res = focksim.ns_sixfold_rate(mu=mu, n_modes=args.n_modes)
        w.writerow(["%.17g" % res.cooperativity, "%.17g" % res.rate,
                    "%.17g" % res.truncation_mass])
    _write(os.path.join(out, "fig9.csv"), rows.getvalue())
    return {"mus": mus, "n_modes": args.n_modes}


def cmd_reproduce(args, reg) -> int:
    out = _outdir(args)
    fig = args.figure
    if fig == "fig1":
        info = _fig1(args, reg, out)
    elif fig == "fig3":
        info = _fig3(args, reg, out)
    elif fig == "fig5":
        info = _beam_figure(args, out, "fig5", L=1e-3, w0=None, fwhm_nm=10.0)
    elif fig == "fig7":
        info = _beam_figure(args, out, "fig7", L=200e-6, w0=1e-3,
                            fwhm_nm=15.0)
    else:
        info = _fig9(args, reg, out)
    manifest = {"config": _resolved_config(args, reg), "figure": fig,
                "results": info}
    _write(os.path.join(out, f"{fig}.json"), to_json_text(manifest))
    return 0


# ----------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------

def _emit_error(exc: BaseException, code: int):
    doc = {"error": type(exc).__name__, "message": str(exc),
           "exit_code": code}
    if isinstance(exc, RegimeError):
        doc["lhs"] = exc.lhs
        doc["rhs"] = exc.rhs
    sys.stderr.write(to_json_text(doc))


def main(argv=None) -> int:
    parser, registries = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if getattr(args, "func", None) is None:
        parser.print_help()
        return 2
    try:
        _merge_config(args, registries[args.command])
        return args.func(args, registries[args.command])
    except RegimeError as exc:
        _emit_error(exc, 3)
        return 3
    except (ValueError, OSError) as exc:   # ValidationError subclasses ValueError
        _emit_error(exc, 2)
        return 2


if __name__ == "__main__":
    sys.exit(main())
