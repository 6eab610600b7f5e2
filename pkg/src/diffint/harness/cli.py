"""Command-line interface.

Subcommands: ``variance`` (one scheme at one point, with breakdown),
``sweep`` (atom-number sweep to CSV/SVG), ``mc`` (closed-form vs Monte
Carlo report), ``optimize`` (detuning optimization), ``sagnac``
(rotation-phase converter), ``check`` (closed-form validity ratios).

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
failure, 3 closed-form/Monte-Carlo disagreement.
"""
from __future__ import annotations

import argparse
import math
import sys

from ..constants import C_LIGHT, H_PLANCK, M_RB87
from ..core import sagnac_phase
from ..decoherence import corrected_variance, optimize_detuning
from ..errors import (
    ConfigError,
    DiffintError,
    InvalidParameterError,
    OptimizationFailedError,
)
from ..mc import MISMATCH_MODELS, active_backend
from ..schemes import LightConfig, SchemeId, check_assumptions, evaluate_scheme
from .compare import compare_mc
from .config import RunConfig, load_config
from .sweep import SweepSpec, emit_csv, emit_svg, run_sweep, write_csv

__all__ = ["build_parser", "main"]

_SCHEME_NAMES = tuple(scheme.value for scheme in SchemeId)

# Earth's rotation rate, the canonical Sagnac signal.
_EARTH_RATE = 7.292115e-5


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="key = value configuration file")
    parser.add_argument("--preset", default="ideal",
                        choices=("ideal", "realistic"),
                        help="base parameter set (default: ideal)")


def _add_scheme_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", required=True, choices=_SCHEME_NAMES,
                        help="measurement scheme")


def _load(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, float | int] = {}
    for key, attr in (("seed", "seed"), ("samples", "samples"),
                      ("N_bar", "nbar"), ("alpha", "alpha"),
                      ("gamma_mismatch", "gamma_mismatch")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    return load_config(getattr(args, "config", None),
                       preset=getattr(args, "preset", "ideal"),
                       overrides=overrides)


def _print_estimate(config: RunConfig, scheme: SchemeId, estimate,
                    delta: float, chi: float) -> None:
    print(f"scheme        {scheme.value}")
    print(f"N_bar         {config.N_bar:.6e}")
    print(f"phi / theta   {config.phi:.6e} / {config.theta:.6e}")
    print(f"alpha / gamma {config.alpha:.6e} / {config.gamma_mismatch:.6e}")
    if scheme is not SchemeId.CS:
        print(f"n photons     {config.n:.6e}")
        print(f"chi           {chi:.6e}")
        print(f"detuning      {delta:.6e}")
    print(f"mean          {estimate.mean:+.10e}")
    print(f"variance      {estimate.variance:.10e}")
    for channel in ("projection", "detection", "mismatch", "decoherence"):
        print(f"  {channel:<12}{estimate.breakdown[channel]:.10e}")
    for label, value in estimate.bias_terms:
        print(f"bias          {label} = {value:+.6e}")


def _cmd_variance(args: argparse.Namespace) -> int:
    config = _load(args)
    scheme = SchemeId(args.scheme)
    cfg = config.ensemble()
    if scheme is SchemeId.CS:
        estimate = evaluate_scheme(scheme, cfg)
        _print_estimate(config, scheme, estimate, 0.0, 0.0)
        return 0
    params = config.physical()
    if args.optimize_delta:
        optimum = optimize_detuning(params, cfg, scheme,
                                    include_noise_terms=True,
                                    varphi=config.varphi)
        params = params.with_detuning(optimum.detuning)
    light = LightConfig(n=config.n, chi=params.chi)
    estimate = evaluate_scheme(scheme, cfg, light, varphi=config.varphi)
    if args.decoherence or args.optimize_delta:
        estimate = corrected_variance(estimate, params, cfg, scheme)
    _print_estimate(config, scheme, estimate, params.detuning, params.chi)
    report = check_assumptions(cfg, light, scheme)
    status = "satisfied" if report.satisfied else "VIOLATED"
    print(f"assumptions   {status} (threshold {report.threshold:g})")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    overrides: dict = {}
    if args.nbar_min is not None:
        overrides["nbar_min"] = args.nbar_min
    if args.nbar_max is not None:
        overrides["nbar_max"] = args.nbar_max
    if args.points is not None:
        overrides["points"] = args.points
    if args.schemes is not None:
        overrides["schemes"] = tuple(
            SchemeId(name.strip()) for name in args.schemes.split(",") if name.strip())
    if args.decoherence is not None:
        overrides["include_decoherence"] = args.decoherence
    if args.optimize_delta is not None:
        overrides["optimize_detuning"] = args.optimize_delta
    if args.bias_in_variance is not None:
        overrides["include_bias_in_variance"] = args.bias_in_variance
    spec = SweepSpec.from_preset(args.preset, config, **overrides)
    rows = run_sweep(spec)
    if args.out:
        emit_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    else:
        write_csv(rows, sys.stdout)
    if args.svg:
        emit_svg(rows, args.svg)
        print(f"wrote plot to {args.svg}", file=sys.stderr)
    return 0


def _cmd_mc(args: argparse.Namespace) -> int:
    config = _load(args)
    scheme = SchemeId(args.scheme)
    cfg = config.ensemble()
    light = None if scheme is SchemeId.CS else config.light()
    opts = config.mc_options(workers=args.workers,
                             mismatch_model=args.mismatch_model)
    report = compare_mc(cfg, light, scheme, opts, varphi=config.varphi,
                        backend=args.backend)
    print(f"backend    {args.backend or active_backend()}")
    print(report.format_report())
    return 0 if report.passed else 3


def _cmd_optimize(args: argparse.Namespace) -> int:
    config = _load(args)
    scheme = SchemeId(args.scheme)
    params = config.physical()
    bracket = None
    if (args.bracket_low is None) != (args.bracket_high is None):
        raise ConfigError("--bracket-low and --bracket-high must be given together")
    if args.bracket_low is not None:
        bracket = (args.bracket_low, args.bracket_high)
    optimum = optimize_detuning(params, config.ensemble(), scheme,
                                include_noise_terms=not args.ideal,
                                bracket=bracket,
                                varphi=config.varphi)
    rel = (optimum.variance - optimum.analytic_min) / optimum.analytic_min
    print(f"scheme        {scheme.value}")
    print(f"detuning      {optimum.detuning:.6e}"
          f"  ({optimum.detuning / params.gamma_linewidth:.1f} linewidths)")
    print(f"chi           {params.with_detuning(optimum.detuning).chi:.6e}")
    print(f"variance      {optimum.variance:.10e}")
    print(f"analytic min  {optimum.analytic_min:.10e}  (rel diff {rel:+.3%})")
    return 0


def _cmd_sagnac(args: argparse.Namespace) -> int:
    matter = sagnac_phase(args.area, args.angular_velocity, args.mass)
    light = 4.0 * math.pi * args.area * args.angular_velocity / (args.wavelength * C_LIGHT)
    ratio = args.mass * args.wavelength * C_LIGHT / H_PLANCK
    print(f"matter-wave phase   {matter:.6e} rad")
    print(f"light phase         {light:.6e} rad  (same loop, wavelength "
          f"{args.wavelength:.3e} m)")
    print(f"matter/light ratio  {ratio:.6e}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    config = _load(args)
    scheme = SchemeId(args.scheme)
    cfg = config.ensemble()
    light = None if scheme is SchemeId.CS else config.light()
    report = check_assumptions(cfg, light, scheme, threshold=args.threshold)
    print(f"scheme     {scheme.value}   threshold {report.threshold:g}")
    for name, value in report.ratios.items():
        checked = "checked" if name in report.checked else "ignored"
        ok = "ok" if value < report.threshold else "VIOLATED"
        marker = ok if name in report.checked else "-"
        print(f"  {name:<28}{value:.4e}   {checked:<8} {marker}")
    print(f"satisfied  {'yes' if report.satisfied else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffint",
        description="Differential atom interferometry phase-noise calculator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_var = sub.add_parser("variance", help="one scheme at one point, with breakdown")
    _add_config_flags(p_var)
    _add_scheme_flag(p_var)
    p_var.add_argument("--nbar", type=float, help="override mean atom number")
    p_var.add_argument("--alpha", type=float, help="override detection noise")
    p_var.add_argument("--gamma-mismatch", dest="gamma_mismatch", type=float,
                       help="override number mismatch")
    p_var.add_argument("--decoherence", action="store_true",
                       help="add the probe-scattering variance correction")
    p_var.add_argument("--optimize-delta", action="store_true",
                       help="optimize the detuning first (implies --decoherence)")
    p_var.set_defaults(func=_cmd_variance)

    p_sweep = sub.add_parser("sweep", help="atom-number sweep to CSV/SVG")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--schemes", help="comma-separated scheme list")
    p_sweep.add_argument("--nbar-min", type=float, help="sweep start")
    p_sweep.add_argument("--nbar-max", type=float, help="sweep end")
    p_sweep.add_argument("--points", type=int, help="grid size")
    p_sweep.add_argument("--decoherence", action=argparse.BooleanOptionalAction,
                         help="apply the scattering correction per point")
    p_sweep.add_argument("--optimize-delta", action=argparse.BooleanOptionalAction,
                         help="optimize the detuning per point")
    p_sweep.add_argument("--bias-in-variance", action=argparse.BooleanOptionalAction,
                         help="fold the js_plus mismatch bias into its variance")
    p_sweep.add_argument("--out", metavar="PATH", help="CSV output (default stdout)")
    p_sweep.add_argument("--svg", metavar="PATH", help="also write an SVG plot")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_mc = sub.add_parser("mc", help="compare a closed form against the sampler")
    _add_config_flags(p_mc)
    _add_scheme_flag(p_mc)
    p_mc.add_argument("--nbar", type=float, help="override mean atom number")
    p_mc.add_argument("--alpha", type=float, help="override detection noise")
    p_mc.add_argument("--gamma-mismatch", dest="gamma_mismatch", type=float,
                      help="override number mismatch")
    p_mc.add_argument("--seed", type=int, help="override stream seed")
    p_mc.add_argument("--samples", type=int, help="override sample count")
    p_mc.add_argument("--workers", type=int, default=1,
                      help="sampler worker threads (default 1)")
    p_mc.add_argument("--mismatch-model", default="fixed_offset",
                      choices=MISMATCH_MODELS,
                      help="how atom numbers are drawn per sample")
    p_mc.add_argument("--backend", choices=("numpy", "kernel"),
                      help="force a sampler backend")
    p_mc.set_defaults(func=_cmd_mc)

    p_opt = sub.add_parser("optimize", help="find the variance-minimizing detuning")
    _add_config_flags(p_opt)
    _add_scheme_flag(p_opt)
    p_opt.add_argument("--nbar", type=float, help="override mean atom number")
    p_opt.add_argument("--ideal", action="store_true",
                       help="drop detection-noise and mismatch terms from the objective")
    p_opt.add_argument("--bracket-low", type=float,
                       help="lower detuning bracket in rad/s")
    p_opt.add_argument("--bracket-high", type=float,
                       help="upper detuning bracket in rad/s")
    p_opt.set_defaults(func=_cmd_optimize)

    p_sag = sub.add_parser("sagnac", help="rotation-induced phase converter")
    p_sag.add_argument("--area", type=float, default=1.0,
                       help="enclosed loop area in m^2 (default 1)")
    p_sag.add_argument("--angular-velocity", type=float, default=_EARTH_RATE,
                       help="rotation rate in rad/s (default: Earth's)")
    p_sag.add_argument("--mass", type=float, default=M_RB87,
                       help="atom mass in kg (default: rubidium-87)")
    p_sag.add_argument("--wavelength", type=float, default=1e-6,
                       help="light wavelength for the comparison in m (default 1e-6)")
    p_sag.set_defaults(func=_cmd_sagnac)

    p_check = sub.add_parser("check", help="closed-form validity ratios")
    _add_config_flags(p_check)
    _add_scheme_flag(p_check)
    p_check.add_argument("--nbar", type=float, help="override mean atom number")
    p_check.add_argument("--threshold", type=float, default=0.1,
                         help="small-parameter threshold (default 0.1)")
    p_check.set_defaults(func=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; usage errors
        # are exit code 1 here.
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OptimizationFailedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except InvalidParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 1
    except (OverflowError, FloatingPointError, DiffintError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
