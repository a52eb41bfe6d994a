"""Command-line front end: boundary queries, metric curves, SE analysis, presets."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from .arrays import ArrayConfig, DegenerateGeometryError, PolarPosition
from .boundaries import (
    EnvelopeSearchPolicy,
    HorizonExceededError,
    Tolerances,
    boundary_set,
)
from .link import LinkBudget, DEFAULT_BUDGET, nmse_lower_bound, se_loss, se_loss_worst
from .metrics import THETA_OPEN_MIN, AngleSearchPolicy
from .sweep import (
    PRESET_NAMES,
    REFERENCE_RADII,
    CurveRecord,
    RangeGrid,
    SweepSpec,
    _curve_values,
    boundary_csv_lines,
    config_id,
    curve_csv_lines,
    preset,
    run_sweep,
    write_lines,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3


class CliConfigError(ValueError):
    """The --config file is malformed or contains invalid values."""


_CONFIG_SECTIONS = {
    "array": ("spacing_m", "light_speed"),
    "tolerances": ("delta_inf", "delta_2", "delta_se"),
    "budget": ("pilot_snr_db", "data_snr_db", "pilot_len"),
    "angle_policy": ("coarse_grid_points", "refine_tolerance", "refine_max_iter"),
    "envelope_policy": (
        "r_min",
        "points_per_decade",
        "bisection_tol",
        "certification_margin",
        "max_scan_factor",
    ),
}


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CliConfigError("config file must contain a JSON object")
    for section, body in doc.items():
        if section not in _CONFIG_SECTIONS:
            raise CliConfigError(f"unknown config section {section!r}")
        if not isinstance(body, dict):
            raise CliConfigError(f"config section {section!r} must be an object")
        for key, value in body.items():
            if key not in _CONFIG_SECTIONS[section]:
                raise CliConfigError(f"unknown key {section}.{key}")
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise CliConfigError(f"{section}.{key} must be a number, got {value!r}")
    return doc


def _pick(flag_value, file_section: dict, key: str, default):
    """CLI flag > config-file value > built-in default."""
    if flag_value is not None:
        return flag_value
    if key in file_section:
        return file_section[key]
    return default


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _budget_from(args, file_cfg: dict) -> LinkBudget:
    section = file_cfg.get("budget", {})
    pilot_db = _pick(args.pilot_snr_db, section, "pilot_snr_db", None)
    data_db = _pick(args.data_snr_db, section, "data_snr_db", None)
    pilot_len = _pick(args.pilot_len, section, "pilot_len", DEFAULT_BUDGET.pilot_len)
    return LinkBudget(
        pilot_snr=DEFAULT_BUDGET.pilot_snr if pilot_db is None else _db_to_linear(pilot_db),
        data_snr=DEFAULT_BUDGET.data_snr if data_db is None else _db_to_linear(data_db),
        pilot_len=int(pilot_len),
    )


def _tolerances_from(args, file_cfg: dict) -> Tolerances:
    section = file_cfg.get("tolerances", {})
    defaults = Tolerances()
    return Tolerances(
        delta_inf=_pick(getattr(args, "delta_inf", None), section, "delta_inf", defaults.delta_inf),
        delta_2=_pick(getattr(args, "delta_2", None), section, "delta_2", defaults.delta_2),
        delta_se=_pick(getattr(args, "delta_se", None), section, "delta_se", defaults.delta_se),
    )


def _array_from(args, file_cfg: dict) -> ArrayConfig:
    section = file_cfg.get("array", {})
    spacing = _pick(getattr(args, "spacing_m", None), section, "spacing_m", None)
    light_speed = _pick(None, section, "light_speed", None)
    kwargs = {"carrier_freq": args.freq_ghz * 1e9, "n_elements": args.elements}
    if spacing is not None:
        kwargs["spacing"] = spacing
    if light_speed is not None:
        kwargs["light_speed"] = light_speed
    return ArrayConfig(**kwargs)


def _angle_policy_from(args, file_cfg: dict) -> AngleSearchPolicy:
    section = file_cfg.get("angle_policy", {})
    defaults = AngleSearchPolicy()
    return AngleSearchPolicy(
        coarse_grid_points=int(
            _pick(getattr(args, "coarse_angles", None), section, "coarse_grid_points",
                  defaults.coarse_grid_points)
        ),
        refine_tolerance=_pick(None, section, "refine_tolerance", defaults.refine_tolerance),
        refine_max_iter=int(_pick(None, section, "refine_max_iter", defaults.refine_max_iter)),
    )


def _envelope_policy_from(args, file_cfg: dict) -> EnvelopeSearchPolicy:
    section = file_cfg.get("envelope_policy", {})
    defaults = EnvelopeSearchPolicy()
    return EnvelopeSearchPolicy(
        r_min=_pick(None, section, "r_min", defaults.r_min),
        points_per_decade=int(
            _pick(getattr(args, "points_per_decade", None), section, "points_per_decade",
                  defaults.points_per_decade)
        ),
        bisection_tol=_pick(None, section, "bisection_tol", defaults.bisection_tol),
        certification_margin=_pick(
            None, section, "certification_margin", defaults.certification_margin
        ),
        max_scan_factor=_pick(None, section, "max_scan_factor", defaults.max_scan_factor),
    )


def _add_array_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--freq-ghz", type=float, required=True, help="carrier frequency in GHz")
    p.add_argument("--elements", type=int, required=True, help="number of array elements")
    p.add_argument("--spacing-m", type=float, default=None, dest="spacing_m",
                   help="element spacing in meters (default: half wavelength)")


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pilot-snr-db", type=float, default=None, help="pilot SNR in dB")
    p.add_argument("--data-snr-db", type=float, default=None, help="data SNR in dB")
    p.add_argument("--pilot-len", type=int, default=None, help="pilot sequence length")


def _add_tolerance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta-inf", type=float, default=None, help="per-meter tolerance")
    p.add_argument("--delta-2", type=float, default=None, help="dimensionless tolerance")
    p.add_argument("--delta-se", type=float, default=None, help="SE tolerance in bits/s/Hz")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--points-per-decade", type=int, default=None,
                   help="envelope scan density override")
    p.add_argument("--coarse-angles", type=int, default=None,
                   help="coarse angle-grid size override")


def _add_config_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON file with default settings")


def cmd_boundaries(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    cfg = _array_from(args, file_cfg)
    tol = _tolerances_from(args, file_cfg)
    budget = _budget_from(args, file_cfg)
    bounds = boundary_set(
        cfg, tol, budget, _angle_policy_from(args, file_cfg), _envelope_policy_from(args, file_cfg)
    )
    if args.json:
        doc = {
            "schema": 1,
            "config": {
                "freq_hz": cfg.carrier_freq,
                "n_elements": cfg.n_elements,
                "spacing_m": cfg.spacing,
                "light_speed": cfg.light_speed,
            },
            "tolerances": dataclasses.asdict(tol),
            "budget": dataclasses.asdict(budget),
            "boundaries": {
                "rayleigh_m": bounds.rayleigh,
                "epf_m": bounds.epf,
                "spf_m": bounds.spf,
                "sspf_m": bounds.sspf,
                "opt_linf_m": bounds.opt_linf,
                "opt_l2_m": bounds.opt_l2,
                "opt_se_m": bounds.opt_se,
                "opt_linf_certified": bounds.opt_linf_certified,
                "opt_l2_certified": bounds.opt_l2_certified,
                "opt_se_certified": bounds.opt_se_certified,
            },
        }
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    print(f"configuration: {cfg.carrier_freq / 1e9:g} GHz, {cfg.n_elements} elements, "
          f"spacing {cfg.spacing:g} m")
    print(f"{'boundary':<10} {'meters':<22} certified")
    rows = [
        ("rayleigh", bounds.rayleigh, ""),
        ("epf", bounds.epf, ""),
        ("spf", bounds.spf, ""),
        ("sspf", bounds.sspf, ""),
        ("opt_linf", bounds.opt_linf, "yes" if bounds.opt_linf_certified else "no"),
        ("opt_l2", bounds.opt_l2, "yes" if bounds.opt_l2_certified else "no"),
        ("opt_se", bounds.opt_se, "yes" if bounds.opt_se_certified else "no"),
    ]
    for name, value, certified in rows:
        print(f"{name:<10} {value:<22.12g} {certified}")
    return EXIT_OK


def cmd_curve(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    cfg = _array_from(args, file_cfg)
    spec = SweepSpec(
        configs=(cfg,),
        metrics=(args.metric,),
        r_grid=RangeGrid(args.r_start, args.r_stop, args.r_points),
        tolerances=_tolerances_from(args, file_cfg),
        budget=_budget_from(args, file_cfg),
        angle_policy=_angle_policy_from(args, file_cfg),
        envelope_policy=_envelope_policy_from(args, file_cfg),
    )
    # curve output needs no transition radii: evaluate the grid directly
    grid = spec.r_grid.values()
    values, thetas, errors = _curve_values(cfg, args.metric, grid, spec)
    for message in errors:
        print(message, file=sys.stderr)
    cid = config_id(cfg)
    records = [
        CurveRecord(cid, cfg.carrier_freq, cfg.n_elements, args.metric,
                    float(r), float(v), float(t))
        for r, v, t in zip(grid, values, thetas)
    ]
    lines = curve_csv_lines(records)
    if args.out == "-":
        write_lines(lines, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_lines(lines, fh)
    return EXIT_OK


def cmd_se(args) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    cfg = _array_from(args, file_cfg)
    budget = _budget_from(args, file_cfg)
    if args.theta_deg is not None:
        pos = PolarPosition(theta=math.radians(args.theta_deg), range_m=args.range_m)
        report = se_loss(cfg, pos, budget)
        theta = pos.theta
    else:
        worst = se_loss_worst(cfg, args.range_m, budget, _angle_policy_from(args, file_cfg))
        # a worst angle on the grid endpoint needs the open-interval floor to
        # re-evaluate without touching the array axis
        theta = max(worst.theta_star, THETA_OPEN_MIN)
        report = se_loss(cfg, PolarPosition(theta=theta, range_m=args.range_m), budget)
    nmse = nmse_lower_bound(cfg, PolarPosition(theta=theta, range_m=args.range_m), budget)
    if args.json:
        doc = {
            "schema": 1,
            "range_m": args.range_m,
            "theta_rad": theta,
            "theta_is_worst_case": args.theta_deg is None,
            "se_opt": report.se_opt,
            "se_mis": report.se_mis,
            "delta_se": report.delta_se,
            "eta": report.eta,
            "gain": report.gain,
            "nmse_lower_bound": nmse,
        }
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    label = "worst-case" if args.theta_deg is None else "given"
    print(f"range_m           {args.range_m:g}")
    print(f"theta_rad         {theta:.9g} ({label})")
    print(f"se_opt            {report.se_opt:.6g} bits/s/Hz")
    print(f"se_mis            {report.se_mis:.6g} bits/s/Hz")
    print(f"delta_se          {report.delta_se:.6g} bits/s/Hz")
    print(f"eta               {report.eta:.9g}")
    print(f"gain              {report.gain:.9g}")
    print(f"nmse_lower_bound  {nmse:.9g}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    spec = preset(args.preset)
    overrides = {}
    if args.points_per_decade is not None:
        overrides["envelope_policy"] = dataclasses.replace(
            spec.envelope_policy, points_per_decade=args.points_per_decade
        )
    if args.coarse_angles is not None:
        overrides["angle_policy"] = dataclasses.replace(
            spec.angle_policy, coarse_grid_points=args.coarse_angles
        )
    if args.curve_points is not None:
        overrides["auto_grid_points"] = args.curve_points
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    out_dir = Path(args.out_dir) / args.preset
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_sweep(spec)
    for message in result.errors:
        print(message, file=sys.stderr)
    for cfg in spec.configs:
        cid = config_id(cfg)
        for metric in spec.metrics:
            records = [c for c in result.curves if c.config_id == cid and c.metric == metric]
            with open(out_dir / f"curve_{cid}_{metric}.csv", "w", encoding="utf-8") as fh:
                write_lines(curve_csv_lines(records), fh)
    with open(out_dir / "boundaries.csv", "w", encoding="utf-8") as fh:
        write_lines(boundary_csv_lines(result.boundaries), fh)
    references = REFERENCE_RADII.get(args.preset, {})
    primary = spec.metrics[0]
    for record in result.boundaries:
        b = record.bounds
        value, certified = {
            "linf": (b.opt_linf, b.opt_linf_certified),
            "l2": (b.opt_l2, b.opt_l2_certified),
            "se": (b.opt_se, b.opt_se_certified),
        }[primary]
        line = f"opt_{primary}({record.config_id}) = {value:.6g} m"
        if record.config_id in references:
            ref = references[record.config_id][1]
            diff = 100.0 * (value - ref) / ref
            line += f" (reference: {ref:g} m, diff {diff:+.2f}%)"
        if not certified:
            line += " [not certified; qualitative, depends on the link budget]"
        print(line)
    print(f"wrote {len(spec.configs) * len(spec.metrics)} curve files and boundaries.csv "
          f"to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearfield",
        description="Near-field to far-field transition distances for uniform linear arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("boundaries", help="all transition radii for one configuration")
    _add_array_flags(p)
    _add_tolerance_flags(p)
    _add_budget_flags(p)
    _add_solver_flags(p)
    _add_config_flag(p)
    p.add_argument("--json", action="store_true", help="emit a JSON document")
    p.set_defaults(func=cmd_boundaries)

    p = sub.add_parser("curve", help="worst-case metric curve over a range grid")
    p.add_argument("--metric", required=True, choices=("linf", "l2", "se"))
    _add_array_flags(p)
    p.add_argument("--r-start", type=float, required=True, help="grid start in meters")
    p.add_argument("--r-stop", type=float, required=True, help="grid stop in meters")
    p.add_argument("--r-points", type=int, required=True, help="number of grid points")
    p.add_argument("--out", default="-", help="output CSV path, - for stdout")
    _add_tolerance_flags(p)
    _add_budget_flags(p)
    _add_solver_flags(p)
    _add_config_flag(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("se", help="spectral-efficiency report at one range")
    _add_array_flags(p)
    p.add_argument("--range-m", type=float, required=True, help="range in meters")
    p.add_argument("--theta-deg", type=float, default=None,
                   help="look angle in degrees (default: worst case)")
    _add_budget_flags(p)
    _add_config_flag(p)
    p.add_argument("--json", action="store_true", help="emit a JSON document")
    p.set_defaults(func=cmd_se)

    p = sub.add_parser("reproduce", help="run a bundled preset and write its CSV bundle")
    p.add_argument("preset", choices=PRESET_NAMES)
    p.add_argument("--out-dir", required=True, help="directory for the CSV bundle")
    p.add_argument("--curve-points", type=int, default=None,
                   help="points per curve override")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HorizonExceededError, DegenerateGeometryError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
