"""Command-line interface: pattern, aleph, scan, temperature and coherence subcommands."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import aleph, aleph_point, exclusion_scan
from .config import config_digest, parse_config
from .csl import KERNEL_CONVENTIONS, CslParams
from .environment import internal_temperature_trajectory
from .errors import ConfigError, NumericIntegrityError, QuadratureError, TalbotError
from .pattern import (
    assemble,
    coherence_spread,
    derived_scales,
    drop_length,
    kernel_table,
    screen_grid,
    summary_rates,
    t1_for_slits,
    visibility,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3


class PartialScanError(TalbotError):
    pass


def _fmt(v) -> str:
    # shortest round-trip decimal form
    return repr(float(v))


def _header(command: str, digest: str, warnings=()) -> list[str]:
    lines = [f"# tool: talbot-csl {__version__}", f"# command: {command}", f"# config_digest: {digest}"]
    lines += [f"# warning: {w}" for w in warnings]
    return lines


def write_csv(path, header: list[str], columns: list[str], rows) -> None:
    lines = list(header) + [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _manifest(digest: str, warnings=()) -> dict:
    return {
        "config_digest": digest,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "warnings": list(warnings),
    }


def _parse_pair(text: str, name: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--{name} expects two comma-separated numbers") from None
    return a, b


def _csl_from_args(args) -> CslParams:
    rate, r_c = _parse_pair(args.csl, "csl")
    try:
        return CslParams(rate, r_c, args.convention)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_pattern(args) -> int:
    config = parse_config(args.config)
    base = config.with_csl(None)
    table = kernel_table(base)
    scales = derived_scales(base)
    x = screen_grid(base)
    p_q = assemble(table, scales, x)
    p_c = assemble(table, scales, x, classical=True)
    csl = _csl_from_args(args) if args.csl else config.csl
    cols = ["x_m", "P_quantum", "P_classical"]
    data = [x, p_q.P, p_c.P]
    summary = {"visibility_quantum": visibility(p_q), "visibility_classical": visibility(p_c),
               "aleph_quantum_vs_classical": aleph(p_q, p_c, base.screen_window).value}
    if csl is not None:
        from .analysis import csl_unit_log_kernel

        unit = csl_unit_log_kernel(base, table, csl.r_c, csl.kernel_convention)
        p_csl = assemble(table, scales, x, csl_ln=csl.rate * unit)
        cols.append("P_csl")
        data.append(p_csl.P)
        result = aleph(p_q, p_csl, base.screen_window, base.aleph_threshold)
        summary.update({"visibility_csl": visibility(p_csl), "aleph": result.value, "excluded": result.excluded,
                        "csl_rate_per_s": csl.rate, "csl_r_c_m": csl.r_c})
    digest = config_digest(config)
    write_csv(args.out, _header("pattern", digest, table.warnings), cols, zip(*data))
    summary.update(summary_rates(config.with_csl(csl)))
    summary["n_max"] = int(table.n[-1]) if table.n.size else 0
    write_json(args.json or str(Path(args.out).with_suffix(".json")),
               {"manifest": _manifest(digest, table.warnings), "results": summary})
    return EXIT_OK


def cmd_aleph(args) -> int:
    config = parse_config(args.config)
    csl = _csl_from_args(args) if args.csl else config.csl
    if csl is None:
        raise ConfigError("no CSL parameters: pass --csl rate,r_c or enable [csl] in the config")
    result = aleph_point(config, csl)
    digest = config_digest(config)
    write_json(args.json, {"manifest": _manifest(digest), "aleph": result.value, "excluded": result.excluded,
                           "threshold": result.threshold, "csl_rate_per_s": csl.rate, "csl_r_c_m": csl.r_c,
                           "kernel_convention": csl.kernel_convention})
    return EXIT_OK


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigError("--grid expects NxM, e.g. 60x60") from None
    if a < 2 or b < 2:
        raise ConfigError("--grid needs at least 2 points per axis")
    return a, b


def cmd_scan(args) -> int:
    config = parse_config(args.config)
    n_rc, n_rate = _parse_grid(args.grid)
    rc_lo, rc_hi = _parse_pair(args.rc_range, "rc-range")
    l_lo, l_hi = _parse_pair(args.lambda_range, "lambda-range")
    if min(rc_lo, rc_hi, l_lo, l_hi) <= 0 or rc_lo >= rc_hi or l_lo >= l_hi:
        raise ConfigError("scan ranges must be positive and increasing")
    rc_axis = np.logspace(math.log10(rc_lo), math.log10(rc_hi), n_rc)
    rate_axis = np.logspace(math.log10(l_lo), math.log10(l_hi), n_rate)
    try:
        grid = exclusion_scan(config, rc_axis, rate_axis, threads=args.threads, convention=args.convention)
    except NumericIntegrityError as exc:
        if "scan aborted" in str(exc):
            raise PartialScanError(str(exc)) from exc
        raise
    digest = config_digest(config)
    warnings = list(grid.meta["warnings"])
    if grid.meta["monotonicity_violations"]:
        warnings.append(f"aleph not monotone in lambda for {len(grid.meta['monotonicity_violations'])} r_c columns")
    rows = [(rc, lam, grid.aleph[i, j]) for i, rc in enumerate(grid.r_c) for j, lam in enumerate(grid.rate)]
    write_csv(args.out, _header("scan", digest, warnings), ["r_c_m", "lambda_per_s", "aleph"], rows)
    boundary_path = args.boundary or str(Path(args.out).with_name(Path(args.out).stem + "_boundary.csv"))
    write_csv(boundary_path, _header("scan-boundary", digest), ["r_c_m", "lambda_per_s"], grid.boundary)
    failed = grid.meta["failed_points"]
    write_json(args.json or str(Path(args.out).with_suffix(".json")), {
        "manifest": _manifest(digest, warnings), "threshold": grid.threshold, "grid": [n_rc, n_rate],
        "failed_points": failed, "boundary_points": len(grid.boundary),
        "monotonicity_violations_r_c_m": grid.meta["monotonicity_violations"],
        "results": summary_rates(config),
    })
    if failed:
        print(f"scan: {len(failed)} grid points failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_temperature(args) -> int:
    config = parse_config(args.config)
    traj = internal_temperature_trajectory(config.particle, config.optics, config.trap, config.env,
                                           (config.t1, config.t2), config.initial_internal_temperature)
    digest = config_digest(config)
    write_csv(args.out, _header("temperature", digest), ["t_s", "T_int_K"], zip(traj.times, traj.temperatures))
    release = traj(traj.release_time)
    write_json(args.json or str(Path(args.out).with_suffix(".json")), {
        "manifest": _manifest(digest),
        "results": {"T_int_at_release_K": float(release), "T_int_final_K": float(traj.temperatures[-1]),
                    **{k: v for k, v in traj.meta.items()}},
    })
    return EXIT_OK


def cmd_coherence(args) -> int:
    config = parse_config(args.config)
    scales = derived_scales(config)
    d = config.grating.period
    tau_needed = t1_for_slits(args.n_slits, config.mass, scales.sigma_x, d)
    horizon = args.t_max if args.t_max else max(2 * tau_needed, config.t1 + config.t2)
    taus = np.linspace(0.0, horizon, args.samples)
    spread = [coherence_spread(scales.sigma_x, config.mass, t) for t in taus]
    digest = config_digest(config)
    write_csv(args.out, _header("coherence", digest), ["tau_s", "sigma_x_m"], zip(taus, spread))
    write_json(args.json or str(Path(args.out).with_suffix(".json")), {
        "manifest": _manifest(digest),
        "results": {"sigma_x_m": scales.sigma_x, "n_slits": args.n_slits, "t1_for_slits_s": tau_needed,
                    "drop_length_m": drop_length(config.t1, config.t2), "talbot_time_s": scales.talbot_time},
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="talbot-csl", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", required=True, help="TOML experiment configuration (SI units)")
        if out_required:
            p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--json", default=None, help="JSON summary path (default: next to --out)")

    p = sub.add_parser("pattern", help="quantum, classical and optional CSL screen patterns")
    common(p)
    p.add_argument("--csl", default=None, help="rate,r_c overriding the config's [csl] table")
    p.add_argument("--convention", default="path-averaged", choices=KERNEL_CONVENTIONS)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("aleph", help="aleph for one CSL point (JSON to stdout by default)")
    common(p, out_required=False)
    p.add_argument("--csl", default=None, help="rate,r_c")
    p.add_argument("--convention", default="path-averaged", choices=KERNEL_CONVENTIONS)
    p.set_defaults(func=cmd_aleph)

    p = sub.add_parser("scan", help="aleph over a log (r_c, lambda) grid and the exclusion boundary")
    common(p)
    p.add_argument("--grid", default="60x60", help="N_rc x N_lambda")
    p.add_argument("--rc-range", default="1e-9,1e-4")
    p.add_argument("--lambda-range", default="1e-20,1e-6")
    p.add_argument("--boundary", default=None, help="boundary CSV path")
    p.add_argument("--threads", type=int, default=1, help="worker threads (does not change output)")
    p.add_argument("--convention", default="path-averaged", choices=KERNEL_CONVENTIONS)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("temperature", help="internal temperature through trapping and free fall")
    common(p)
    p.set_defaults(func=cmd_temperature)

    p = sub.add_parser("coherence", help="wave-packet spreading and time to cover n slits")
    common(p)
    p.add_argument("--n-slits", type=int, default=4)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=cmd_coherence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PartialScanError as exc:
        print(f"scan failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except (NumericIntegrityError, QuadratureError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
