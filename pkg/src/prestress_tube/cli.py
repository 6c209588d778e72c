"""Command-line surface: one workflow per invocation, CSV out, JSON summary on stdout.

Exit codes: 0 converged, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__, config
from .errors import (ConfigError, DomainError, NoConvergence, NonPositiveDeterminant,
                     NonPositiveStretch, QuadratureFailure, SingularTensor)
from .opening import find_opening_angle
from .driver import run_point
from .tube import solve_inverse_sf, solve_load_free, wall_stress_profile

FLOAT_FMT = "{:.12g}"


def _fmt(x) -> str:
    return FLOAT_FMT.format(float(x))


def _write_csv(path: str, header, rows, cfg_hash: str):
    with open(path, 'w', newline='') as fh:
        fh.write(f"# prestress-tube {__version__} config_sha256={cfg_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _solver_kwargs(solver: dict) -> dict:
    kw = {}
    if solver["tol"] is not None:
        kw["tol"] = solver["tol"]
    if solver["max_iter"] is not None:
        kw["max_iter"] = solver["max_iter"]
    if solver["quad_points"] is not None:
        kw["npts"] = solver["quad_points"]
    return kw


def cmd_inverse_sf(cfg: dict, args, out_path: str, cfg_hash: str) -> dict:
    layers = config.parse_layers(cfg)
    geom_block = config.get_block(cfg, "geometry")
    tube_geom = config.parse_tube(geom_block, "geometry", need_interface=len(layers) == 2)
    alpha = math.radians(config.get_number(geom_block, "alpha_deg", "geometry"))
    solver = config.parse_solver(cfg, args.tol)

    sol = solve_inverse_sf(tube_geom, alpha, layers, **_solver_kwargs(solver))
    profile = wall_stress_profile(sol.segments)
    _write_csv(out_path, ["r_mm", "T_rr_kpa", "T_theta_kpa", "T_zz_kpa"], profile, cfg_hash)

    key = {
        "Ri_mm": sol.sectors[0].Ri,
        "Ro_mm": sol.sectors[-1].Ro,
        "L_mm": sol.sectors[0].L,
        "alpha_deg": math.degrees(alpha),
    }
    if len(sol.sectors) == 2:
        key["R_interface_mm"] = sol.sectors[0].Ro
    return {
        "workflow": "inverse-sf",
        "converged": sol.report.converged,
        "iterations": sol.report.iterations,
        "residuals": sol.report.residuals,
        "key_results": key,
        "csv": out_path,
    }


def cmd_load_free(cfg: dict, args, out_path: str, cfg_hash: str) -> dict:
    layers = config.parse_layers(cfg, need_sector=True)
    solver = config.parse_solver(cfg, args.tol)

    sol = solve_load_free(layers, **_solver_kwargs(solver))
    profile = wall_stress_profile(sol.segments)
    _write_csv(out_path, ["r_mm", "T_rr_kpa", "T_theta_kpa", "T_zz_kpa"], profile, cfg_hash)

    key = {"r_i_mm": sol.tube.ri, "r_o_mm": sol.tube.ro, "l_mm": sol.tube.l}
    if sol.tube.r_interface is not None:
        key["r_interface_mm"] = sol.tube.r_interface
    return {
        "workflow": "load-free",
        "converged": sol.report.converged,
        "iterations": sol.report.iterations,
        "residuals": sol.report.residuals,
        "key_results": key,
        "csv": out_path,
    }


def cmd_energy_scan(cfg: dict, args, out_path: str, cfg_hash: str) -> dict:
    layers = config.parse_layers(cfg, need_sector=True)
    grid = cfg.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError('field "grid" must be an object')
    start = args.grid_start if args.grid_start is not None else grid.get("start_deg", 0.0)
    end = args.grid_end if args.grid_end is not None else grid.get("end_deg", 180.0)
    step = args.grid_step if args.grid_step is not None else grid.get("step_deg", 2.0)

    curve = find_opening_angle(layers, float(start), float(end), float(step))
    _write_csv(out_path, ["alpha_deg", "E_microJ"], curve.samples, cfg_hash)

    return {
        "workflow": "energy-scan",
        "converged": True,
        "residuals": {},
        "key_results": {
            "argmin_deg": curve.argmin_deg,
            "e_min_microj": curve.e_min_microj,
            "rho_interface_mm": curve.candidate.rho_interface,
            "l_open_mm": curve.candidate.l_open,
        },
        "csv": out_path,
    }


def cmd_point_test(cfg: dict, args, out_path: str, cfg_hash: str) -> dict:
    layer = config.parse_layer(config.get_block(cfg, "material"), "material", need_maxwell=True)
    f0 = config.parse_f0(cfg)
    program = config.parse_program(cfg, args.dt)

    trace = run_point(program, layer, f0)
    _write_csv(out_path, trace.header(), trace.rows(), cfg_hash)

    return {
        "workflow": "point-test",
        "converged": True,
        "residuals": {},
        "key_results": {
            "steps": int(trace.t.size - 1),
            "peak_overstress_kpa": float(trace.overstress_norm.max()),
            "final_overstress_kpa": float(trace.overstress_norm[-1]),
        },
        "csv": out_path,
    }


_COMMANDS = {
    "inverse-sf": cmd_inverse_sf,
    "load-free": cmd_load_free,
    "energy-scan": cmd_energy_scan,
    "point-test": cmd_point_test,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prestress-tube",
        description="Pre-stressed viscoelastic fibre-reinforced tube workflows.")
    sub = parser.add_subparsers(dest="workflow", required=True)
    for name, helptext in [
        ("inverse-sf", "solve for the stress-free sector geometry of a load-free tube"),
        ("load-free", "close per-layer sectors into an equilibrated load-free tube"),
        ("energy-scan", "stored energy vs trial opening angle; locking argmin"),
        ("point-test", "material-point viscoelastic driver along an F(t) program"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--tol", type=float, default=None, help="solver tolerance override")
        if name == "energy-scan":
            p.add_argument("--grid-start", type=float, default=None, help="grid start, deg")
            p.add_argument("--grid-end", type=float, default=None, help="grid end, deg")
            p.add_argument("--grid-step", type=float, default=None, help="grid step, deg")
        if name == "point-test":
            p.add_argument("--dt", type=float, default=None, help="time step override, s")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg, raw = config.load_config(args.config)
        config.parse_workflow(cfg, args.workflow)
        out_path = args.out or cfg.get("output") or f"{args.workflow.replace('-', '_')}.csv"
        if not isinstance(out_path, str):
            raise ConfigError('field "output" must be a string path')
        cfg_hash = hashlib.sha256(raw).hexdigest()
        summary = _COMMANDS[args.workflow](cfg, args, out_path, cfg_hash)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except NoConvergence as e:
        summary = {
            "workflow": args.workflow,
            "converged": False,
            "error": str(e),
            "residuals": e.residuals if e.residuals is not None else {},
            "last_iterate": None if e.last_iterate is None else
                            np.atleast_1d(np.asarray(e.last_iterate, dtype=float)).tolist(),
        }
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 2
    except (DomainError, QuadratureFailure, SingularTensor,
            NonPositiveDeterminant, NonPositiveStretch) as e:
        summary = {"workflow": args.workflow, "converged": False,
                   "error": f"{type(e).__name__}: {e}", "residuals": {}}
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
