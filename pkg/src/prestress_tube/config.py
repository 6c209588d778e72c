"""JSON run-configuration parsing with field-level diagnostics.

Keys are snake_case with unit suffixes so that a config is a literal
transcription of a parameter table: geometry r_i_mm / r_interface_mm / r_o_mm /
l_mm / alpha_deg (sectors R_i_mm / R_o_mm / L_mm / alpha_deg), materials
c1_kpa / c2_kpa / k1_kpa / k2 / beta_deg and Maxwell constants mu_matrix_kpa /
eta_matrix_kpa_s / k1_visc_kpa / k2_visc / eta_fibre_kpa_s.
"""

from __future__ import annotations

import json
import math
from typing import Optional

import numpy as np

from .driver import LoadProgram
from .errors import ConfigError
from .materials import PreStressField
from .tube import F0_at, MaterialLayer, OpeningMap, SectorGeometry, TubeGeometry

WORKFLOWS = ("inverse-sf", "load-free", "energy-scan", "point-test")


def load_config(path: str):
    """Parse a JSON config file; returns (dict, raw bytes for hashing)."""
    try:
        with open(path, 'rb') as fh:
            raw = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    try:
        cfg = json.loads(raw.decode('utf-8'))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON (line {e.lineno}, column {e.colno}): {e.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg, raw


def _require(block: dict, key: str, ctx: str):
    if key not in block:
        raise ConfigError(f'missing field "{ctx}.{key}"')
    return block[key]


def _number(block: dict, key: str, ctx: str) -> float:
    v = _require(block, key, ctx)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f'field "{ctx}.{key}" must be a number (got {v!r})')
    return float(v)


def _optional_number(block: dict, key: str, default: Optional[float]) -> Optional[float]:
    v = block.get(key, default)
    if v is None:
        return None
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f'field "{key}" must be a number (got {v!r})')
    return float(v)


def _block(cfg: dict, key: str, ctx: str = "config") -> dict:
    v = _require(cfg, key, ctx)
    if not isinstance(v, dict):
        raise ConfigError(f'field "{ctx}.{key}" must be an object')
    return v


# public aliases for consumers assembling their own blocks
def get_block(cfg: dict, key: str, ctx: str = "config") -> dict:
    return _block(cfg, key, ctx)


def get_number(block: dict, key: str, ctx: str) -> float:
    return _number(block, key, ctx)


def parse_workflow(cfg: dict, expected: Optional[str] = None) -> str:
    wf = cfg.get("workflow", expected)
    if wf not in WORKFLOWS:
        raise ConfigError(f'field "workflow" must be one of {WORKFLOWS} (got {wf!r})')
    if expected is not None and wf != expected:
        raise ConfigError(f'config workflow "{wf}" does not match the requested command "{expected}"')
    return wf


def parse_sector(block: dict, ctx: str) -> SectorGeometry:
    try:
        return SectorGeometry(_number(block, "R_i_mm", ctx), _number(block, "R_o_mm", ctx),
                              _number(block, "L_mm", ctx),
                              math.radians(_number(block, "alpha_deg", ctx)))
    except ValueError as e:
        raise ConfigError(f'invalid sector "{ctx}": {e}')


def parse_tube(block: dict, ctx: str, need_interface: bool) -> TubeGeometry:
    r_int = None
    if need_interface or "r_interface_mm" in block:
        r_int = _number(block, "r_interface_mm", ctx)
    try:
        return TubeGeometry(_number(block, "r_i_mm", ctx), _number(block, "r_o_mm", ctx),
                            _number(block, "l_mm", ctx), r_int)
    except ValueError as e:
        raise ConfigError(f'invalid geometry "{ctx}": {e}')


def parse_layer(block: dict, ctx: str, need_sector: bool = False,
                need_maxwell: bool = False) -> MaterialLayer:
    kwargs = dict(
        c1=_number(block, "c1_kpa", ctx),
        c2=_number(block, "c2_kpa", ctx),
        k1=_number(block, "k1_kpa", ctx),
        k2=_number(block, "k2", ctx),
        beta_deg=_number(block, "beta_deg", ctx),
    )
    has_maxwell = need_maxwell or "mu_matrix_kpa" in block
    if has_maxwell:
        kwargs.update(
            mu=_number(block, "mu_matrix_kpa", ctx),
            eta_matrix=_number(block, "eta_matrix_kpa_s", ctx),
            k1v=_number(block, "k1_visc_kpa", ctx),
            k2v=_number(block, "k2_visc", ctx),
            eta_fibre=_number(block, "eta_fibre_kpa_s", ctx),
        )
    if need_sector or "sector" in block:
        sector_block = _require(block, "sector", ctx)
        if not isinstance(sector_block, dict):
            raise ConfigError(f'field "{ctx}.sector" must be an object')
        kwargs["sector"] = parse_sector(sector_block, f"{ctx}.sector")
    try:
        return MaterialLayer.from_constants(**kwargs)
    except ValueError as e:
        raise ConfigError(f'invalid material "{ctx}": {e}')


def parse_layers(cfg: dict, need_sector: bool = False, need_maxwell: bool = False):
    """The media layer plus, when present, the adventitia layer."""
    layers = [parse_layer(_block(cfg, "media"), "media", need_sector, need_maxwell)]
    if "adventitia" in cfg:
        layers.append(parse_layer(_block(cfg, "adventitia"), "adventitia",
                                  need_sector, need_maxwell))
    return layers


def parse_f0(cfg: dict) -> PreStressField:
    """F0 either as an explicit 3x3 matrix or from an opening map at one radius."""
    if "f0" in cfg:
        mat = cfg["f0"]
        try:
            arr = np.asarray(mat, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError('field "f0" must be a 3x3 array of numbers')
        if arr.shape != (3, 3):
            raise ConfigError('field "f0" must be a 3x3 array of numbers')
        try:
            return PreStressField(arr)
        except ValueError as e:
            raise ConfigError(f'invalid "f0": {e}')
    if "f0_opening_map" in cfg:
        b = _block(cfg, "f0_opening_map")
        ctx = "f0_opening_map"
        m = OpeningMap(k=_number(b, "k", ctx), c=_number(b, "c", ctx),
                       ri=_number(b, "ri_mm", ctx), Ri=_number(b, "Ri_mm", ctx))
        return PreStressField(F0_at(_number(b, "r_mm", ctx), m))
    raise ConfigError('missing field "f0" (or "f0_opening_map")')


def parse_program(cfg: dict, dt_override: Optional[float] = None) -> LoadProgram:
    b = _block(cfg, "program")
    dt = dt_override if dt_override is not None else _number(b, "dt_s", "program")
    frames = _require(b, "keyframes", "program")
    if not isinstance(frames, list) or not frames:
        raise ConfigError('field "program.keyframes" must be a non-empty list of [t_s, F] pairs')
    keyframes = []
    for i, item in enumerate(frames):
        try:
            t, F = item
            keyframes.append((float(t), np.asarray(F, dtype=float)))
        except (TypeError, ValueError):
            raise ConfigError(f'field "program.keyframes[{i}]" must be [t_s, 3x3 matrix]')
    try:
        return LoadProgram(tuple(keyframes), dt)
    except ValueError as e:
        raise ConfigError(f'invalid "program": {e}')


def parse_solver(cfg: dict, tol_override: Optional[float] = None) -> dict:
    b = cfg.get("solver", {})
    if not isinstance(b, dict):
        raise ConfigError('field "solver" must be an object')
    out = {
        "tol": _optional_number(b, "tol", None),
        "max_iter": b.get("max_iter"),
        "quad_points": b.get("quad_points"),
    }
    if tol_override is not None:
        out["tol"] = tol_override
    if out["max_iter"] is not None and (not isinstance(out["max_iter"], int) or out["max_iter"] < 1):
        raise ConfigError('field "solver.max_iter" must be a positive integer')
    if out["quad_points"] is not None and (not isinstance(out["quad_points"], int) or out["quad_points"] < 2):
        raise ConfigError('field "solver.quad_points" must be an integer >= 2')
    return out
