"""Scenario configuration: JSON schema validation and object builders.

Configs are plain JSON with a version field and a mode selecting which
subsystem runs.  Validation is strict: unknown keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import pulses
from .analytic import PumpPulse, ThreeWaveParams
from .envelope import (ComplexEnvelope, TimeGrid, envelope_from_csv,
                       spectral_transform, spectral_width_1e)
from .solver import (Scenario, SimulationGrid, default_idler_center,
                     default_signal_center)

CONFIG_VERSION = 1

MODES = ("simulate", "analytic", "perturbative", "design", "parity",
         "sweep", "validate")


class SchemaError(ValueError):
    """Configuration fails validation."""


def load_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise SchemaError("config root must be a JSON object")
    if cfg.get("version") != CONFIG_VERSION:
        raise SchemaError(f"config version must be {CONFIG_VERSION}")
    mode = cfg.get("mode")
    if mode not in MODES:
        raise SchemaError(f"mode must be one of {MODES}, got {mode!r}")
    _VALIDATORS[mode](cfg)


def _check_keys(obj: dict, where: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    keys = set(obj)
    missing = required - keys
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")


def _check_number(obj, where, key, positive=False):
    val = obj[key]
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise SchemaError(f"{where}.{key} must be a number")
    if positive and val <= 0:
        raise SchemaError(f"{where}.{key} must be positive")


def _validate_params(obj):
    _check_keys(obj, "params", {"sigma_s", "sigma_r", "gamma", "length"})
    for key in obj:
        _check_number(obj, "params", key)


def _validate_pump(obj):
    _check_keys(obj, "pump", {"shape"},
                {"amplitude", "duration", "center", "chirp_rate"})
    if obj["shape"] not in ("gaussian", "rectangle"):
        raise SchemaError(f"pump.shape must be gaussian or rectangle, got {obj['shape']!r}")


_PULSE_KEYS = {
    "gaussian": {"width", "amplitude", "chirp_rate", "center", "normalize"},
    "asymmetric": {"width", "zero_offset", "chirp_rate", "center"},
    "smoothed_exponential": {"decay", "rise_fraction", "center"},
    "hermite_gauss": {"order", "width", "center"},
    "csv": {"path"},
}


def _validate_pulse(obj, where):
    if not isinstance(obj, dict) or "shape" not in obj:
        raise SchemaError(f"{where} must be an object with a shape key")
    shape = obj["shape"]
    if shape not in _PULSE_KEYS:
        raise SchemaError(f"{where}.shape must be one of {sorted(_PULSE_KEYS)}")
    _check_keys(obj, where, {"shape"}, _PULSE_KEYS[shape])


def _validate_grid(obj, need_z=True):
    keys = {"span", "n"} | ({"z_steps"} if need_z else set())
    _check_keys(obj, "grid", keys)
    _check_number(obj, "grid", "span", positive=True)
    if not isinstance(obj["n"], int) or obj["n"] < 2:
        raise SchemaError("grid.n must be an integer >= 2")
    if need_z and (not isinstance(obj["z_steps"], int) or obj["z_steps"] < 1):
        raise SchemaError("grid.z_steps must be a positive integer")


def _validate_simulate(cfg):
    _check_keys(cfg, "config", {"version", "mode", "params", "pump", "signal", "grid"},
                {"description", "idler", "record", "display_span", "placement_margin"})
    _validate_params(cfg["params"])
    _validate_pump(cfg["pump"])
    _validate_pulse(cfg["signal"], "signal")
    if cfg.get("idler") is not None:
        _validate_pulse(cfg["idler"], "idler")
    _validate_grid(cfg["grid"])
    if "record" in cfg:
        _check_keys(cfg["record"], "record", set(), {"stride", "full_map"})


def _validate_analytic(cfg):
    _check_keys(cfg, "config", {"version", "mode", "params", "pump", "signal", "grid"},
                {"description", "idler", "axis", "display_span", "placement_margin"})
    _validate_params(cfg["params"])
    _validate_pump(cfg["pump"])
    _validate_pulse(cfg["signal"], "signal")
    if cfg.get("idler") is not None:
        _validate_pulse(cfg["idler"], "idler")
    _validate_grid(cfg["grid"], need_z=False)


def _validate_perturbative(cfg):
    _check_keys(cfg, "config", {"version", "mode", "setup", "pump", "signal", "grid"},
                {"description", "factor"})
    _check_keys(cfg["setup"], "setup", {"sigma_s", "sigma_r", "length"})
    _validate_pulse(cfg["pump"], "pump")
    _validate_pulse(cfg["signal"], "signal")
    _validate_grid(cfg["grid"], need_z=False)


def _validate_design(cfg):
    _check_keys(cfg, "config", {"version", "mode", "process", "material",
                                "lambda_s_nm", "length_m"},
                {"description", "pump_nm", "lambda_p1_nm", "lambda_p2_nm"})
    process = cfg["process"]
    if process == "sfg":
        if "pump_nm" not in cfg:
            raise SchemaError("sfg design needs pump_nm (list or start/stop/count)")
    elif process == "bragg":
        for key in ("lambda_p1_nm", "lambda_p2_nm"):
            if key not in cfg:
                raise SchemaError(f"bragg design needs {key}")
    else:
        raise SchemaError(f"process must be sfg or bragg, got {process!r}")


def _validate_parity(cfg):
    _check_keys(cfg, "config", {"version", "mode", "pulse", "grid"},
                {"description", "rho_sq", "interstage_phase", "axis"})
    _validate_pulse(cfg["pulse"], "pulse")
    _validate_grid(cfg["grid"], need_z=False)


def _validate_validate(cfg):
    _check_keys(cfg, "config", {"version", "mode", "params", "pump", "signal", "grid"},
                {"description", "idler", "factor", "beta_p_prime", "placement_margin"})
    _validate_params(cfg["params"])
    _validate_pump(cfg["pump"])
    _validate_pulse(cfg["signal"], "signal")
    _validate_grid(cfg["grid"], need_z=False)


def _validate_sweep(cfg):
    _check_keys(cfg, "config", {"version", "mode", "base", "parameter", "values"},
                {"description"})
    base = cfg["base"]
    if not isinstance(base, dict) or base.get("mode") != "simulate":
        raise SchemaError("sweep.base must be a simulate config")
    validate_config(base)
    if not isinstance(cfg["parameter"], str) or not cfg["parameter"]:
        raise SchemaError("sweep.parameter must be a dotted key path string")
    if not isinstance(cfg["values"], list) or not cfg["values"]:
        raise SchemaError("sweep.values must be a non-empty list")


_VALIDATORS = {
    "simulate": _validate_simulate,
    "analytic": _validate_analytic,
    "perturbative": _validate_perturbative,
    "design": _validate_design,
    "parity": _validate_parity,
    "validate": _validate_validate,
    "sweep": _validate_sweep,
}


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_params(cfg: dict) -> ThreeWaveParams:
    return ThreeWaveParams(**cfg["params"])


def build_pump(cfg: dict) -> PumpPulse:
    return PumpPulse(**cfg["pump"])


def build_pulse(spec: dict, grid: TimeGrid, default_center: float) -> ComplexEnvelope:
    shape = spec["shape"]
    center = spec.get("center")
    if center is None:
        center = default_center
    if shape == "gaussian":
        env = pulses.gaussian(grid, center=center,
                              width=spec.get("width", 1.0),
                              amplitude=spec.get("amplitude", 1.0),
                              chirp_rate=spec.get("chirp_rate", 0.0))
        return env.normalized() if spec.get("normalize", False) else env
    if shape == "asymmetric":
        return pulses.asymmetric_zero_crossing(
            grid, center=center, zero_offset=spec.get("zero_offset", 0.5),
            width=spec.get("width", 1.0), chirp_rate=spec.get("chirp_rate", 0.0))
    if shape == "smoothed_exponential":
        return pulses.smoothed_exponential(
            grid, start=center, decay=spec.get("decay", 1.0),
            rise_fraction=spec.get("rise_fraction", 0.05))
    if shape == "hermite_gauss":
        return pulses.hermite_gauss(grid, order=spec.get("order", 0),
                                    center=center, width=spec.get("width", 1.0))
    if shape == "csv":
        env = envelope_from_csv(spec["path"])
        if env.grid != grid:
            raise SchemaError(f"envelope file {spec['path']} grid does not match "
                              "the configured grid")
        return env
    raise SchemaError(f"unknown pulse shape {shape!r}")


def build_time_grid(cfg: dict) -> TimeGrid:
    return TimeGrid.centered(cfg["grid"]["span"], cfg["grid"]["n"])


def build_scenario(cfg: dict) -> Scenario:
    params = build_params(cfg)
    pump = build_pump(cfg)
    tgrid = build_time_grid(cfg)
    margin = cfg.get("placement_margin", 0.0)
    signal = build_pulse(cfg["signal"], tgrid,
                         pump.center + default_signal_center(params, margin))
    idler = None
    if cfg.get("idler") is not None:
        idler = build_pulse(cfg["idler"], tgrid,
                            pump.center + default_idler_center(params, margin))
    record = cfg.get("record", {})
    return Scenario(params=params, pump=pump, s_in=signal, r_in=idler,
                    grid=SimulationGrid.make(tgrid, params.length,
                                             cfg["grid"]["z_steps"]),
                    record_full_map=record.get("full_map", True),
                    record_stride=record.get("stride", 50))


def measured_bandwidths(signal: ComplexEnvelope, pump_env: ComplexEnvelope,
                        magnification: float,
                        idler: ComplexEnvelope | None = None) -> dict:
    """Spectral 1/e half-widths for the condition checks.

    Without an idler input, the converted band inherits the signal
    bandwidth scaled by the spectral magnification 1/M.
    """
    B_s = spectral_width_1e(spectral_transform(signal))
    B_p = spectral_width_1e(spectral_transform(pump_env))
    if idler is not None and idler.norm_sq() > 0:
        B_r = spectral_width_1e(spectral_transform(idler))
    else:
        B_r = B_s / magnification
    return {"B_p": B_p, "B_s": B_s, "B_r": B_r}


def override_path(cfg: dict, dotted: str, value):
    """Set a nested key ('params.gamma') in a deep copy of the config."""
    out = json.loads(json.dumps(cfg))
    node = out
    parts = dotted.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise SchemaError(f"sweep parameter path {dotted!r} not found")
        node = node[part]
    if parts[-1] not in node:
        raise SchemaError(f"sweep parameter path {dotted!r} not found")
    node[parts[-1]] = value
    return out


def preset_path(name: str) -> Path:
    from importlib import resources
    base = resources.files("tmreverse").joinpath("presets")
    path = Path(str(base.joinpath(f"{name}.json")))
    if not path.exists():
        known = sorted(p.stem for p in Path(str(base)).glob("*.json"))
        raise SchemaError(f"unknown preset {name!r}; known presets: {known}")
    return path


def load_preset(name: str) -> dict:
    return load_config(preset_path(name))
