"""Configuration files (TOML, SI units), canonical form and digest."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import replace

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib
import tomli_w

from .constants import AMU, NITROGEN, GasSpecies, known_materials
from .csl import CslParams
from .environment import EnvironmentParams, TrapParams
from .errors import ConfigError
from .grating import GratingParams, pulse_energy_for_phase
from .pattern import ENV_CHANNELS, ExperimentConfig

# Defaults are the reference working point. Values are plain SI
# numbers; units are documented per key in UNITS, never written into keys or values.
SCHEMA = {
    "particle": {
        "material": ("Si", str),
        "mass": (1e6 * AMU, float),
        "optics_regime": ("auto", str),
        "initial_state": ("ground", str),
        "sigma_x": (None, float),
        "sigma_p": (None, float),
        "initial_internal_temperature": (None, float),
    },
    "times": {"t1": (0.0395, float), "t2": (0.0395, float)},
    "grating": {
        "wavelength": (355e-9, float),
        "pulse_energy_per_area": (None, float),
        "eikonal_phase": (1.4 * math.pi, float),
        "model": ("full", str),
    },
    "trap": {
        "wavelength": (1550e-9, float),
        "cooling_time": (1.0, float),
        "intensity": (90e9, float),
        "mech_frequency": (200.0, float),
        "com_temperature": (20e-3, float),
    },
    "environment": {
        "temperature": (300.0, float),
        "pressure": (1e-8, float),
        "gas_polarizability_volume": (NITROGEN.polarizability_volume, float),
        "gas_ionization_energy": (NITROGEN.ionization_energy, float),
        "gas_mass": (NITROGEN.mass, float),
        "gas_velocity": (None, float),
        "scattering_time_convention": ("as-printed", str),
        "channels": (list(ENV_CHANNELS), list),
    },
    "csl": {
        "enabled": (False, bool),
        "rate": (1e-16, float),
        "r_c": (1e-7, float),
        "kernel_convention": ("path-averaged", str),
    },
    "screen": {"window": (1e-7, float), "samples": (2001, int), "aleph_threshold": (0.05, float)},
}


UNITS = {
    "particle.mass": "kg",
    "particle.sigma_x": "m",
    "particle.sigma_p": "kg m/s",
    "particle.initial_internal_temperature": "K",
    "times.t1": "s",
    "times.t2": "s",
    "grating.wavelength": "m",
    "grating.pulse_energy_per_area": "J/m^2",
    "grating.eikonal_phase": "rad",
    "trap.wavelength": "m",
    "trap.cooling_time": "s",
    "trap.intensity": "W/m^2",
    "trap.mech_frequency": "Hz",
    "trap.com_temperature": "K",
    "environment.temperature": "K",
    "environment.pressure": "Pa",
    "environment.gas_polarizability_volume": "m^3",
    "environment.gas_ionization_energy": "J",
    "environment.gas_mass": "kg",
    "environment.gas_velocity": "m/s",
    "csl.rate": "1/s",
    "csl.r_c": "m",
    "screen.window": "m",
}


def _coerce(path: str, value, kind):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{path} must be finite")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path} must be true or false")
        return value
    if kind is list:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{path} must be a list of strings")
        return list(value)
    if not isinstance(value, str):
        raise ConfigError(f"{path} must be a string")
    return value


def fill_defaults(raw: dict) -> dict:
    """Validate keys and types; return the full nested dict with defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    for section in raw:
        if section not in SCHEMA:
            raise ConfigError(f"unknown section {section!r}")
    out = {}
    for section, fields in SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"{section} must be a table")
        for key in given:
            if key not in fields:
                raise ConfigError(f"unknown key {section}.{key}")
        sec = {}
        for key, (default, kind) in fields.items():
            if key in given:
                sec[key] = _coerce(f"{section}.{key}", given[key], kind)
            else:
                sec[key] = list(default) if isinstance(default, list) else default
        out[section] = sec
    return out


def _positive(path, value):
    if value is not None and not value > 0:
        raise ConfigError(f"{path} must be positive")


def build_config(raw: dict) -> ExperimentConfig:
    """ExperimentConfig from a (possibly partial) nested dict."""
    c = fill_defaults(raw)
    p, t, g, tr, e, k, s = (c[x] for x in ("particle", "times", "grating", "trap", "environment", "csl", "screen"))
    if p["material"] not in known_materials():
        raise ConfigError(f"particle.material must be one of {known_materials()}")
    checks = {
        "particle.mass": p["mass"], "times.t1": t["t1"], "times.t2": t["t2"],
        "grating.wavelength": g["wavelength"], "screen.window": s["window"],
        "environment.temperature": e["temperature"], "csl.r_c": k["r_c"],
        "particle.sigma_x": p["sigma_x"], "particle.sigma_p": p["sigma_p"],
        "particle.initial_internal_temperature": p["initial_internal_temperature"],
    }
    for key in tr:
        checks[f"trap.{key}"] = tr[key]
    for path, value in checks.items():
        _positive(path, value)
    for path, value in (("environment.pressure", e["pressure"]), ("csl.rate", k["rate"])):
        if value < 0:
            raise ConfigError(f"{path} must be >= 0")
    if g["pulse_energy_per_area"] is not None and g["pulse_energy_per_area"] < 0:
        raise ConfigError("grating.pulse_energy_per_area must be >= 0")
    try:
        gas = GasSpecies(e["gas_polarizability_volume"], e["gas_ionization_energy"], e["gas_mass"])
        env = EnvironmentParams(e["temperature"], e["pressure"], gas, e["gas_velocity"],
                                e["scattering_time_convention"])
        trap = TrapParams(tr["wavelength"], tr["cooling_time"], tr["intensity"],
                          tr["mech_frequency"], tr["com_temperature"])
        csl = CslParams(k["rate"], k["r_c"], k["kernel_convention"]) if k["enabled"] else None
        cfg = ExperimentConfig(
            material=p["material"], mass=p["mass"], t1=t["t1"], t2=t["t2"],
            grating=GratingParams(g["wavelength"], 0.0), trap=trap, env=env, csl=csl,
            optics_regime=p["optics_regime"], grating_model=g["model"], channels=tuple(e["channels"]),
            initial_state=p["initial_state"], sigma_x=p["sigma_x"], sigma_p=p["sigma_p"],
            initial_internal_temperature=p["initial_internal_temperature"],
            screen_window=s["window"], samples=s["samples"], aleph_threshold=s["aleph_threshold"],
        )
        energy = g["pulse_energy_per_area"]
        if energy is None:
            energy = pulse_energy_for_phase(cfg.optics, g["wavelength"], g["eikonal_phase"])
        return replace(cfg, grating=GratingParams(g["wavelength"], energy))
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return build_config(raw)


def to_dict(config: ExperimentConfig) -> dict:
    """Full nested dict; build_config(to_dict(c)) == c."""
    gas = config.env.gas
    out = {
        "particle": {
            "material": config.material, "mass": config.mass, "optics_regime": config.optics_regime,
            "initial_state": config.initial_state, "sigma_x": config.sigma_x,
            "sigma_p": config.sigma_p,
            "initial_internal_temperature": config.initial_internal_temperature,
        },
        "times": {"t1": config.t1, "t2": config.t2},
        "grating": {
            "wavelength": config.grating.wavelength,
            "pulse_energy_per_area": config.grating.pulse_energy_per_area,
            "model": config.grating_model,
        },
        "trap": {
            "wavelength": config.trap.wavelength, "cooling_time": config.trap.cooling_time,
            "intensity": config.trap.intensity, "mech_frequency": config.trap.mech_frequency,
            "com_temperature": config.trap.com_temperature,
        },
        "environment": {
            "temperature": config.env.temperature, "pressure": config.env.pressure,
            "gas_polarizability_volume": gas.polarizability_volume,
            "gas_ionization_energy": gas.ionization_energy, "gas_mass": gas.mass,
            "gas_velocity": config.env.gas_velocity,
            "scattering_time_convention": config.env.scattering_time_convention,
            "channels": list(config.channels),
        },
        "csl": {
            "enabled": config.csl is not None,
            "rate": config.csl.rate if config.csl else 0.0,
            "r_c": config.csl.r_c if config.csl else 1e-7,
            "kernel_convention": config.csl.kernel_convention if config.csl else "path-averaged",
        },
        "screen": {"window": config.screen_window, "samples": config.samples,
                   "aleph_threshold": config.aleph_threshold},
    }
    # TOML has no null: optional fields are dropped when unset
    return {sec: {k: v for k, v in vals.items() if v is not None} for sec, vals in out.items()}


def serialize(config: ExperimentConfig) -> str:
    return tomli_w.dumps(to_dict(config))


def config_digest(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON form (sorted keys, repr floats)."""
    text = json.dumps(to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()
