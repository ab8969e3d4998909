"""JSON run configuration with explicit units.

Every number in a config file carries its unit in the key name
(``track_length_nm``, ``dt_ps`` ...).  Omitted keys take the built-in
defaults; unknown keys are rejected so a typo can never be silently ignored.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .device import DeviceParams, ParameterError
from .network import SimConfig


class ConfigError(ValueError):
    """A config file or override could not be applied; ``key`` names the culprit."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


# json key -> (dataclass field, number of json units per SI unit)
DEVICE_KEYS: dict[str, tuple[str, float]] = {
    "lande_g": ("lande_g", 1.0),
    "polarization_P": ("polarization_P", 1.0),
    "bohr_magneton_J_per_T": ("bohr_magneton", 1.0),
    "cross_section_nm2": ("cross_section_A", 1e18),
    "track_length_nm": ("track_length_Len", 1e9),
    "mtj_width_nm": ("mtj_width", 1e9),
    "mtj_placement_fraction": ("mtj_placement", 1.0),
    "electron_charge_C": ("electron_charge", 1.0),
    "msat_A_per_m": ("msat", 1.0),
    "leak_soma_m_per_s": ("leak_soma", 1.0),
    "leak_axon_m_per_s": ("leak_axon", 1.0),
    "r_parallel_ohm": ("r_parallel", 1.0),
    "r_antiparallel_ohm": ("r_antiparallel", 1.0),
    "r_metal_ohm": ("r_metal", 1.0),
}

SIM_KEYS: dict[str, tuple[str, float | None]] = {
    "dt_ps": ("dt", 1e12),
    "t_max_ns": ("t_max", 1e9),
    "hold_window_ns": ("hold_window", 1e9),
    "pin_tolerance_nm": ("pin_tolerance", 1e9),
    "v_c_V": ("v_c", 1.0),
    "w_mag_V": ("w_mag", 1.0),
    "chargeup_t_cap_ns": ("chargeup_t_cap", 1e9),
    "maxcut_penalty": ("maxcut_penalty", 1.0),
    # non-numeric switches are copied as-is
    "calibration": ("calibration", None),
    "drive_branches": ("drive_branches", None),
    "zero_weights_during_chargeup": ("zero_weights_during_chargeup", None),
    "chargeup_until": ("chargeup_until", None),
    "convergence": ("convergence", None),
    "normalize_patterns": ("normalize_patterns", None),
    "trace_every": ("trace_every", None),
}

TOP_KEYS = {"device", "sim", "seed", "workers", "experiment", "output"}
OUTPUT_KEYS = {"dir", "traces"}

# arguments each experiment accepts inside the "experiment" section
EXPERIMENT_ARGS: dict[str, dict[str, Any]] = {
    "recall": {"n": 3, "patterns": 1, "trials": 100, "distortion": None, "exhaustive": False},
    "image": {"levels": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5], "trials": 50, "images": None},
    "maxcut": {"graph": [], "best_known": None},
    "calibrate": {"n": 60, "mode": "balanced"},
    "sweep": {"sizes": [3, 4, 5, 11, 21, 29], "patterns": 1, "trials": 100},
}


@dataclass(frozen=True)
class RunConfig:
    device: DeviceParams = field(default_factory=DeviceParams)
    sim: SimConfig = field(default_factory=SimConfig)
    seed: int = 0
    workers: int = 1
    experiment: str | None = None
    args: dict = field(default_factory=dict)
    out_dir: str = "spinhop_out"
    traces: bool = False

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def experiment_args(self, name: str) -> dict:
        """Defaults for ``name`` overlaid with any stored arguments."""
        merged = dict(EXPERIMENT_ARGS[name])
        merged.update(self.args if self.experiment in (None, name) else {})
        return merged


def _section_to_si(section: Mapping, table: Mapping, where: str) -> dict:
    out = {}
    for key, value in section.items():
        if key not in table:
            raise ConfigError("unknown key", f"{where}.{key}")
        name, scale = table[key]
        if scale is not None:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError("expected a number", f"{where}.{key}")
            value = float(value) / scale
        elif key == "calibration" and not isinstance(value, str):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError("expected a mode name or a voltage", f"{where}.{key}")
            value = float(value)
        out[name] = value
    return out


def _unscale(value: float, scale: float) -> float:
    """``value * scale`` as the shortest decimal that converts back to ``value`` exactly."""
    u = value * scale
    for digits in range(12, 18):
        cand = float(f"{u:.{digits}g}")
        if cand / scale == value:
            return cand
    return float(u)


def _section_from_si(obj, table: Mapping) -> dict:
    out = {}
    for key, (name, scale) in table.items():
        value = getattr(obj, name)
        out[key] = _unscale(value, scale) if scale is not None else value
    return out


def config_from_dict(data: Mapping) -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("top level must be a JSON object")
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError("unknown key", key)
    try:
        device = DeviceParams(**_section_to_si(data.get("device", {}), DEVICE_KEYS, "device"))
        sim = SimConfig(**_section_to_si(data.get("sim", {}), SIM_KEYS, "sim"))
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(device=device, sim=sim)
    if "seed" in data:
        cfg = cfg.with_(seed=int(data["seed"]))
    if "workers" in data:
        cfg = cfg.with_(workers=int(data["workers"]))
    out = data.get("output", {})
    for key in out:
        if key not in OUTPUT_KEYS:
            raise ConfigError("unknown key", f"output.{key}")
    cfg = cfg.with_(out_dir=str(out.get("dir", cfg.out_dir)), traces=bool(out.get("traces", cfg.traces)))
    exp = data.get("experiment")
    if exp is not None:
        exp = dict(exp)
        name = exp.pop("name", None)
        if name not in EXPERIMENT_ARGS:
            raise ConfigError(f"unknown experiment {name!r}", "experiment.name")
        for key in exp:
            if key not in EXPERIMENT_ARGS[name]:
                raise ConfigError("unknown key", f"experiment.{key}")
        cfg = cfg.with_(experiment=name, args=exp)
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    d = {
        "device": _section_from_si(cfg.device, DEVICE_KEYS),
        "sim": _section_from_si(cfg.sim, SIM_KEYS),
        "seed": cfg.seed,
        "workers": cfg.workers,
        "output": {"dir": cfg.out_dir, "traces": cfg.traces},
    }
    if cfg.experiment is not None:
        d["experiment"] = {"name": cfg.experiment, **cfg.args}
    return d


def load_config(path: str | Path | None) -> RunConfig:
    """Read a config file; ``None`` or ``"default"`` gives the built-in defaults."""
    if path is None or str(path) == "default":
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}", "--config")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc.msg} at line {exc.lineno})", str(p)) from None
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=False)


def apply_env(cfg: RunConfig, environ: Mapping[str, str] | None = None) -> RunConfig:
    """Apply ``SPINHOP_<KEY>`` overrides, e.g. ``SPINHOP_DT_PS=0.5`` or ``SPINHOP_SEED=3``.

    The key after the prefix is matched case-insensitively against the device
    and sim keys and against ``seed``/``workers``; values are parsed as JSON
    where possible and used as plain strings otherwise.
    """
    environ = os.environ if environ is None else environ
    lookup = {k.lower(): ("device", k) for k in DEVICE_KEYS}
    lookup.update({k.lower(): ("sim", k) for k in SIM_KEYS})
    data = config_to_dict(cfg)
    touched = False
    for env_key, raw in environ.items():
        if not env_key.startswith("SPINHOP_"):
            continue
        key = env_key[len("SPINHOP_"):].lower()
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        if key in ("seed", "workers"):
            data[key] = value
        elif key in lookup:
            section, real = lookup[key]
            data[section][real] = value
        else:
            raise ConfigError("unknown environment override", env_key)
        touched = True
    if not touched:
        return cfg
    new = config_from_dict(data)
    return new.with_(experiment=cfg.experiment, args=cfg.args)

