"""Experiment configuration files (INI format, one section per block)."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from nsaniso.grid import Grid, build_grid
from nsaniso.initial import FAMILIES

EXPERIMENTS = ("simulate", "eps-sweep", "smallness-sweep", "local-existence", "density-demo", "constants")
EXTRA_FAMILIES = ("stokes_mode",)

DEFAULT_TOLERANCES = {
    "energy_rtol": 1e-9,
    "energy_growth": 1e-11,
    "skew_rtol": 1e-11,
    "poincare_slack": 0.05,
    "symmetry_rtol": 1e-11,
    "boundary_atol": 1e-10,
    "h01_rtol": 1e-6,
    "bound_slack": 0.05,
    "local_slack": 0.1,
    "constants_rtol": 0.2,
    "density_ratio": 1e-2,
    "order_min": 0.67,
    "order_max": 1.5,
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def _coerce(value: str):
    v = value.strip()
    low = v.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def parse_list(value, conv=float) -> list:
    """Comma- or whitespace-separated list from a config value."""
    if isinstance(value, (list, tuple)):
        return [conv(v) for v in value]
    if isinstance(value, (int, float)):
        return [conv(value)]
    parts = str(value).replace(",", " ").split()
    return [conv(p) for p in parts]


@dataclass
class ExperimentConfig:
    name: str
    grid: Grid
    params: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    output_dir: str = "out"
    stride: int = 1
    plots: bool = False
    sweep: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    constants: dict = field(default_factory=dict)
    seed: int = 0

    def tol(self, key: str) -> float:
        return float(self.tolerances[key])

    def echo(self) -> dict:
        """Plain-dict view used in the run manifest."""
        g = self.grid
        return {
            "experiment": {"name": self.name, "seed": self.seed},
            "grid": {"nx": g.nx, "ny": g.ny, "nz": g.nz, "lx": g.lx, "ly": g.ly, "half_domain": g.half_domain},
            "params": dict(self.params),
            "initial": dict(self.initial),
            "output": {"dir": self.output_dir, "snapshot_stride": self.stride, "plots": self.plots},
            "sweep": dict(self.sweep),
            "tolerances": dict(self.tolerances),
            "constants": dict(self.constants),
        }


def _section(cp: configparser.ConfigParser, name: str) -> dict:
    if not cp.has_section(name):
        return {}
    return {k: _coerce(v) for k, v in cp.items(name)}


def config_from_parser(cp: configparser.ConfigParser, name: str | None = None) -> ExperimentConfig:
    exp = _section(cp, "experiment")
    cfg_name = exp.get("name", name)
    if name is not None and cfg_name != name:
        raise ConfigError(f"config describes experiment {cfg_name!r}, not {name!r}")
    if cfg_name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg_name!r}; choose from {EXPERIMENTS}")
    try:
        grid = build_grid(_section(cp, "grid"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    initial = _section(cp, "initial")
    family = initial.get("family", "modes")
    if family not in FAMILIES + EXTRA_FAMILIES:
        raise ConfigError(f"unknown initial-condition family {family!r}")
    initial["family"] = family
    for key in ("amplitude",):
        if key in initial and float(initial[key]) < 0:
            raise ConfigError("amplitudes must be nonnegative")
    sweep = _section(cp, "sweep")
    if "amplitudes" in sweep and any(a < 0 for a in parse_list(sweep["amplitudes"])):
        raise ConfigError("amplitudes must be nonnegative")
    out = _section(cp, "output")
    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in _section(cp, "tolerances").items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}")
        tolerances[k] = float(v)
    seed = int(exp.get("seed", initial.get("seed", 0)))
    return ExperimentConfig(
        name=cfg_name,
        grid=grid,
        params=_section(cp, "params"),
        initial=initial,
        output_dir=str(out.get("dir", "out")),
        stride=int(out.get("snapshot_stride", 1)),
        plots=bool(out.get("plots", False)),
        sweep=sweep,
        tolerances=tolerances,
        constants=_section(cp, "constants"),
        seed=seed,
    )


def load_config(path, name: str | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_parser(cp, name)


def config_from_dict(sections: dict, name: str | None = None) -> ExperimentConfig:
    """Build a configuration from nested dicts, as if read from a file."""
    cp = configparser.ConfigParser()
    cp.read_dict({sec: {k: str(v) for k, v in body.items()} for sec, body in sections.items()})
    return config_from_parser(cp, name)
