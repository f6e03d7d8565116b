"""Run configuration: presets, INI files and validation."""
from __future__ import annotations

import configparser
import dataclasses
import math
import os
from dataclasses import dataclass
from pathlib import Path

CACHE_ENV = "THREEWELL_CACHE"

KINDS = ("spectrum", "critical", "fig2", "fig3", "fig56", "fig78", "fig9")
ALIASES = {"fig5/6": "fig56", "fig5": "fig56", "fig6": "fig56", "fig7/8": "fig78", "fig7": "fig78",
           "fig8": "fig78", "fig4": "fig56"}

SWEEP_EPS = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 5.0, 30.0)
SCAN_ENERGIES = (-0.9, -0.4, -0.03, 0.06, 0.075, 0.1, 0.3, 0.8)
SHRIMP_EPS = (0.0, 0.4, 0.7, 1.0)
CRITICAL_ENERGY = 0.075


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    kind: str = "spectrum"
    U: float = 0.7
    J: float = 1.0
    eps: tuple = (1.5,)
    N: int = 100
    window: int | None = None
    smoothing_width: int = 50
    energies: tuple = ()
    t_max_single: float = 1.0e4
    t_max_multi: float = 1.0e3
    rel_tol: float = 1e-10
    dt_sample: float = 0.05
    ic_count: int = 32
    seed: int = 0
    bins: int = 60
    single_band: float = 1.0
    chaotic_eps: float = 1.5
    multi_energies: tuple = (-0.9,)
    grid_density: int = 8
    workers: int = 1
    out_dir: str = "runs/out"
    cache_dir: str | None = None

    def resolved_cache_dir(self) -> Path:
        if self.cache_dir:
            return Path(self.cache_dir)
        env = os.environ.get(CACHE_ENV)
        return Path(env) if env else Path(self.out_dir) / "cache"

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        d["cache_dir"] = str(self.resolved_cache_dir())
        return d

    def validate(self) -> "RunConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not isinstance(self.N, int) or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N!r}")
        for name in ("U", "J", "t_max_single", "t_max_multi", "rel_tol", "dt_sample", "single_band",
                     "chaotic_eps"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not self.eps or not all(math.isfinite(e) for e in self.eps):
            raise ConfigError("eps list must be non-empty and finite")
        if not all(math.isfinite(e) for e in self.energies):
            raise ConfigError("energy targets must be finite")
        if self.window is not None and self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.smoothing_width < 1:
            raise ConfigError("smoothing_width must be >= 1")
        if self.t_max_single <= 0 or self.t_max_multi <= 0 or self.dt_sample <= 0:
            raise ConfigError("integration times must be positive")
        if not 1e-14 <= self.rel_tol <= 1e-4:
            raise ConfigError("rel_tol must lie in [1e-14, 1e-4]")
        if self.ic_count < 1:
            raise ConfigError("ic_count must be >= 1")
        if self.bins < 2:
            raise ConfigError("bins must be >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.grid_density < 4:
            raise ConfigError("grid_density must be >= 4")
        return self


def preset(name: str) -> RunConfig:
    """Defaults reproducing one figure's data at reduced N."""
    kind = ALIASES.get(name, name)
    if kind not in KINDS:
        raise ConfigError(f"unknown preset {name!r}")
    if kind in ("fig2", "fig3", "fig9"):
        return RunConfig(kind=kind, eps=SWEEP_EPS)
    if kind == "fig56":
        return RunConfig(kind=kind, eps=(1.5,), energies=SCAN_ENERGIES)
    if kind == "fig78":
        return RunConfig(kind=kind, eps=SHRIMP_EPS, energies=(CRITICAL_ENERGY,))
    return RunConfig(kind=kind)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
# section -> keys accepted in it
SECTIONS = {
    "model": ("U", "J", "eps", "N"),
    "run": ("kind", "out_dir", "cache_dir", "seed", "workers"),
    "quantum": ("window", "smoothing_width"),
    "targets": ("energies",),
    "trajectory": ("t_max_single", "t_max_multi", "rel_tol", "dt_sample", "ic_count", "single_band",
                   "chaotic_eps", "multi_energies"),
    "histogram": ("bins",),
    "critical": ("grid_density",),
}


def _parse_list(text: str) -> tuple:
    items = [t for t in text.replace(",", " ").split() if t]
    return tuple(float(t) for t in items)


def coerce(name: str, value):
    """Convert a string (or value) into the type of RunConfig field ``name``."""
    if name not in _FIELDS:
        raise ConfigError(f"unknown setting {name!r}")
    if value is None:
        return None
    try:
        if name in ("eps", "energies", "multi_energies"):
            return _parse_list(value) if isinstance(value, str) else tuple(float(v) for v in value)
        if name in ("N", "ic_count", "seed", "bins", "smoothing_width", "grid_density",
                    "workers"):
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        if name == "window":
            return None if str(value).lower() in ("", "auto", "none") else int(value)
        if name in ("kind", "out_dir", "cache_dir"):
            v = str(value)
            return ALIASES.get(v, v) if name == "kind" else v
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {value!r}") from None


def load_ini(path, base: RunConfig | None = None) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = base or RunConfig()
    if cp.has_option("run", "preset"):
        cfg = preset(cp.get("run", "preset"))
    updates = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}] in {path}")
        for key, raw in cp.items(section):
            if section == "run" and key == "preset":
                continue
            name = {"u": "U", "j": "J", "n": "N"}.get(key, key)
            if name not in SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            updates[name] = coerce(name, raw)
    return dataclasses.replace(cfg, **updates)


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    clean = {k: coerce(k, v) for k, v in overrides.items() if v is not None}
    return dataclasses.replace(cfg, **clean)
