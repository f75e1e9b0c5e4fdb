"""Experiment configuration: key-value text files plus env overrides.

Config files are plain ``key = value`` lines (``#`` comments).  Keys
mirror the dataclass fields below; unknown keys are rejected by name.
Every key can also be overridden by an environment variable
``CBLAB_<KEY>`` (uppercased field name), e.g. ``CBLAB_N_R=96``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .physical import PhysicalConfig

ENV_PREFIX = "CBLAB_"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Full experiment setup: physical run, ball grid, monitors."""

    # physical solve
    dim_N: int = 2
    a: float = 3.0
    M: float = 1.0
    perturbation: str = "f_log"
    g_amp: float = 0.0
    initial_data: str = "ode"
    amplitude: float = 1.0
    width: float = 0.35
    t_star: float = 1.0
    geometry: str = "radial"
    domain_radius: float = 2.0
    n_x: int = 2048
    u_max: float = 1e8
    t_max: float = 4.0
    x0: tuple = (0.0, 0.0)
    # similarity grid and trace
    grid_mode: str = "radial"
    n_r: int = 128
    n_theta: int = 64
    b: float | None = None            # None -> a/2
    sigma_const: float = 1.0
    s_max: float = 7.0
    sample_ds: float = 0.05
    continue_similarity: bool = True
    # verification
    checks: tuple = ("pohozaev", "pointwise", "hardy", "energy_laws")
    n_r_verify: int = 128
    # orchestration
    seed: int = 0
    workers: int = 2
    outdir: str = "runs"

    def __post_init__(self):
        if self.b is None:
            self.b = self.a / 2.0
        if not 1.0 < self.b:
            raise ConfigError(f"b must exceed 1, got {self.b}")
        if self.b >= self.a:
            raise ConfigError(f"b must stay below a (got b={self.b}, a={self.a})")
        if not 1.0 <= self.s_max <= 30.0:
            raise ConfigError("s_max must lie in [1, 30] (weight underflow guard)")
        if self.sample_ds <= 0:
            raise ConfigError("sample_ds must be positive")

    def physical(self) -> PhysicalConfig:
        return PhysicalConfig(
            dim_N=self.dim_N, a=self.a, M=self.M, perturbation=self.perturbation,
            g_amp=self.g_amp, initial_data=self.initial_data,
            amplitude=self.amplitude, width=self.width, t_star=self.t_star,
            geometry=self.geometry, domain_radius=self.domain_radius,
            n_x=self.n_x, u_max=self.u_max, t_max=self.t_max,
            x0=self.x0, seed=self.seed)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["x0"] = list(self.x0)
        out["checks"] = list(self.checks)
        return out

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, raw: str):
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    current = getattr(ExperimentConfig, name, None)
    f = _FIELD_TYPES[name]
    base = f.default if f.default is not dataclasses.MISSING else current
    if name in ("x0", "checks"):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        return tuple(float(x) for x in items) if name == "x0" else tuple(items)
    if name == "b":
        return None if raw.lower() in ("none", "auto") else float(raw)
    if isinstance(base, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean for {name}: {raw!r}")
    if isinstance(base, int):
        return int(raw)
    if isinstance(base, float):
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Parse key = value lines into a kwargs dict (types coerced)."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        out[key.strip()] = _coerce(key.strip(), raw)
    return out


def env_overrides(environ=None) -> dict:
    """Collect CBLAB_* environment overrides."""
    environ = os.environ if environ is None else environ
    out = {}
    for key, raw in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX):].lower()
        if name in _FIELD_TYPES:
            out[name] = _coerce(name, raw)
    return out


def load_config(path: str | None = None, overrides: dict | None = None,
                use_env: bool = True) -> ExperimentConfig:
    kwargs = {}
    if path is not None:
        kwargs.update(parse_config_text(Path(path).read_text()))
    if use_env:
        kwargs.update(env_overrides())
    if overrides:
        for k, v in overrides.items():
            kwargs[k] = _coerce(k, v) if isinstance(v, str) else v
    unknown = sorted(set(kwargs) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(**kwargs)
