"""Run configuration: a flat JSON object with defaults filled and every key checked."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .profile import ControlProfile
from .spectral import Kind, Parity, Spectrum, SystemSpec, admissible_r

B_PROFILES = ("unit", "sinusoidal", "table")


@dataclass(frozen=True)
class RunConfig:
    kind: str = "water_wave"
    g: float = 9.81
    depth: float = 1.0
    alpha: float = 1.5
    multiplier: str = "power"
    table: Optional[tuple] = None
    lam: float = 1.0
    N: int = 128
    r: float = 0.0
    parity: str = "odd"
    b_profile: str = "unit"
    b_amplitude: float = 0.5
    b_table: Optional[str] = None
    seed: int = 0
    output_dir: str = "out"
    horizon: float = 6.0
    grid_points: int = 256
    T_horizon: float = 1.0
    r_norm: float = 0.5
    n_states: int = 10
    sweep_lambdas: tuple = (0.5, 1.0, 5.0)
    dump_width: int = 4

    def system(self) -> SystemSpec:
        return SystemSpec(Kind(self.kind), self.g, self.depth, self.alpha, self.multiplier, self.table)

    def spectrum(self) -> Spectrum:
        return Spectrum.from_spec(self.system(), self.N, Parity(self.parity))

    def profile(self) -> ControlProfile:
        parity = Parity(self.parity)
        if self.b_profile == "unit":
            return ControlProfile.unit(self.N, parity)
        if self.b_profile == "sinusoidal":
            return ControlProfile.sinusoidal(self.N, self.b_amplitude, parity)
        values = np.loadtxt(self.b_table, dtype=float, ndmin=1)
        n = len(self.spectrum())
        if len(values) < n:
            raise ConfigurationError(f"b_table: {len(values)} values for {n} modes")
        return ControlProfile(values[:n], parity)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        for key in ("table", "sweep_lambdas"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    def echo(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "effective_config.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INTS = {"N", "seed", "grid_points", "n_states", "dump_width"}
_FLOATS = {"g", "depth", "alpha", "lam", "r", "b_amplitude", "horizon", "T_horizon", "r_norm"}
_STRINGS = {"kind", "multiplier", "parity", "b_profile", "b_table", "output_dir"}


def _coerce(key: str, value):
    if key in _INTS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
        return value
    if key in _FLOATS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if key in _STRINGS:
        if not isinstance(value, str):
            raise ConfigurationError(f"{key}: expected a string, got {value!r}")
        return value
    # list-valued keys
    if value is None and key == "table":
        return None
    if not isinstance(value, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        raise ConfigurationError(f"{key}: expected a list of numbers, got {value!r}")
    return tuple(float(x) for x in value)


def _validate(cfg: RunConfig) -> None:
    def need(ok, key, msg):
        if not ok:
            raise ConfigurationError(f"{key}: {msg}")

    need(cfg.kind in {k.value for k in Kind}, "kind", f"unknown kind {cfg.kind!r}")
    need(cfg.parity in {p.value for p in Parity}, "parity", f"unknown parity {cfg.parity!r}")
    need(cfg.b_profile in B_PROFILES, "b_profile", f"expected one of {B_PROFILES}")
    need(cfg.b_profile != "table" or cfg.b_table, "b_table", "required when b_profile is 'table'")
    need(cfg.lam > 0 and np.isfinite(cfg.lam), "lambda", f"must be positive, got {cfg.lam}")
    need(cfg.N >= 2, "N", f"must be at least 2, got {cfg.N}")
    need(0 <= cfg.seed < 2**64, "seed", "must fit in an unsigned 64-bit integer")
    need(cfg.horizon > 0, "horizon", "must be positive")
    need(cfg.grid_points >= 8, "grid_points", "must be at least 8")
    need(cfg.T_horizon > 0, "T_horizon", "must be positive")
    need(cfg.n_states >= 1, "n_states", "must be at least 1")
    need(cfg.dump_width >= 0, "dump_width", "must be non-negative")
    need(all(x > 0 for x in cfg.sweep_lambdas) and cfg.sweep_lambdas, "sweep_lambdas",
         "must be a nonempty list of positive rates")
    try:
        spec = cfg.system()
    except ConfigurationError as exc:
        raise ConfigurationError(f"system: {exc}") from None
    lo, hi = admissible_r(spec.growth_exponent)
    need(lo < cfg.r < hi, "r", f"{cfg.r} outside ({lo:g}, {hi:g})")
    need(lo < cfg.r_norm < hi, "r_norm", f"{cfg.r_norm} outside ({lo:g}, {hi:g})")


def parse_config(text: str, **overrides) -> RunConfig:
    """Parse a JSON object into a validated :class:`RunConfig`.

    Empty or whitespace-only text gives the defaults.  The key ``lambda``
    maps to the field ``lam``.  Keyword `overrides` (already typed) are
    applied after parsing, before validation.
    """
    raw = json.loads(text) if text.strip() else {}
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    values = {}
    for key, value in raw.items():
        name = "lam" if key == "lambda" else key
        if name not in _FIELDS or key == "lam":
            raise ConfigurationError(f"{key}: unknown key")
        values[name] = _coerce(name, value)
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def load_config(path: Optional[str], **overrides) -> RunConfig:
    text = Path(path).read_text() if path else ""
    return parse_config(text, **overrides)
