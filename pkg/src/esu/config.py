"""Experiment configuration: YAML in, validated frozen dataclass out.

One config file describes one invocation; sweep axes (system sizes, cost
weights, switching rates, initial states) are lists in the same file, so
a whole figure is a single run.  Unknown keys are rejected rather than
ignored, and every field has a default documented here:

    model               lmg | ising                     lmg
    n_spins             int or list                     [32]
    gamma_ref           reference field Gamma           10.0
    lambda              cost weight, scalar or list     [1.8]
    measure             entropy | concurrence           by model
    fluctuation_form    relative | absolute             by model
    window              control duration T              10.0
    n_frequencies       CRAB tones per pulse            8
    boundary_stiffness  envelope exponent               1.0
    budget              cost evaluations total          20000
    restarts            independent frequency draws     4
    seed                master seed                     0
    time_steps          control-window grid             1000
    simplex_scale       initial simplex edge            0.1
    start_scale         random simplex-centre scale     0.0
    initial_state       eigenstate index, 1 = ground    [1]
    horizon             free-evolution span             100.0
    dt                  recording step                  0.05
    noise.i_alpha       coupling-term intensity         0.2
    noise.i_beta        field-term intensity            0.2
    noise.nu            switching rate(s)               [0.8, 2.6, 7.8, 26, 78]
    noise.instances     Monte Carlo draws               30
    noise.dwell         fixed | exponential             fixed
    noise.threshold     survival cutoff for lifetimes   0.8
    input_records       run records supplying psi(0)    []
    reference_records   control-run records             []
    intensities         lifetime-vs-I sweep             []
    out                 output directory                runs

The config hash covers every physics-relevant field (everything except
``out``) over a canonical JSON form, so output names are stable across
machines and dict orderings.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import yaml

MODELS = ("lmg", "ising")

# Fields that accept either a scalar or a list in the file.
_SWEEP_FIELDS = {
    "n_spins",
    "lam",
    "initial_state",
    "input_records",
    "reference_records",
    "intensities",
}

# File key -> attribute name, where they differ.
_ALIASES = {"lambda": "lam"}


class ConfigError(ValueError):
    """Invalid or unparseable configuration."""


@dataclass(frozen=True)
class NoiseConfig:
    i_alpha: float = 0.2
    i_beta: float = 0.2
    nu: tuple = (0.8, 2.6, 7.8, 26.0, 78.0)
    instances: int = 30
    dwell: str = "fixed"
    threshold: float = 0.8

    def __post_init__(self):
        nu = self.nu if isinstance(self.nu, (list, tuple)) else (self.nu,)
        object.__setattr__(self, "nu", tuple(float(v) for v in nu))
        if any(v <= 0 for v in self.nu):
            raise ConfigError("noise.nu entries must be positive")
        if self.i_alpha < 0 or self.i_beta < 0:
            raise ConfigError("noise intensities must be >= 0")
        if self.instances < 1:
            raise ConfigError("noise.instances must be >= 1")
        if self.dwell not in ("fixed", "exponential"):
            raise ConfigError(f"noise.dwell must be fixed or exponential, got {self.dwell!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("noise.threshold must lie in (0, 1)")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "lmg"
    n_spins: tuple = (32,)
    gamma_ref: float = 10.0
    lam: tuple = (1.8,)
    measure: str | None = None
    fluctuation_form: str | None = None
    window: float = 10.0
    n_frequencies: int = 8
    boundary_stiffness: float = 1.0
    budget: int = 20000
    restarts: int = 4
    seed: int = 0
    time_steps: int = 1000
    simplex_scale: float = 0.1
    start_scale: float = 0.0
    initial_state: tuple = (1,)
    horizon: float = 100.0
    dt: float = 0.05
    noise: NoiseConfig = dataclasses.field(default_factory=NoiseConfig)
    input_records: tuple = ()
    reference_records: tuple = ()
    intensities: tuple = ()
    out: str = "runs"

    def __post_init__(self):
        for name in _SWEEP_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (list, tuple)):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        for n in self.n_spins:
            if not isinstance(n, int) or n < 2:
                raise ConfigError(f"n_spins entries must be integers >= 2, got {n!r}")
            if self.model == "ising" and n > 12:
                raise ConfigError(f"ising supports at most 12 spins, got {n}")
            if self.model == "lmg" and (n % 2 or n < 4 or n > 1024):
                raise ConfigError(f"lmg needs even n_spins in [4, 1024], got {n}")
        if self.gamma_ref <= 0:
            raise ConfigError("gamma_ref must be positive")
        if self.window <= 0 or self.horizon <= 0 or self.dt <= 0:
            raise ConfigError("window, horizon, and dt must be positive")
        if self.n_frequencies < 1 or self.time_steps < 1:
            raise ConfigError("n_frequencies and time_steps must be >= 1")
        if self.budget < 1 or self.restarts < 1:
            raise ConfigError("budget and restarts must be >= 1")
        if self.simplex_scale <= 0:
            raise ConfigError("simplex_scale must be positive")
        if self.start_scale < 0:
            raise ConfigError("start_scale must be >= 0")
        for n in self.initial_state:
            if not isinstance(n, int) or n < 1:
                raise ConfigError("initial_state entries are 1-based eigenstate indices")
        if self.measure is not None and self.measure not in ("entropy", "concurrence"):
            raise ConfigError(f"unknown measure {self.measure!r}")
        if self.fluctuation_form is not None and self.fluctuation_form not in (
            "relative",
            "absolute",
        ):
            raise ConfigError(f"unknown fluctuation_form {self.fluctuation_form!r}")

    @property
    def resolved_measure(self) -> str:
        if self.measure is not None:
            return self.measure
        return "entropy" if self.model == "lmg" else "concurrence"

    @property
    def resolved_fluctuation_form(self) -> str:
        if self.fluctuation_form is not None:
            return self.fluctuation_form
        return "relative" if self.model == "lmg" else "absolute"

    def replace(self, **overrides) -> "ExperimentConfig":
        """Copy with fields swapped; used to pin one sweep point."""
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> dict:
        """Canonical file-key form, suitable for hashing and embedding."""
        raw = dataclasses.asdict(self)
        raw["lambda"] = raw.pop("lam")
        for name in ("n_spins", "lambda", "initial_state", "input_records",
                     "reference_records", "intensities"):
            raw[name] = list(raw[name])
        raw["noise"]["nu"] = list(raw["noise"]["nu"])
        return raw

    def hash(self) -> str:
        content = self.to_dict()
        content.pop("out")
        canon = json.dumps(content, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _check_unknown(data: dict, allowed, where: str):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {where} keys: {', '.join(unknown)}")


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = {_ALIASES.get(k, k): v for k, v in data.items()}
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    _check_unknown(data, fields, "config")
    if "noise" in data:
        noise = data["noise"]
        if not isinstance(noise, dict):
            raise ConfigError("noise must be a mapping")
        noise_fields = {f.name for f in dataclasses.fields(NoiseConfig)}
        _check_unknown(noise, noise_fields, "noise")
        data["noise"] = NoiseConfig(**noise)
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if data is None:
        data = {}
    return config_from_dict(data)
