"""Run configuration: JSON schema, defaults and validation."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .noise import RNG_ALGORITHM, CovarianceSpec
from .spectral import PhysicalParams


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class Formulation(str, enum.Enum):
    HomogenizedV = "HomogenizedV"
    DirectU = "DirectU"


@dataclass(frozen=True)
class NoiseConfig:
    sigma: float = 0.0
    decay: float = 1.0
    K: int = 32
    flux_amplitude: float = 0.0
    eigenvalues: tuple | None = None
    flux: tuple | None = None

    def covariance(self):
        if self.eigenvalues is not None or self.flux is not None:
            q = np.asarray(self.eigenvalues if self.eigenvalues is not None else [], float)
            f = np.asarray(self.flux if self.flux is not None else [], float)
            return CovarianceSpec(q, f)
        return CovarianceSpec.power_law(self.sigma, self.decay, self.K, self.flux_amplitude)


@dataclass(frozen=True)
class InitialCondition:
    """``zero``, ``eigenmode`` (one basis mode of q or S) or ``random``."""

    kind: str = "zero"
    field: str = "q"
    m: int = 1
    k: int = 1
    amplitude: float = 1.0
    h_norm: float = 1.0
    bandwidth: int = 8
    seed: int = 0


@dataclass(frozen=True)
class SimConfig:
    Ra: float
    Pr: float = 1.0
    nx: int = 64
    nz: int = 64
    dt: float = 1e-3
    n_steps: int = 1000
    formulation: Formulation = Formulation.HomogenizedV
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    initial: InitialCondition = field(default_factory=InitialCondition)
    eta_init: str = "stationary"
    seed: int = 0
    replicate: int = 0
    output_every: int = 1
    cfl: float = 1.0
    rng: str = RNG_ALGORITHM

    @property
    def params(self):
        return PhysicalParams(Ra=self.Ra, Pr=self.Pr)

    def covariance(self):
        return self.noise.covariance()

    def to_dict(self):
        d = asdict(self)
        d["formulation"] = self.formulation.value
        for key in ("eigenvalues", "flux"):
            if d["noise"][key] is not None:
                d["noise"][key] = list(d["noise"][key])
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self):
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def replace(self, **changes):
        return validate(replace(self, **changes))


_REQUIRED = ("Ra",)


def _build(cls, data, prefix=""):
    names = {f.name for f in fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(prefix + key, "unknown key")
    return names


def parse_config(text):
    """Parse a JSON document into a validated :class:`SimConfig`."""
    try:
        data = json.loads(text) if isinstance(text, str) else dict(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ConfigError("<document>", "expected a JSON object")
    return from_dict(data)


def from_dict(data):
    data = dict(data)
    _build(SimConfig, data)
    for key in _REQUIRED:
        if key not in data:
            raise ConfigError(key, "missing required key")
    noise = dict(data.pop("noise", {}) or {})
    _build(NoiseConfig, noise, "noise.")
    for key in ("eigenvalues", "flux"):
        if noise.get(key) is not None:
            noise[key] = tuple(float(v) for v in noise[key])
    initial = dict(data.pop("initial", {}) or {})
    _build(InitialCondition, initial, "initial.")
    if "formulation" in data:
        try:
            data["formulation"] = Formulation(data["formulation"])
        except ValueError:
            raise ConfigError("formulation", f"expected one of {[f.value for f in Formulation]}") from None
    try:
        cfg = SimConfig(**data, noise=NoiseConfig(**noise), initial=InitialCondition(**initial))
    except TypeError as exc:
        raise ConfigError("<document>", str(exc)) from None
    return validate(cfg)


def _number(key, value, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if not np.isfinite(value):
        raise ConfigError(key, "must be finite")


def validate(cfg):
    for key in ("Ra", "Pr", "dt", "cfl"):
        _number(key, getattr(cfg, key))
    for key in ("nx", "nz", "n_steps", "seed", "replicate", "output_every"):
        _number(key, getattr(cfg, key), integer=True)
    if cfg.dt <= 0:
        raise ConfigError("dt", "must be positive")
    if cfg.Pr <= 0:
        raise ConfigError("Pr", "must be positive")
    if cfg.Ra < 0:
        raise ConfigError("Ra", "must be non-negative")
    if cfg.nx < 2 or cfg.nz < 2:
        raise ConfigError("nx" if cfg.nx < 2 else "nz", "need at least 2 modes")
    if cfg.n_steps < 0:
        raise ConfigError("n_steps", "must be non-negative")
    if cfg.output_every < 1:
        raise ConfigError("output_every", "must be at least 1")
    if cfg.seed < 0 or cfg.replicate < 0:
        raise ConfigError("seed" if cfg.seed < 0 else "replicate", "must be non-negative")
    if cfg.cfl <= 0:
        raise ConfigError("cfl", "must be positive")
    if cfg.eta_init not in ("stationary", "zero"):
        raise ConfigError("eta_init", "expected 'stationary' or 'zero'")
    if cfg.rng != RNG_ALGORITHM:
        raise ConfigError("rng", f"only {RNG_ALGORITHM!r} is available")
    n = cfg.noise
    for key in ("sigma", "decay", "flux_amplitude"):
        _number("noise." + key, getattr(n, key))
    _number("noise.K", n.K, integer=True)
    if n.sigma < 0:
        raise ConfigError("noise.sigma", "must be non-negative")
    if n.K < 0:
        raise ConfigError("noise.K", "must be non-negative")
    if n.eigenvalues is not None and any(v < 0 or not np.isfinite(v) for v in n.eigenvalues):
        raise ConfigError("noise.eigenvalues", "eigenvalues must be finite and non-negative")
    ic = cfg.initial
    if ic.kind not in ("zero", "eigenmode", "random"):
        raise ConfigError("initial.kind", "expected 'zero', 'eigenmode' or 'random'")
    if ic.field not in ("q", "S"):
        raise ConfigError("initial.field", "expected 'q' or 'S'")
    if ic.kind == "eigenmode":
        lo = 1 if ic.field == "q" else 0
        hi = cfg.nx if ic.field == "q" else cfg.nx - 1
        if not lo <= ic.m <= hi or not lo <= ic.k <= (cfg.nz if ic.field == "q" else cfg.nz - 1):
            raise ConfigError("initial.m", "mode outside the resolved band")
        if ic.field == "S" and ic.m == 0 and ic.k == 0:
            raise ConfigError("initial.m", "salinity mean mode is excluded")
    if ic.h_norm < 0:
        raise ConfigError("initial.h_norm", "must be non-negative")
    if ic.bandwidth < 1:
        raise ConfigError("initial.bandwidth", "must be at least 1")
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
