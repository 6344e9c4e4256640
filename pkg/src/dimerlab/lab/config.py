"""Run configuration: a flat JSON document with validated keys."""

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional, Union

import numpy as np

from dimerlab.circuit import NoiseModel, NoiseModelError
from dimerlab.extraction import PROTOCOL_VARIANTS
from dimerlab.oracle import T_MIN, DimerParams, DomainError
from dimerlab.qmatrix import ValidationError
from dimerlab.vqt import LATENTS, OPTIMIZERS, AnsatzConfig, VqtConfig

THREADS_ENV = "DIMERLAB_THREADS"


class ConfigError(ValueError):
    """Invalid or unreadable configuration; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    J: float = 748.0
    g: float = 2.0
    B: float = 1.0
    t_min: float = 1.0
    t_max: float = 300.0
    t_points: int = 31
    layers: int = 4
    latent: str = "categorical"
    optimizer: str = "cobyla"
    max_evals: int = 5000
    rho_begin: float = 0.5
    rho_end: float = 1e-6
    repetitions: Optional[int] = None
    noise: Union[str, dict] = "off"
    master_seed: int = 0
    shots: Union[str, int] = "exact"
    protocol: str = "optimal"
    source: str = "oracle"
    reference: Optional[str] = None
    out: str = "dimerlab-out"
    threads: Optional[int] = None

    def __post_init__(self):
        try:
            self.dimer()
            self.noise_model()
        except (DomainError, NoiseModelError, ValidationError) as exc:
            raise ConfigError(str(exc)) from exc
        if not (self.t_min >= T_MIN and self.t_max >= self.t_min):
            raise ConfigError(f"need {T_MIN} <= t_min <= t_max, got t_min={self.t_min}, t_max={self.t_max}")
        if not isinstance(self.t_points, int) or self.t_points < 1:
            raise ConfigError(f"t_points must be a positive integer, got {self.t_points!r}")
        if self.t_points > 1 and self.t_min == self.t_max:
            raise ConfigError("t_points > 1 needs t_max > t_min")
        if self.t_points == 1 and self.t_min != self.t_max:
            raise ConfigError("t_points = 1 needs t_min == t_max")
        if not isinstance(self.layers, int) or self.layers < 1:
            raise ConfigError(f"layers must be a positive integer, got {self.layers!r}")
        if self.latent not in LATENTS:
            raise ConfigError(f"latent must be one of {LATENTS}, got {self.latent!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not isinstance(self.max_evals, int) or self.max_evals < 1:
            raise ConfigError(f"max_evals must be a positive integer, got {self.max_evals!r}")
        if not (0 < self.rho_end <= self.rho_begin and math.isfinite(self.rho_begin)):
            raise ConfigError(f"need 0 < rho_end <= rho_begin, got {self.rho_end}, {self.rho_begin}")
        if self.repetitions is not None and (not isinstance(self.repetitions, int) or self.repetitions < 1):
            raise ConfigError(f"repetitions must be a positive integer or null, got {self.repetitions!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigError(f"master_seed must be a non-negative integer, got {self.master_seed!r}")
        if self.shots != "exact" and (not isinstance(self.shots, int) or self.shots < 1):
            raise ConfigError(f"shots must be \"exact\" or a positive integer, got {self.shots!r}")
        if self.protocol not in PROTOCOL_VARIANTS:
            raise ConfigError(f"protocol must be one of {PROTOCOL_VARIANTS}, got {self.protocol!r}")
        if self.source not in ("oracle", "vqt"):
            raise ConfigError(f"source must be \"oracle\" or \"vqt\", got {self.source!r}")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError(f"threads must be a positive integer or null, got {self.threads!r}")

    def dimer(self) -> DimerParams:
        return DimerParams(J=float(self.J), g=float(self.g), B=float(self.B))

    def noise_model(self) -> Optional[NoiseModel]:
        if self.noise == "off":
            return None
        if self.noise in ("on", "default"):
            return NoiseModel.symmetric()
        if isinstance(self.noise, dict):
            return NoiseModel.from_dict(self.noise)
        raise ConfigError(f"noise must be \"off\", \"on\", \"default\" or a noise-model object, got {self.noise!r}")

    @property
    def noisy(self) -> bool:
        nm = self.noise_model()
        return nm is not None and nm.enabled

    def grid(self) -> list:
        return [float(t) for t in np.linspace(self.t_min, self.t_max, self.t_points)]

    def vqt_config(self) -> VqtConfig:
        return VqtConfig(
            optimizer=self.optimizer,
            max_evals=self.max_evals,
            seed=self.master_seed,
            noise=self.noise_model(),
            ansatz=AnsatzConfig(layers=self.layers, latent=self.latent),
            repetitions=self.repetitions,
            rho_begin=self.rho_begin,
            rho_end=self.rho_end,
        )

    @property
    def shot_count(self) -> Optional[int]:
        return None if self.shots == "exact" else self.shots

    def to_dict(self) -> dict:
        return asdict(self)

    def resolved(self) -> dict:
        """The document plus the derived noise model and repetition count."""
        doc = self.to_dict()
        nm = self.noise_model()
        doc["noise"] = "off" if nm is None else nm.to_dict()
        doc["repetitions"] = self.vqt_config().resolved_repetitions
        return doc


_FIELDS = {f.name for f in fields(RunConfig)}


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"configuration must be a JSON object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Optional[str]) -> RunConfig:
    """Read a config file; ``None`` or ``"default"`` gives the defaults.

    A run manifest is accepted too: its ``config`` entry is used.
    """
    if path is None or path == "default":
        return RunConfig()
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if isinstance(doc, dict) and "config" in doc and "command" in doc:
        doc = doc["config"]
    return config_from_dict(doc)


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    changes = {k: v for k, v in overrides.items() if v is not None}
    if not changes:
        return cfg
    try:
        return replace(cfg, **changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_threads(flag: Optional[int], cfg: Optional[RunConfig] = None) -> int:
    """--threads wins, then the config, then DIMERLAB_THREADS, then 1."""
    if flag is not None:
        value = flag
    elif cfg is not None and cfg.threads is not None:
        value = cfg.threads
    else:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"thread count must be >= 1, got {value}")
    return value
