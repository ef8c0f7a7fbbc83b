"""Scenario configuration: schema, YAML loading/saving, and hashing.

One YAML file describes a whole scenario: world layout and protocol
distances, truck cab geometry, visual-field parameters, game weights,
prediction knobs, actuation limits, rule-based baseline parameters, the AEB
threshold, the policy under test, and the scripted truck driver. All units
are SI; speed fields additionally accept strings with an explicit "km/h"
suffix on input.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .baselines import RssParams
from .errors import ConfigError
from .game import ActuationLimits
from .utilities import GameWeights, PredictionParams
from .visibility import CabinGeometry, ViewModel
from .world import VehicleSpec, WorldConfig

KMH = 1.0 / 3.6

DRIVER_VARIANTS = ("constant_throttle", "game_aware", "visibility_yielder",
                   "aggressive", "external")
POLICIES = ("sc", "nosc", "rss", "coast")


@dataclass(frozen=True)
class DriverModel:
    """Scripted truck-driver selection plus its knobs."""

    variant: str = "constant_throttle"
    a_range: tuple[float, float] = (0.1, 0.15)   # constant_throttle draw range
    jitter: float = 0.0
    f_threshold: float = 0.5                     # visibility_yielder perception gate
    comfort_brake: float = -4.43                 # visibility_yielder braking level
    gap_margin: float = 1.0                      # extra seconds demanded before crossing

    def __post_init__(self) -> None:
        if self.variant not in DRIVER_VARIANTS:
            raise ConfigError(f"unknown driver variant {self.variant!r}")
        if not (0.0 <= self.a_range[0] <= self.a_range[1]):
            raise ConfigError("constant-throttle range must be ordered and non-negative")
        if self.comfort_brake >= 0:
            raise ConfigError("comfort braking must be negative")


@dataclass(frozen=True)
class AebConfig:
    threshold: float = 0.83
    enabled: bool = True
    horizon: float = 2.5     # arm the margin check only this close to entry (s)

    def __post_init__(self) -> None:
        if self.threshold <= 0 or self.horizon <= 0:
            raise ConfigError("AEB threshold and horizon must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    cabin: CabinGeometry = field(default_factory=CabinGeometry)
    view: ViewModel = field(default_factory=ViewModel)
    weights: GameWeights = field(default_factory=GameWeights)
    prediction: PredictionParams = field(default_factory=PredictionParams)
    limits: ActuationLimits = field(default_factory=ActuationLimits)
    rss: RssParams = field(default_factory=RssParams)
    aeb: AebConfig = field(default_factory=AebConfig)
    av_spec: VehicleSpec = VehicleSpec(length=4.6, width=1.8)
    hv_spec: VehicleSpec = VehicleSpec(length=12.0, width=2.5)
    driver: DriverModel = field(default_factory=DriverModel)
    policy: str = "sc"
    seed: int = 0
    initial_speed: float = 12.5      # truck spawn speed (m/s)
    hysteresis: float = 0.05
    av_reference: str = "center"
    label: str = ""

    def __post_init__(self) -> None:
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.initial_speed <= 0:
            raise ConfigError("initial speed must be positive")
        if self.av_reference not in ("center", "corner"):
            raise ConfigError("av_reference must be 'center' or 'corner'")

    def with_weights(self, weights: GameWeights) -> "ScenarioConfig":
        return replace(self, weights=weights)

    def with_policy(self, policy: str) -> "ScenarioConfig":
        return replace(self, policy=policy)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)

    def resolved_prediction(self) -> PredictionParams:
        """Prediction params with lane speed limits bound to the world's."""
        return replace(self.prediction,
                       v_max_av=self.world.speed_limit,
                       v_max_hv=self.world.speed_limit)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["driver"]["a_range"] = list(self.driver.a_range)
        d["view"]["omega"] = list(self.view.omega)
        d["view"]["mu"] = list(self.view.mu)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_SPEED_FIELDS = {"speed_limit", "initial_speed"}


def _parse_speed(value) -> float:
    if isinstance(value, str):
        text = value.strip().lower()
        if text.endswith("km/h"):
            return float(text[:-4].strip()) * KMH
        if text.endswith("m/s"):
            return float(text[:-3].strip())
        raise ConfigError(f"speed {value!r} needs a 'km/h' or 'm/s' suffix")
    return float(value)


def _build(cls, data: dict, where: str):
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in section {where!r}")
        if key in _SPEED_FIELDS:
            value = _parse_speed(value)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad section {where!r}: {exc}") from exc


_SECTIONS = {
    "world": WorldConfig,
    "cabin": CabinGeometry,
    "view": ViewModel,
    "weights": GameWeights,
    "prediction": PredictionParams,
    "limits": ActuationLimits,
    "rss": RssParams,
    "aeb": AebConfig,
    "av_spec": VehicleSpec,
    "hv_spec": VehicleSpec,
    "driver": DriverModel,
}


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a mapping")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            kwargs[key] = _build(_SECTIONS[key], value, key)
        elif key in {"policy", "seed", "hysteresis", "av_reference", "label"}:
            kwargs[key] = value
        elif key == "initial_speed":
            kwargs[key] = _parse_speed(value)
        else:
            raise ConfigError(f"unknown top-level key {key!r}")
    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {p}: {exc}") from exc
    if data is None:
        data = {}
    return config_from_dict(data)


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg))
