"""Scene configuration shared by the CLI and the scripts."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

from .errors import ConfigError

SUITES = ("loxodromic", "irreducible", "frenet", "hyperconvex", "two-hyper", "three-hyper",
          "property-h", "main14", "gaps", "contraction", "period", "hill")
DEFAULT_SUITE = ("loxodromic", "frenet", "hyperconvex", "property-h")


@dataclass(frozen=True)
class Tolerances:
    direct: float = 1e-7           # directness of a subspace sum
    positivity: float = 1e-5       # worst margin for positivity checks
    separation: float = 0.2        # rad, tuple filter for positivity checks
    frenet_final: float = 1e-2     # final window distance
    min_gap: float = 1e-4          # loxodromic eigenvalue gap
    gap_threshold: float = 0.05    # gap-growth slope
    period: float = 1e-8           # period vs log|crossratio|
    contraction_slack: float = 1e-9
    hill: float = 1e-6

    @classmethod
    def names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class SceneConfig:
    n: int = 3
    genus: int = 2
    bend_tau: tuple = (0.0,)
    ball_radius: int = 4
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    output_dir: str = "hitchin_out"
    suite: tuple = DEFAULT_SUITE
    tuples: int = 200
    anchor: str = "auto"           # or a word whose attracting point anchors the Frenet check
    times: tuple = tuple(0.5 * k for k in range(-4, 5))  # radius-4 sampling resolves |t| <= 2
    triple: tuple = (0.3, 1.5, 4.0)
    contraction_root: int = 1
    hill_preset: str = "roots3"

    def __post_init__(self):
        object.__setattr__(self, "bend_tau", tuple(float(t) for t in self.bend_tau))
        object.__setattr__(self, "suite", tuple(self.suite))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "triple", tuple(float(t) for t in self.triple))
        if isinstance(self.tolerances, dict):
            object.__setattr__(self, "tolerances", tolerances_from(self.tolerances))
        self.validate()

    def validate(self) -> None:
        if not 2 <= self.n <= 8:
            raise ConfigError(f"n = {self.n} outside 2..8")
        if self.genus != 2:
            raise ConfigError("only genus 2 is supported")
        if self.ball_radius < 1:
            raise ConfigError("ball_radius must be at least 1")
        if len(self.bend_tau) not in (1, self.n - 1):
            raise ConfigError(f"bend_tau needs 1 or {self.n - 1} entries, got {len(self.bend_tau)}")
        for name, value in asdict(self.tolerances).items():
            if not value > 0:
                raise ConfigError(f"tolerance {name} must be positive")
        unknown = set(self.suite) - set(SUITES)
        if unknown:
            raise ConfigError(f"unknown suite entries {sorted(unknown)}; choose from {SUITES}")
        if len(self.triple) != 3:
            raise ConfigError("triple needs three circle coordinates")
        if not 1 <= self.contraction_root <= self.n - 1:
            raise ConfigError(f"contraction_root must lie in 1..{self.n - 1}")
        if self.tuples < 1:
            raise ConfigError("tuples must be positive")

    @property
    def tau(self) -> tuple:
        """bend_tau broadcast to n - 1 entries."""
        return self.bend_tau * (self.n - 1) if len(self.bend_tau) == 1 else self.bend_tau

    def to_json(self) -> dict:
        data = asdict(self)
        for key in ("bend_tau", "suite", "times", "triple"):
            data[key] = list(data[key])
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "SceneConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**data)

    def with_overrides(self, **changes) -> "SceneConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def tolerances_from(data: dict, base: Tolerances | None = None) -> Tolerances:
    base = base or Tolerances()
    unknown = set(data) - set(Tolerances.names())
    if unknown:
        raise ConfigError(f"unknown tolerances {sorted(unknown)}")
    try:
        return replace(base, **{k: float(v) for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SceneConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return SceneConfig.from_json(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
