"""Run configuration: a single JSON document, plus named preset scenarios."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .boundary import InitialData, build_boundary_trace
from .wavespeed import InvalidInput, WaveSpeedModel

MODES = ("conservative", "dissipative", "both")


class ConfigError(InvalidInput):
    """Invalid run configuration (CLI exit code 1)."""


@dataclass
class Analysis:
    singularities: bool = True
    asymptotics: bool = True
    comparison: bool = False
    energy: bool = True
    oracle: bool = False
    write_grid: bool = True
    # offset in X from the Type-2 point to the Type-1 point used for the
    # cusp, envelope and curve-geometry fits
    type1_offset: float = -0.12
    energy_samples: int = 21


@dataclass
class RunConfig:
    wave_speed: dict = field(default_factory=lambda: {"family": "sinusoidal", "params": [2.0, 1.0]})
    initial_data: dict = field(default_factory=dict)
    x_min: float = -4.0
    x_max: float = 4.0
    T: float = 2.0
    h: float = 0.01
    mode: str = "conservative"
    analysis: Analysis = field(default_factory=Analysis)
    profile_times: list = field(default_factory=list)
    out: str = "out"
    run_id: str = "run"

    # -- construction ------------------------------------------------------
    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        win = d.pop("window", None)
        if win is not None:
            d.update({k: win[k] for k in ("x_min", "x_max", "T") if k in win})
        an = d.pop("analysis", {}) or {}
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        bad = set(an) - set(Analysis.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown analysis fields: {sorted(bad)}")
        return cls(analysis=Analysis(**an), **d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as e:
                raise ConfigError(f"config is not valid JSON: {e}") from None

    def to_dict(self):
        d = asdict(self)
        d["window"] = {"x_min": d.pop("x_min"), "x_max": d.pop("x_max"), "T": d.pop("T")}
        return d

    def with_(self, **kw):
        return replace(self, **kw)

    # -- validation --------------------------------------------------------
    def validate(self):
        for k in ("x_min", "x_max", "T", "h"):
            v = getattr(self, k)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{k} must be a finite number")
        if self.h <= 0:
            raise ConfigError("h must be positive")
        if not self.x_min < self.x_max:
            raise ConfigError("window needs x_min < x_max")
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.analysis.comparison and self.mode != "both":
            raise ConfigError(f"analysis.comparison requires mode='both' (got mode={self.mode!r})")
        if self.grid_points() < 8:
            raise ConfigError("h too large for the window")
        self.model()
        self.init()
        return self

    # -- derived objects ---------------------------------------------------
    def model(self) -> WaveSpeedModel:
        try:
            return WaveSpeedModel.from_dict(self.wave_speed)
        except (InvalidInput, TypeError) as e:
            raise ConfigError(f"wave_speed: {e}") from None

    def init(self) -> InitialData:
        try:
            return InitialData.from_dict(self.initial_data)
        except TypeError as e:
            raise ConfigError(f"initial_data: {e}") from None

    def grid_points(self):
        return int(round((self.x_max - self.x_min) / self.h))

    def s_values(self):
        return np.linspace(self.x_min, self.x_max, self.grid_points() + 1)

    def trace(self):
        return build_boundary_trace(self.init(), self.model(), self.s_values())

    def modes(self):
        return ("conservative", "dissipative") if self.mode == "both" else (self.mode,)


# Named scenarios. Amplitudes were fixed with hunt_blowup and then rounded.
SINUSOIDAL = {"family": "sinusoidal", "params": [2.0, 1.0], "u_range": [-math.pi, math.pi]}
BACKWARD_PACKET = {"family": "packets",
                   "packets": [{"amplitude": 0.9, "sigma": 0.4, "center": 2.0, "direction": -1}]}
COLLISION = {"family": "packets",
             "packets": [{"amplitude": 0.9, "sigma": 0.4, "center": 4.0, "direction": -1},
                         {"amplitude": 0.9, "sigma": 0.4, "center": -4.0, "direction": 1}]}

PRESETS = {
    # single backward packet: Type-2 point at t ~ 1.04, curve pair after
    "blowup": dict(wave_speed=SINUSOIDAL, initial_data=BACKWARD_PACKET,
                   x_min=-6.0, x_max=4.0, T=1.6, h=0.005),
    # same data, wide window so emitted forward waves stay interior
    "energy": dict(wave_speed=SINUSOIDAL, initial_data=BACKWARD_PACKET,
                   x_min=-6.0, x_max=10.0, T=1.6, h=0.016),
    # two mirrored packets; their singular curves cross at x = 0, t ~ 1.64
    "collision": dict(wave_speed=SINUSOIDAL, initial_data=COLLISION,
                      x_min=-5.5, x_max=5.5, T=2.0, h=0.0055),
    "dalembert": dict(wave_speed={"family": "constant", "params": [2.0]},
                      initial_data={"family": "gaussian", "A0": 1.0, "sigma0": 0.5},
                      x_min=-4.0, x_max=4.0, T=1.0, h=0.02),
    "zero": dict(initial_data={"family": "gaussian"}, x_min=-2.0, x_max=2.0, T=1.0, h=0.02),
}


def preset(name, **kw) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    d = json.loads(json.dumps(PRESETS[name]))
    an = kw.pop("analysis", None)
    cfg = RunConfig.from_dict({**d, "run_id": name, **kw})
    if an is not None:
        cfg.analysis = an if isinstance(an, Analysis) else Analysis(**an)
    return cfg
