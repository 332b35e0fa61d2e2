"""Experiment configuration: a flat JSON document, every field optional."""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..beamspace import ValidationError
from ..estimators import DEFAULT_GAMMA


def default_snr_grid():
    return [float(v) for v in np.arange(-10, 21, 2)]


@dataclass
class ExperimentConfig:
    M: int = 64
    L: int = 3
    N0: float = 1.0
    spacing: float = 0.5
    snr_grid_db: list = field(default_factory=default_snr_grid)
    trials: int = 10_000
    gamma: float = DEFAULT_GAMMA
    lam: float = 3.0
    seed: int = 2024
    outputs: str = "results"

    def validate(self):
        if int(self.M) != self.M or self.M < 2:
            raise ValidationError(f"M must be an integer >= 2, got {self.M}")
        if int(self.L) != self.L or self.L < 1:
            raise ValidationError(f"L must be an integer >= 1, got {self.L}")
        if not self.N0 > 0:
            raise ValidationError(f"N0 must be positive, got {self.N0}")
        if not self.spacing > 0:
            raise ValidationError(f"spacing must be positive, got {self.spacing}")
        if not self.snr_grid_db:
            raise ValidationError("snr_grid_db must be nonempty")
        if not all(np.isfinite(v) for v in self.snr_grid_db):
            raise ValidationError("snr_grid_db must be finite")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValidationError(f"trials must be an integer >= 1, got {self.trials}")
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if not self.lam >= 0:
            raise ValidationError(f"lambda must be >= 0, got {self.lam}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed}")
        return self

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.field_names())
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.M, cfg.L, cfg.trials, cfg.seed = int(cfg.M), int(cfg.L), int(cfg.trials), int(cfg.seed)
        cfg.N0, cfg.spacing, cfg.gamma, cfg.lam = float(cfg.N0), float(cfg.spacing), float(cfg.gamma), float(cfg.lam)
        cfg.snr_grid_db = [float(v) for v in cfg.snr_grid_db]
        return cfg.validate()

    @classmethod
    def load(cls, path, **overrides):
        """Read a JSON file, then apply non-None ``overrides`` on top."""
        data = {}
        if path is not None:
            data = json.loads(Path(path).read_text())
            if not isinstance(data, dict):
                raise ValidationError("config file must hold a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)
