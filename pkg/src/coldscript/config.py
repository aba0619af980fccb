"""Pipeline configuration shared by the library and the CLI."""

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass
class PipelineConfig:
    """Every tunable of the pipeline, with its documented default.

    Field domains are validated by `validate`; the CLI exposes each field
    as a flag of the same name (dashes for underscores).
    """

    hpp_thresh: float = 200.0      # min per-row mean ink for baseline removal
    angle_thresh: float = 10.0     # max |tangent angle| (deg) for baseline pixels
    valley_frac: float = 0.05      # line-segmentation valley, fraction of profile max
    min_gap: int = 8               # merge line gaps shorter than this (rows)
    canny_sigma: float = 1.4
    canny_low: float = 50.0
    canny_high: float = 150.0
    min_component: int = 8         # discard edge components smaller than this (px)
    rdp_epsilon: float = 2.0       # polyline simplification tolerance (px)
    plane_radius: int = 150        # polar plane radius (units)
    bins: int = 64                 # feature vector length
    c: float = 10.0                # SVM box constraint
    gamma: float = 2.0             # Gaussian kernel width
    folds: int = 10
    seed: int = 0

    def validate(self) -> "PipelineConfig":
        if not 0.0 <= self.hpp_thresh <= 255.0:
            raise ConfigError(f"hpp_thresh must be in [0, 255], got {self.hpp_thresh}")
        if not 0.0 <= self.angle_thresh <= 90.0:
            raise ConfigError(f"angle_thresh must be in [0, 90], got {self.angle_thresh}")
        if not 0.0 < self.valley_frac < 1.0:
            raise ConfigError(f"valley_frac must be in (0, 1), got {self.valley_frac}")
        if self.min_gap < 0:
            raise ConfigError(f"min_gap must be >= 0, got {self.min_gap}")
        if not 0.0 <= self.canny_low < self.canny_high:
            raise ConfigError(
                f"need 0 <= canny_low < canny_high, got {self.canny_low}, {self.canny_high}"
            )
        if self.canny_sigma <= 0:
            raise ConfigError(f"canny_sigma must be > 0, got {self.canny_sigma}")
        if self.min_component < 1:
            raise ConfigError(f"min_component must be >= 1, got {self.min_component}")
        if self.rdp_epsilon <= 0:
            raise ConfigError(f"rdp_epsilon must be > 0, got {self.rdp_epsilon}")
        if self.plane_radius < 1:
            raise ConfigError(f"plane_radius must be >= 1, got {self.plane_radius}")
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")
        if self.c <= 0:
            raise ConfigError(f"c must be > 0, got {self.c}")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        return self

    # Fields that must match between a trained model and prediction-time flags.
    FEATURE_FIELDS = (
        "canny_sigma", "canny_low", "canny_high",
        "min_component", "rdp_epsilon", "plane_radius", "bins",
    )

    def feature_config(self) -> dict:
        return {name: getattr(self, name) for name in self.FEATURE_FIELDS}

    def replace(self, **overrides) -> "PipelineConfig":
        return dataclasses.replace(self, **overrides)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(raw) - known
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
        return cls(**raw).validate()

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
