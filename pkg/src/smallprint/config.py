"""Run configuration: one JSON document carrying all module configs, seeds and
method selection. Unknown keys are rejected, and the canonical serialization
embedded in outputs round-trips byte-identically.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .detect import DogConfig, HarrisConfig
from .errors import ParameterError, ParseError
from .evaluation import canonical_method
from .matching import RansacConfig
from .zncc import ZnccConfig


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the built-in synthetic dataset."""

    n_fingers: int = 10
    n_acquisitions: int = 8
    size: int = 70
    ridge_period: float = 8.0
    n_minutiae: int = 6
    seed: int = 1234

    def __post_init__(self):
        if self.n_fingers < 1 or self.n_acquisitions < 2:
            raise ParameterError(
                "synthetic spec needs >= 1 finger and >= 2 acquisitions")


@dataclass(frozen=True)
class SegmentationConfig:
    foreground: str = "dark"  # ridge polarity; "light" for inverted sensors

    def __post_init__(self):
        if self.foreground not in ("dark", "light"):
            raise ParameterError("segmentation.foreground must be "
                                 "'dark' or 'light'")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; flags override file values downstream."""

    method: str = "zncc"
    dataset_root: str | None = None
    synthetic: SyntheticSpec | None = None
    n_enroll: int = 3
    seed: int = 42
    out_dir: str = "out"
    patch_size: int = 70
    skip_bad: bool = False
    workers: int = 0            # 0 = one per cpu
    aggregate: str = "max"      # mean/median available but non-default
    patch_halfwidth: int = 7
    zncc: ZnccConfig = field(default_factory=ZnccConfig)
    harris: HarrisConfig = field(default_factory=HarrisConfig)
    dog: DogConfig = field(default_factory=DogConfig)
    ransac: RansacConfig = field(default_factory=RansacConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        if self.n_enroll < 1:
            raise ParameterError("n_enroll must be >= 1")
        if self.patch_size < 32:
            raise ParameterError("patch_size must be >= 32")
        if self.workers < 0:
            raise ParameterError("workers must be >= 0")


_NESTED = {
    "synthetic": SyntheticSpec,
    "zncc": ZnccConfig,
    "harris": HarrisConfig,
    "dog": DogConfig,
    "ransac": RansacConfig,
    "segmentation": SegmentationConfig,
}


def _dataclass_from_dict(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ParameterError(
            f"{path}: unknown key(s) {sorted(unknown)}; "
            f"allowed: {sorted(names)}")
    return cls(**data)


def config_from_dict(data: dict) -> RunConfig:
    """Build a validated RunConfig from a plain dict, rejecting unknown keys
    at every level."""
    if not isinstance(data, dict):
        raise ParameterError("config: expected a JSON object")
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - names
    if unknown:
        raise ParameterError(f"config: unknown key(s) {sorted(unknown)}; "
                             f"allowed: {sorted(names)}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED and value is not None:
            kwargs[key] = _dataclass_from_dict(_NESTED[key], value, key)
        else:
            kwargs[key] = value
    return RunConfig(**kwargs)


def config_to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)


def canonical_json(cfg: RunConfig) -> str:
    """Deterministic serialization used for config snapshots in outputs."""
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2) + "\n"


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") \
            from exc
    return config_from_dict(data)
