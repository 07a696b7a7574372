"""Pipeline configuration: JSON schema, defaults and loading."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, fields

import jsonschema

from .ann import ALGORITHMS, SHORT_NAMES, TrainConfig
from .dataio import SplitSpec
from .volatility import GarchSpec

__all__ = ["CONFIG_SCHEMA", "PipelineConfig", "ConfigError", "load_config", "default_config"]

_TRAINER_KEYS = [f.name for f in fields(TrainConfig) if f.name != "algorithm"]
_ALGO_NAMES = sorted(set(ALGORITHMS) | set(SHORT_NAMES.values()) | {"CGB", "CGF", "CGP"})

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fxforecast pipeline configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "data": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv": {"type": "string"},
                "date_column": {"type": ["string", "null"]},
                "synthetic": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "generator": {"enum": ["fx_regime", "narx"]},
                        "n": {"type": "integer", "minimum": 10},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                    "required": ["generator"],
                },
            },
            "oneOf": [{"required": ["csv"]}, {"required": ["synthetic"]}],
        },
        "target": {"type": "string"},
        "exogenous": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "split": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
                           for k in ("train", "validation", "test")},
            "required": ["train", "validation", "test"],
        },
        "scaling": {"enum": ["full", "train"]},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "families": {"type": "array", "items": {"enum": ["MLFFNN", "NARX"]}, "minItems": 1, "uniqueItems": True},
                "neurons": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1, "uniqueItems": True},
                "algorithms": {"type": "array", "items": {"enum": _ALGO_NAMES}, "minItems": 1, "uniqueItems": True},
            },
        },
        "narx": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "input_delay": {"type": "integer", "minimum": 0},
                "output_delay": {"type": "integer", "minimum": 0},
                "feedback_mode": {"enum": ["exogenous_only", "output_feedback"]},
                "strict_lag": {"type": "boolean"},
            },
        },
        "trainer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number"} for k in _TRAINER_KEYS},
        },
        "garch": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "family": {"enum": ["GARCH", "EGARCH"]},
                    "p": {"type": "integer", "minimum": 0},
                    "q": {"type": "integer", "minimum": 1},
                    "regressors": {"type": "array", "items": {"type": "string"}},
                    "intercept": {"type": "boolean"},
                    "difference": {"type": "array", "items": {"type": "string"}},
                    "literal_leverage": {"type": "boolean"},
                },
                "required": ["family"],
            },
        },
        "stattests": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "adf_spec": {"enum": ["n", "c", "ct"]},
                "adf_lag_selection": {"enum": ["aic", "bic", "fixed"]},
                "pp_spec": {"enum": ["n", "c", "ct"]},
                "archlm_lags": {"type": "integer", "minimum": 1},
                "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "garch_restarts": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "n_jobs": {"type": "integer", "minimum": 1},
    },
}


class ConfigError(ValueError):
    pass


def default_config() -> dict:
    """Defaults mirroring the reference experiment on the synthetic FX data."""
    return {
        "data": {"synthetic": {"generator": "fx_regime", "n": 1783, "seed": 0}},
        "target": "FX1",
        "exogenous": ["FX4", "NIFTYR", "DJIAR", "HSR", "DR", "COP", "CV", "IV"],
        "split": {"train": 0.70, "validation": 0.15, "test": 0.15},
        "scaling": "full",
        "grid": {
            "families": ["MLFFNN", "NARX"],
            "neurons": [10, 20, 30, 40],
            "algorithms": ["LM", "SCG", "CG_PB", "CG_FR", "CG_PR"],
        },
        "narx": {"input_delay": 2, "output_delay": 2, "feedback_mode": "output_feedback", "strict_lag": False},
        # a single validation blip stops the CG trainers far too early on this data,
        # so the grid default is more patient than the trainer default
        "trainer": {"max_epochs": 1000, "validation_patience": 50},
        "garch": [
            {"family": "GARCH", "p": 1, "q": 1},
            {"family": "GARCH", "p": 2, "q": 2},
            {"family": "EGARCH", "p": 1, "q": 1},
            {"family": "EGARCH", "p": 2, "q": 2},
        ],
        "stattests": {"adf_spec": "c", "adf_lag_selection": "aic", "pp_spec": "c", "archlm_lags": 5, "level": 0.05},
        "garch_restarts": 5,
        "seed": 0,
        "n_jobs": 1,
    }


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "data":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class PipelineConfig:
    """Validated configuration; ``raw`` keeps the merged JSON document."""

    raw: dict = field(default_factory=default_config)

    @classmethod
    def from_dict(cls, d: dict | None = None) -> "PipelineConfig":
        d = d or {}
        try:
            jsonschema.validate(d, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {path}: {exc.message}") from None
        merged = _merge(default_config(), d)
        cfg = cls(merged)
        _ = cfg.split  # fractions must sum to one
        for name in merged["grid"]["algorithms"]:
            TrainConfig(name)
        return cfg

    def with_seed(self, seed: int) -> "PipelineConfig":
        return PipelineConfig(_merge(self.raw, {"seed": int(seed)}))

    @property
    def target(self) -> str:
        return self.raw["target"]

    @property
    def exogenous(self) -> tuple[str, ...]:
        return tuple(self.raw["exogenous"])

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def split(self) -> SplitSpec:
        s = self.raw["split"]
        try:
            return SplitSpec(s["train"], s["validation"], s["test"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def neurons(self) -> tuple[int, ...]:
        return tuple(self.raw["grid"]["neurons"])

    @property
    def algorithms(self) -> tuple[str, ...]:
        return tuple(self.raw["grid"]["algorithms"])

    @property
    def families(self) -> tuple[str, ...]:
        return tuple(self.raw["grid"]["families"])

    def train_config(self, algorithm: str = "LM") -> TrainConfig:
        consts = dict(self.raw["trainer"])
        for k in ("max_epochs", "validation_patience", "ls_max_halvings", "ls_refinements"):
            if k in consts:
                consts[k] = int(consts[k])
        return TrainConfig(algorithm, **consts)

    def garch_specs(self) -> list[GarchSpec]:
        out = []
        for g in self.raw["garch"]:
            g = dict(g)
            g.setdefault("regressors", list(self.exogenous))
            out.append(GarchSpec(target=self.target, **g))
        return out

    def to_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, indent=2)


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig.from_dict({})
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return PipelineConfig.from_dict(d)
