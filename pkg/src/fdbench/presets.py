"""Named parameter sets for the case-study models.

The registry is a JSON document::

    {"version": 1,
     "presets": [{"name": ..., "model": "logistic"|"temperature"|"market",
                  "params": {...}, "source": "paper"|"user",
                  "grid": {"t0": ..., "t1": ..., "h": ...}}]}

The bundled registry can be replaced by pointing ``FDBENCH_PRESETS`` at
another file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Optional

from .models import LogisticModel, MarketModel, TemperatureModel

ENV_VAR = "FDBENCH_PRESETS"

MODEL_CLASSES = {
    "logistic": LogisticModel,
    "temperature": TemperatureModel,
    "market": MarketModel,
}

# case id -> preset used when none is named
DEFAULT_PRESETS = {
    "logistic": "paper-logistic",
    "temperature": "paper-temperature-defaults",
    "market": "paper-market",
}


class PresetError(ValueError):
    pass


@dataclass(frozen=True)
class Preset:
    name: str
    model: str
    params: Mapping[str, float]
    source: str = "user"
    grid: Optional[Mapping[str, float]] = None

    def build(self, overrides: Optional[Mapping[str, float]] = None):
        """Instantiate the model, applying ``overrides`` by parameter name."""
        cls = MODEL_CLASSES[self.model]
        params = dict(self.params)
        for key, value in (overrides or {}).items():
            if key not in params:
                raise PresetError(
                    f"unknown parameter {key!r} for {self.model} model; expected one of {sorted(params)}"
                )
            params[key] = float(value)
        return cls(**params)

    def to_dict(self) -> dict:
        out = {"name": self.name, "model": self.model, "params": dict(self.params), "source": self.source}
        if self.grid is not None:
            out["grid"] = dict(self.grid)
        return out


def _validate(entry: dict) -> Preset:
    try:
        name, model, params = entry["name"], entry["model"], entry["params"]
    except KeyError as exc:
        raise PresetError(f"preset entry lacks {exc.args[0]!r}") from None
    if model not in MODEL_CLASSES:
        raise PresetError(f"preset {name!r}: unknown model {model!r}")
    source = entry.get("source", "user")
    if source not in ("paper", "user"):
        raise PresetError(f"preset {name!r}: source must be 'paper' or 'user'")
    preset = Preset(name, model, {k: float(v) for k, v in params.items()}, source, entry.get("grid"))
    preset.build()  # rejects missing/extra parameter names early
    return preset


def load_registry(path=None) -> dict:
    """Map preset name to :class:`Preset`."""
    path = path or os.environ.get(ENV_VAR)
    if path:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.loads(resources.files("fdbench").joinpath("data/presets.json").read_text("utf-8"))
    entries = doc["presets"] if isinstance(doc, dict) and "presets" in doc else doc
    registry = {}
    for entry in entries:
        try:
            preset = _validate(entry)
        except TypeError as exc:
            raise PresetError(f"preset {entry.get('name')!r}: {exc}") from None
        registry[preset.name] = preset
    return registry


def get_preset(name: str, path=None) -> Preset:
    registry = load_registry(path)
    if name not in registry:
        raise PresetError(f"unknown preset {name!r}; available: {', '.join(sorted(registry))}")
    return registry[name]


def default_model(case: str, overrides: Optional[Mapping[str, float]] = None):
    return get_preset(DEFAULT_PRESETS[case]).build(overrides)
