"""Parameter documents for the worked examples shipped with the package."""
from __future__ import annotations

import json
from importlib import resources

from ..params import SpectralParams, params_from_dict


def names() -> list[str]:
    return sorted(f.name[:-5] for f in resources.files(__name__).iterdir() if f.name.endswith(".json"))


def document(name: str) -> dict:
    path = resources.files(__name__) / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no fixture named {name!r}; available: {', '.join(names())}")
    return json.loads(path.read_text(encoding="utf-8"))


def load(name: str) -> SpectralParams:
    return params_from_dict(document(name))


def expected_type(name: str) -> str:
    return document(name)["expected_type"]
