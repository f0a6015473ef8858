"""Python front end for the slasim packet-level simulator.

Scenarios may be given as a dict, a JSON string or a path to a JSON file.
"""

from __future__ import annotations

import csv
import io
import json
import os
from typing import Any, Iterable, Mapping, Union

from . import _slasim
from ._slasim import ValidationError, recipe_names

__all__ = ["ValidationError", "recipe", "recipe_names", "validate", "run", "batch", "records"]

Scenario = Union[str, os.PathLike, Mapping[str, Any]]


def _text(scenario: Scenario) -> str:
    if isinstance(scenario, Mapping):
        return json.dumps(scenario)
    if isinstance(scenario, os.PathLike) or (isinstance(scenario, str) and not scenario.lstrip().startswith("{")):
        with open(scenario, encoding="utf-8") as fh:
            return fh.read()
    return scenario


def recipe(name: str) -> dict:
    return json.loads(_slasim.recipe(name))


def validate(scenario: Scenario) -> list[str]:
    return _slasim.validate(_text(scenario))


def run(scenario: Scenario, seed: int, enhance: bool | None = None) -> dict:
    return _slasim.run(_text(scenario), seed, enhance)


def batch(scenario: Scenario, seeds: Union[str, Iterable[int]], parallel: int = 1, compare: bool = False) -> dict:
    seed_list = _slasim.parse_seed_list(seeds) if isinstance(seeds, str) else list(seeds)
    return _slasim.batch(_text(scenario), seed_list, parallel, compare)


def records(result: Mapping[str, Any]) -> list[dict]:
    """Per-flow rows of a run result, as dicts of strings."""
    return list(csv.DictReader(io.StringIO(result["csv"])))
