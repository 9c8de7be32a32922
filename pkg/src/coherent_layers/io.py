"""Response CSV files and scenario JSON documents."""

import csv
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .ensemble import SCALE_MAX, LayerGroup, ResponseMatrix, ScenarioConfig, SpaceSpec
from .errors import ParseError, ValidationError
from .model import J_MAX, LayerParams

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["spaces", "seed"],
    "additionalProperties": False,
    "properties": {
        "spaces": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "layers"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1, "pattern": r"^[A-Za-z0-9_.-]+$"},
                    "layers": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["J", "m", "beta", "count"],
                            "additionalProperties": False,
                            "properties": {
                                "J": {"type": "number", "multipleOf": 0.5,
                                      "minimum": 0.5, "maximum": J_MAX},
                                "m": {"type": "number", "exclusiveMinimum": 0},
                                "beta": {"type": "number", "exclusiveMinimum": 0},
                                "g": {"type": "number", "exclusiveMinimum": 0},
                                "count": {"type": "integer", "minimum": 1},
                                "sign": {"enum": [-1, 1]},
                            },
                        },
                    },
                },
            },
        },
        "stimulus_count": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output_mode": {"enum": ["raw", "questionnaire"]},
    },
}


def _json_path(error):
    path = "$"
    for part in error.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def scenario_from_dict(doc):
    """Validate a scenario document and build a :class:`ScenarioConfig`."""
    validator = jsonschema.Draft7Validator(SCENARIO_SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise ValidationError(error.message, _json_path(error))
    spaces = []
    for space in doc["spaces"]:
        groups = tuple(
            LayerGroup(
                LayerParams(layer["J"], layer["m"], layer["beta"], layer.get("g", 2.0)),
                layer["count"],
                layer.get("sign", 1),
            )
            for layer in space["layers"]
        )
        spaces.append(SpaceSpec(space["name"], groups))
    return ScenarioConfig(
        spaces=tuple(spaces),
        seed=doc["seed"],
        stimulus_count=doc.get("stimulus_count", 12),
        output_mode=doc.get("output_mode", "raw"),
    )


def scenario_to_dict(config):
    """Canonical document for a config, with every default made explicit."""
    return {
        "spaces": [
            {
                "name": s.name,
                "layers": [
                    {"J": g.params.J, "m": g.params.m, "beta": g.params.beta,
                     "g": g.params.g, "count": g.count, "sign": g.sign}
                    for g in s.groups
                ],
            }
            for s in config.spaces
        ],
        "stimulus_count": config.stimulus_count,
        "seed": config.seed,
        "output_mode": config.output_mode,
    }


def parse_scenario(path):
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON: {e.msg} (line {e.lineno})") from None
    return scenario_from_dict(doc)


def packaged_scenario(name="reference"):
    """Load a scenario shipped with the package (``reference`` by default)."""
    text = resources.files("coherent_layers.scenarios").joinpath(f"{name}.json").read_text()
    return scenario_from_dict(json.loads(text))


def _participant_id(text):
    try:
        return int(text)
    except ValueError:
        return text


def parse_responses(path, space=None, mode="questionnaire"):
    """Read a ``participant,B1,...,BK`` response file.

    In questionnaire mode every cell must be an integer in 0..8; raw mode
    accepts any finite real.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ParseError("empty file", row=1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "participant":
        raise ParseError("header must start with 'participant'", row=1, column=1)
    for k, h in enumerate(header[1:], start=1):
        if h != f"B{k}":
            raise ParseError(f"expected header 'B{k}', found {h!r}", row=1, column=k + 1)
    ids, values = [], []
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, found {len(row)}", row=r)
        ids.append(_participant_id(row[0].strip()))
        cells = []
        for c, cell in enumerate(row[1:], start=2):
            cells.append(_parse_cell(cell.strip(), mode, r, c))
        values.append(cells)
    if not values:
        raise ParseError("no participant rows", row=2)
    dtype = np.int64 if mode == "questionnaire" else float
    return ResponseMatrix(space or path.stem, ids, np.array(values, dtype=dtype), mode)


def _parse_cell(text, mode, row, column):
    if mode == "questionnaire":
        try:
            v = int(text)
        except ValueError:
            raise ParseError(f"not an integer: {text!r}", row, column) from None
        if not 0 <= v <= SCALE_MAX:
            raise ParseError(f"value {v} outside 0..{SCALE_MAX}", row, column)
        return v
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", row, column) from None
    if not np.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", row, column)
    return v


def write_responses(matrix, path):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["participant"] + [f"B{k}" for k in matrix.stimuli])
        for pid, row in zip(matrix.participant_ids, matrix.values):
            if matrix.mode == "questionnaire":
                cells = [str(int(v)) for v in row]
            else:
                cells = [repr(float(v)) for v in row]
            w.writerow([pid] + cells)
    return path
