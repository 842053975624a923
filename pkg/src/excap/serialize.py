"""JSON and CSV output with fixed float formatting, plus report schemas."""

import csv
import io
import json
import math
import os
import tempfile

import numpy as np
from jsonschema import Draft202012Validator

__all__ = ["dumps", "write_json", "write_csv", "csv_text", "SCHEMAS", "validate_report"]

FLOAT_FORMAT = ".17g"


def _float(x):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, FLOAT_FORMAT)
    # keep floats recognisable as floats after a round trip
    return text if any(c in text for c in ".e") else text + ".0"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with every float written to 17 significant digits.

    Non-finite floats use the ``Infinity``/``NaN`` tokens accepted by
    ``json.loads``.
    """
    return _encode(obj, indent, 0) + "\n"


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".excap-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    _atomic_write(path, dumps(obj))


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    _atomic_write(path, csv_text(header, rows))


_number = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_pair_list = {"type": "array", "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}}

_measure = {
    "type": "object",
    "required": ["u", "w"],
    "properties": {"u": {"type": "array", "items": _number}, "w": {"type": "array", "items": _number}},
    "additionalProperties": False,
}

CAPACITY_RESULT = {
    "type": "object",
    "required": ["energy", "capacity", "converged", "zero_energy", "iterations", "n", "tol",
                 "residual_min", "residual_support", "atoms", "diffuse_mass", "measure", "potential"],
    "properties": {
        "energy": _number,
        "capacity": _number,
        "converged": {"type": "boolean"},
        "zero_energy": {"type": "boolean"},
        "iterations": {"type": "integer", "minimum": 0},
        "n": {"type": "integer", "minimum": 2},
        "tol": _number,
        "residual_min": _number,
        "residual_support": _number,
        "atoms": _pair_list,
        "diffuse_mass": _number,
        "measure": _measure,
        "potential": {"type": "array", "items": _number},
    },
    "additionalProperties": False,
}

_envelope_props = {
    "command": {"type": "string"},
    "config": {"type": "object"},
}


def _envelope(command, result_schema):
    return {
        "type": "object",
        "required": ["command", "config", "result"],
        "properties": {**_envelope_props, "command": {"const": command}, "result": result_schema},
        "additionalProperties": False,
    }


_open = {"type": "object"}

SCHEMAS = {
    "capacity": _envelope("capacity", CAPACITY_RESULT),
    "shape": _envelope("shape", {
        "type": "object",
        "required": ["capacity", "level_violation", "capacity_report"],
        "properties": {"capacity": _number, "level_violation": _number,
                       "capacity_report": CAPACITY_RESULT},
        "additionalProperties": False,
    }),
    "phase": _envelope("phase", {
        "type": "object",
        "properties": {
            "critical_length": _number,
            "which": {"enum": ["a1", "a2"]},
            "bracket": {"type": "array", "items": _number},
            "regime": {"type": "object", "required": ["regime", "capacity", "params"],
                       "properties": {"regime": {"enum": ["TwoAtom", "ThreeAtom", "FourAtom",
                                                          "Diffuse", "Unknown"]},
                                      "capacity": _number, "params": _open}},
        },
    }),
    "asymptotics": _envelope("asymptotics", {
        "type": "object",
        "required": ["kind", "predicted_limit", "observed", "bounds"],
        "properties": {"kind": {"enum": ["ShortMemory", "LongMemory"]},
                       "predicted_limit": _number, "observed": _pair_list,
                       "bounds": {"type": ["array", "null"], "items": _number}},
        "additionalProperties": False,
    }),
    "sheet": _envelope("sheet", {
        "type": "object",
        "required": ["dim", "predicted_capacity", "staircase", "straight"],
        "properties": {"dim": {"type": "integer"}, "predicted_capacity": _number,
                       "staircase": _open, "straight": _open},
    }),
    "search": _envelope("search", {
        "type": "object",
        "required": ["path", "straight_energy", "capacity_report"],
        "properties": {"path": _open, "straight_energy": _number,
                       "capacity_report": CAPACITY_RESULT},
    }),
    "mc": _envelope("mc", {
        "type": "object",
        "required": ["estimates", "two_point", "capacity"],
        "properties": {"estimates": {"type": "array", "items": _open},
                       "two_point": {"type": "array", "items": _open},
                       "capacity": _num_or_null},
    }),
    "riesz": _envelope("riesz", {
        "type": "object",
        "required": ["beta", "energy", "limit", "bounds", "uniform_energy"],
        "properties": {"beta": _number, "energy": _number, "limit": _number,
                       "bounds": {"type": "array", "items": _number},
                       "uniform_energy": _number, "capacity_report": CAPACITY_RESULT},
    }),
}


def validate_report(data):
    """Validate a parsed CLI report against its command's schema."""
    command = data.get("command") if isinstance(data, dict) else None
    if command not in SCHEMAS:
        raise ValueError(f"unknown report command {command!r}")
    Draft202012Validator(SCHEMAS[command]).validate(data)
    return data
