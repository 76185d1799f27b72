"""Measure-spec JSON, moment-table CSV and deterministic, atomic report files."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from .curves import Box
from .errors import InputError
from .measures import Measure, MomentSequence
from .numerics import exponents as graded_exponents

_ATOMS = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {
            "point": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            "weight": {"type": "number", "exclusiveMinimum": 0},
        },
        "required": ["point", "weight"],
        "additionalProperties": False,
    },
}

#: JSON schema of measure and moment-sequence input files
SPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["atomic", "grid_density", "lebesgue_unit", "mixture", "moments"]},
        "atoms": _ATOMS,
        "density": {
            "type": "object",
            "properties": {
                "box": {
                    "type": "object",
                    "properties": {
                        "lo": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                        "hi": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    },
                    "required": ["lo", "hi"],
                    "additionalProperties": False,
                },
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "values": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
            "required": ["box", "shape", "values"],
            "additionalProperties": False,
        },
        "mixture": {
            "type": "object",
            "properties": {"c": {"type": "number", "minimum": 0}, "atoms": _ATOMS},
            "required": ["c"],
            "additionalProperties": False,
        },
        "mass": {"type": "number", "exclusiveMinimum": 0},
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "exponents": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "atomic"}}}, "then": {"required": ["atoms"]}},
        {"if": {"properties": {"kind": {"const": "grid_density"}}}, "then": {"required": ["density"]}},
        {"if": {"properties": {"kind": {"const": "mixture"}}}, "then": {"required": ["mixture"]}},
        {"if": {"properties": {"kind": {"const": "moments"}}}, "then": {"required": ["values"]}},
    ],
}

_VALIDATOR = jsonschema.Draft202012Validator(SPEC_SCHEMA)


def _path_of(err):
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate_spec(obj):
    """Raise :class:`InputError` listing every schema violation (field path first)."""
    errors = sorted(_VALIDATOR.iter_errors(obj), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        lines = [f"{_path_of(e)}: {e.message}" for e in errors]
        raise InputError("schema violation:\n  " + "\n  ".join(lines))
    return obj


def load_json(path):
    """Parse a UTF-8 JSON file; syntax errors report line and column."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not UTF-8: {exc.reason}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _atoms(items):
    if not items:
        return np.zeros((0, 1)), np.zeros(0)
    dims = {len(a["point"]) for a in items}
    if len(dims) != 1:
        raise InputError("atoms: all points must have the same dimension")
    pts = np.array([a["point"] for a in items], dtype=float)
    w = np.array([a["weight"] for a in items], dtype=float)
    return pts, w


def measure_from_spec(obj):
    """Build a :class:`Measure` from a validated spec object."""
    validate_spec(obj)
    kind = obj["kind"]
    if kind == "atomic":
        pts, w = _atoms(obj["atoms"])
        if w.size == 0:
            raise InputError("atoms: an atomic measure needs at least one atom")
        return Measure.atomic(pts, w)
    if kind == "grid_density":
        d = obj["density"]
        lo, hi, shape = d["box"]["lo"], d["box"]["hi"], tuple(d["shape"])
        if not len(lo) == len(hi) == len(shape):
            raise InputError("density: box/lo, box/hi and shape must have the same length")
        if len(d["values"]) != int(np.prod(shape)):
            raise InputError(f"density/values: expected {int(np.prod(shape))} values for shape {list(shape)}, "
                             f"got {len(d['values'])}")
        return Measure.grid_density(Box(tuple(lo), tuple(hi)), np.array(d["values"], dtype=float).reshape(shape))
    if kind == "lebesgue_unit":
        return Measure.lebesgue_unit(obj.get("mass", 1.0))
    if kind == "mixture":
        m = obj["mixture"]
        pts, w = _atoms(m.get("atoms", []))
        return Measure.mixture(m["c"], pts.reshape(-1, 1) if pts.size else np.zeros((0, 1)), w)
    raise InputError("expected a measure spec, got a moment sequence")


def measure_to_spec(mu):
    """Inverse of :func:`measure_from_spec` for the four measure kinds."""
    atoms = [{"point": p.tolist(), "weight": float(w)} for p, w in zip(mu.points, mu.weights)]
    if mu.density is not None:
        if mu.n_atoms or mu.lebesgue:
            raise InputError("density plus other parts has no spec representation")
        dens = mu.density
        return {"kind": "grid_density", "density": {
            "box": {"lo": [float(v) for v in dens.box.lo], "hi": [float(v) for v in dens.box.hi]},
            "shape": list(dens.shape), "values": dens.values.reshape(-1).tolist()}}
    if mu.lebesgue > 0:
        if not mu.n_atoms:
            return {"kind": "lebesgue_unit", "mass": float(mu.lebesgue)}
        return {"kind": "mixture", "mixture": {"c": float(mu.lebesgue), "atoms": atoms}}
    return {"kind": "atomic", "atoms": atoms}


def moments_from_spec(obj):
    validate_spec(obj)
    if obj["kind"] != "moments":
        raise InputError("expected a moment sequence spec")
    vals = np.array(obj["values"], dtype=float)
    if "exponents" in obj:
        return MomentSequence(vals, np.array(obj["exponents"], dtype=np.int64))
    return MomentSequence.univariate(vals)


# --------------------------------------------------------------------------
# CSV moment tables
# --------------------------------------------------------------------------

def moment_csv(ms):
    """CSV text: ``degree,value`` for one variable, ``alpha,value`` otherwise."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if ms.n == 1:
        w.writerow(["degree", "value"])
        for e, v in zip(ms.exponents[:, 0], ms.values):
            w.writerow([int(e), repr(float(v))])
    else:
        w.writerow(["alpha", "value"])
        for e, v in zip(ms.exponents, ms.values):
            w.writerow([" ".join(str(int(a)) for a in e), repr(float(v))])
    return buf.getvalue()


def read_moment_csv(path):
    """Parse a moment table; malformed rows report their line number."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] not in (["degree", "value"], ["alpha", "value"]):
        raise InputError(f"{path}:1: header must be 'degree,value' or 'alpha,value'")
    multi = rows[0][0].strip() == "alpha"
    exps, vals = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        try:
            e = [int(a) for a in row[0].split()] if multi else [int(row[0])]
            v = float(row[1])
        except ValueError:
            raise InputError(f"{path}:{lineno}: cannot parse {row!r}") from None
        if any(a < 0 for a in e) or not np.isfinite(v):
            raise InputError(f"{path}:{lineno}: negative exponent or non-finite value")
        exps.append(e)
        vals.append(v)
    if not vals:
        raise InputError(f"{path}: empty moment table")
    if len({len(e) for e in exps}) != 1:
        raise InputError(f"{path}: multi-indices of different lengths")
    exps = np.array(exps, dtype=np.int64)
    if not multi and not np.array_equal(exps[:, 0], np.arange(len(vals))):
        raise InputError(f"{path}: degrees must run 0, 1, 2, ... without gaps")
    return MomentSequence(np.array(vals), exps)


def full_table(ms):
    """True when ``ms`` lists every monomial up to its degree in graded order."""
    ref = graded_exponents(ms.n, ms.degree)
    return ref.shape == ms.exponents.shape and np.array_equal(ref, ms.exponents)


def load_input(path):
    """A :class:`Measure` or :class:`MomentSequence` from a JSON or CSV file."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return read_moment_csv(p)
    obj = load_json(p)
    validate_spec(obj)
    if obj["kind"] == "moments":
        return moments_from_spec(obj)
    return measure_from_spec(obj)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def _plain(obj):
    """Recursively convert numpy scalars and arrays to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    return obj


def dumps_report(obj):
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
