"""JSON and CSV artifacts.

System files describe either a kinetic system or an LLS A-table. Exact
rationals travel as ``"p/q"`` strings; JSON integers are exact too, JSON
floats stay floats. Report files wrap every measured number as
``{"value": ..., "provenance": "exact" | "float" | "simulated"}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

import jsonschema

from .errors import InputError
from .polycore import BiPoly, Coeff, UniPoly, as_coeff, format_coeff, is_exact
from .reduction import KineticSystem, LLSSystem

_NUMBER = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*[-+]?[0-9./eE+-]+\s*$"}]}
_EXP = {"type": "integer", "minimum": 0}

_TERMS = {
    "type": "object",
    "required": ["terms"],
    "properties": {
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["i", "j", "c"],
                "properties": {"i": _EXP, "j": _EXP, "c": _NUMBER},
            },
        }
    },
}

SYSTEM_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["kinetic", "lls", "report"]}, "name": {"type": "string"}},
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "kinetic"}}},
            "then": {
                "required": ["a", "b", "f"],
                "properties": {
                    "a": {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3},
                    "b": {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3},
                    "mu": _NUMBER,
                    "f": _TERMS,
                    "g": _TERMS,
                },
                "oneOf": [{"required": ["mu"]}, {"required": ["g"]}],
            },
        },
        {
            "if": {"properties": {"kind": {"const": "lls"}}},
            "then": {
                "required": ["A"],
                "properties": {
                    "A": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["n", "m", "c"],
                            "properties": {"n": _EXP, "m": _EXP, "c": _NUMBER},
                        },
                    }
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": "report"}}},
            "then": {"required": ["system"]},
        },
    ],
}


@dataclass(frozen=True)
class LoadedSystem:
    kinetic: KineticSystem | None
    lls: LLSSystem | None
    name: str


def _coeff(raw) -> Coeff:
    try:
        return as_coeff(raw)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _bipoly(block, a: str, b: str) -> BiPoly:
    out: dict[tuple[int, int], Coeff] = {}
    for t in block:
        key = (t[a], t[b])
        out[key] = out.get(key, 0) + _coeff(t["c"])
    return BiPoly(out)


def parse_system(doc: Any, source: str = "<input>") -> LoadedSystem:
    """Validate a decoded system document and build the corresponding system."""
    try:
        jsonschema.validate(doc, SYSTEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = exc.json_path if exc.path else "$"
        raise InputError(f"{source}: schema error at {where}: {exc.message}") from None
    if doc["kind"] == "report":
        return parse_system(doc["system"], f"{source}:system")
    name = doc.get("name", "")
    if doc["kind"] == "lls":
        return LoadedSystem(None, LLSSystem(_bipoly(doc["A"], "n", "m"), name=name), name)
    a = tuple(_coeff(v) for v in doc["a"])
    b = tuple(_coeff(v) for v in doc["b"])
    f = _bipoly(doc["f"]["terms"], "i", "j")
    if "g" in doc:
        g = _bipoly(doc["g"]["terms"], "i", "j")
        if "mu" in doc and g != f.scale(_coeff(doc["mu"])):
            raise InputError(f"{source}: 'g' disagrees with mu*f")
        sys = KineticSystem(a, b, f, g, name=name)
    else:
        sys = KineticSystem.with_mu(a, b, f, _coeff(doc["mu"]), name=name)
    return LoadedSystem(sys, None, name)


def load_system(path: str | Path) -> LoadedSystem:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_system(doc, str(path))


# report encoding

def provenance_of(c) -> str:
    return "exact" if is_exact(c) else "float"


def num(c, provenance: str | None = None) -> dict:
    if isinstance(c, complex):
        raise TypeError("use cnum() for complex values")
    value = format_coeff(c)
    if isinstance(value, float) and not math.isfinite(value):
        value = str(value)
    return {"value": value, "provenance": provenance or provenance_of(c)}


def cnum(z: complex) -> dict:
    return {"re": num(float(z.real)), "im": num(float(z.imag))}


def bipoly_terms(p: BiPoly, names: tuple[str, str] = ("n", "m")) -> list[dict]:
    return [{names[0]: i, names[1]: j, "c": format_coeff(c), "provenance": provenance_of(c)}
            for (i, j), c in sorted(p.terms.items())]


def unipoly_coeffs(p: UniPoly) -> list[dict]:
    """Coefficients from the constant term up."""
    return [num(c) for c in p.coeffs]


def lls_document(lls: LLSSystem) -> dict:
    doc = {"kind": "lls", "A": bipoly_terms(lls.rhs)}
    if lls.name:
        doc["name"] = lls.name
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def write_text(text: str, path: str | Path | None, stdout) -> None:
    if path is None or str(path) == "-":
        stdout.write(text)
    else:
        Path(path).write_text(text)


def csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, Fraction)) else v for v in row])
    return buf.getvalue()
