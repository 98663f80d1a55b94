"""JSON schemas for every input format, with JSON-pointer error reporting."""

from __future__ import annotations

from typing import Mapping

import jsonschema
from jsonschema.exceptions import best_match

_name = {"type": "string", "pattern": "^[A-Za-z_][A-Za-z_0-9]*$"}
_int = {"type": "integer"}

_conj_letter = {
    "type": "object",
    "required": ["base"],
    "properties": {"base": _name, "conjugator": {"type": "array"}, "exp": _int},
}

LETTER = {
    "type": "object",
    "required": ["base", "exp"],
    "properties": {
        "base": _name,
        "conjugator": {"type": "array", "items": _conj_letter},
        "exp": {"type": "integer", "not": {"const": 0}},
    },
    "additionalProperties": False,
}

WORD = {"type": "array", "items": LETTER}

SURFACE = {
    "type": "object",
    "required": ["genus"],
    "properties": {
        "genus": {"type": "integer", "minimum": 1},
        "boundary": {"enum": [0, 2]},
        "curves": {"oneOf": [{"enum": ["standard", "lanterns"]}, {"type": "object"}]},
    },
}

MOVE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["hurwitz_left", "hurwitz_right", "cyclic", "global_conjugate", "insert_cancelling_pair",
                          "cancel_pair", "expand_conjugation", "collapse_conjugation", "relation_substitution"]},
        "site": {"type": "integer", "minimum": 0},
        "relation": {"type": "string"},
        "direction": {"enum": ["forward", "backward"]},
        "scope": {"enum": ["word", "conjugator"]},
        "position": {"type": "integer", "minimum": 0},
        "shuffle": {"type": "boolean"},
        "rule": {"enum": ["disjoint", "braid"]},
        "base": _name,
        "exp": _int,
        "shift": _int,
        "by": {"type": "array", "items": _conj_letter},
        "curve": _conj_letter,
    },
    "additionalProperties": False,
}

SCRIPT = {
    "type": "object",
    "required": ["surface", "source", "target", "moves"],
    "properties": {
        "format": {"const": "fiberforge-script/1"},
        "name": {"type": "string"},
        "surface": SURFACE,
        "relation_target": {"enum": ["identity", "boundary_multitwist"]},
        "source": WORD,
        "target": WORD,
        "moves": {"type": "array", "items": MOVE},
        "checkpoints": {
            "type": "array",
            "items": {"type": "object", "required": ["after", "word"],
                      "properties": {"after": {"type": "integer", "minimum": 0}, "word": WORD}},
        },
    },
}

FIBRATION = {
    "type": "object",
    "required": ["genus", "word"],
    "properties": {
        "genus": {"type": "integer", "minimum": 1},
        "word": {"oneOf": [WORD, {"type": "string", "minLength": 1}]},
        "curves": {"enum": ["standard", "lanterns"]},
        "hyperelliptic": {"type": "boolean"},
        "separating_types": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "sigma": _int,
        "annotations": {
            "type": "object",
            "properties": {"spin": {"type": ["boolean", "null"]}, "sections": {"type": ["integer", "null"]},
                           "citation": {"type": "string"}},
        },
    },
}

PLUMBING = {
    "type": "object",
    "required": ["weights"],
    "properties": {
        "format": {"const": "fiberforge-plumbing/1"},
        "names": {"type": "array", "items": _name},
        "weights": {"type": "array", "items": _int, "minItems": 1},
        "edges": {"type": "array", "items": {"type": "array", "items": _int, "minItems": 2, "maxItems": 2}},
    },
}

BASIS = {
    "oneOf": [
        {"type": "object", "required": ["negative"],
         "properties": {"positive": {"const": 1}, "negative": {"type": "integer", "minimum": 0},
                        "skip": {"type": "array", "items": _int}}},
        {"type": "object", "required": ["kind"], "properties": {"kind": {"const": "hyperbolic"}}},
        {"type": "object", "required": ["labels", "gram"],
         "properties": {"labels": {"type": "array", "items": _name},
                        "gram": {"type": "array", "items": {"type": "array", "items": _int}}}},
    ]
}

_class_expr = {"type": "string", "pattern": r"^[-+0-9a-z\s]+$"}

TABLE = {
    "type": "object",
    "required": ["basis", "classes"],
    "properties": {
        "format": {"const": "fiberforge-table/1"},
        "basis": BASIS,
        "classes": {"type": "object", "additionalProperties": _class_expr},
    },
}

TRANSCRIPT = {
    "type": "object",
    "required": ["basis", "classes", "steps"],
    "properties": {
        "basis": BASIS,
        "classes": {
            "type": "object",
            "additionalProperties": {"oneOf": [
                _class_expr,
                {"type": "object", "required": ["class"],
                 "properties": {"class": _class_expr, "genus": _int}},
            ]},
        },
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["op"],
                "properties": {"op": {"enum": ["blowup", "blowdown", "basis_change", "rename", "drop"]}},
                "allOf": [
                    {"if": {"properties": {"op": {"const": "blowup"}}},
                     "then": {"required": ["center"],
                              "properties": {"center": {"type": "array", "items": {
                                  "type": "array", "prefixItems": [_name, _int], "minItems": 2, "maxItems": 2}}}}},
                    {"if": {"properties": {"op": {"const": "blowdown"}}}, "then": {"required": ["name"]}},
                    {"if": {"properties": {"op": {"const": "basis_change"}}},
                     "then": {"required": ["basis", "images"]}},
                    {"if": {"properties": {"op": {"const": "rename"}}}, "then": {"required": ["names"]}},
                ],
            },
        },
    },
}

EXOTIC = {
    "type": "object",
    "required": ["table", "transcript", "plumbing", "z_classes", "wall", "p_square"],
    "properties": {
        "format": {"const": "fiberforge-exotic/1"},
        "table": {"type": "string"},
        "transcript": {"type": "string"},
        "plumbing": {"type": "string"},
        "z_classes": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "object", "required": ["name", "class", "genus"],
                      "properties": {"name": _name, "class": _class_expr,
                                     "genus": {"type": "integer", "minimum": 0}}},
        },
        "wall": {"type": "object", "required": ["H"],
                 "properties": {"H": {"type": "object", "additionalProperties": _int},
                                "reference": _class_expr}},
        "p_square": _int,
        "filter": {"type": "object", "properties": {"min_square": _int, "modulus": {"type": "integer", "minimum": 1},
                                                     "residue": _int},
                   "additionalProperties": False},
        "box": {"type": "object", "properties": {"policy": {"enum": ["literal", "adjunction", "explicit"]},
                                                  "bounds": {"type": "array", "items": {"type": "integer",
                                                                                         "minimum": 0}},
                                                  "label": _name}},
        "published": {"type": "object", "additionalProperties": _int},
    },
}

SCHEMAS = {
    "script": SCRIPT,
    "fibration": FIBRATION,
    "plumbing": PLUMBING,
    "table": TABLE,
    "transcript": TRANSCRIPT,
    "exotic": EXOTIC,
}


class SchemaError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate(doc, kind: str) -> None:
    schema = SCHEMAS[kind]
    validator = jsonschema.Draft202012Validator(schema)
    err = best_match(validator.iter_errors(doc))
    if err is None:
        return
    while err.context:
        err = max(err.context, key=lambda e: len(e.absolute_path))
    raise SchemaError(pointer(err.absolute_path), err.message)


def detect_kind(doc: Mapping) -> str | None:
    fmt = doc.get("format", "") if isinstance(doc, Mapping) else ""
    for kind, tag in (("script", "fiberforge-script"), ("plumbing", "fiberforge-plumbing"),
                      ("table", "fiberforge-table"), ("exotic", "fiberforge-exotic")):
        if fmt.startswith(tag):
            return kind
    if isinstance(doc, Mapping) and "steps" in doc:
        return "transcript"
    if isinstance(doc, Mapping) and "genus" in doc and "word" in doc:
        return "fibration"
    return None
