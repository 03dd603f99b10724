"""JSON schemas for run configurations and shared parsing helpers."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .phases import PhaseMatrix, validate_lambda
from .rewrite import Letter, StarPolynomial
from .words import MultiWord

COMPLEX_ENTRY = {
    "oneOf": [
        {"type": "number"},
        {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 2,
            "maxItems": 2,
        },
    ]
}

MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": COMPLEX_ENTRY},
}

LAMBDA_ENTRY = {
    "type": "object",
    "required": ["i", "j", "s", "t", "turns"],
    "properties": {
        "i": {"type": "integer", "minimum": 1},
        "j": {"type": "integer", "minimum": 1},
        "s": {"type": "integer", "minimum": 1},
        "t": {"type": "integer", "minimum": 1},
        "turns": {"type": "string", "pattern": r"^-?\d+(/\d+)?$"},
    },
    "additionalProperties": False,
}

MODEL = {
    "type": "object",
    "required": ["k", "n"],
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "n": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "D": {"type": "integer", "minimum": 0},
        "lambda": {"type": "array", "items": LAMBDA_ENTRY},
    },
    "additionalProperties": False,
}

TUPLE_MATRICES = {
    "type": "object",
    "required": ["matrices"],
    "properties": {
        "matrices": {
            "type": "object",
            "patternProperties": {r"^\d+$": {"type": "array", "items": MATRIX}},
            "additionalProperties": False,
        }
    },
    "additionalProperties": False,
}

SPEC_PIECE = {
    "type": "object",
    "required": ["A"],
    "properties": {
        "A": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "wandering_dim": {"type": "integer", "minimum": 1},
        "unitaries": {
            "type": "object",
            "patternProperties": {r"^\d+$": MATRIX},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

TUPLE_SPEC = {
    "type": "object",
    "required": ["pieces"],
    "properties": {"pieces": {"type": "array", "minItems": 1, "items": SPEC_PIECE}},
    "additionalProperties": False,
}

POLYNOMIAL_TERM = {
    "type": "object",
    "required": ["alpha", "beta"],
    "properties": {
        "alpha": {"type": "string"},
        "beta": {"type": "string"},
        "coeff": COMPLEX_ENTRY,
    },
    "additionalProperties": False,
}

POLYNOMIAL = {"type": "array", "minItems": 1, "items": POLYNOMIAL_TERM}

WORD_LETTER = {
    "type": "object",
    "required": ["i", "s"],
    "properties": {
        "i": {"type": "integer", "minimum": 1},
        "s": {"type": "integer", "minimum": 1},
        "star": {"type": "boolean"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMAS = {
    "check": {
        "type": "object",
        "required": ["model", "tuple"],
        "properties": {
            "model": MODEL,
            "tuple": TUPLE_MATRICES,
            "tolerance": {"type": "number"},
        },
        "additionalProperties": False,
    },
    "rewrite": {
        "type": "object",
        "required": ["model", "word"],
        "properties": {
            "model": MODEL,
            "word": {"type": "array", "items": WORD_LETTER},
        },
        "additionalProperties": False,
    },
    "vn": {
        "type": "object",
        "required": ["model", "tuple", "polynomial"],
        "properties": {
            "model": MODEL,
            "tuple": TUPLE_MATRICES,
            "polynomial": POLYNOMIAL,
            "D_prime": {"type": "integer", "minimum": 0},
            "tolerance": {"type": "number"},
        },
        "additionalProperties": False,
    },
    "berezin": {
        "type": "object",
        "required": ["model", "tuple"],
        "properties": {
            "model": MODEL,
            "tuple": TUPLE_MATRICES,
            "polynomial": POLYNOMIAL,
            "tolerance": {"type": "number"},
        },
        "additionalProperties": False,
    },
    "dilate": {
        "type": "object",
        "required": ["model", "tuple"],
        "properties": {
            "model": MODEL,
            "tuple": TUPLE_MATRICES,
            "moment_range": {"type": "integer", "minimum": 0},
            "tolerance": {"type": "number"},
        },
        "additionalProperties": False,
    },
    "wold": {
        "type": "object",
        "required": ["model", "spec"],
        "properties": {
            "model": MODEL,
            "spec": TUPLE_SPEC,
            "tolerance": {"type": "number"},
        },
        "additionalProperties": False,
    },
    "beurling": {
        "type": "object",
        "required": ["model", "mode"],
        "properties": {
            "model": MODEL,
            "mode": {"enum": ["span", "conditions", "factorize", "compress"]},
            "aux_dim": {"type": "integer", "minimum": 1},
            "vectors": {"type": "array", "minItems": 1, "items": {
                "type": "array", "items": COMPLEX_ENTRY}},
            "operator": MATRIX,
            "buffer": {"type": "integer", "minimum": 2},
            "tolerance": {"type": "number"},
        },
        "additionalProperties": False,
    },
    "suite": {
        "type": "object",
        "required": ["model", "seed"],
        "properties": {
            "model": MODEL,
            "seed": {"type": "integer", "minimum": 0},
            "sizes": {
                "type": "object",
                "properties": {
                    "words": {"type": "integer", "minimum": 1},
                    "polynomials": {"type": "integer", "minimum": 1},
                    "tuples": {"type": "integer", "minimum": 1},
                    "specs": {"type": "integer", "minimum": 1},
                    "subspaces": {"type": "integer", "minimum": 1},
                    "degree": {"type": "integer", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
}


def parse_entry(e) -> complex:
    if isinstance(e, (int, float)):
        return complex(e)
    return complex(e[0], e[1])


def parse_matrix(rows) -> np.ndarray:
    return np.array([[parse_entry(e) for e in row] for row in rows], dtype=complex)


def parse_model(payload: dict) -> tuple[PhaseMatrix, int]:
    k = payload["k"]
    n = tuple(payload["n"])
    raw = [
        (e["i"], e["j"], e["s"], e["t"], Fraction(e["turns"]))
        for e in payload.get("lambda", [])
    ]
    lam = validate_lambda(k, n, raw)
    return lam, payload.get("D", 4)


def parse_tuple(lam: PhaseMatrix, payload: dict):
    from .polyball import RowTuple

    mats = []
    for i in range(1, lam.k + 1):
        row = payload["matrices"].get(str(i))
        if row is None:
            raise ValueError(f"missing matrices for block {i}")
        mats.append(tuple(parse_matrix(m) for m in row))
    return RowTuple(lam, tuple(mats))


def parse_polynomial(lam: PhaseMatrix, payload) -> StarPolynomial:
    p = StarPolynomial.zero(lam.k)
    for term in payload:
        a = MultiWord.from_text(term["alpha"])
        b = MultiWord.from_text(term["beta"])
        c = parse_entry(term.get("coeff", 1.0))
        p.add_term(a, b, lam.identity(), c)
    return p


def parse_word(payload) -> list[Letter]:
    return [Letter(bool(e.get("star", False)), e["i"], e["s"]) for e in payload]
