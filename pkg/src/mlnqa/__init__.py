"""Weighted first-order logic inference and question answering toolkit."""

from .logic import (
    Atom,
    Constant,
    Evidence,
    GroundClause,
    Literal,
    MlnProgram,
    PredicateDecl,
    Variable,
    WeightedFormula,
    normalize_negative_weights,
    to_cnf,
    weight_from_probability,
)

__all__ = [
    "Atom",
    "Constant",
    "Evidence",
    "GroundClause",
    "Literal",
    "MlnProgram",
    "PredicateDecl",
    "Variable",
    "WeightedFormula",
    "normalize_negative_weights",
    "to_cnf",
    "weight_from_probability",
]

__version__ = "0.1.0"
