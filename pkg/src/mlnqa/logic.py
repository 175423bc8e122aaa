"""Immutable representation of typed weighted-logic programs.

A program is a set of sorts (each with a finite constant domain), typed
predicate declarations, weighted or hard formulas, and evidence.  Ground
clauses use signed integer literals over dense atom ids, DIMACS style:
atom id ``a`` appears as ``a + 1`` when positive and ``-(a + 1)`` when
negated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    ExistentialPresent,
    MlnError,
    NegativeNonUnitWeight,
    OutOfRange,
)

# Built-in sorts.  Encoders may not introduce new ones; parsed programs may.
SORT_ENTITY = "entity"
SORT_EVENT = "event"
SORT_STRING = "string_"
SORT_RULE_ID = "rule_id"
SORT_NODE_ID = "node_id"
BUILTIN_SORTS = (SORT_ENTITY, SORT_EVENT, SORT_STRING, SORT_RULE_ID, SORT_NODE_ID)


@dataclass(frozen=True)
class PredicateDecl:
    """A typed predicate.  closed_world means atoms absent from evidence are false."""

    name: str
    arg_sorts: tuple[str, ...]
    closed_world: bool = False

    def __post_init__(self):
        if not self.name:
            raise MlnError("predicate name must be nonempty")

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class Variable:
    name: str
    sort: str


@dataclass(frozen=True)
class Constant:
    name: str
    sort: str


Term = Union[Variable, Constant]


@dataclass(frozen=True)
class Atom:
    pred: PredicateDecl
    args: tuple[Term, ...]

    def __post_init__(self):
        if len(self.args) != self.pred.arity:
            raise MlnError(
                "atom %s expects %d args, got %d"
                % (self.pred.name, self.pred.arity, len(self.args))
            )
        for term, sort in zip(self.args, self.pred.arg_sorts):
            if term.sort != sort:
                raise MlnError(
                    "argument %s of %s has sort %s, expected %s"
                    % (term.name, self.pred.name, term.sort, sort)
                )

    def is_ground(self) -> bool:
        return all(isinstance(t, Constant) for t in self.args)

    def __str__(self):
        if not self.args:
            return "%s()" % self.pred.name
        return "%s(%s)" % (self.pred.name, ",".join(t.name for t in self.args))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.negated)

    def __str__(self):
        return ("!" if self.negated else "") + str(self.atom)


# --- Formula tree ----------------------------------------------------------
#
# Free variables are implicitly universally quantified.  EXIST may only
# introduce variables not bound above it.


@dataclass(frozen=True)
class Lit:
    literal: Literal


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Equiv:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    variables: tuple[Variable, ...]
    body: "Formula"


Formula = Union[Lit, Not, And, Or, Implies, Equiv, Exists]


def atom_lit(atom: Atom, negated: bool = False) -> Lit:
    return Lit(Literal(atom, negated))


def conjoin(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        raise MlnError("empty conjunction")
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def formula_atoms(formula: Formula) -> list[Atom]:
    """All atoms in the tree, in first-occurrence order."""
    out: list[Atom] = []
    seen = set()

    def walk(f: Formula):
        if isinstance(f, Lit):
            if f.literal.atom not in seen:
                seen.add(f.literal.atom)
                out.append(f.literal.atom)
        elif isinstance(f, Not):
            walk(f.body)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                walk(p)
        elif isinstance(f, Implies):
            walk(f.antecedent)
            walk(f.consequent)
        elif isinstance(f, Equiv):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, Exists):
            walk(f.body)

    walk(formula)
    return out


def free_variables(formula: Formula) -> list[Variable]:
    """Free variables in first-occurrence order (EXIST-bound ones excluded)."""
    out: list[Variable] = []
    seen = set()

    def walk(f: Formula, bound: frozenset[Variable]):
        if isinstance(f, Lit):
            for t in f.literal.atom.args:
                if isinstance(t, Variable) and t not in bound and t not in seen:
                    seen.add(t)
                    out.append(t)
        elif isinstance(f, Not):
            walk(f.body, bound)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                walk(p, bound)
        elif isinstance(f, Implies):
            walk(f.antecedent, bound)
            walk(f.consequent, bound)
        elif isinstance(f, Equiv):
            walk(f.left, bound)
            walk(f.right, bound)
        elif isinstance(f, Exists):
            walk(f.body, bound | frozenset(f.variables))

    walk(formula, frozenset())
    return out


def has_exists(formula: Formula) -> bool:
    if isinstance(formula, Exists):
        return True
    if isinstance(formula, Not):
        return has_exists(formula.body)
    if isinstance(formula, (And, Or)):
        return any(has_exists(p) for p in formula.parts)
    if isinstance(formula, Implies):
        return has_exists(formula.antecedent) or has_exists(formula.consequent)
    if isinstance(formula, Equiv):
        return has_exists(formula.left) or has_exists(formula.right)
    return False


@dataclass(frozen=True)
class WeightedFormula:
    """A formula with a finite soft weight, or hard when weight is None."""

    formula: Formula
    weight: Optional[float] = None

    def __post_init__(self):
        if self.weight is not None and not math.isfinite(self.weight):
            raise MlnError("soft weights must be finite; use weight=None for hard")

    @property
    def is_hard(self) -> bool:
        return self.weight is None


# --- Ground clauses --------------------------------------------------------


def make_glit(atom_id: int, negated: bool = False) -> int:
    """Signed ground literal for a dense atom id (ids start at 0)."""
    return -(atom_id + 1) if negated else atom_id + 1


def glit_atom(lit: int) -> int:
    return abs(lit) - 1


def glit_negated(lit: int) -> bool:
    return lit < 0


@dataclass(frozen=True)
class GroundClause:
    """Disjunction of signed ground literals; weight None means hard.

    Use :meth:`make` to construct: it deduplicates literals and returns
    None for tautologies (clauses containing both l and !l).
    """

    literals: tuple[int, ...]
    weight: Optional[float] = None

    @property
    def is_hard(self) -> bool:
        return self.weight is None

    @staticmethod
    def make(
        literals: Iterable[int], weight: Optional[float] = None
    ) -> Optional["GroundClause"]:
        seen: dict[int, None] = {}
        for lit in literals:
            if -lit in seen:
                return None
            seen.setdefault(lit, None)
        return GroundClause(tuple(sorted(seen, key=abs_then_sign)), weight)


def abs_then_sign(lit: int) -> tuple[int, int]:
    return (abs(lit), 0 if lit > 0 else 1)


# --- Evidence and programs -------------------------------------------------


@dataclass(frozen=True)
class Evidence:
    hard_true: frozenset[Atom] = frozenset()
    hard_false: frozenset[Atom] = frozenset()
    soft: Mapping[Atom, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.hard_true & self.hard_false:
            raise MlnError("evidence atoms marked both true and false")
        for atom, p in self.soft.items():
            if atom in self.hard_true or atom in self.hard_false:
                raise MlnError("soft evidence atom %s also has a hard value" % atom)
            if not 0.0 < p < 1.0:
                raise OutOfRange("soft evidence probability %g not in (0,1)" % p)
        for atom in self.all_atoms():
            if not atom.is_ground():
                raise MlnError("evidence atom %s is not ground" % atom)

    def all_atoms(self) -> Iterable[Atom]:
        yield from self.hard_true
        yield from self.hard_false
        yield from self.soft


@dataclass(frozen=True)
class MlnProgram:
    """Self-contained program: domains, declarations, formulas, evidence."""

    sorts: Mapping[str, tuple[str, ...]]
    predicates: Mapping[str, PredicateDecl]
    formulas: tuple[WeightedFormula, ...]
    evidence: Evidence = Evidence()

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name, constants in self.sorts.items():
            if not name:
                raise MlnError("empty sort name")
            if len(set(constants)) != len(constants):
                raise MlnError("duplicate constants in sort %s" % name)
        for name, decl in self.predicates.items():
            if name != decl.name:
                raise MlnError("predicate map key %s != decl name %s" % (name, decl.name))
            for sort in decl.arg_sorts:
                if sort not in self.sorts:
                    raise MlnError("predicate %s uses undeclared sort %s" % (name, sort))
        sort_sets = {name: frozenset(cs) for name, cs in self.sorts.items()}
        for wf in self.formulas:
            for atom in formula_atoms(wf.formula):
                self._check_atom(atom, sort_sets)
        for atom in self.evidence.all_atoms():
            self._check_atom(atom, sort_sets)

    def _check_atom(self, atom: Atom, sort_sets: Mapping[str, frozenset[str]]):
        decl = self.predicates.get(atom.pred.name)
        if decl is None or decl != atom.pred:
            raise MlnError("atom %s uses undeclared predicate" % atom)
        for term in atom.args:
            if isinstance(term, Constant):
                if term.name not in sort_sets.get(term.sort, frozenset()):
                    raise MlnError(
                        "constant %s not declared in sort %s" % (term.name, term.sort)
                    )

    def replace(self, **kwargs) -> "MlnProgram":
        fields = {
            "sorts": self.sorts,
            "predicates": self.predicates,
            "formulas": self.formulas,
            "evidence": self.evidence,
        }
        fields.update(kwargs)
        return MlnProgram(**fields)


# --- Operations ------------------------------------------------------------


def to_cnf(formula: Formula) -> list[list[Literal]]:
    """Exact clausification of a quantifier-free formula.

    Rewrites implications and biconditionals, pushes negation to literals,
    then distributes disjunction over conjunction.  No auxiliary variables
    are introduced, so the output is logically equivalent to the input.
    Tautological clauses are dropped and duplicate literals removed.
    """
    if has_exists(formula):
        raise ExistentialPresent("formula still contains EXIST nodes")

    def nnf(f: Formula, negate: bool) -> Formula:
        if isinstance(f, Lit):
            return Lit(f.literal.negate()) if negate else f
        if isinstance(f, Not):
            return nnf(f.body, not negate)
        if isinstance(f, And):
            parts = tuple(nnf(p, negate) for p in f.parts)
            return Or(parts) if negate else And(parts)
        if isinstance(f, Or):
            parts = tuple(nnf(p, negate) for p in f.parts)
            return And(parts) if negate else Or(parts)
        if isinstance(f, Implies):
            return nnf(Or((Not(f.antecedent), f.consequent)), negate)
        if isinstance(f, Equiv):
            both = And(
                (
                    Implies(f.left, f.right),
                    Implies(f.right, f.left),
                )
            )
            return nnf(both, negate)
        raise MlnError("unexpected formula node %r" % (f,))

    def clauses(f: Formula) -> list[frozenset[Literal]]:
        if isinstance(f, Lit):
            return [frozenset([f.literal])]
        if isinstance(f, And):
            out = []
            for p in f.parts:
                out.extend(clauses(p))
            return out
        if isinstance(f, Or):
            # distribute: cross product of the parts' clause sets
            acc: list[frozenset[Literal]] = [frozenset()]
            for p in f.parts:
                part_clauses = clauses(p)
                acc = [a | c for a in acc for c in part_clauses]
            return acc
        raise MlnError("unexpected node after NNF: %r" % (f,))

    result = []
    seen = set()
    for clause in clauses(nnf(formula, False)):
        if any(lit.negate() in clause for lit in clause):
            continue  # tautology
        if clause in seen:
            continue
        seen.add(clause)
        result.append(sorted(clause, key=lambda l: (str(l.atom), l.negated)))
    return result


def weight_from_probability(p: float) -> float:
    """Log-odds weight such that a lone soft unit clause has marginal p."""
    if not 0.0 < p < 1.0:
        raise OutOfRange("probability %g not in (0,1)" % p)
    return math.log(p / (1.0 - p))


def sigmoid(w: float) -> float:
    """Inverse of weight_from_probability."""
    if w >= 0:
        return 1.0 / (1.0 + math.exp(-w))
    e = math.exp(w)
    return e / (1.0 + e)


def _as_unit_literal(formula: Formula) -> Optional[Literal]:
    if isinstance(formula, Lit):
        return formula.literal
    if isinstance(formula, Not) and isinstance(formula.body, Lit):
        return formula.body.literal.negate()
    return None


def normalize_negative_weights(program: MlnProgram) -> MlnProgram:
    """Flip negative-weight unit formulas to positive weight on the negation.

    (w, l) with w < 0 becomes (-w, !l); the distribution is unchanged up to
    a constant factor.  Negative weights on non-unit formulas have no exact
    clause-level transform and are rejected.
    """
    changed = False
    out = []
    for wf in program.formulas:
        if wf.is_hard or wf.weight >= 0:
            out.append(wf)
            continue
        lit = _as_unit_literal(wf.formula)
        if lit is None:
            raise NegativeNonUnitWeight(
                "negative weight %g on non-unit formula" % wf.weight
            )
        out.append(WeightedFormula(Lit(lit.negate()), -wf.weight))
        changed = True
    if not changed:
        return program
    return program.replace(formulas=tuple(out))
