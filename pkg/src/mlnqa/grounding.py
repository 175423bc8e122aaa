"""Grounding: from typed programs to propositional clause networks.

Existential consequents are first rewritten away via auxiliary predicates,
then every formula is instantiated over its variables' sort domains and
simplified against hard evidence and closed-world predicates.  Atoms whose
value evidence fixes are frozen in the atom table and never appear in
emitted clauses.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (
    EmptyDomain,
    ExistentialPresent,
    HardContradiction,
    MlnError,
    UnsupportedExistential,
)
from .logic import (
    And,
    Atom,
    Constant,
    Equiv,
    Evidence,
    Exists,
    Formula,
    GroundClause,
    Implies,
    Lit,
    Literal,
    MlnProgram,
    Not,
    Or,
    PredicateDecl,
    Variable,
    WeightedFormula,
    atom_lit,
    conjoin,
    formula_atoms,
    free_variables,
    glit_atom,
    glit_negated,
    has_exists,
    make_glit,
    to_cnf,
    weight_from_probability,
)

FREE = "free"
FROZEN_TRUE = "frozen_true"
FROZEN_FALSE = "frozen_false"


class GroundAtomTable:
    """Bidirectional ground atom <-> dense id map with per-atom frozen state."""

    def __init__(self):
        self._atoms: list[Atom] = []
        self._ids: dict[Atom, int] = {}
        self._frozen: dict[int, bool] = {}

    def __len__(self) -> int:
        return len(self._atoms)

    def intern(self, atom: Atom) -> int:
        atom_id = self._ids.get(atom)
        if atom_id is None:
            atom_id = len(self._atoms)
            self._atoms.append(atom)
            self._ids[atom] = atom_id
        return atom_id

    def lookup(self, atom: Atom) -> Optional[int]:
        return self._ids.get(atom)

    def atom(self, atom_id: int) -> Atom:
        return self._atoms[atom_id]

    def freeze(self, atom_id: int, value: bool):
        if atom_id in self._frozen:
            raise MlnError("atom %s frozen twice" % self._atoms[atom_id])
        self._frozen[atom_id] = value

    def is_frozen(self, atom_id: int) -> bool:
        return atom_id in self._frozen

    def frozen_value(self, atom_id: int) -> bool:
        return self._frozen[atom_id]

    def state(self, atom_id: int) -> str:
        if atom_id not in self._frozen:
            return FREE
        return FROZEN_TRUE if self._frozen[atom_id] else FROZEN_FALSE

    def free_ids(self) -> list[int]:
        return [i for i in range(len(self._atoms)) if i not in self._frozen]

    def num_free(self) -> int:
        return len(self._atoms) - len(self._frozen)

    def copy(self) -> "GroundAtomTable":
        table = GroundAtomTable()
        table._atoms = list(self._atoms)
        table._ids = dict(self._ids)
        table._frozen = dict(self._frozen)
        return table

    def text(self, lit: int) -> str:
        atom = self._atoms[glit_atom(lit)]
        return ("!" if glit_negated(lit) else "") + str(atom)


@dataclass
class GroundNetwork:
    """Propositional product of grounding: hard and weighted soft clauses.

    hard_origin / soft_origin hold the source formula index of every clause
    (-1 for clauses emitted from soft evidence).
    """

    table: GroundAtomTable
    hard: list[GroundClause] = field(default_factory=list)
    hard_origin: list[int] = field(default_factory=list)
    soft: list[GroundClause] = field(default_factory=list)
    soft_origin: list[int] = field(default_factory=list)
    soft_evidence_atoms: frozenset[int] = frozenset()
    freeze_steps: tuple[tuple[int, int], ...] = ()

    @property
    def num_clauses(self) -> int:
        return len(self.hard) + len(self.soft)

    def stats(self) -> dict:
        return {
            "atoms": len(self.table),
            "free_atoms": self.table.num_free(),
            "hard_clauses": len(self.hard),
            "soft_clauses": len(self.soft),
        }

    def dump(self, stream):
        """One clause per line: `[w|HARD] lit lit ...` in canonical text form."""
        for clause in self.hard:
            stream.write("HARD " + " ".join(self.table.text(l) for l in clause.literals) + "\n")
        for clause in self.soft:
            stream.write(
                "%.6g " % clause.weight
                + " ".join(self.table.text(l) for l in clause.literals)
                + "\n"
            )


# --- existential rewriting --------------------------------------------------


def _split_rule(formula: Formula):
    """(antecedent, existential vars, consequent conjunction) or None."""
    if isinstance(formula, Implies) and isinstance(formula.consequent, Exists):
        ex = formula.consequent
        return formula.antecedent, ex.variables, ex.body
    return None


def rewrite_existentials(program: MlnProgram) -> MlnProgram:
    """Replace existential consequents with auxiliary predicates.

    For a rule `ante(xs) -> EXIST ys C(xs, ys)` this declares a fresh
    predicate E(xs, ys), adds one fresh domain constant per existential
    variable, replaces the rule by `ante(xs) -> OR over ys-tuples of
    E(xs, ys)` at the original weight, and adds the hard definition
    `E(xs, ys) <=> C(xs, ys)`.  Over the finite domains this preserves the
    program distribution exactly.
    """
    if not any(has_exists(wf.formula) for wf in program.formulas):
        return program

    sorts = {name: list(cs) for name, cs in program.sorts.items()}
    predicates = dict(program.predicates)
    taken_constants = {name for cs in sorts.values() for name in cs}
    formulas: list[WeightedFormula] = []

    def fresh_constant(base: str, sort: str) -> str:
        name = base
        suffix = 1
        while name in taken_constants:
            suffix += 1
            name = "%s_%d" % (base, suffix)
        taken_constants.add(name)
        sorts[sort].append(name)
        return name

    for idx, wf in enumerate(program.formulas, start=1):
        if not has_exists(wf.formula):
            formulas.append(wf)
            continue
        split = _split_rule(wf.formula)
        if split is None or has_exists(split[0]) or has_exists(split[2]):
            raise UnsupportedExistential(
                "EXIST is only supported as a prefix over a rule consequent"
            )
        antecedent, ex_vars, consequent = split
        universals = free_variables(wf.formula)
        for var in ex_vars:
            fresh_constant(var.name.capitalize() + str(idx), var.sort)

        aux_name = "E%d" % idx
        aux_suffix = 1
        while aux_name in predicates:
            aux_suffix += 1
            aux_name = "E%d_%d" % (idx, aux_suffix)
        arg_sorts = tuple(v.sort for v in universals) + tuple(v.sort for v in ex_vars)
        aux = PredicateDecl(aux_name, arg_sorts)
        predicates[aux.name] = aux

        domains = []
        for var in ex_vars:
            constants = sorts[var.sort]
            if not constants:
                raise EmptyDomain("existential variable %s over empty sort %s"
                                  % (var.name, var.sort))
            domains.append([Constant(c, var.sort) for c in constants])
        uni_terms = tuple(universals)
        disjuncts = [
            atom_lit(Atom(aux, uni_terms + combo))
            for combo in itertools.product(*domains)
        ]
        rewritten = Implies(antecedent, Or(tuple(disjuncts)) if len(disjuncts) > 1 else disjuncts[0])
        formulas.append(WeightedFormula(rewritten, wf.weight))

        definition = Equiv(atom_lit(Atom(aux, uni_terms + tuple(ex_vars))), consequent)
        formulas.append(WeightedFormula(definition, None))

    return MlnProgram(
        sorts={name: tuple(cs) for name, cs in sorts.items()},
        predicates=predicates,
        formulas=tuple(formulas),
        evidence=program.evidence,
    )


# --- refined types -----------------------------------------------------------


def _isa_predicates(program: MlnProgram) -> dict[str, PredicateDecl]:
    """Individual-kind sort -> the isa predicate linking it to strings."""
    out = {}
    for decl in program.predicates.values():
        if (
            decl.name.startswith("isa")
            and decl.arity == 2
            and decl.arg_sorts[1] == "string_"
            and decl.arg_sorts[0] in ("entity", "event")
        ):
            out[decl.arg_sorts[0]] = decl
    return out


def refined_type_rules(program: MlnProgram, table) -> MlnProgram:
    """Hard rules excluding groundings with lexically unreachable strings.

    For a relation r whose second argument is everywhere tied via isa to a
    string set T, any string s scoring zero entailment against all of T can
    never fill that slot: add hard `r(x,y) -> !isa(y,s)`.
    """
    isa_by_sort = _isa_predicates(program)
    if not isa_by_sort:
        return program
    isa_names = {d.name for d in isa_by_sort.values()}

    # strings tied to each individual term, per formula scope and per evidence
    relation_strings: dict[str, set[str]] = {}
    relation_complete: dict[str, bool] = {}

    def record(rel: str, tied: Iterable[str]):
        tied = set(tied)
        relation_strings.setdefault(rel, set()).update(tied)
        if not tied:
            relation_complete[rel] = False

    def scan(atoms: list[Atom], isa_of):
        for atom in atoms:
            if atom.pred.name in isa_names or atom.pred.name.startswith("entails"):
                continue
            if atom.pred.arity != 2:
                continue
            if atom.pred.arg_sorts[1] not in isa_by_sort:
                continue
            record(atom.pred.name, isa_of(atom.args[1]))

    ev_tied: dict = {}
    ev_atoms = list(program.evidence.hard_true)
    for atom in ev_atoms:
        if atom.pred.name in isa_names:
            ev_tied.setdefault(atom.args[0], set()).add(atom.args[1].name)

    for wf in program.formulas:
        atoms = formula_atoms(wf.formula)
        tied: dict = {}
        for atom in atoms:
            if atom.pred.name in isa_names and isinstance(atom.args[1], Constant):
                tied.setdefault(atom.args[0], set()).add(atom.args[1].name)
        scan(atoms, lambda term: tied.get(term, set()) | ev_tied.get(term, set()))

    scan(sorted(ev_atoms, key=str), lambda term: ev_tied.get(term, set()))

    all_strings = program.sorts.get("string_", ())
    extra: list[WeightedFormula] = []
    existing = {wf.formula for wf in program.formulas}
    for rel_name in sorted(relation_strings):
        if not relation_complete.get(rel_name, True):
            continue
        tied_set = relation_strings[rel_name]
        if not tied_set:
            continue
        rel = program.predicates[rel_name]
        isa = isa_by_sort[rel.arg_sorts[1]]
        x = Variable("x", rel.arg_sorts[0])
        y = Variable("y", rel.arg_sorts[1])
        for s in all_strings:
            if any(table.score(s, t) > 0.0 for t in sorted(tied_set)):
                continue
            rule = Implies(
                atom_lit(Atom(rel, (x, y))),
                atom_lit(Atom(isa, (y, Constant(s, "string_"))), negated=True),
            )
            if rule not in existing:
                existing.add(rule)
                extra.append(WeightedFormula(rule, None))
    if not extra:
        return program
    return program.replace(formulas=program.formulas + tuple(extra))


# --- grounding ----------------------------------------------------------------


def ground(program: MlnProgram, deadline: Optional[float] = None) -> GroundNetwork:
    """Instantiate all formulas over their typed domains.

    Clauses are simplified against hard evidence and closed-world
    predicates; satisfied clauses are dropped, false literals removed, and
    evidence-fixed atoms frozen in the table.  Raises HardContradiction if
    a hard clause simplifies to empty, EmptyDomain if a quantified sort has
    no constants.
    """
    for wf in program.formulas:
        if has_exists(wf.formula):
            raise ExistentialPresent("run rewrite_existentials before ground()")

    evidence = program.evidence
    hard_true = set(evidence.hard_true)
    hard_false = set(evidence.hard_false)
    soft_atoms = dict(evidence.soft)

    possible_true: dict[str, list[Atom]] = {}
    for atom in itertools.chain(hard_true, soft_atoms):
        if atom.pred.closed_world:
            possible_true.setdefault(atom.pred.name, []).append(atom)
    for atoms in possible_true.values():
        atoms.sort(key=str)

    def truth(atom: Atom) -> Optional[bool]:
        if atom in hard_true:
            return True
        if atom in hard_false:
            return False
        if atom.pred.closed_world and atom not in soft_atoms:
            return False
        return None

    table = GroundAtomTable()
    hard: list[GroundClause] = []
    hard_origin: list[int] = []
    soft: list[GroundClause] = []
    soft_origin: list[int] = []
    seen_hard: set[tuple[int, ...]] = set()
    soft_index: dict[tuple[int, ...], int] = {}

    def emit(lits_key: tuple[int, ...], weight: Optional[float], origin: int):
        if weight is None:
            if lits_key in seen_hard:
                return
            seen_hard.add(lits_key)
            hard.append(GroundClause(lits_key, None))
            hard_origin.append(origin)
        else:
            at = soft_index.get(lits_key)
            if at is None:
                soft_index[lits_key] = len(soft)
                soft.append(GroundClause(lits_key, weight))
                soft_origin.append(origin)
            else:
                soft[at] = GroundClause(lits_key, soft[at].weight + weight)

    for fi, wf in enumerate(program.formulas):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeoutError("grounding deadline exceeded")
        for var in free_variables(wf.formula):
            if not program.sorts.get(var.sort):
                raise EmptyDomain(
                    "variable %s ranges over empty sort %s" % (var.name, var.sort)
                )
        templates = to_cnf(wf.formula)
        if not templates:
            continue
        if wf.is_hard:
            weight = None
        else:
            weight = wf.weight / len(templates)
            if weight == 0.0:
                continue
        formula_vars = free_variables(wf.formula)
        for template in templates:
            for binding in _template_bindings(template, formula_vars, program, possible_true):
                lits: list[int] = []
                satisfied = False
                for lit in template:
                    atom = _substitute(lit.atom, binding)
                    value = truth(atom)
                    if value is None:
                        lits.append(make_glit(table.intern(atom), lit.negated))
                    elif value != lit.negated:
                        satisfied = True
                        break
                if satisfied:
                    continue
                clause = GroundClause.make(lits, weight)
                if clause is None:
                    continue  # tautology
                if not clause.literals:
                    if weight is None:
                        raise HardContradiction(
                            "hard formula %d falsified by evidence" % fi
                        )
                    continue  # falsified soft grounding: constant factor
                emit(clause.literals, weight, fi)

    # drop soft clauses whose merged weight cancelled to zero
    if any(c.weight == 0.0 for c in soft):
        kept = [(c, o) for c, o in zip(soft, soft_origin) if c.weight != 0.0]
        soft = [c for c, _ in kept]
        soft_origin = [o for _, o in kept]

    # register and freeze evidence atoms; emit soft-evidence unit clauses
    for atom in sorted(hard_true, key=str):
        table_id = table.intern(atom)
        table.freeze(table_id, True)
    for atom in sorted(hard_false, key=str):
        table_id = table.intern(atom)
        table.freeze(table_id, False)
    soft_ids = []
    for atom in sorted(soft_atoms, key=str):
        table_id = table.intern(atom)
        soft_ids.append(table_id)
        p = soft_atoms[atom]
        w = weight_from_probability(p)
        if w > 0:
            emit((make_glit(table_id),), w, -1)
        elif w < 0:
            emit((make_glit(table_id, negated=True),), -w, -1)

    return GroundNetwork(
        table=table,
        hard=hard,
        hard_origin=hard_origin,
        soft=soft,
        soft_origin=soft_origin,
        soft_evidence_atoms=frozenset(soft_ids),
    )


def _substitute(atom: Atom, binding: dict[Variable, Constant]) -> Atom:
    if atom.is_ground():
        return atom
    args = tuple(
        binding[t] if isinstance(t, Variable) else t for t in atom.args
    )
    return Atom(atom.pred, args)


def _template_bindings(template, formula_vars, program: MlnProgram, possible_true):
    """All bindings of the formula's variables for one clause template.

    Negated closed-world literals act as generators: the clause can only
    survive when their atom is possibly true, so bindings are drawn from
    the (small) evidence lists instead of the full cross product.  The
    enumeration covers every formula variable, including any a template
    dropped, so soft groundings keep their full multiplicity.
    """
    variables = list(formula_vars)
    if not variables:
        yield {}
        return

    generators = [
        lit.atom
        for lit in template
        if lit.negated and lit.atom.pred.closed_world and lit.atom.pred.name in possible_true
    ]
    no_candidates = [
        lit
        for lit in template
        if lit.negated and lit.atom.pred.closed_world and lit.atom.pred.name not in possible_true
    ]
    if no_candidates:
        return  # such a literal is always true: every grounding is satisfied

    def extend(idx: int, binding: dict):
        if idx == len(generators):
            remaining = [v for v in variables if v not in binding]
            if not remaining:
                yield dict(binding)
                return
            domains = []
            for var in remaining:
                constants = program.sorts.get(var.sort, ())
                if not constants:
                    raise EmptyDomain(
                        "variable %s ranges over empty sort %s" % (var.name, var.sort)
                    )
                domains.append([Constant(c, var.sort) for c in constants])
            for combo in itertools.product(*domains):
                full = dict(binding)
                full.update(zip(remaining, combo))
                yield full
            return
        pattern = generators[idx]
        for candidate in possible_true[pattern.pred.name]:
            new_binding = _match(pattern, candidate, binding)
            if new_binding is not None:
                yield from extend(idx + 1, new_binding)

    yielded = set()
    for binding in extend(0, {}):
        key = tuple(binding[v].name for v in variables)
        if key in yielded:
            continue
        yielded.add(key)
        yield binding


def _match(pattern: Atom, candidate: Atom, binding: dict) -> Optional[dict]:
    new_binding = dict(binding)
    for pat_term, cand_term in zip(pattern.args, candidate.args):
        if isinstance(pat_term, Constant):
            if pat_term != cand_term:
                return None
        else:
            bound = new_binding.get(pat_term)
            if bound is None:
                new_binding[pat_term] = cand_term
            elif bound != cand_term:
                return None
    return new_binding
