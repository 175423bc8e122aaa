"""Compile (question graph, KB rule graphs, entailment table) into a program.

Three formulations are supported:

FO       rules become quantified formulas over typed variables; existential
         consequents are later rewritten by the grounder.
ER       rules are pre-grounded over prototypical constants and glued to the
         question through probabilistic sameAs clustering.
PRALINE  inference runs over node-existence (holds) atoms guided by a soft
         lexical/structural alignment between graph nodes, with optional
         acyclicity and false-unless-proven constraints.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import NoQueryNodes
from .graphs import KbRuleGraph, QuestionGraph
from .logic import (
    And,
    Atom,
    Constant,
    Equiv,
    Evidence,
    Exists,
    Formula,
    Implies,
    Lit,
    MlnProgram,
    Not,
    Or,
    PredicateDecl,
    Variable,
    WeightedFormula,
    atom_lit,
    conjoin,
    weight_from_probability,
)
from .grounding import refined_type_rules
from .parsing import EntailmentTable, normalize_string


class Formulation(enum.Enum):
    FO = "fo"
    ER = "er"
    PRALINE = "praline"


@dataclass(frozen=True)
class PralineFlags:
    acyclic: bool = True
    fup: bool = True
    setup_query_align: bool = True


@dataclass(frozen=True)
class EncoderConfig:
    """Manually set weights; the alignment copies follow higher-for-same-label."""

    rule_weight: float = 1.0
    same_label_weight: float = 2.0
    diff_label_weight: float = 0.5
    er_distinct_weight: float = 1.0


DEFAULT_CONFIG = EncoderConfig()

_KIND_LETTER = {"entity": "A", "event": "E"}


def tokens(label: str) -> set[str]:
    return {t for t in normalize_string(label).split("_") if t}


def lexical_score(a: str, b: str, table: EntailmentTable) -> float:
    """Table score when present, else directed token overlap |a&b| / |b|."""
    found = table.lookup(a, b)
    if found is not None:
        return found
    tb = tokens(b)
    if not tb:
        return 0.0
    return len(tokens(a) & tb) / len(tb)


# --- shared builder ----------------------------------------------------------


class _ProgramBuilder:
    def __init__(self):
        self.sorts: dict[str, list[str]] = {
            "entity": [],
            "event": [],
            "string_": [],
            "rule_id": [],
            "node_id": [],
        }
        self.predicates: dict[str, PredicateDecl] = {}
        self.formulas: list[WeightedFormula] = []
        self.hard_true: list[Atom] = []
        self.hard_false: list[Atom] = []
        self.soft: dict[Atom, float] = {}
        self._constants: dict[str, set[str]] = {}

    def constant(self, name: str, sort: str) -> Constant:
        pool = self._constants.setdefault(sort, set())
        if name not in pool:
            pool.add(name)
            self.sorts[sort].append(name)
        return Constant(name, sort)

    def fresh_constant(self, base: str, sort: str) -> Constant:
        pool = self._constants.setdefault(sort, set())
        name = base
        suffix = 1
        while name in pool:
            suffix += 1
            name = "%s_%d" % (base, suffix)
        return self.constant(name, sort)

    def predicate(self, name: str, arg_sorts: tuple[str, ...],
                  closed_world: bool = False) -> PredicateDecl:
        decl = self.predicates.get(name)
        if decl is None:
            decl = PredicateDecl(name, arg_sorts, closed_world)
            self.predicates[name] = decl
        return decl

    def hard(self, formula: Formula):
        self.formulas.append(WeightedFormula(formula, None))

    def soft_formula(self, formula: Formula, weight: float):
        """Emit a positively-weighted soft formula; weights <= 0 are dropped."""
        if weight > 0.0:
            self.formulas.append(WeightedFormula(formula, weight))

    def build(self) -> MlnProgram:
        return MlnProgram(
            sorts={name: tuple(cs) for name, cs in self.sorts.items()},
            predicates=dict(self.predicates),
            formulas=tuple(self.formulas),
            evidence=Evidence(
                hard_true=frozenset(self.hard_true),
                hard_false=frozenset(self.hard_false),
                soft=dict(self.soft),
            ),
        )


def _cap(name: str) -> str:
    return name[0].upper() + name[1:] if name else name


def _dedup(items) -> list:
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _string_pools(question: QuestionGraph, rules) -> dict[str, list[str]]:
    """kind -> distinct node labels of that kind, in first-occurrence order."""
    pools = {"entity": [], "event": []}
    for node in question.nodes:
        pools[node.kind].append(node.label)
    for rule in rules:
        for node in rule.nodes:
            pools[node.kind].append(node.label)
    return {kind: _dedup(labels) for kind, labels in pools.items()}


def _entails_pred(builder: _ProgramBuilder, kind: str) -> PredicateDecl:
    letter = _KIND_LETTER[kind]
    return builder.predicate(
        "entails%s%s" % (letter, letter), ("string_", "string_"), closed_world=True
    )


def _isa_pred(builder: _ProgramBuilder, kind: str) -> PredicateDecl:
    return builder.predicate("isa%s" % _KIND_LETTER[kind], (kind, "string_"))


def _relation_pred(builder: _ProgramBuilder, label: str, src_kind: str,
                   dst_kind: str) -> PredicateDecl:
    name = "%s%s%s" % (label, _KIND_LETTER[src_kind], _KIND_LETTER[dst_kind])
    return builder.predicate(name, (src_kind, dst_kind))


def _add_entails_evidence(builder: _ProgramBuilder, pools, table: EntailmentTable):
    """Soft entails priors between every ordered pair of same-kind strings."""
    for kind in ("entity", "event"):
        pred = _entails_pred(builder, kind)
        labels = pools[kind]
        for a in labels:
            for b in labels:
                if a == b:
                    continue
                s = lexical_score(a, b, table)
                if s <= 0.0:
                    continue
                atom = Atom(
                    pred,
                    (builder.constant(a, "string_"), builder.constant(b, "string_")),
                )
                if s >= 1.0:
                    builder.hard_true.append(atom)
                else:
                    builder.soft[atom] = s


def _add_isa_propagation(builder: _ProgramBuilder):
    for kind in ("entity", "event"):
        isa = _isa_pred(builder, kind)
        ent = _entails_pred(builder, kind)
        x = Variable("x", kind)
        s = Variable("s", "string_")
        s2 = Variable("s'", "string_")
        builder.hard(
            Implies(
                And((atom_lit(Atom(isa, (x, s))), atom_lit(Atom(ent, (s, s2))))),
                atom_lit(Atom(isa, (x, s2))),
            )
        )


def _question_atoms(builder: _ProgramBuilder, question: QuestionGraph):
    """(setup atoms, query atoms) over the question's node constants."""
    node_const = {}
    for node in question.nodes:
        node_const[node.id] = builder.fresh_constant(_cap(node.id), node.kind)
    setup_atoms: list[Atom] = []
    query_atoms: list[Atom] = []
    for node in question.nodes:
        isa = _isa_pred(builder, node.kind)
        atom = Atom(isa, (node_const[node.id], builder.constant(node.label, "string_")))
        (setup_atoms if node.role == "setup" else query_atoms).append(atom)
    by_id = {n.id: n for n in question.nodes}
    for edge in question.edges:
        src, dst = by_id[edge.src], by_id[edge.dst]
        rel = _relation_pred(builder, edge.label, src.kind, dst.kind)
        atom = Atom(rel, (node_const[src.id], node_const[dst.id]))
        if src.role == "setup" and dst.role == "setup":
            setup_atoms.append(atom)
        else:
            query_atoms.append(atom)
    return setup_atoms, query_atoms, node_const


def _add_result_query(builder: _ProgramBuilder, question: QuestionGraph,
                      setup_atoms, query_atoms):
    """Setup as hard evidence; result() biconditional to the open query atoms."""
    if not question.query_nodes():
        raise NoQueryNodes("question has no query nodes")
    result = builder.predicate("result", ())
    builder.hard_true.extend(setup_atoms)
    setup_set = set(setup_atoms)
    open_atoms = [a for a in query_atoms if a not in setup_set]
    result_lit = atom_lit(Atom(result, ()))
    if open_atoms:
        builder.hard(Equiv(result_lit, conjoin([atom_lit(a) for a in open_atoms])))
    else:
        builder.hard(result_lit)  # vacuous conjunction: result is simply true


def _declare_rule_relations(builder: _ProgramBuilder, rules):
    for rule in rules:
        by_id = {n.id: n for n in rule.nodes}
        for edge in rule.edges:
            _relation_pred(builder, edge.label, by_id[edge.src].kind,
                           by_id[edge.dst].kind)


def _semantic_rules(builder: _ProgramBuilder):
    """Meaning constraints over the declared relation predicates."""
    relations = [
        decl for decl in builder.predicates.values()
        if decl.arity == 2
        and decl.arg_sorts[0] in ("entity", "event")
        and decl.arg_sorts[1] in ("entity", "event")
        and not decl.name.startswith(("isa", "entails", "sameAs"))
    ]
    # unique agent per event: no two distinct fillers of an agent slot
    for decl in relations:
        if not decl.name.startswith("agent"):
            continue
        x = Variable("x", decl.arg_sorts[0])
        fillers = builder.sorts[decl.arg_sorts[1]]
        for i, c1 in enumerate(fillers):
            for c2 in fillers[i + 1:]:
                builder.hard(
                    Not(
                        And((
                            atom_lit(Atom(decl, (x, builder.constant(c1, decl.arg_sorts[1])))),
                            atom_lit(Atom(decl, (x, builder.constant(c2, decl.arg_sorts[1])))),
                        ))
                    )
                )
    # cause/effect converse
    for decl in relations:
        if not decl.name.startswith("cause"):
            continue
        label_part = decl.name[: -2]
        if label_part != "cause":
            continue
        flipped = (decl.arg_sorts[1], decl.arg_sorts[0])
        effect = builder.predicate(
            "effect%s%s" % (_KIND_LETTER[flipped[0]], _KIND_LETTER[flipped[1]]),
            flipped,
        )
        x = Variable("x", decl.arg_sorts[0])
        y = Variable("y", decl.arg_sorts[1])
        builder.hard(
            Implies(atom_lit(Atom(decl, (x, y))), atom_lit(Atom(effect, (y, x))))
        )
    # irreflexivity and anti-symmetry where both slots share a sort
    for decl in relations:
        if decl.arg_sorts[0] != decl.arg_sorts[1]:
            continue
        x = Variable("x", decl.arg_sorts[0])
        y = Variable("y", decl.arg_sorts[1])
        builder.hard(Not(atom_lit(Atom(decl, (x, x)))))
        builder.hard(
            Implies(
                atom_lit(Atom(decl, (x, y))),
                atom_lit(Atom(decl, (y, x)), negated=True),
            )
        )


def _mean_pairwise(sources, targets, table) -> float:
    pairs = [(a, b) for a in sources for b in targets]
    if not pairs:
        return 0.0
    return sum(lexical_score(a, b, table) for a, b in pairs) / len(pairs)


# --- FO ----------------------------------------------------------------------


def encode_fo(
    question: QuestionGraph,
    rules: list[KbRuleGraph],
    table: EntailmentTable,
    config: EncoderConfig = DEFAULT_CONFIG,
) -> MlnProgram:
    """First-order formulation: KB rules essentially verbatim, typed."""
    builder = _ProgramBuilder()
    pools = _string_pools(question, rules)
    for kind in ("entity", "event"):
        _isa_pred(builder, kind)
        _entails_pred(builder, kind)
        for label in pools[kind]:
            builder.constant(label, "string_")
    _declare_rule_relations(builder, rules)

    # (1) KB rules: lhs variables universal, rhs variables existential
    for rule in rules:
        _add_fo_rule(builder, rule, max(0.0, weight_from_probability(rule.confidence)))

    # (2) setup evidence and the result() query
    setup_atoms, query_atoms, _ = _question_atoms(builder, question)
    _add_result_query(builder, question, setup_atoms, query_atoms)

    # (3) soft entails evidence, (4) isa propagation
    _add_entails_evidence(builder, pools, table)
    _add_isa_propagation(builder)

    # (7) refined-type pruning, computed before the semantic rules are added
    # so that untyped helper occurrences do not mask the derivable sets
    staged = builder.build()
    refined = refined_type_rules(staged, table)
    builder.formulas = list(refined.formulas)

    # (5) semantic rules
    _semantic_rules(builder)

    # (6) per-rule lexical alignment bridges
    setup_labels = [n.label for n in question.setup_nodes()]
    query_labels = [n.label for n in question.query_nodes()]
    result = builder.predicate("result", ())
    for rule in rules:
        w_ante = _mean_pairwise(setup_labels, [n.label for n in rule.lhs_nodes()], table)
        w_cons = _mean_pairwise([n.label for n in rule.rhs_nodes()], query_labels, table)
        if w_ante <= 0.0 and w_cons <= 0.0:
            continue
        setup_match = builder.predicate("setupMatch_%s" % rule.rule_id, ())
        ante_holds = builder.predicate("anteHolds_%s" % rule.rule_id, ())
        cons_done = builder.predicate("consDone_%s" % rule.rule_id, ())
        builder.hard_true.append(Atom(setup_match, ()))
        lit_match = atom_lit(Atom(setup_match, ()))
        lit_ante = atom_lit(Atom(ante_holds, ()))
        lit_cons = atom_lit(Atom(cons_done, ()))
        if w_ante >= 1.0:
            builder.hard(Implies(lit_match, lit_ante))
        elif w_ante > 0.0:
            builder.soft_formula(Implies(lit_match, lit_ante),
                                 weight_from_probability(w_ante))
        builder.hard(Implies(lit_ante, lit_cons))
        if w_cons >= 1.0:
            builder.hard(Implies(lit_cons, atom_lit(Atom(result, ()))))
        elif w_cons > 0.0:
            builder.soft_formula(Implies(lit_cons, atom_lit(Atom(result, ()))),
                                 weight_from_probability(w_cons))

    return builder.build()


def _add_fo_rule(builder: _ProgramBuilder, rule: KbRuleGraph, weight: float):
    by_id = {n.id: n for n in rule.nodes}
    variables: dict[str, Variable] = {}
    used_names: set[str] = set()
    for node in rule.nodes:
        base = node.id[0].lower() + node.id[1:]
        name = base
        suffix = 1
        while name in used_names:
            suffix += 1
            name = "%s%d" % (base, suffix)
        used_names.add(name)
        variables[node.id] = Variable(name, node.kind)

    ante: list[Formula] = []
    cons: list[Formula] = []
    for node in rule.nodes:
        isa = _isa_pred(builder, node.kind)
        lit = atom_lit(
            Atom(isa, (variables[node.id], builder.constant(node.label, "string_")))
        )
        (ante if node.role == "lhs" else cons).append(lit)
    for edge in rule.edges:
        src, dst = by_id[edge.src], by_id[edge.dst]
        rel = _relation_pred(builder, edge.label, src.kind, dst.kind)
        lit = atom_lit(Atom(rel, (variables[src.id], variables[dst.id])))
        if src.role == "lhs" and dst.role == "lhs":
            ante.append(lit)
        else:
            cons.append(lit)

    rhs_vars = tuple(variables[n.id] for n in rule.rhs_nodes())
    formula = Implies(conjoin(ante), Exists(rhs_vars, conjoin(cons)))
    if weight > 0.0:
        builder.soft_formula(formula, weight)


# --- ER ----------------------------------------------------------------------


def encode_er(
    question: QuestionGraph,
    rules: list[KbRuleGraph],
    table: EntailmentTable,
    config: EncoderConfig = DEFAULT_CONFIG,
) -> MlnProgram:
    """Entity-resolution formulation: prototypical constants plus sameAs."""
    builder = _ProgramBuilder()
    pools = _string_pools(question, rules)
    for kind in ("entity", "event"):
        _isa_pred(builder, kind)
        _entails_pred(builder, kind)
        builder.predicate("sameAs%s" % _KIND_LETTER[kind], (kind, kind))
        for label in pools[kind]:
            builder.constant(label, "string_")
    _declare_rule_relations(builder, rules)

    # (1) KB rules grounded over prototypical constants, (2) partial matches
    for index, rule in enumerate(rules, start=1):
        weight = max(0.0, weight_from_probability(rule.confidence))
        by_id = {n.id: n for n in rule.nodes}
        proto: dict[str, Constant] = {}
        for node in rule.nodes:
            proto[node.id] = builder.fresh_constant(
                "%s%d" % (_cap(node.id), index), node.kind
            )
        ante: list[Formula] = []
        cons: list[Formula] = []
        for node in rule.nodes:
            isa = _isa_pred(builder, node.kind)
            lit = atom_lit(
                Atom(isa, (proto[node.id], builder.constant(node.label, "string_")))
            )
            (ante if node.role == "lhs" else cons).append(lit)
        for edge in rule.edges:
            src, dst = by_id[edge.src], by_id[edge.dst]
            rel = _relation_pred(builder, edge.label, src.kind, dst.kind)
            lit = atom_lit(Atom(rel, (proto[src.id], proto[dst.id])))
            if src.role == "lhs" and dst.role == "lhs":
                ante.append(lit)
            else:
                cons.append(lit)
        consequent = conjoin(cons)
        if weight > 0.0:
            builder.soft_formula(Implies(conjoin(ante), consequent), weight)
            for conjunct in ante:
                builder.soft_formula(Implies(conjunct, consequent), weight / len(ante))

    # question side
    setup_atoms, query_atoms, _ = _question_atoms(builder, question)
    _add_result_query(builder, question, setup_atoms, query_atoms)

    # (3) resolution rules
    _add_entails_evidence(builder, pools, table)
    _add_isa_propagation(builder)
    for kind in ("entity", "event"):
        isa = _isa_pred(builder, kind)
        same = builder.predicates["sameAs%s" % _KIND_LETTER[kind]]
        x = Variable("x", kind)
        y = Variable("y", kind)
        z = Variable("z", kind)
        s = Variable("s", "string_")
        builder.hard(
            Implies(
                And((atom_lit(Atom(isa, (x, s))), atom_lit(Atom(isa, (y, s))))),
                atom_lit(Atom(same, (x, y))),
            )
        )
        builder.soft_formula(
            Implies(
                And((
                    atom_lit(Atom(isa, (x, s))),
                    atom_lit(Atom(isa, (y, s)), negated=True),
                )),
                atom_lit(Atom(same, (x, y)), negated=True),
            ),
            config.er_distinct_weight,
        )
        # (4) typed equivalence structure
        builder.hard(atom_lit(Atom(same, (x, x))))
        builder.hard(
            Implies(atom_lit(Atom(same, (x, y))), atom_lit(Atom(same, (y, x))))
        )
        builder.hard(
            Implies(
                And((atom_lit(Atom(same, (x, y))), atom_lit(Atom(same, (y, z))))),
                atom_lit(Atom(same, (x, z))),
            )
        )
    # substitution under sameAs for every semantic relation
    for decl in list(builder.predicates.values()):
        if (
            decl.arity != 2
            or decl.arg_sorts[0] not in ("entity", "event")
            or decl.arg_sorts[1] not in ("entity", "event")
            or decl.name.startswith(("isa", "entails", "sameAs"))
        ):
            continue
        same = builder.predicates["sameAs%s" % _KIND_LETTER[decl.arg_sorts[1]]]
        x = Variable("x", decl.arg_sorts[0])
        y = Variable("y", decl.arg_sorts[1])
        z = Variable("z", decl.arg_sorts[1])
        builder.hard(
            Implies(
                And((atom_lit(Atom(decl, (x, y))), atom_lit(Atom(same, (y, z))))),
                atom_lit(Atom(decl, (x, z))),
            )
        )

    return builder.build()


# --- Praline -----------------------------------------------------------------


def encode_praline(
    question: QuestionGraph,
    rules: list[KbRuleGraph],
    table: EntailmentTable,
    flags: PralineFlags = PralineFlags(),
    config: EncoderConfig = DEFAULT_CONFIG,
) -> MlnProgram:
    """Alignment-and-inference formulation over node-existence atoms."""
    builder = _ProgramBuilder()

    node_pred = builder.predicate("node", ("node_id",), closed_world=True)
    edge_pred = builder.predicate("edge", ("node_id", "node_id", "string_"),
                                  closed_world=True)
    setup_pred = builder.predicate("setup", ("node_id",), closed_world=True)
    query_pred = builder.predicate("query", ("node_id",), closed_world=True)
    inlhs = builder.predicate("inlhs", ("node_id", "rule_id"), closed_world=True)
    inrhs = builder.predicate("inrhs", ("node_id", "rule_id"), closed_world=True)
    aligns = builder.predicate("aligns", ("node_id", "node_id"), closed_world=True)
    proves = builder.predicate("proves", ("node_id", "node_id"))
    rule_proves = builder.predicate("ruleProves", ("rule_id", "rule_id"))
    holds = builder.predicate("holds", ("node_id",))
    lhs_holds = builder.predicate("lhsHolds", ("rule_id",))
    rhs_holds = builder.predicate("rhsHolds", ("rule_id",))
    result = builder.predicate("result", ())

    # constants: question nodes, rule nodes, rule ids; graph id per node
    node_const: dict[tuple[int, str], Constant] = {}
    node_info: list[tuple[Constant, str, int]] = []  # constant, label, graph index
    for node in question.nodes:
        c = builder.fresh_constant("Q_%s" % node.id, "node_id")
        node_const[(0, node.id)] = c
        node_info.append((c, node.label, 0))
    rule_const: dict[str, Constant] = {}
    for gi, rule in enumerate(rules, start=1):
        rule_const[rule.rule_id] = builder.fresh_constant(_cap(rule.rule_id), "rule_id")
        for node in rule.nodes:
            c = builder.fresh_constant(
                "%s_%s" % (_cap(rule.rule_id), node.id), "node_id"
            )
            node_const[(gi, node.id)] = c
            node_info.append((c, node.label, gi))

    # (1) input predicates as hard evidence
    for c, _, _ in node_info:
        builder.hard_true.append(Atom(node_pred, (c,)))
    for edge in question.edges:
        builder.hard_true.append(
            Atom(edge_pred, (node_const[(0, edge.src)], node_const[(0, edge.dst)],
                             builder.constant(edge.label, "string_")))
        )
    for node in question.nodes:
        pred = setup_pred if node.role == "setup" else query_pred
        builder.hard_true.append(Atom(pred, (node_const[(0, node.id)],)))
    for gi, rule in enumerate(rules, start=1):
        r = rule_const[rule.rule_id]
        for edge in rule.edges:
            builder.hard_true.append(
                Atom(edge_pred, (node_const[(gi, edge.src)], node_const[(gi, edge.dst)],
                                 builder.constant(edge.label, "string_")))
            )
        for node in rule.nodes:
            side = inlhs if node.role == "lhs" else inrhs
            builder.hard_true.append(Atom(side, (node_const[(gi, node.id)], r)))

    # (2) soft alignment priors for cross-graph pairs; closed-world otherwise
    candidate_pairs: list[tuple[Constant, Constant]] = []
    incoming: dict[str, list[Constant]] = {}
    for cx, label_x, gx in node_info:
        for cy, label_y, gy in node_info:
            if gx == gy:
                continue
            s = lexical_score(label_x, label_y, table)
            if s <= 0.0:
                continue
            atom = Atom(aligns, (cx, cy))
            if s >= 1.0:
                builder.hard_true.append(atom)
            else:
                builder.soft[atom] = s
            candidate_pairs.append((cx, cy))
            incoming.setdefault(cy.name, []).append(cx)

    # (3) structural alignment rules, per ordered label pair
    x = Variable("x", "node_id")
    y = Variable("y", "node_id")
    u = Variable("u", "node_id")
    v = Variable("v", "node_id")
    labels = sorted({e.label for e in question.edges}
                    | {e.label for r in rules for e in r.edges})
    for l1 in labels:
        for l2 in labels:
            w = config.same_label_weight if l1 == l2 else config.diff_label_weight
            c1 = builder.constant(l1, "string_")
            c2 = builder.constant(l2, "string_")
            edge_xu = atom_lit(Atom(edge_pred, (x, u, c1)))
            edge_yv = atom_lit(Atom(edge_pred, (y, v, c2)))
            builder.soft_formula(
                Implies(
                    And((atom_lit(Atom(aligns, (x, y))), edge_xu, edge_yv)),
                    atom_lit(Atom(aligns, (u, v))),
                ),
                w,
            )
            builder.soft_formula(
                Implies(
                    And((atom_lit(Atom(aligns, (u, v))), edge_xu, edge_yv)),
                    atom_lit(Atom(aligns, (x, y))),
                ),
                w,
            )

    # (4) inference rules
    r = Variable("r", "rule_id")
    w = config.rule_weight
    builder.soft_formula(
        Implies(
            And((atom_lit(Atom(proves, (x, y))), atom_lit(Atom(holds, (x,))))),
            atom_lit(Atom(holds, (y,))),
        ),
        w,
    )
    builder.soft_formula(
        Implies(atom_lit(Atom(aligns, (x, y))), atom_lit(Atom(proves, (x, y)))), w
    )
    builder.soft_formula(
        Implies(
            And((atom_lit(Atom(holds, (x,))), atom_lit(Atom(inlhs, (x, r))))),
            atom_lit(Atom(lhs_holds, (r,))),
        ),
        w,
    )
    builder.soft_formula(
        Implies(
            And((atom_lit(Atom(holds, (x,)), True), atom_lit(Atom(inlhs, (x, r))))),
            atom_lit(Atom(lhs_holds, (r,)), True),
        ),
        w,
    )
    builder.hard(
        Implies(atom_lit(Atom(lhs_holds, (r,))), atom_lit(Atom(rhs_holds, (r,))))
    )
    builder.hard(
        Implies(
            And((atom_lit(Atom(rhs_holds, (r,))), atom_lit(Atom(inrhs, (x, r))))),
            atom_lit(Atom(holds, (x,))),
        )
    )

    # (5) setup nodes hold
    for node in question.setup_nodes():
        builder.hard_true.append(Atom(holds, (node_const[(0, node.id)],)))

    # optional: discourage aligning a setup node directly to a query node
    if flags.setup_query_align:
        builder.soft_formula(
            Implies(
                And((atom_lit(Atom(aligns, (x, y))), atom_lit(Atom(setup_pred, (x,))))),
                atom_lit(Atom(query_pred, (y,)), True),
            ),
            w,
        )

    # (6) acyclic inference
    if flags.acyclic:
        z = Variable("z", "node_id")
        r2 = Variable("r2", "rule_id")
        r3 = Variable("r3", "rule_id")
        builder.hard(Not(atom_lit(Atom(proves, (x, x)))))
        builder.hard(
            Implies(
                And((atom_lit(Atom(proves, (x, y))), atom_lit(Atom(proves, (y, z))))),
                atom_lit(Atom(proves, (x, z))),
            )
        )
        builder.hard(Not(atom_lit(Atom(rule_proves, (r, r)))))
        builder.hard(
            Implies(
                And((atom_lit(Atom(rule_proves, (r, r2))),
                     atom_lit(Atom(rule_proves, (r2, r3))))),
                atom_lit(Atom(rule_proves, (r, r3))),
            )
        )
        builder.hard(
            Implies(
                And((
                    atom_lit(Atom(proves, (x, y))),
                    atom_lit(Atom(inrhs, (x, r))),
                    atom_lit(Atom(inlhs, (y, r2))),
                )),
                atom_lit(Atom(rule_proves, (r, r2))),
            )
        )

    # (7) false-unless-proven completion
    if flags.fup:
        candidate_proof = builder.predicate("candidateProof", ("node_id", "node_id"))
        rhs_source = builder.predicate("rhsSource", ("rule_id", "node_id"))
        for cx, cy in candidate_pairs:
            builder.hard(
                Equiv(
                    atom_lit(Atom(candidate_proof, (cx, cy))),
                    And((atom_lit(Atom(proves, (cx, cy))),
                         atom_lit(Atom(holds, (cx,))))),
                )
            )
        rhs_of: dict[str, list[Constant]] = {}
        for gi, rule in enumerate(rules, start=1):
            rc = rule_const[rule.rule_id]
            for node in rule.rhs_nodes():
                nc = node_const[(gi, node.id)]
                builder.hard(
                    Equiv(
                        atom_lit(Atom(rhs_source, (rc, nc))),
                        And((atom_lit(Atom(rhs_holds, (rc,))),
                             atom_lit(Atom(inrhs, (nc, rc))))),
                    )
                )
                rhs_of.setdefault(nc.name, []).append(rc)
        setup_ids = {node_const[(0, n.id)].name for n in question.setup_nodes()}
        for cy, _, _ in node_info:
            if cy.name in setup_ids:
                continue
            disjuncts: list[Formula] = [
                atom_lit(Atom(candidate_proof, (cx, cy)))
                for cx in incoming.get(cy.name, [])
            ]
            disjuncts.extend(
                atom_lit(Atom(rhs_source, (rc, cy))) for rc in rhs_of.get(cy.name, [])
            )
            holds_lit = atom_lit(Atom(holds, (cy,)))
            if disjuncts:
                builder.hard(
                    Implies(holds_lit,
                            Or(tuple(disjuncts)) if len(disjuncts) > 1 else disjuncts[0])
                )
            else:
                builder.hard(Not(holds_lit))
        for rule in rules:
            rc = rule_const[rule.rule_id]
            builder.hard(
                Implies(atom_lit(Atom(rhs_holds, (rc,))),
                        atom_lit(Atom(lhs_holds, (rc,))))
            )
        for gi, rule in enumerate(rules, start=1):
            rc = rule_const[rule.rule_id]
            supports = [
                atom_lit(Atom(holds, (node_const[(gi, n.id)],)))
                for n in rule.lhs_nodes()
            ]
            builder.hard(
                Implies(atom_lit(Atom(lhs_holds, (rc,))),
                        Or(tuple(supports)) if len(supports) > 1 else supports[0])
            )

    # (8) result() as the conjunction of query-node existence
    query_lits = [
        atom_lit(Atom(holds, (node_const[(0, n.id)],)))
        for n in question.query_nodes()
    ]
    result_lit = atom_lit(Atom(result, ()))
    if query_lits:
        builder.hard(Equiv(result_lit, conjoin(query_lits)))
    else:
        builder.hard(result_lit)

    return builder.build()


def encode(
    question: QuestionGraph,
    rules: list[KbRuleGraph],
    table: EntailmentTable,
    formulation: Formulation,
    flags: PralineFlags = PralineFlags(),
    config: EncoderConfig = DEFAULT_CONFIG,
) -> MlnProgram:
    if formulation is Formulation.FO:
        return encode_fo(question, rules, table, config)
    if formulation is Formulation.ER:
        return encode_er(question, rules, table, config)
    return encode_praline(question, rules, table, flags, config)
