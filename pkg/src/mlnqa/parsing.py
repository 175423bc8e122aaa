"""Parsers and serializers for the four on-disk formats.

.mln  program: sort/pred declarations and one formula per line
.db   evidence: ground atoms, optionally negated or soft
.qg   question and rule graphs
.ent  directed lexical entailment scores

All formats are line oriented and allow // comments.  Parse errors carry a
SourceSpan pointing inside the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import OutOfRange, ParseError
from .graphs import GraphEdge, GraphNode, KbRuleGraph, QuestionGraph
from .logic import (
    And,
    Atom,
    BUILTIN_SORTS,
    Constant,
    Equiv,
    Evidence,
    Exists,
    Formula,
    Implies,
    Lit,
    Literal,
    MlnError,
    MlnProgram,
    Not,
    Or,
    PredicateDecl,
    Variable,
    WeightedFormula,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col_start: int
    col_end: int

    def __str__(self):
        return "%s:%d:%d-%d" % (self.file, self.line, self.col_start, self.col_end)


def normalize_string(s: str) -> str:
    """Canonical form for lexical comparison: trimmed, case-insensitive."""
    return s.strip().casefold()


class EntailmentTable:
    """Directed (from, to) -> score in [0,1]; missing pairs score 0.

    Self-pairs default to 1.0 unless explicitly overridden.  Keys are
    compared case-insensitively after trimming.
    """

    def __init__(self, scores: Optional[dict[tuple[str, str], float]] = None):
        self._scores: dict[tuple[str, str], float] = {}
        if scores:
            for (a, b), s in scores.items():
                self.set(a, b, s)

    def set(self, a: str, b: str, score: float):
        if not 0.0 <= score <= 1.0:
            raise OutOfRange("entailment score %g not in [0,1]" % score)
        self._scores[(normalize_string(a), normalize_string(b))] = score

    def lookup(self, a: str, b: str) -> Optional[float]:
        """Explicit or default-reflexive score, None when genuinely absent."""
        a = normalize_string(a)
        b = normalize_string(b)
        found = self._scores.get((a, b))
        if found is not None:
            return found
        if a == b:
            return 1.0
        return None

    def score(self, a: str, b: str) -> float:
        found = self.lookup(a, b)
        return 0.0 if found is None else found

    def items(self):
        return sorted(self._scores.items())

    def __eq__(self, other):
        return isinstance(other, EntailmentTable) and self._scores == other._scores

    def __len__(self):
        return len(self._scores)


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<equivop><=>)
  | (?P<implop>=>)
  | (?P<punct>[(),={}*.!^])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | string | op
    text: str
    span: SourceSpan


class LineLexer:
    def __init__(self, filename: str):
        self.filename = filename

    def strip_comment(self, line: str) -> str:
        out = []
        in_string = False
        i = 0
        while i < len(line):
            ch = line[i]
            if in_string:
                out.append(ch)
                if ch == "\\" and i + 1 < len(line):
                    out.append(line[i + 1])
                    i += 1
                elif ch == '"':
                    in_string = False
            else:
                if ch == '"':
                    in_string = True
                    out.append(ch)
                elif ch == "/" and line[i : i + 2] == "//":
                    break
                else:
                    out.append(ch)
            i += 1
        return "".join(out)

    def tokens(self, line: str, lineno: int) -> list[Token]:
        text = self.strip_comment(line)
        out = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                span = SourceSpan(self.filename, lineno, pos + 1, pos + 2)
                raise ParseError("unexpected character %r" % text[pos], span)
            pos = m.end()
            kind = m.lastgroup
            if kind == "ws":
                continue
            span = SourceSpan(self.filename, lineno, m.start() + 1, m.end())
            if kind in ("equivop", "implop", "punct"):
                out.append(Token("op", m.group(), span))
            else:
                out.append(Token(kind, m.group(), span))
        return out


class TokenCursor:
    def __init__(self, tokens: list[Token], filename: str, lineno: int, line_len: int):
        self.tokens = tokens
        self.pos = 0
        self._eol_span = SourceSpan(filename, lineno, line_len + 1, line_len + 1)

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self._eol_span)
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError("expected %r, found %r" % (text, tok.text), tok.span)
        return tok

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "op" and tok.text == text

    def at_ident(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "ident" and tok.text == text

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    def require_done(self):
        tok = self.peek()
        if tok is not None:
            raise ParseError("trailing input %r" % tok.text, tok.span)


def _unquote(text: str) -> str:
    body = text[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


_BARE_CONSTANT_RE = re.compile(r"[A-Z][A-Za-z0-9_']*\Z")


def _logical_lines(text: str, lexer: LineLexer):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = lexer.tokens(raw, lineno)
        if tokens:
            yield TokenCursor(tokens, lexer.filename, lineno, len(raw)), lineno


# --- raw formula AST (pre sort-resolution) -----------------------------------


class _RawAtom:
    __slots__ = ("name", "args", "span")

    def __init__(self, name, args, span):
        self.name = name
        self.args = args  # list of Token (ident or string)
        self.span = span


class _RawNode:
    __slots__ = ("op", "parts")

    def __init__(self, op, parts):
        self.op = op  # not | and | or | implies | equiv | exists | atom
        self.parts = parts


def _parse_formula(cur: TokenCursor) -> _RawNode:
    return _parse_equiv(cur)


def _parse_equiv(cur: TokenCursor) -> _RawNode:
    left = _parse_implies(cur)
    while cur.at_op("<=>"):
        cur.next()
        right = _parse_implies(cur)
        left = _RawNode("equiv", [left, right])
    return left


def _parse_implies(cur: TokenCursor) -> _RawNode:
    left = _parse_or(cur)
    if cur.at_op("=>"):
        cur.next()
        right = _parse_implies(cur)
        return _RawNode("implies", [left, right])
    return left


def _parse_or(cur: TokenCursor) -> _RawNode:
    parts = [_parse_and(cur)]
    while cur.at_ident("v"):
        cur.next()
        parts.append(_parse_and(cur))
    return parts[0] if len(parts) == 1 else _RawNode("or", parts)


def _parse_and(cur: TokenCursor) -> _RawNode:
    parts = [_parse_unary(cur)]
    while cur.at_op("^"):
        cur.next()
        parts.append(_parse_unary(cur))
    return parts[0] if len(parts) == 1 else _RawNode("and", parts)


def _parse_unary(cur: TokenCursor) -> _RawNode:
    if cur.at_op("!"):
        cur.next()
        return _RawNode("not", [_parse_unary(cur)])
    if cur.at_ident("EXIST"):
        cur.next()
        names = [cur.next()]
        if names[0].kind != "ident":
            raise ParseError("expected variable name after EXIST", names[0].span)
        while cur.at_op(","):
            cur.next()
            tok = cur.next()
            if tok.kind != "ident":
                raise ParseError("expected variable name", tok.span)
            names.append(tok)
        cur.expect("(")
        body = _parse_formula(cur)
        cur.expect(")")
        return _RawNode("exists", [names, body])
    if cur.at_op("("):
        cur.next()
        body = _parse_formula(cur)
        cur.expect(")")
        return body
    tok = cur.next()
    if tok.kind != "ident":
        raise ParseError("expected an atom, found %r" % tok.text, tok.span)
    cur.expect("(")
    args = []
    if not cur.at_op(")"):
        while True:
            arg = cur.next()
            if arg.kind not in ("ident", "string"):
                raise ParseError("expected a term, found %r" % arg.text, arg.span)
            args.append(arg)
            if cur.at_op(","):
                cur.next()
                continue
            break
    cur.expect(")")
    return _RawNode("atom", [_RawAtom(tok.text, args, tok.span)])


def _is_variable_name(name: str) -> bool:
    return name[0].islower() or name[0] == "_"


class _FormulaResolver:
    """Assigns sorts to variables and constants from predicate slots."""

    def __init__(self, program_sorts, predicates):
        self.sorts = program_sorts
        self.predicates = predicates
        self.var_sorts: dict[str, str] = {}
        self.exist_bound: set[str] = set()

    def resolve(self, node: _RawNode) -> Formula:
        op = node.op
        if op == "atom":
            return self._atom(node.parts[0])
        if op == "not":
            return Not(self.resolve(node.parts[0]))
        if op == "and":
            return And(tuple(self.resolve(p) for p in node.parts))
        if op == "or":
            return Or(tuple(self.resolve(p) for p in node.parts))
        if op == "implies":
            return Implies(self.resolve(node.parts[0]), self.resolve(node.parts[1]))
        if op == "equiv":
            return Equiv(self.resolve(node.parts[0]), self.resolve(node.parts[1]))
        if op == "exists":
            names, body = node.parts
            for tok in names:
                if not _is_variable_name(tok.text):
                    raise ParseError(
                        "EXIST variable %r must start lowercase" % tok.text, tok.span
                    )
                if tok.text in self.exist_bound or tok.text in self.var_sorts:
                    raise ParseError(
                        "EXIST rebinds variable %r" % tok.text, tok.span
                    )
                self.exist_bound.add(tok.text)
            resolved_body = self.resolve(body)
            variables = []
            for tok in names:
                sort = self.var_sorts.get(tok.text)
                if sort is None:
                    raise ParseError(
                        "EXIST variable %r never used in body" % tok.text, tok.span
                    )
                variables.append(Variable(tok.text, sort))
            return Exists(tuple(variables), resolved_body)
        raise AssertionError(op)

    def _atom(self, raw: _RawAtom) -> Lit:
        decl = self.predicates.get(raw.name)
        if decl is None:
            raise ParseError("undeclared predicate %r" % raw.name, raw.span)
        if len(raw.args) != decl.arity:
            raise ParseError(
                "%s expects %d arguments, got %d" % (raw.name, decl.arity, len(raw.args)),
                raw.span,
            )
        terms = []
        for tok, sort in zip(raw.args, decl.arg_sorts):
            if tok.kind == "string":
                name = _unquote(tok.text)
                self._check_constant(name, sort, tok)
                terms.append(Constant(name, sort))
            elif _is_variable_name(tok.text):
                known = self.var_sorts.get(tok.text)
                if known is None:
                    self.var_sorts[tok.text] = sort
                elif known != sort:
                    raise ParseError(
                        "variable %r used with sorts %s and %s" % (tok.text, known, sort),
                        tok.span,
                    )
                terms.append(Variable(tok.text, sort))
            else:
                self._check_constant(tok.text, sort, tok)
                terms.append(Constant(tok.text, sort))
        return Lit(Literal(Atom(decl, tuple(terms))))

    def _check_constant(self, name: str, sort: str, tok: Token):
        if name not in self.sorts.get(sort, ()):
            raise ParseError(
                "undeclared constant %r in sort %s" % (name, sort), tok.span
            )


# --- .mln --------------------------------------------------------------------


def parse_mln(text: str, filename: str = "<mln>") -> MlnProgram:
    lexer = LineLexer(filename)
    sorts: dict[str, tuple[str, ...]] = {name: () for name in BUILTIN_SORTS}
    declared_sorts: set[str] = set()
    predicates: dict[str, PredicateDecl] = {}
    formulas: list[WeightedFormula] = []

    for cur, lineno in _logical_lines(text, lexer):
        head = cur.peek()
        if head.kind == "ident" and head.text == "sort":
            cur.next()
            name_tok = cur.next()
            if name_tok.kind != "ident":
                raise ParseError("expected sort name", name_tok.span)
            if name_tok.text in declared_sorts:
                raise ParseError("sort %r redeclared" % name_tok.text, name_tok.span)
            declared_sorts.add(name_tok.text)
            cur.expect("=")
            cur.expect("{")
            constants = []
            if not cur.at_op("}"):
                while True:
                    tok = cur.next()
                    if tok.kind == "string":
                        constants.append(_unquote(tok.text))
                    elif tok.kind == "ident":
                        constants.append(tok.text)
                    else:
                        raise ParseError("expected a constant", tok.span)
                    if cur.at_op(","):
                        cur.next()
                        continue
                    break
            cur.expect("}")
            cur.require_done()
            if len(set(constants)) != len(constants):
                raise ParseError("duplicate constant in sort %r" % name_tok.text,
                                 name_tok.span)
            sorts[name_tok.text] = tuple(constants)
        elif head.kind == "ident" and head.text == "pred":
            cur.next()
            name_tok = cur.next()
            if name_tok.kind != "ident":
                raise ParseError("expected predicate name", name_tok.span)
            if name_tok.text in predicates:
                raise ParseError("predicate %r redeclared" % name_tok.text, name_tok.span)
            closed_world = False
            if cur.at_op("*"):
                cur.next()
                closed_world = True
            cur.expect("(")
            arg_sorts = []
            if not cur.at_op(")"):
                while True:
                    tok = cur.next()
                    if tok.kind != "ident":
                        raise ParseError("expected a sort name", tok.span)
                    if tok.text not in sorts:
                        raise ParseError("unknown sort %r" % tok.text, tok.span)
                    arg_sorts.append(tok.text)
                    if cur.at_op(","):
                        cur.next()
                        continue
                    break
            cur.expect(")")
            cur.require_done()
            predicates[name_tok.text] = PredicateDecl(
                name_tok.text, tuple(arg_sorts), closed_world
            )
        else:
            weight: Optional[float] = None
            if head.kind == "number":
                weight = float(cur.next().text)
            raw = _parse_formula(cur)
            if weight is None:
                dot = cur.next()
                if dot.text != ".":
                    raise ParseError(
                        "hard formula must end with '.'", dot.span
                    )
            cur.require_done()
            resolver = _FormulaResolver(sorts, predicates)
            formula = resolver.resolve(raw)
            try:
                formulas.append(WeightedFormula(formula, weight))
            except MlnError as exc:
                raise ParseError(str(exc), SourceSpan(filename, lineno, 1, 1))

    try:
        return MlnProgram(
            sorts=sorts, predicates=predicates, formulas=tuple(formulas)
        )
    except MlnError as exc:
        raise ParseError(str(exc), SourceSpan(filename, 1, 1, 1))


def _term_text(term) -> str:
    if isinstance(term, Variable):
        return term.name
    if _BARE_CONSTANT_RE.match(term.name):
        return term.name
    return _quote(term.name)


_PREC_EQUIV, _PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_NOT, _PREC_ATOM = range(6)


def format_formula(formula: Formula) -> str:
    def fmt(f, required: int) -> str:
        if isinstance(f, Lit):
            text = ("!" if f.literal.negated else "") + _atom_text(f.literal.atom)
            prec = _PREC_ATOM
        elif isinstance(f, Not):
            text = "!" + fmt(f.body, _PREC_ATOM)
            prec = _PREC_NOT
        elif isinstance(f, And):
            text = " ^ ".join(fmt(p, _PREC_AND + 1) for p in f.parts)
            prec = _PREC_AND
        elif isinstance(f, Or):
            text = " v ".join(fmt(p, _PREC_OR + 1) for p in f.parts)
            prec = _PREC_OR
        elif isinstance(f, Implies):
            text = "%s => %s" % (
                fmt(f.antecedent, _PREC_IMPLIES + 1),
                fmt(f.consequent, _PREC_IMPLIES),
            )
            prec = _PREC_IMPLIES
        elif isinstance(f, Equiv):
            text = "%s <=> %s" % (
                fmt(f.left, _PREC_EQUIV + 1),
                fmt(f.right, _PREC_EQUIV + 1),
            )
            prec = _PREC_EQUIV
        elif isinstance(f, Exists):
            text = "EXIST %s (%s)" % (
                ",".join(v.name for v in f.variables),
                fmt(f.body, _PREC_EQUIV),
            )
            prec = _PREC_ATOM
        else:
            raise AssertionError(f)
        if prec < required:
            return "(" + text + ")"
        return text

    return fmt(formula, _PREC_EQUIV)


def _atom_text(atom: Atom) -> str:
    return "%s(%s)" % (atom.pred.name, ",".join(_term_text(t) for t in atom.args))


def serialize_mln(program: MlnProgram) -> str:
    lines = []
    for name, constants in program.sorts.items():
        if not constants and name in BUILTIN_SORTS:
            continue
        body = ", ".join(
            c if _BARE_CONSTANT_RE.match(c) else _quote(c) for c in constants
        )
        lines.append("sort %s = {%s}" % (name, body))
    for decl in program.predicates.values():
        star = "*" if decl.closed_world else ""
        lines.append("pred %s%s(%s)" % (decl.name, star, ", ".join(decl.arg_sorts)))
    for wf in program.formulas:
        body = format_formula(wf.formula)
        if wf.is_hard:
            lines.append(body + ".")
        else:
            lines.append("%r %s" % (wf.weight, body))
    return "\n".join(lines) + "\n"


# --- .db ---------------------------------------------------------------------


def parse_db(text: str, program: MlnProgram, filename: str = "<db>") -> Evidence:
    lexer = LineLexer(filename)
    hard_true: set[Atom] = set()
    hard_false: set[Atom] = set()
    soft: dict[Atom, float] = {}

    for cur, lineno in _logical_lines(text, lexer):
        negated = False
        if cur.at_op("!"):
            cur.next()
            negated = True
        raw = _parse_unary(cur)
        if raw.op != "atom":
            span = SourceSpan(filename, lineno, 1, 1)
            raise ParseError("expected a ground atom", span)
        resolver = _FormulaResolver(program.sorts, program.predicates)
        lit = resolver._atom(raw.parts[0])
        atom = lit.literal.atom
        if not atom.is_ground():
            raise ParseError("evidence atom %s is not ground" % atom, raw.parts[0].span)
        prob: Optional[float] = None
        if cur.at_ident("p"):
            cur.next()
            cur.expect("=")
            tok = cur.next()
            if tok.kind != "number":
                raise ParseError("expected a probability", tok.span)
            prob = float(tok.text)
            if not 0.0 < prob < 1.0:
                raise ParseError("soft probability %g not in (0,1)" % prob, tok.span)
        cur.require_done()
        if prob is not None:
            if negated:
                raise ParseError(
                    "soft evidence cannot be negated", raw.parts[0].span
                )
            soft[atom] = prob
        elif negated:
            hard_false.add(atom)
        else:
            hard_true.add(atom)

    return Evidence(
        hard_true=frozenset(hard_true),
        hard_false=frozenset(hard_false),
        soft=soft,
    )


def serialize_db(evidence: Evidence) -> str:
    lines = []
    for atom in sorted(evidence.hard_true, key=str):
        lines.append(_atom_text(atom))
    for atom in sorted(evidence.hard_false, key=str):
        lines.append("!" + _atom_text(atom))
    for atom in sorted(evidence.soft, key=str):
        lines.append("%s p=%r" % (_atom_text(atom), evidence.soft[atom]))
    return "\n".join(lines) + "\n"


# --- .qg ---------------------------------------------------------------------


def parse_qg(
    text: str, filename: str = "<qg>"
) -> tuple[list[QuestionGraph], list[KbRuleGraph]]:
    """All question graphs and rule graphs in the document, in file order.

    A multiple-choice question file holds one `graph question` block per
    answer option; a KB file holds only `graph rule` blocks.
    """
    lexer = LineLexer(filename)
    questions: list[QuestionGraph] = []
    rules: list[KbRuleGraph] = []

    kind: Optional[str] = None
    rule_id = ""
    confidence = 0.9
    nodes: list[GraphNode] = []
    edges: list[GraphEdge] = []
    node_ids: set[str] = set()
    open_span: Optional[SourceSpan] = None

    def flush():
        nonlocal kind, nodes, edges, node_ids
        if kind is None:
            return
        try:
            if kind == "question":
                questions.append(QuestionGraph(tuple(nodes), tuple(edges)))
            else:
                rules.append(
                    KbRuleGraph(rule_id, confidence, tuple(nodes), tuple(edges))
                )
        except MlnError as exc:
            raise ParseError(str(exc), open_span)
        nodes = []
        edges = []
        node_ids = set()
        kind = None

    for cur, lineno in _logical_lines(text, lexer):
        head = cur.next()
        if head.kind != "ident":
            raise ParseError("expected graph/node/edge", head.span)
        if head.text == "graph":
            flush()
            open_span = head.span
            what = cur.next()
            if what.text == "question":
                kind = "question"
            elif what.text == "rule":
                kind = "rule"
                id_tok = cur.next()
                if id_tok.kind != "ident":
                    raise ParseError("expected rule id", id_tok.span)
                rule_id = id_tok.text
                confidence = 0.9
                if cur.at_ident("conf"):
                    cur.next()
                    cur.expect("=")
                    tok = cur.next()
                    if tok.kind != "number":
                        raise ParseError("expected confidence value", tok.span)
                    confidence = float(tok.text)
                    if not 0.0 < confidence < 1.0:
                        raise ParseError(
                            "confidence %g not in (0,1)" % confidence, tok.span
                        )
            else:
                raise ParseError("expected 'question' or 'rule'", what.span)
            cur.require_done()
        elif head.text == "node":
            if kind is None:
                raise ParseError("node line before any graph header", head.span)
            id_tok = cur.next()
            if id_tok.kind != "ident":
                raise ParseError("expected node id", id_tok.span)
            if id_tok.text in node_ids:
                raise ParseError("duplicate node id %r" % id_tok.text, id_tok.span)
            node_ids.add(id_tok.text)
            kind_tok = cur.next()
            if kind_tok.text not in ("entity", "event"):
                raise ParseError("expected entity|event", kind_tok.span)
            label_tok = cur.next()
            if label_tok.kind != "string":
                raise ParseError("expected quoted node label", label_tok.span)
            role_kw = cur.next()
            if role_kw.kind != "ident" or role_kw.text != "role":
                raise ParseError("expected role=<role>", role_kw.span)
            cur.expect("=")
            role_tok = cur.next()
            legal = ("setup", "query") if kind == "question" else ("lhs", "rhs")
            if role_tok.text not in legal:
                raise ParseError(
                    "role %r illegal in a %s graph" % (role_tok.text, kind),
                    role_tok.span,
                )
            cur.require_done()
            nodes.append(
                GraphNode(
                    id_tok.text,
                    kind_tok.text,
                    normalize_string(_unquote(label_tok.text)),
                    role_tok.text,
                )
            )
        elif head.text == "edge":
            if kind is None:
                raise ParseError("edge line before any graph header", head.span)
            label_tok = cur.next()
            if label_tok.kind != "ident":
                raise ParseError("expected edge label", label_tok.span)
            src = cur.next()
            dst = cur.next()
            if src.kind != "ident" or dst.kind != "ident":
                raise ParseError("expected node ids", src.span)
            for tok in (src, dst):
                if tok.text not in node_ids:
                    raise ParseError(
                        "edge references missing node %r" % tok.text, tok.span
                    )
            cur.require_done()
            edges.append(GraphEdge(label_tok.text, src.text, dst.text))
        else:
            raise ParseError("expected graph/node/edge", head.span)
    flush()
    return questions, rules


def serialize_qg(
    questions: list[QuestionGraph], rules: list[KbRuleGraph]
) -> str:
    lines = []

    def emit_graph(nodes, edges):
        for n in nodes:
            lines.append(
                "node %s %s %s role=%s" % (n.id, n.kind, _quote(n.label), n.role)
            )
        for e in edges:
            lines.append("edge %s %s %s" % (e.label, e.src, e.dst))

    for q in questions:
        lines.append("graph question")
        emit_graph(q.nodes, q.edges)
    for r in rules:
        lines.append("graph rule %s conf=%r" % (r.rule_id, r.confidence))
        emit_graph(r.nodes, r.edges)
    return "\n".join(lines) + "\n"


# --- .ent --------------------------------------------------------------------


def parse_ent(text: str, filename: str = "<ent>") -> EntailmentTable:
    lexer = LineLexer(filename)
    table = EntailmentTable()
    for cur, lineno in _logical_lines(text, lexer):
        head = cur.next()
        if head.kind != "ident" or head.text != "entails":
            raise ParseError("expected 'entails'", head.span)
        a = cur.next()
        b = cur.next()
        if a.kind != "string" or b.kind != "string":
            raise ParseError("expected quoted strings", a.span)
        score_tok = cur.next()
        if score_tok.kind != "number":
            raise ParseError("expected a score", score_tok.span)
        score = float(score_tok.text)
        if not 0.0 <= score <= 1.0:
            raise ParseError("score %g not in [0,1]" % score, score_tok.span)
        cur.require_done()
        table.set(_unquote(a.text), _unquote(b.text), score)
    return table


def serialize_ent(table: EntailmentTable) -> str:
    lines = [
        "entails %s %s %r" % (_quote(a), _quote(b), score)
        for (a, b), score in table.items()
    ]
    return "\n".join(lines) + "\n"
