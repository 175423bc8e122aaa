"""Propositional SAT with solve-under-assumptions, backbones, and the
incremental backbone-freezing reduction of ground networks.

Variables are positive integers; literals are signed ints (DIMACS style).
The solver is conflict-driven (two watched literals, first-UIP learning,
activity-ordered decisions) and fully deterministic: identical clause sets
and assumptions always yield identical results.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .errors import HardContradiction, Unsatisfiable
from .grounding import GroundNetwork
from .logic import GroundClause, glit_atom, glit_negated, make_glit

_VAR_DECAY = 1.0 / 0.95
_ACTIVITY_RESCALE = 1e100


class SatInstance:
    """Incremental CNF container with a CDCL search procedure.

    Clauses may be added at any time; the literal content of an added
    clause is never modified afterwards (watch bookkeeping permutes the
    internal ordering only).
    """

    def __init__(self, clauses: Iterable[Sequence[int]] = ()):
        self._clauses: list[list[int]] = []
        self._watches: dict[int, list[int]] = {}
        self._unit_facts: list[int] = []
        self._num_vars = 0
        self._has_empty_clause = False
        self._activity: list[float] = [0.0]
        self._var_inc = 1.0
        # search state, rebuilt by each solve() call
        self._values: list[int] = [0]
        self._level: list[int] = [0]
        self._reason: list[Optional[int]] = [None]
        self._trail: list[int] = []
        self._trail_lim: list[int] = []
        self._qhead = 0
        for clause in clauses:
            self.add_clause(clause)

    @property
    def num_vars(self) -> int:
        return self._num_vars

    @property
    def num_clauses(self) -> int:
        return len(self._clauses)

    def _ensure_var(self, var: int):
        while self._num_vars < var:
            self._num_vars += 1
            self._activity.append(0.0)
            self._values.append(0)
            self._level.append(0)
            self._reason.append(None)

    def add_clause(self, literals: Sequence[int]):
        seen: dict[int, None] = {}
        for lit in literals:
            if lit == 0:
                raise ValueError("literal 0 is not allowed")
            if -lit in seen:
                return  # tautology; always satisfied
            seen.setdefault(lit, None)
        lits = list(seen)
        for lit in lits:
            self._ensure_var(abs(lit))
        if not lits:
            self._has_empty_clause = True
            return
        if len(lits) == 1:
            self._unit_facts.append(lits[0])
            return
        ci = len(self._clauses)
        self._clauses.append(lits)
        self._watches.setdefault(lits[0], []).append(ci)
        self._watches.setdefault(lits[1], []).append(ci)

    # -- search ------------------------------------------------------------

    def _value(self, lit: int) -> int:
        v = self._values[abs(lit)]
        return v if lit > 0 else -v

    def _enqueue(self, lit: int, reason: Optional[int]):
        var = abs(lit)
        self._values[var] = 1 if lit > 0 else -1
        self._level[var] = len(self._trail_lim)
        self._reason[var] = reason
        self._trail.append(lit)

    def _propagate(self) -> Optional[list[int]]:
        values = self._values
        clauses = self._clauses
        watches = self._watches
        while self._qhead < len(self._trail):
            p = self._trail[self._qhead]
            self._qhead += 1
            false_lit = -p
            ws = watches.get(false_lit)
            if not ws:
                continue
            j = 0
            i = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                clause = clauses[ci]
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                fv = values[abs(first)]
                if first < 0:
                    fv = -fv
                if fv == 1:
                    ws[j] = ci
                    j += 1
                    continue
                moved = False
                for k in range(2, len(clause)):
                    lk = clause[k]
                    kv = values[abs(lk)]
                    if lk < 0:
                        kv = -kv
                    if kv != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        watches.setdefault(clause[1], []).append(ci)
                        moved = True
                        break
                if moved:
                    continue
                ws[j] = ci
                j += 1
                if fv == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    return clause
                self._enqueue(first, ci)
            del ws[j:]
        return None

    def _bump(self, var: int):
        self._activity[var] += self._var_inc
        if self._activity[var] > _ACTIVITY_RESCALE:
            inv = 1.0 / _ACTIVITY_RESCALE
            for v in range(1, self._num_vars + 1):
                self._activity[v] *= inv
            self._var_inc *= inv

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        """First-UIP learned clause (asserting literal first) and backjump level."""
        cur_level = len(self._trail_lim)
        seen = [False] * (self._num_vars + 1)
        rest: list[int] = []
        counter = 0
        p: Optional[int] = None
        idx = len(self._trail) - 1
        clause = conflict
        while True:
            skip_var = abs(p) if p is not None else 0
            for q in clause:
                v = abs(q)
                if v == skip_var or seen[v] or self._level[v] == 0:
                    continue
                seen[v] = True
                self._bump(v)
                if self._level[v] == cur_level:
                    counter += 1
                else:
                    rest.append(q)
            while not seen[abs(self._trail[idx])]:
                idx -= 1
            p = self._trail[idx]
            v = abs(p)
            seen[v] = False
            counter -= 1
            idx -= 1
            if counter == 0:
                break
            reason = self._reason[v]
            assert reason is not None, "resolved through a decision"
            clause = self._clauses[reason]
        learnt = [-p] + rest
        bt_level = 0
        for q in rest:
            lvl = self._level[abs(q)]
            if lvl > bt_level:
                bt_level = lvl
        return learnt, bt_level

    def _cancel_until(self, level: int):
        while len(self._trail_lim) > level:
            bound = self._trail_lim.pop()
            while len(self._trail) > bound:
                lit = self._trail.pop()
                self._values[abs(lit)] = 0
                self._reason[abs(lit)] = None
        self._qhead = min(self._qhead, len(self._trail))

    def _decide_var(self) -> int:
        best = 0
        best_act = -1.0
        values = self._values
        activity = self._activity
        for v in range(1, self._num_vars + 1):
            if values[v] == 0 and activity[v] > best_act:
                best = v
                best_act = activity[v]
        return best

    def solve(self, assumptions: Sequence[int] = ()) -> Optional[list[bool]]:
        """Model as list indexed by var-1, or None when UNSAT (under assumptions)."""
        if self._has_empty_clause:
            return None
        for lit in assumptions:
            self._ensure_var(abs(lit))
        # full restart: root-level facts first
        self._trail.clear()
        self._trail_lim.clear()
        self._qhead = 0
        for v in range(1, self._num_vars + 1):
            self._values[v] = 0
            self._reason[v] = None
        for lit in self._unit_facts:
            val = self._value(lit)
            if val == -1:
                return None
            if val == 0:
                self._enqueue(lit, None)
        if self._propagate() is not None:
            self._has_empty_clause = True  # conflict at level 0 is permanent
            return None

        while True:
            level = len(self._trail_lim)
            if level < len(assumptions):
                p = assumptions[level]
                val = self._value(p)
                if val == -1:
                    self._cancel_until(0)
                    return None
                self._trail_lim.append(len(self._trail))
                if val == 0:
                    self._enqueue(p, None)
            else:
                var = self._decide_var()
                if var == 0:
                    model = [self._values[v] == 1 for v in range(1, self._num_vars + 1)]
                    self._cancel_until(0)
                    return model
                self._trail_lim.append(len(self._trail))
                self._enqueue(var, None)

            while True:
                conflict = self._propagate()
                if conflict is None:
                    break
                if not self._trail_lim:
                    self._has_empty_clause = True
                    return None
                learnt, bt_level = self._analyze(conflict)
                self._var_inc *= _VAR_DECAY
                self._cancel_until(bt_level)
                if len(learnt) == 1:
                    self._unit_facts.append(learnt[0])
                    self._enqueue(learnt[0], None)
                else:
                    ci = len(self._clauses)
                    self._clauses.append(learnt)
                    # watch the asserting literal and a highest-level one
                    for k in range(2, len(learnt)):
                        if self._level[abs(learnt[k])] > self._level[abs(learnt[1])]:
                            learnt[1], learnt[k] = learnt[k], learnt[1]
                    self._watches.setdefault(learnt[0], []).append(ci)
                    self._watches.setdefault(learnt[1], []).append(ci)
                    self._enqueue(learnt[0], ci)


def backbone(clauses: Iterable[Sequence[int]]) -> frozenset[int]:
    """Literals true in every model of a satisfiable clause set.

    One model seeds the candidate set; each SAT call under a negated
    candidate either confirms that candidate (UNSAT) or prunes every
    candidate disagreeing with the new model.
    """
    return backbone_of_instance(SatInstance(clauses))


def reduce_grounding(network: GroundNetwork) -> GroundNetwork:
    """Freeze hard-backbone atoms and simplify both clause sets against them.

    Walks the hard formulas in program order, accumulating their ground
    clauses (simplified by atoms frozen so far) and freezing the backbone
    of each accumulation.  Soft-evidence atoms are never frozen, even when
    the hard constraints pin them.  The distribution over free atoms is
    unchanged.
    """
    table = network.table.copy()
    inst = SatInstance()
    freeze_steps: list[tuple[int, int]] = []

    hard_groups: dict[int, list[GroundClause]] = {}
    order: list[int] = []
    for clause, origin in zip(network.hard, network.hard_origin):
        if origin not in hard_groups:
            hard_groups[origin] = []
            order.append(origin)
        hard_groups[origin].append(clause)

    protected = network.soft_evidence_atoms

    for origin in order:
        added = False
        for clause in hard_groups[origin]:
            lits = _simplify_lits(clause.literals, table)
            if lits is None:
                continue
            if not lits:
                raise HardContradiction(
                    "hard clause from formula %d falsified by frozen atoms" % origin
                )
            inst.add_clause(lits)
            added = True
        if not added:
            continue
        frozen_now = 0
        for lit in sorted(backbone_of_instance(inst), key=abs):
            atom_id = glit_atom(lit)
            if atom_id in protected or table.is_frozen(atom_id):
                continue
            table.freeze(atom_id, not glit_negated(lit))
            frozen_now += 1
        freeze_steps.append((origin, frozen_now))

    new_hard: list[GroundClause] = []
    new_hard_origin: list[int] = []
    seen_hard: set[tuple[int, ...]] = set()
    for clause, origin in zip(network.hard, network.hard_origin):
        lits = _simplify_lits(clause.literals, table)
        if lits is None:
            continue
        if not lits:
            raise HardContradiction("hard clause falsified by frozen atoms")
        key = tuple(lits)
        if key in seen_hard:
            continue
        seen_hard.add(key)
        new_hard.append(GroundClause(key, None))
        new_hard_origin.append(origin)

    new_soft: list[GroundClause] = []
    new_soft_origin: list[int] = []
    for clause, origin in zip(network.soft, network.soft_origin):
        lits = _simplify_lits(clause.literals, table)
        if not lits:
            continue  # satisfied or falsified: a constant factor either way
        new_soft.append(GroundClause(tuple(lits), clause.weight))
        new_soft_origin.append(origin)

    return GroundNetwork(
        table=table,
        hard=new_hard,
        hard_origin=new_hard_origin,
        soft=new_soft,
        soft_origin=new_soft_origin,
        soft_evidence_atoms=network.soft_evidence_atoms,
        freeze_steps=tuple(freeze_steps),
    )


def backbone_of_instance(inst: SatInstance) -> frozenset[int]:
    """Backbone over the instance's current clauses (reusing learned clauses)."""
    model = inst.solve()
    if model is None:
        raise Unsatisfiable("hard clause accumulation is unsatisfiable")
    occurring = sorted({abs(l) for c in inst._clauses for l in c}
                       | {abs(l) for l in inst._unit_facts})
    candidates = {v: model[v - 1] for v in occurring}
    confirmed: set[int] = set()
    while candidates:
        var = min(candidates)
        lit = var if candidates[var] else -var
        result = inst.solve([-lit])
        if result is None:
            confirmed.add(lit)
            del candidates[var]
        else:
            for v in [v for v, val in candidates.items() if result[v - 1] != val]:
                del candidates[v]
    return frozenset(confirmed)


def _simplify_lits(literals: tuple[int, ...], table) -> Optional[list[int]]:
    """Clause literals with frozen atoms resolved; None when satisfied."""
    out = []
    for lit in literals:
        atom_id = glit_atom(lit)
        if table.is_frozen(atom_id):
            value = table.frozen_value(atom_id)
            if value != glit_negated(lit):
                return None  # literal is true
            continue  # literal is false; drop it
        out.append(lit)
    return out
