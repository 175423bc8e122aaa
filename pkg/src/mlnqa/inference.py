"""Marginal inference over ground networks.

MC-SAT: each step keeps every currently satisfied soft clause with
probability 1 - exp(-w) and draws a near-uniform solution of the kept
clauses plus all hard clauses.  The solution sampler mixes WalkSAT and
simulated-annealing moves to find a solution, then randomizes it with a
Metropolis walk over the solution space (propose a uniform flip, accept
iff all clauses stay satisfied), whose stationary distribution is uniform.

enumerate_marginals is the exact oracle: it sums exp(sum of satisfied
soft weights) over every assignment satisfying the hard clauses.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AllHardViolated, SamplerStuck, TooLarge, Unsatisfiable
from .grounding import GroundNetwork

_WALKSAT_NOISE = 0.5
_MAX_RESTARTS = 10


@dataclass(frozen=True)
class McSatConfig:
    num_samples: int = 500
    flips_per_sample: int = 5000
    burn_in: int = 50
    sa_probability: float = 0.5
    sa_temperature: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_samples <= 0 or self.flips_per_sample <= 0:
            raise ValueError("sample and flip counts must be positive")
        if self.burn_in < 0 or self.burn_in >= self.num_samples:
            raise ValueError("burn_in must be in [0, num_samples)")
        if not 0.0 <= self.sa_probability <= 1.0:
            raise ValueError("sa_probability must be in [0,1]")


@dataclass
class MarginalResult:
    probabilities: dict[int, float]
    samples_used: int = 0
    wall_time: float = 0.0
    stats: dict = field(default_factory=dict)


class _ClauseState:
    """Mutable truth bookkeeping for a clause set over a boolean assignment."""

    __slots__ = ("clauses", "occ_pos", "occ_neg", "true_count", "unsat", "unsat_pos")

    def __init__(self, clauses: Sequence[Sequence[int]], num_atoms: int):
        self.clauses = [tuple(c) for c in clauses]
        self.occ_pos: list[list[int]] = [[] for _ in range(num_atoms)]
        self.occ_neg: list[list[int]] = [[] for _ in range(num_atoms)]
        for ci, clause in enumerate(self.clauses):
            for lit in clause:
                if lit > 0:
                    self.occ_pos[lit - 1].append(ci)
                else:
                    self.occ_neg[-lit - 1].append(ci)
        self.true_count = [0] * len(self.clauses)
        self.unsat: list[int] = []
        self.unsat_pos: dict[int, int] = {}

    def reset(self, state: list[bool]):
        counts = self.true_count
        for ci, clause in enumerate(self.clauses):
            n = 0
            for lit in clause:
                if lit > 0:
                    if state[lit - 1]:
                        n += 1
                elif not state[-lit - 1]:
                    n += 1
            counts[ci] = n
        self.unsat = [ci for ci, n in enumerate(counts) if n == 0]
        self.unsat_pos = {ci: i for i, ci in enumerate(self.unsat)}

    def _mark_sat(self, ci: int):
        pos = self.unsat_pos.pop(ci, None)
        if pos is None:
            return
        last = self.unsat.pop()
        if last != ci:
            self.unsat[pos] = last
            self.unsat_pos[last] = pos

    def _mark_unsat(self, ci: int):
        if ci not in self.unsat_pos:
            self.unsat_pos[ci] = len(self.unsat)
            self.unsat.append(ci)

    def flip(self, var: int, state: list[bool]):
        """Flip atom index var in state and update counts incrementally."""
        new_value = not state[var]
        state[var] = new_value
        counts = self.true_count
        if new_value:
            gains, losses = self.occ_pos[var], self.occ_neg[var]
        else:
            gains, losses = self.occ_neg[var], self.occ_pos[var]
        for ci in gains:
            counts[ci] += 1
            if counts[ci] == 1:
                self._mark_sat(ci)
        for ci in losses:
            counts[ci] -= 1
            if counts[ci] == 0:
                self._mark_unsat(ci)

    def break_count(self, var: int, state: list[bool]) -> int:
        """Clauses that would become unsatisfied by flipping var."""
        counts = self.true_count
        occ = self.occ_pos[var] if state[var] else self.occ_neg[var]
        n = 0
        for ci in occ:
            if counts[ci] == 1:
                n += 1
        return n

    def make_count(self, var: int, state: list[bool]) -> int:
        counts = self.true_count
        occ = self.occ_neg[var] if state[var] else self.occ_pos[var]
        n = 0
        for ci in occ:
            if counts[ci] == 0:
                n += 1
        return n


def sample_sat(
    clauses: Sequence[Sequence[int]],
    num_atoms: int,
    flips: int,
    rng: random.Random,
    sa_probability: float = 0.5,
    sa_temperature: float = 0.1,
) -> list[bool]:
    """Near-uniform solution of a satisfiable clause set over num_atoms atoms.

    Raises SamplerStuck once the per-try flip budget has been exhausted
    across the restart budget.
    """
    for clause in clauses:
        if not clause:
            raise Unsatisfiable("empty clause can never be satisfied")
    cs = _ClauseState(clauses, num_atoms)
    for _ in range(_MAX_RESTARTS):
        state = [rng.random() < 0.5 for _ in range(num_atoms)]
        cs.reset(state)
        used = 0
        while cs.unsat and used < flips:
            used += 1
            if rng.random() < sa_probability:
                _sa_move(cs, state, rng, sa_temperature)
            else:
                _walksat_move(cs, state, rng)
        if cs.unsat:
            continue
        _uniform_walk(cs, state, rng, min(flips - used, 8 * max(1, num_atoms)))
        return state
    raise SamplerStuck(
        "no solution found in %d flips over %d restarts" % (flips, _MAX_RESTARTS)
    )


def _walksat_move(cs: _ClauseState, state: list[bool], rng: random.Random):
    clause = cs.clauses[cs.unsat[rng.randrange(len(cs.unsat))]]
    if rng.random() < _WALKSAT_NOISE:
        lit = clause[rng.randrange(len(clause))]
        cs.flip(abs(lit) - 1, state)
        return
    best_vars = []
    best = None
    for lit in clause:
        var = abs(lit) - 1
        b = cs.break_count(var, state)
        if best is None or b < best:
            best = b
            best_vars = [var]
        elif b == best:
            best_vars.append(var)
    cs.flip(best_vars[rng.randrange(len(best_vars))], state)


def _sa_move(cs: _ClauseState, state: list[bool], rng: random.Random, temperature: float):
    var = rng.randrange(len(state))
    delta = cs.break_count(var, state) - cs.make_count(var, state)
    if delta <= 0 or rng.random() < math.exp(-delta / temperature):
        cs.flip(var, state)


def _uniform_walk(cs: _ClauseState, state: list[bool], rng: random.Random, steps: int):
    """Metropolis walk over the solution space: flip iff nothing breaks."""
    n = len(state)
    if n == 0:
        return
    for _ in range(steps):
        var = rng.randrange(n)
        if cs.break_count(var, state) == 0:
            cs.flip(var, state)


def mcsat(
    network: GroundNetwork,
    queries: Sequence[int],
    config: McSatConfig = McSatConfig(),
) -> MarginalResult:
    """MC-SAT marginal estimates for the given query atom ids.

    Weights must be non-negative (run normalize_negative_weights upstream)
    and the hard clauses satisfiable.  Frozen query atoms bypass sampling
    and report their frozen value.
    """
    start = time.monotonic()
    table = network.table
    for clause in network.soft:
        if clause.weight < 0:
            raise ValueError("mcsat requires non-negative soft weights")

    free_ids = table.free_ids()
    index = {atom_id: i for i, atom_id in enumerate(free_ids)}
    num_atoms = len(free_ids)

    def to_local(clause) -> tuple[int, ...]:
        out = []
        for lit in clause.literals:
            local = index[abs(lit) - 1] + 1
            out.append(local if lit > 0 else -local)
        return tuple(out)

    hard = [to_local(c) for c in network.hard]
    soft = [(to_local(c), c.weight) for c in network.soft]
    keep_prob = [1.0 - math.exp(-w) for _, w in soft]

    rng = random.Random(config.rng_seed)
    counts = [0] * num_atoms
    samples_used = 0

    state = sample_sat(
        hard, num_atoms, config.flips_per_sample, rng,
        config.sa_probability, config.sa_temperature,
    )
    for step in range(config.num_samples):
        selected = list(hard)
        for (clause, _), p in zip(soft, keep_prob):
            for lit in clause:
                if (lit > 0) == state[abs(lit) - 1]:
                    break  # satisfied
            else:
                continue
            if rng.random() < p:
                selected.append(clause)
        state = sample_sat(
            selected, num_atoms, config.flips_per_sample, rng,
            config.sa_probability, config.sa_temperature,
        )
        if step >= config.burn_in:
            samples_used += 1
            for i, value in enumerate(state):
                if value:
                    counts[i] += 1

    probabilities = {}
    for atom_id in queries:
        if table.is_frozen(atom_id):
            probabilities[atom_id] = 1.0 if table.frozen_value(atom_id) else 0.0
        else:
            probabilities[atom_id] = counts[index[atom_id]] / samples_used
    return MarginalResult(
        probabilities=probabilities,
        samples_used=samples_used,
        wall_time=time.monotonic() - start,
        stats=network.stats(),
    )


def mcsat_all_marginals(
    network: GroundNetwork, config: McSatConfig = McSatConfig()
) -> MarginalResult:
    """Marginals for every atom in the table (frozen ones report 0/1)."""
    return mcsat(network, list(range(len(network.table))), config)


_ENUM_CAP = 25


def enumerate_marginals(
    network: GroundNetwork, queries: Sequence[int]
) -> MarginalResult:
    """Exact marginals by weighted enumeration of all free-atom assignments."""
    start = time.monotonic()
    table = network.table

    hard = []
    for clause in network.hard:
        lits = _frozen_simplify(clause.literals, table)
        if lits is None:
            continue
        if not lits:
            raise AllHardViolated("hard clause falsified by frozen atoms")
        hard.append(lits)
    soft = []
    for clause in network.soft:
        lits = _frozen_simplify(clause.literals, table)
        if lits:
            soft.append((lits, clause.weight))

    used: list[int] = []
    seen = set()
    for lits in hard:
        for lit in lits:
            a = abs(lit) - 1
            if a not in seen:
                seen.add(a)
                used.append(a)
    for lits, _ in soft:
        for lit in lits:
            a = abs(lit) - 1
            if a not in seen:
                seen.add(a)
                used.append(a)
    for atom_id in queries:
        if not table.is_frozen(atom_id) and atom_id not in seen:
            seen.add(atom_id)
            used.append(atom_id)

    n = len(used)
    if n > _ENUM_CAP:
        raise TooLarge("%d free atoms exceed the enumeration cap of %d" % (n, _ENUM_CAP))
    bit = {atom_id: i for i, atom_id in enumerate(used)}

    assignments = np.arange(1 << n, dtype=np.uint32)

    def sat_vector(lits) -> np.ndarray:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in lits:
            b = bit[abs(lit) - 1]
            col = (assignments >> np.uint32(b)) & np.uint32(1)
            sat |= col.astype(bool) if lit > 0 else ~col.astype(bool)
        return sat

    feasible = np.ones(1 << n, dtype=bool)
    for lits in hard:
        feasible &= sat_vector(lits)
    if not feasible.any():
        raise AllHardViolated("no assignment satisfies the hard clauses")

    log_weight = np.zeros(1 << n, dtype=np.float64)
    for lits, w in soft:
        log_weight[sat_vector(lits)] += w
    log_weight -= log_weight.max()
    weight = np.exp(log_weight) * feasible
    z = weight.sum()

    probabilities = {}
    for atom_id in queries:
        if table.is_frozen(atom_id):
            probabilities[atom_id] = 1.0 if table.frozen_value(atom_id) else 0.0
        else:
            b = bit[atom_id]
            mask = ((assignments >> np.uint32(b)) & np.uint32(1)).astype(bool)
            probabilities[atom_id] = float(weight[mask].sum() / z)
    return MarginalResult(
        probabilities=probabilities,
        samples_used=int(feasible.sum()),
        wall_time=time.monotonic() - start,
        stats=network.stats(),
    )


def _frozen_simplify(literals, table) -> Optional[list[int]]:
    out = []
    for lit in literals:
        atom_id = abs(lit) - 1
        if table.is_frozen(atom_id):
            if table.frozen_value(atom_id) == (lit > 0):
                return None
            continue
        out.append(lit)
    return out
