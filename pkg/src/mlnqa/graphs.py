"""Question and KB-rule graphs: labeled nodes with roles, labeled edges."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MlnError

KIND_ENTITY = "entity"
KIND_EVENT = "event"
ROLE_SETUP = "setup"
ROLE_QUERY = "query"
ROLE_LHS = "lhs"
ROLE_RHS = "rhs"


@dataclass(frozen=True)
class GraphNode:
    id: str
    kind: str  # entity | event
    label: str
    role: str  # setup | query | lhs | rhs

    def __post_init__(self):
        if self.kind not in (KIND_ENTITY, KIND_EVENT):
            raise MlnError("node %s has unknown kind %s" % (self.id, self.kind))


@dataclass(frozen=True)
class GraphEdge:
    label: str
    src: str
    dst: str


def _check_edges(nodes, edges, graph_desc):
    ids = {n.id for n in nodes}
    for edge in edges:
        if edge.src not in ids or edge.dst not in ids:
            raise MlnError(
                "edge %s(%s,%s) references a missing node in %s"
                % (edge.label, edge.src, edge.dst, graph_desc)
            )


@dataclass(frozen=True)
class QuestionGraph:
    """One true-false question: setup facts plus a posited query."""

    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]

    def __post_init__(self):
        seen = set()
        for node in self.nodes:
            if node.id in seen:
                raise MlnError("duplicate node id %s in question" % node.id)
            seen.add(node.id)
            if node.role not in (ROLE_SETUP, ROLE_QUERY):
                raise MlnError(
                    "role %s illegal in a question graph (node %s)" % (node.role, node.id)
                )
        _check_edges(self.nodes, self.edges, "question")

    def node(self, node_id: str) -> GraphNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def setup_nodes(self) -> tuple[GraphNode, ...]:
        return tuple(n for n in self.nodes if n.role == ROLE_SETUP)

    def query_nodes(self) -> tuple[GraphNode, ...]:
        return tuple(n for n in self.nodes if n.role == ROLE_QUERY)

    def labels(self) -> list[str]:
        return [n.label for n in self.nodes]


@dataclass(frozen=True)
class KbRuleGraph:
    """An extracted IF-THEN rule: antecedent (lhs) and consequent (rhs)."""

    rule_id: str
    confidence: float
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise MlnError(
                "rule %s confidence %g not in (0,1)" % (self.rule_id, self.confidence)
            )
        seen = set()
        for node in self.nodes:
            if node.id in seen:
                raise MlnError("duplicate node id %s in rule %s" % (node.id, self.rule_id))
            seen.add(node.id)
            if node.role not in (ROLE_LHS, ROLE_RHS):
                raise MlnError(
                    "role %s illegal in a rule graph (node %s)" % (node.role, node.id)
                )
        if not any(n.role == ROLE_LHS for n in self.nodes):
            raise MlnError("rule %s has an empty antecedent" % self.rule_id)
        if not any(n.role == ROLE_RHS for n in self.nodes):
            raise MlnError("rule %s has an empty consequent" % self.rule_id)
        _check_edges(self.nodes, self.edges, "rule %s" % self.rule_id)

    def lhs_nodes(self) -> tuple[GraphNode, ...]:
        return tuple(n for n in self.nodes if n.role == ROLE_LHS)

    def rhs_nodes(self) -> tuple[GraphNode, ...]:
        return tuple(n for n in self.nodes if n.role == ROLE_RHS)

    def labels(self) -> list[str]:
        return [n.label for n in self.nodes]
