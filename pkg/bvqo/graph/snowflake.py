from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any

import networkx as nx

from bvqo.errors import GraphError
from bvqo.graph.join_graph import JoinGraph, find_fact_tables

LOGGER = logging.getLogger(__name__)


class Priority(str, Enum):
    P0 = "P0"
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"


@dataclass(frozen=True, eq=False)
class SnowflakeShape:
    graph: JoinGraph
    fact: str
    branches: tuple[tuple[str, ...], ...]
    residual_edges: tuple[tuple[str, str], ...] = ()

    @property
    def relations(self) -> tuple[str, ...]:
        return (self.fact,) + tuple(u for branch in self.branches for u in branch)

    def parent_of(self, unit: str) -> str:
        for branch in self.branches:
            if unit in branch:
                index = branch.index(unit)
                return self.fact if index == 0 else branch[index - 1]
        raise GraphError(f"{unit!r} is not a dimension of this shape")

    def branch_of(self, unit: str) -> int:
        for i, branch in enumerate(self.branches):
            if unit in branch:
                return i
        raise GraphError(f"{unit!r} is not a dimension of this shape")

    def describe(self) -> dict[str, Any]:
        return {
            "fact": self.fact,
            "branches": [list(b) for b in self.branches],
            "residual_edges": [list(e) for e in self.residual_edges],
        }


@dataclass(frozen=True)
class BranchGroup:
    branches: tuple[tuple[str, ...], ...]
    priority: Priority

    @property
    def size(self) -> int:
        return len(self.branches)


def elimination_on_fact(shape: SnowflakeShape, branch: tuple[str, ...]) -> float:
    """Fraction of the fact's tuples eliminated by the branch head; 0 when they do not join."""
    head = branch[0]
    if not shape.graph.has_edge(shape.fact, head):
        return 0.0
    return 1.0 - shape.graph.semijoin_selectivity(shape.fact, head)


def decompose(graph: JoinGraph, fact: str, region: set[str] | None = None) -> SnowflakeShape:
    """Split ``region`` into branches hanging off ``fact``.

    A BFS tree rooted at the fact (conforming PKFK edges first) assigns every
    unit a parent. Each child of the fact starts a branch; a sub-tree below a
    head is linearized depth first, children ordered by how much they
    eliminate from their parent. Edges outside the tree, and tree edges that are
    not PKFK toward the child, go to ``residual_edges``.
    """
    region = set(graph.units) if region is None else set(region)
    parent: dict[str, str] = {}
    children: dict[str, list[str]] = {u: [] for u in region}
    seen = {fact}
    queue = deque([fact])
    while queue:
        unit = queue.popleft()
        candidates = [n for n in graph.neighbors(unit) if n in region and n not in seen]
        candidates.sort(key=lambda n: (not graph.is_pkfk(unit, n), graph.units.index(n)))
        for child in candidates:
            seen.add(child)
            parent[child] = unit
            children[unit].append(child)
            queue.append(child)

    missing = region - seen
    if missing:
        raise GraphError(f"Relations not connected to fact {fact}: {sorted(missing)}")

    def eliminates(child: str) -> float:
        return 1.0 - graph.semijoin_selectivity(parent[child], child)

    def linearize(head: str) -> list[str]:
        out = [head]
        for child in sorted(children[head], key=lambda c: (-eliminates(c), graph.units.index(c))):
            out.extend(linearize(child))
        return out

    branches = tuple(tuple(linearize(head)) for head in sorted(children[fact], key=graph.units.index))

    tree_edges = {frozenset((c, p)) for c, p in parent.items()}
    residual: list[tuple[str, str]] = []
    for a, b in graph.edges():
        if a not in region or b not in region:
            continue
        pair = frozenset((a, b))
        if pair not in tree_edges:
            residual.append((a, b))
            continue
        child = a if parent.get(a) == b else b
        if not graph.is_pkfk(parent[child], child):
            residual.append((a, b))
    return SnowflakeShape(graph=graph, fact=fact, branches=branches, residual_edges=tuple(residual))


def _expand(graph: JoinGraph, fact: str, other_facts: set[str]) -> set[str]:
    region = {fact}
    frontier = [fact]
    while frontier:
        unit = frontier.pop()
        for other in graph.neighbors(unit):
            if other in region or other in other_facts:
                continue
            if graph.is_pkfk(unit, other):
                region.add(other)
                frontier.append(other)
    return region


def extract_snowflake(graph: JoinGraph) -> SnowflakeShape:
    """Pick the next snowflake to optimize.

    The smallest unoptimized fact table is expanded over the dimensions it
    reaches through PKFK joins. With a single candidate fact the whole graph
    is returned; with none, the largest unit stands in as the fact.
    """
    if len(graph) == 0:
        raise GraphError("Cannot extract a snowflake from an empty join graph")
    facts = [f for f in find_fact_tables(graph) if not graph.is_optimized(f)]
    if len(facts) <= 1:
        if facts:
            fact = facts[0]
        else:
            fact = max(graph.units, key=lambda u: (graph.cardinality(u), u))
            LOGGER.info("No fact table found; using largest relation %s", fact)
        return decompose(graph, fact)

    fact = facts[0]
    region = _expand(graph, fact, set(facts[1:]))
    LOGGER.info("Extracted snowflake around %s covering %d relations", fact, len(region))
    return decompose(graph, fact, region)


def group_branches(shape: SnowflakeShape) -> list[BranchGroup]:
    index = {u: i for i, branch in enumerate(shape.branches) for u in branch}
    linked = nx.Graph()
    linked.add_nodes_from(range(len(shape.branches)))
    for a, b in shape.residual_edges:
        if a in index and b in index and index[a] != index[b]:
            linked.add_edge(index[a], index[b])
    members = sorted(sorted(component) for component in nx.connected_components(linked))

    graph = shape.graph
    fact_card = graph.cardinality(shape.fact)
    groups: list[BranchGroup] = []
    for ids in members:
        branches = tuple(shape.branches[i] for i in ids)
        if len(branches) > 1:
            priority = Priority.P2
        else:
            branch = branches[0]
            if not graph.is_pkfk(shape.fact, branch[0]):
                priority = Priority.P0
            elif max(graph.cardinality(u) for u in branch) < fact_card:
                priority = Priority.P1
            else:
                priority = Priority.P3
        groups.append(BranchGroup(branches=branches, priority=priority))
    return groups
