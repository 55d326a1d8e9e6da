from __future__ import annotations

import logging
from enum import Enum
from typing import Any, Iterable

import networkx as nx

from bvqo.catalog.model import Catalog, JoinEdge
from bvqo.errors import GraphError

LOGGER = logging.getLogger(__name__)


class GraphShape(str, Enum):
    STAR = "star"
    BRANCH = "branch"
    SNOWFLAKE = "snowflake"
    GENERAL = "general"


class JoinGraph:
    """Join graph over units: base relations, or composites collapsed by the optimizer.

    A composite keeps the set of base relations it covers and the plan subtree
    that produces it. Unit edges remember the base edges they stand for and,
    when the join is PKFK, which unit holds the key.
    """

    def __init__(self, catalog: Catalog, graph: nx.Graph) -> None:
        self._catalog = catalog
        self._graph = graph

    @classmethod
    def from_catalog(cls, catalog: Catalog) -> JoinGraph:
        graph = nx.Graph()
        for order, relation in enumerate(catalog.relations):
            graph.add_node(
                relation.name,
                cardinality=relation.cardinality,
                members=frozenset({relation.name}),
                plan=None,
                optimized=False,
                order=order,
            )
        for edge in catalog.edges:
            graph.add_edge(edge.left, edge.right, key_side=edge.key_side, base_edges=(edge,))
        return cls(catalog, graph)

    # ── Units ───────────────────────────────────────────────────────────────
    @property
    def catalog(self) -> Catalog:
        return self._catalog

    @property
    def units(self) -> list[str]:
        return sorted(self._graph.nodes, key=lambda u: (self._graph.nodes[u]["order"], u))

    def __len__(self) -> int:
        return self._graph.number_of_nodes()

    def __contains__(self, unit: object) -> bool:
        return unit in self._graph

    def _attrs(self, unit: str) -> dict[str, Any]:
        try:
            return self._graph.nodes[unit]
        except KeyError:
            raise GraphError(f"Unknown relation in join graph: {unit!r}") from None

    def cardinality(self, unit: str) -> float:
        return self._attrs(unit)["cardinality"]

    def members(self, unit: str) -> frozenset[str]:
        return self._attrs(unit)["members"]

    def subplan(self, unit: str) -> Any:
        return self._attrs(unit)["plan"]

    def is_composite(self, unit: str) -> bool:
        return self._attrs(unit)["plan"] is not None

    def is_optimized(self, unit: str) -> bool:
        return self._attrs(unit)["optimized"]

    def base_relations(self, units: Iterable[str] | None = None) -> frozenset[str]:
        chosen = self.units if units is None else units
        out: set[str] = set()
        for unit in chosen:
            out |= self.members(unit)
        return frozenset(out)

    def unit_of(self, relation: str) -> str:
        for unit in self._graph.nodes:
            if relation in self._graph.nodes[unit]["members"]:
                return unit
        raise GraphError(f"Relation {relation!r} is not covered by the join graph")

    # ── Edges ───────────────────────────────────────────────────────────────
    def neighbors(self, unit: str) -> list[str]:
        order = {u: i for i, u in enumerate(self.units)}
        return sorted(self._graph.neighbors(unit), key=order.__getitem__)

    def degree(self, unit: str) -> int:
        return self._graph.degree(unit)

    def has_edge(self, a: str, b: str) -> bool:
        return self._graph.has_edge(a, b)

    def edge_count(self) -> int:
        return self._graph.number_of_edges()

    def edges(self) -> list[tuple[str, str]]:
        order = {u: i for i, u in enumerate(self.units)}
        out = []
        for a, b in self._graph.edges:
            out.append((a, b) if order[a] <= order[b] else (b, a))
        return sorted(out, key=lambda e: (order[e[0]], order[e[1]]))

    def key_side(self, a: str, b: str) -> str | None:
        if not self._graph.has_edge(a, b):
            return None
        return self._graph.edges[a, b]["key_side"]

    def is_pkfk(self, source: str, target: str) -> bool:
        """True when source → target is a PKFK join with the key on ``target``."""
        return self.key_side(source, target) == target

    def base_edges(self, a: str, b: str) -> tuple[JoinEdge, ...]:
        if not self._graph.has_edge(a, b):
            return ()
        return self._graph.edges[a, b]["base_edges"]

    def joins_on_key(self, unit: str, other: str) -> bool:
        """True when ``unit`` is joined with ``other`` on its own key columns."""
        if self.key_side(unit, other) == unit:
            return True
        if self.is_composite(unit):
            return False
        key_columns = self._catalog.relation(unit).key_columns
        if not key_columns:
            return False
        return any(sorted(e.columns_of(unit)) == sorted(key_columns) for e in self.base_edges(unit, other))

    def semijoin_selectivity(self, source: str, target: str) -> float:
        """Estimated |source ⋉ target| / |source| over the base edges between two units."""
        selectivity = 1.0
        source_members = self.members(source)
        for edge in self.base_edges(source, target):
            side = edge.left if edge.left in source_members else edge.right
            selectivity *= edge.selectivity_from(side)
        return selectivity

    def join_columns(self, left: Iterable[str], right: Iterable[str]) -> tuple[tuple[str, str], ...]:
        return self._catalog.join_columns(left, right)

    def connected(self, left: Iterable[str], right: Iterable[str]) -> bool:
        return bool(self._catalog.edges_across(left, right))

    # ── Structure ───────────────────────────────────────────────────────────
    def is_connected(self) -> bool:
        return len(self) > 0 and nx.is_connected(self._graph)

    def components(self) -> list[list[str]]:
        order = {u: i for i, u in enumerate(self.units)}
        comps = [sorted(c, key=order.__getitem__) for c in nx.connected_components(self._graph)]
        return sorted(comps, key=lambda c: order[c[0]])

    def subgraph(self, units: Iterable[str]) -> JoinGraph:
        return JoinGraph(self._catalog, self._graph.subgraph(list(units)).copy())

    def collapse(self, units: Iterable[str], plan: Any, cardinality: float) -> JoinGraph:
        """Replace ``units`` with one optimized composite whose subtree is ``plan``."""
        chosen = [u for u in self.units if u in set(units)]
        if not chosen:
            raise GraphError("Cannot collapse an empty set of relations")
        members = self.base_relations(chosen)
        name = "{" + ",".join(sorted(members)) + "}"
        graph = self._graph.copy()
        order = min(graph.nodes[u]["order"] for u in chosen)

        outside: dict[str, list[JoinEdge]] = {}
        for unit in chosen:
            for other in self._graph.neighbors(unit):
                if other not in chosen:
                    outside.setdefault(other, []).extend(self.base_edges(unit, other))
        graph.remove_nodes_from(chosen)
        graph.add_node(name, cardinality=cardinality, members=members, plan=plan, optimized=True, order=order)
        for other, base_edges in outside.items():
            other_members = graph.nodes[other]["members"]
            key_side = None
            if graph.nodes[other]["plan"] is None and all(e.key_side in other_members for e in base_edges):
                key_side = other
            graph.add_edge(name, other, key_side=key_side, base_edges=tuple(base_edges))
        LOGGER.info("Collapsed %s into composite with cardinality %s", sorted(members), cardinality)
        return JoinGraph(self._catalog, graph)

    def describe(self) -> dict[str, Any]:
        return {
            "relations": self.units,
            "edges": [
                {"left": a, "right": b, "key_side": self.key_side(a, b)} for a, b in self.edges()
            ],
        }


def _is_snowflake_from(graph: JoinGraph, root: str) -> bool:
    """Every edge points away from ``root`` toward the key side, and every
    non-root unit has at most one child (branches are chains)."""
    seen = {root}
    frontier = [root]
    while frontier:
        unit = frontier.pop()
        children = [n for n in graph.neighbors(unit) if n not in seen]
        if unit != root and len(children) > 1:
            return False
        for child in children:
            if not graph.is_pkfk(unit, child):
                return False
            seen.add(child)
            frontier.append(child)
    return len(seen) == len(graph)


def classify(graph: JoinGraph) -> GraphShape:
    n = len(graph)
    if n == 0:
        raise GraphError("Cannot classify an empty join graph")
    if n == 1:
        return GraphShape.BRANCH
    if not graph.is_connected() or graph.edge_count() != n - 1:
        return GraphShape.GENERAL

    for hub in graph.units:
        if graph.degree(hub) == n - 1 and all(graph.is_pkfk(hub, other) for other in graph.neighbors(hub)):
            return GraphShape.STAR

    if all(graph.degree(u) <= 2 for u in graph.units):
        for end in graph.units:
            if graph.degree(end) == 1 and _is_snowflake_from(graph, end):
                return GraphShape.BRANCH

    for root in graph.units:
        if _is_snowflake_from(graph, root):
            return GraphShape.SNOWFLAKE
    return GraphShape.GENERAL


def find_fact_tables(graph: JoinGraph) -> list[str]:
    """Units that never join another unit on their own key columns, smallest first."""
    facts = [
        unit
        for unit in graph.units
        if not any(graph.joins_on_key(unit, other) for other in graph.neighbors(unit))
    ]
    return sorted(facts, key=lambda u: (graph.cardinality(u), u))


def snowflake_root(graph: JoinGraph) -> str | None:
    """The unit every PKFK edge points away from, when the graph is a tree of such edges."""
    if len(graph) == 1:
        return graph.units[0]
    if not graph.is_connected() or graph.edge_count() != len(graph) - 1:
        return None
    for unit in graph.units:
        if _is_snowflake_from(graph, unit):
            return unit
    return None
