from __future__ import annotations

from bvqo.errors import GraphError
from bvqo.graph.join_graph import JoinGraph
from bvqo.planning.builder import right_deep
from bvqo.planning.nodes import FilterMode, Plan
from bvqo.planning.pushdown import push_down_bitvectors


def canonical_order(graph: JoinGraph) -> list[str]:
    """Workload order, taking the first relation connected to what is already placed whenever one exists."""
    remaining = list(graph.units)
    if not remaining:
        raise GraphError("Cannot order an empty join graph")
    order = [remaining.pop(0)]
    while remaining:
        pick = next((u for u in remaining if any(graph.has_edge(u, p) for p in order)), remaining[0])
        remaining.remove(pick)
        order.append(pick)
    return order


def baseline_plan(graph: JoinGraph, mode: FilterMode | None = None) -> Plan:
    """Right-deep plan in canonical order with filters added afterwards."""
    return push_down_bitvectors(right_deep(canonical_order(graph), graph), mode)
