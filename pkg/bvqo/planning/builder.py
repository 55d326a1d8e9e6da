from __future__ import annotations

from typing import Sequence

from bvqo.errors import PlanError
from bvqo.graph.join_graph import JoinGraph
from bvqo.graph.snowflake import SnowflakeShape
from bvqo.planning.nodes import HashJoin, Leaf, Plan, PlanNode


def unit_node(graph: JoinGraph, unit: str) -> PlanNode:
    """Leaf for a base relation, the stored subtree for a composite."""
    if unit not in graph:
        raise PlanError(f"Unknown relation: {unit!r}")
    subplan = graph.subplan(unit)
    return subplan if subplan is not None else Leaf(unit)


def hash_join(build: PlanNode, probe: PlanNode, graph: JoinGraph) -> HashJoin:
    overlap = build.relations & probe.relations
    if overlap:
        raise PlanError(f"Relations joined twice: {sorted(overlap)}")
    # catalog pairs are (probe column, build column) when probe is passed first
    columns = graph.join_columns(probe.relations, build.relations)
    return HashJoin(build=build, probe=probe, join_columns=columns)


def chain_join(order: Sequence[str], graph: JoinGraph, start: PlanNode | None = None) -> PlanNode:
    """Right-deep extension: each unit in ``order`` becomes the build side over the prior result."""
    seen: set[str] = set()
    node = start
    for unit in order:
        if unit in seen:
            raise PlanError(f"Duplicate relation in join order: {unit!r}")
        seen.add(unit)
        leaf = unit_node(graph, unit)
        node = leaf if node is None else hash_join(leaf, node, graph)
    if node is None:
        raise PlanError("Join order is empty")
    return node


def right_deep(order: Sequence[str], graph: JoinGraph) -> Plan:
    """T(order[0], …, order[n]) with order[0] the rightmost leaf."""
    expected = set(graph.units)
    node = chain_join(order, graph)
    if set(order) != expected:
        raise PlanError(f"Join order {list(order)} is not a permutation of {graph.units}")
    return Plan.of(node)


def has_cross_product(plan: Plan, graph: JoinGraph) -> bool:
    return any(not graph.connected(join.build.relations, join.probe.relations) for join in plan.joins())


def is_partially_ordered(plan: Plan, shape: SnowflakeShape) -> bool:
    order = plan.right_deep_order()
    if order is None or order[0] != shape.fact:
        raise PlanError("Partial order is only defined for right-deep plans with the fact rightmost")
    if set(order) != set(shape.relations):
        raise PlanError("Plan and snowflake shape cover different relations")
    placed = {shape.fact}
    for unit in order[1:]:
        if shape.parent_of(unit) not in placed:
            return False
        placed.add(unit)
    return True
