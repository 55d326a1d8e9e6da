from __future__ import annotations

import logging
from typing import Sequence

from bvqo.config import OptimizerSettings
from bvqo.costing.cardinality import CardinalityProvider
from bvqo.costing.cout import cout
from bvqo.errors import GraphError
from bvqo.graph.join_graph import JoinGraph
from bvqo.graph.snowflake import BranchGroup, Priority, SnowflakeShape, elimination_on_fact, extract_snowflake, group_branches
from bvqo.planning.builder import chain_join, hash_join, unit_node
from bvqo.planning.nodes import FilterMode, HashJoin, Plan, PlanNode
from bvqo.planning.pushdown import push_down_bitvectors

LOGGER = logging.getLogger(__name__)

Branch = tuple[str, ...]


def sort_branches(shape: SnowflakeShape, settings: OptimizerSettings | None = None) -> list[Branch]:
    """Branches in the order the fact should meet them.

    Groups go by priority, highest first: P3 above everything, P2 groups by
    their number of connected branches, then P1, then P0. Within a group and
    between groups of equal priority, branches that eliminate more of the
    fact come first. Members of a P2 group stay consecutive.
    """
    settings = settings or OptimizerSettings()
    groups = group_branches(shape)
    largest = max((g.size for g in groups if g.priority is Priority.P2), default=0)

    def priority(group: BranchGroup) -> int:
        if group.priority is Priority.P3:
            return len(shape.relations) + 1
        if group.priority is Priority.P2:
            return group.size if settings.p2_larger_first else 1 + (largest + 1 - group.size)
        return 1 if group.priority is Priority.P1 else 0

    def selectivity_key(branch: Branch) -> float:
        eliminated = elimination_on_fact(shape, branch)
        return -eliminated if settings.selectivity_order == "elimination" else eliminated

    position = {branch: i for i, branch in enumerate(shape.branches)}
    ordered_groups = sorted(
        groups,
        key=lambda g: (
            -priority(g),
            min(selectivity_key(b) for b in g.branches),
            min(position[b] for b in g.branches),
        ),
    )
    out: list[Branch] = []
    for group in ordered_groups:
        out.extend(sorted(group.branches, key=lambda b: (selectivity_key(b), position[b])))
    return out


def join_branches(
    branches: Sequence[Branch],
    fact: str,
    partial: PlanNode | None,
    graph: JoinGraph,
) -> PlanNode:
    """Extend ``partial`` (or the fact alone) with every table of every branch.

    A table larger than the fact becomes the probe side, with the plan so far
    as its build side.
    """
    node = partial if partial is not None else unit_node(graph, fact)
    fact_card = graph.cardinality(fact)
    for branch in branches:
        for unit in branch:
            table = unit_node(graph, unit)
            if graph.cardinality(unit) > fact_card:
                node = hash_join(node, table, graph)
            else:
                node = hash_join(table, node, graph)
    return node


def optimize_snowflake(
    shape: SnowflakeShape,
    provider: CardinalityProvider,
    settings: OptimizerSettings | None = None,
    mode: FilterMode | None = None,
) -> Plan:
    """Cheapest of the fact-rightmost plan and, per branch entry point, the plan led by that branch."""
    graph = shape.graph
    branches = sort_branches(shape, settings)

    def costed(node: PlanNode) -> tuple[Plan, float]:
        plan = push_down_bitvectors(Plan.of(node), mode)
        return plan, cout(plan, provider).total

    best, best_cost = costed(join_branches(branches, shape.fact, None, graph))
    for i, branch in enumerate(branches):
        rest = branches[:i] + branches[i + 1 :]
        for k in range(1, len(branch) + 1):
            prefix = list(branch[k - 1 :]) + list(branch[: k - 1])[::-1]
            lead = hash_join(unit_node(graph, shape.fact), chain_join(prefix, graph), graph)
            plan, cost = costed(join_branches(rest, shape.fact, lead, graph))
            if cost < best_cost:
                best, best_cost = plan, cost
    LOGGER.info("Snowflake around %s: chose %s (C_out %s)", shape.fact, best.signature(), best_cost)
    return best


def _combine_components(graph: JoinGraph, provider: CardinalityProvider, settings: OptimizerSettings | None, mode: FilterMode | None) -> Plan:
    costed: list[tuple[float, int, Plan]] = []
    for index, component in enumerate(graph.components()):
        plan = optimize_join_graph(graph.subgraph(component), provider, settings, mode)
        costed.append((cout(plan, provider).total, index, plan))
    costed.sort(key=lambda item: (item[0], item[1]))
    LOGGER.info("Join graph has %d components; joining them with cross products", len(costed))
    node: PlanNode = costed[0][2].root
    for _, _, plan in costed[1:]:
        node = HashJoin(build=plan.root, probe=node)
    return Plan.of(node)


def optimize_join_graph(
    graph: JoinGraph,
    provider: CardinalityProvider,
    settings: OptimizerSettings | None = None,
    mode: FilterMode | None = None,
) -> Plan:
    """Optimize snowflake by snowflake, collapsing each result into one composite relation."""
    if len(graph) == 0:
        raise GraphError("Cannot optimize an empty join graph")
    if len(graph) > 1 and not graph.is_connected():
        return push_down_bitvectors(_combine_components(graph, provider, settings, mode), mode)

    current = graph
    rounds = 0
    while len(current) > 1:
        shape = extract_snowflake(current)
        plan = optimize_snowflake(shape, provider, settings, mode)
        rounds += 1
        if set(shape.relations) == set(current.units):
            LOGGER.info("Join graph optimized in %d round(s)", rounds)
            return push_down_bitvectors(Plan.of(plan.root), mode)
        root_card = provider.cardinality(plan.subexpression(plan.root.node_id))
        current = current.collapse(shape.relations, plan.root, root_card)
    return push_down_bitvectors(Plan.of(unit_node(current, current.units[0])), mode)
