from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from bvqo.costing.cardinality import CardinalityProvider
from bvqo.costing.cout import CostReport, cout
from bvqo.errors import ShapeMismatchError
from bvqo.graph.join_graph import JoinGraph, snowflake_root
from bvqo.graph.snowflake import SnowflakeShape
from bvqo.planning.builder import chain_join, has_cross_product
from bvqo.planning.nodes import FilterMode, Plan
from bvqo.planning.pushdown import push_down_bitvectors

LOGGER = logging.getLogger(__name__)


class Provenance(str, Enum):
    STAR = "StarTheorem"
    BRANCH = "BranchTheorem"
    SNOWFLAKE = "SnowflakeTheorem"
    HEURISTIC = "Heuristic"


@dataclass(frozen=True)
class CandidateSet:
    plans: tuple[Plan, ...]
    provenance: Provenance

    def __len__(self) -> int:
        return len(self.plans)

    def signatures(self) -> list[str]:
        return [plan.signature() for plan in self.plans]


def _right_deep(order: Sequence[str], graph: JoinGraph, mode: FilterMode | None) -> Plan:
    plan = Plan.of(chain_join(order, graph))
    if has_cross_product(plan, graph):
        raise ShapeMismatchError(f"Order {list(order)} would need a cross product")
    return push_down_bitvectors(plan, mode)


def _require_tree(shape: SnowflakeShape) -> None:
    if shape.residual_edges:
        raise ShapeMismatchError(
            f"Shape around {shape.fact} has edges outside its branches: {[list(e) for e in shape.residual_edges]}"
        )


def star_candidates(shape: SnowflakeShape, mode: FilterMode | None = None) -> CandidateSet:
    """Fact rightmost, plus each dimension rightmost directly ahead of the fact."""
    _require_tree(shape)
    if any(len(branch) != 1 for branch in shape.branches):
        raise ShapeMismatchError(f"Shape around {shape.fact} is not a star")
    dims = [branch[0] for branch in shape.branches]
    orders = [[shape.fact, *dims]]
    for k, dim in enumerate(dims):
        orders.append([dim, shape.fact, *dims[:k], *dims[k + 1 :]])
    plans = tuple(_right_deep(order, shape.graph, mode) for order in orders)
    return CandidateSet(plans, Provenance.STAR)


def chain_order(graph: JoinGraph) -> list[str]:
    """Relations of a chain from the end holding no key (R0) to the end holding the last key (Rn)."""
    root = snowflake_root(graph)
    if root is None or any(graph.degree(u) > 2 for u in graph.units) or (len(graph) > 1 and graph.degree(root) != 1):
        raise ShapeMismatchError("Join graph is not a PKFK chain")
    order = [root]
    while len(order) < len(graph):
        order.append(next(n for n in graph.neighbors(order[-1]) if n not in order))
    return order


def branch_candidates(chain: Sequence[str], graph: JoinGraph, mode: FilterMode | None = None) -> CandidateSet:
    """T(Rn, …, R0) and T(Rk, …, Rn, Rk-1, …, R0) for every k below n."""
    chain = list(chain)
    if not chain:
        raise ShapeMismatchError("Chain is empty")
    for left, right in zip(chain, chain[1:]):
        if not graph.is_pkfk(left, right):
            raise ShapeMismatchError(f"{left} -> {right} is not a PKFK join toward {right}")
    n = len(chain) - 1
    orders = [chain[::-1]]
    for k in range(n - 1, -1, -1):
        orders.append(chain[k:] + chain[:k][::-1])
    plans = tuple(_right_deep(order, graph, mode) for order in orders)
    return CandidateSet(plans, Provenance.BRANCH)


def snowflake_candidates(shape: SnowflakeShape, mode: FilterMode | None = None) -> CandidateSet:
    """Fact rightmost with branches in order, plus one plan per entry point of every branch.

    Entering branch b at its k-th table joins outward to the branch's end,
    walks back toward the fact, then continues with the fact and the other
    branches.
    """
    _require_tree(shape)
    for branch in shape.branches:
        chain = [shape.fact, *branch]
        for left, right in zip(chain, chain[1:]):
            if not shape.graph.is_pkfk(left, right):
                raise ShapeMismatchError(f"{left} -> {right} is not a PKFK join toward {right}")
    flat = [u for branch in shape.branches for u in branch]
    orders = [[shape.fact, *flat]]
    for i, branch in enumerate(shape.branches):
        rest = [u for j, other in enumerate(shape.branches) if j != i for u in other]
        for k in range(1, len(branch) + 1):
            prefix = list(branch[k - 1 :]) + list(branch[: k - 1])[::-1]
            orders.append([*prefix, shape.fact, *rest])
    plans = tuple(_right_deep(order, shape.graph, mode) for order in orders)
    return CandidateSet(plans, Provenance.SNOWFLAKE)


def best_candidate(candidates: CandidateSet, provider: CardinalityProvider) -> tuple[Plan, CostReport]:
    """Cheapest plan by C_out; the earliest generated plan wins ties."""
    if not candidates.plans:
        raise ShapeMismatchError("Candidate set is empty")
    best_plan, best_report = candidates.plans[0], cout(candidates.plans[0], provider)
    for plan in candidates.plans[1:]:
        report = cout(plan, provider)
        if report.total < best_report.total:
            best_plan, best_report = plan, report
    LOGGER.info("Best of %d %s candidates: %s (C_out %s)", len(candidates), candidates.provenance.value, best_plan.signature(), best_report.total)
    return best_plan, best_report
