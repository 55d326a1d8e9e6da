from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from bvqo.costing.cardinality import CardinalityProvider
from bvqo.costing.cout import cout
from bvqo.errors import ShapeMismatchError
from bvqo.graph.join_graph import GraphShape, JoinGraph, classify, snowflake_root
from bvqo.graph.snowflake import decompose
from bvqo.optimizer.candidates import (
    CandidateSet,
    branch_candidates,
    chain_order,
    snowflake_candidates,
    star_candidates,
)
from bvqo.oracle.enumerate import DEFAULT_CAP, enumerate_right_deep_no_cp, no_cp_orders
from bvqo.planning.builder import is_partially_ordered, right_deep
from bvqo.planning.nodes import FilterMode, Plan
from bvqo.planning.pushdown import push_down_bitvectors

LOGGER = logging.getLogger(__name__)


class Verdict(str, Enum):
    HOLDS = "TheoremHolds"
    COUNTEREXAMPLE = "CounterexampleFound"


@dataclass(frozen=True)
class VerificationReport:
    shape: GraphShape
    relations: tuple[str, ...]
    plan_space_size: int
    candidate_count: int
    candidate_min: float
    global_min: float
    candidate_plan: Plan
    witness_plan: Plan
    mode: FilterMode = field(default_factory=FilterMode.perfect)
    seed: int | None = None

    @property
    def verdict(self) -> Verdict:
        if self.candidate_min == self.global_min or math.isclose(self.candidate_min, self.global_min, rel_tol=1e-9):
            return Verdict.HOLDS
        return Verdict.COUNTEREXAMPLE

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self) -> dict[str, Any]:
        return {
            "shape": self.shape.value,
            "relations": list(self.relations),
            "seed": self.seed,
            "filter_mode": str(self.mode),
            "plan_space_size": self.plan_space_size,
            "candidate_count": self.candidate_count,
            "candidate_min": self.candidate_min,
            "global_min": self.global_min,
            "candidate_plan": self.candidate_plan.signature(),
            "witness_plan": self.witness_plan.signature(),
            "verdict": self.verdict.value,
        }


def theorem_candidates(graph: JoinGraph, mode: FilterMode | None = None) -> tuple[GraphShape, CandidateSet]:
    shape = classify(graph)
    if shape is GraphShape.STAR:
        return shape, star_candidates(decompose(graph, snowflake_root(graph)), mode)
    if shape is GraphShape.BRANCH:
        return shape, branch_candidates(chain_order(graph), graph, mode)
    if shape is GraphShape.SNOWFLAKE:
        return shape, snowflake_candidates(decompose(graph, snowflake_root(graph)), mode)
    raise ShapeMismatchError(f"No candidate theorem covers a {shape.value} join graph")


def verify_theorem(
    graph: JoinGraph,
    provider: CardinalityProvider,
    mode: FilterMode | None = None,
    *,
    seed: int | None = None,
    cap: int = DEFAULT_CAP,
) -> VerificationReport:
    """Compare the cheapest candidate against the cheapest plan in the whole right-deep space."""
    mode = mode or FilterMode.perfect()
    shape, candidates = theorem_candidates(graph, mode)

    candidate_plan, candidate_min = None, math.inf
    for plan in candidates.plans:
        total = cout(plan, provider).total
        if total < candidate_min:
            candidate_plan, candidate_min = plan, total

    witness, global_min, space = None, math.inf, 0
    for plan in enumerate_right_deep_no_cp(graph, cap, mode):
        space += 1
        total = cout(plan, provider).total
        if total < global_min:
            witness, global_min = plan, total

    report = VerificationReport(
        shape=shape,
        relations=tuple(graph.units),
        plan_space_size=space,
        candidate_count=len(candidates),
        candidate_min=candidate_min,
        global_min=global_min,
        candidate_plan=candidate_plan,
        witness_plan=witness,
        mode=mode,
        seed=seed,
    )
    if not report.holds:
        LOGGER.warning(
            "Counterexample on %s (seed %s): candidates reach %s, %s reaches %s",
            shape.value,
            seed,
            candidate_min,
            witness.signature(),
            global_min,
        )
    return report


def verify_equal_cost_class(
    graph: JoinGraph,
    provider: CardinalityProvider,
    mode: FilterMode | None = None,
    cap: int = DEFAULT_CAP,
) -> bool:
    """True when every partially-ordered fact-rightmost plan has the same C_out."""
    if classify(graph) not in (GraphShape.STAR, GraphShape.SNOWFLAKE):
        raise ShapeMismatchError("Equal-cost classes are defined for star and snowflake graphs only")
    shape = decompose(graph, snowflake_root(graph))
    costs: set[float] = set()
    for plan in enumerate_right_deep_no_cp(graph, cap, mode):
        order = plan.right_deep_order()
        if order[0] != shape.fact or not is_partially_ordered(plan, shape):
            continue
        costs.add(cout(plan, provider).total)
    return len(costs) <= 1


@dataclass(frozen=True)
class SwapCheck:
    checked: int
    violations: tuple[tuple[str, str], ...] = ()

    @property
    def holds(self) -> bool:
        return not self.violations


def verify_pushdown_swap(
    graph: JoinGraph,
    provider: CardinalityProvider,
    mode: FilterMode | None = None,
    cap: int = DEFAULT_CAP,
) -> SwapCheck:
    """Moving the last chain relation one step right, past a neighbour other than its parent, never costs more."""
    chain = chain_order(graph)
    last, parent = chain[-1], (chain[-2] if len(chain) > 1 else None)
    checked = 0
    violations: list[tuple[str, str]] = []
    for order in no_cp_orders(graph, cap):
        k = order.index(last)
        if k == 0 or order[k - 1] == parent:
            continue
        swapped = order[: k - 1] + [order[k], order[k - 1]] + order[k + 1 :]
        before = push_down_bitvectors(right_deep(order, graph), mode)
        after = push_down_bitvectors(right_deep(swapped, graph), mode)
        checked += 1
        if cout(after, provider).total > cout(before, provider).total:
            violations.append((before.signature(), after.signature()))
    return SwapCheck(checked=checked, violations=tuple(violations))
