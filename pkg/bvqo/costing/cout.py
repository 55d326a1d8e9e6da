from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from bvqo.costing.cardinality import CardinalityProvider
from bvqo.planning.nodes import Plan


@dataclass(frozen=True)
class CostReport:
    total: float
    per_node: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"total": self.total, "per_node": {str(k): v for k, v in sorted(self.per_node.items())}}


def cout(plan: Plan, provider: CardinalityProvider) -> CostReport:
    """Sum of every leaf's and every join's output size, with filters applied."""
    per_node = provider.plan_cardinalities(plan)
    return CostReport(total=sum(per_node[node.node_id] for node in plan.nodes), per_node=per_node)
