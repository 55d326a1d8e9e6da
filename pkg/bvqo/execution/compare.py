from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Mapping

from bvqo.config import OptimizerSettings
from bvqo.costing.model import FilterCostModel
from bvqo.errors import ExecutionError
from bvqo.execution.engine import ExecMetrics, execute, tuple_breakdown
from bvqo.execution.exact import ExactProvider
from bvqo.execution.table import Table
from bvqo.graph.join_graph import JoinGraph
from bvqo.optimizer.baseline import baseline_plan
from bvqo.optimizer.gating import gate_bitvectors
from bvqo.optimizer.heuristic import optimize_join_graph
from bvqo.planning.nodes import FilterMode, Plan

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class QueryComparison:
    name: str
    baseline_plan: Plan
    aware_plan: Plan
    baseline: ExecMetrics
    aware: ExecMetrics

    @property
    def baseline_cost(self) -> float:
        return self.baseline.total_cost_units

    @property
    def aware_cost(self) -> float:
        return self.aware.total_cost_units

    @property
    def ratio(self) -> float:
        if self.baseline_cost == 0:
            return 1.0
        return self.aware_cost / self.baseline_cost

    def to_dict(self) -> dict[str, Any]:
        return {
            "query": self.name,
            "baseline_plan": self.baseline_plan.signature(),
            "aware_plan": self.aware_plan.signature(),
            "baseline_cout": self.baseline.tuples_output,
            "aware_cout": self.aware.tuples_output,
            "baseline_cost": self.baseline_cost,
            "aware_cost": self.aware_cost,
            "ratio": round(self.ratio, 6),
            "baseline_tuples": tuple_breakdown(self.baseline),
            "aware_tuples": tuple_breakdown(self.aware),
            "normalized_tuples": {k: round(v, 6) for k, v in tuple_breakdown(self.aware, self.baseline).items()},
        }


def compare_query(
    name: str,
    graph: JoinGraph,
    tables: Mapping[str, Table],
    model: FilterCostModel,
    mode: FilterMode | None = None,
    settings: OptimizerSettings | None = None,
) -> QueryComparison:
    """Execute the post-processing baseline and the bitvector-aware plan on the same data."""
    provider = ExactProvider(tables, graph.catalog)
    baseline = gate_bitvectors(baseline_plan(graph, mode), model, provider)
    aware = gate_bitvectors(optimize_join_graph(graph, provider, settings, mode), model, provider)
    baseline_result, baseline_metrics = execute(baseline, tables, model=model)
    aware_result, aware_metrics = execute(aware, tables, model=model)
    if baseline_result.canonical() != aware_result.canonical():
        raise ExecutionError(f"Query {name}: baseline and aware plans return different rows")
    LOGGER.info(
        "%s: baseline %s cost %.1f, aware %s cost %.1f",
        name,
        baseline.signature(),
        baseline_metrics.total_cost_units,
        aware.signature(),
        aware_metrics.total_cost_units,
    )
    return QueryComparison(name, baseline, aware, baseline_metrics, aware_metrics)
