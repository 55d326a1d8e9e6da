from __future__ import annotations

import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Mapping

from bvqo.costing.model import FilterCostModel
from bvqo.errors import ExecutionError
from bvqo.execution.bitvector import RuntimeBitvector
from bvqo.execution.table import Table
from bvqo.planning.nodes import FilterMode, HashJoin, Leaf, Plan, PlanNode

LOGGER = logging.getLogger(__name__)

OPERATOR_CLASSES = ("Leaf", "Join", "Other")


@dataclass(frozen=True, slots=True)
class OperatorStat:
    node_id: int
    label: str
    op_class: str
    output_rows: int
    cost_units: float


@dataclass
class ExecMetrics:
    operators: list[OperatorStat] = field(default_factory=list)
    node_output: dict[int, int] = field(default_factory=dict)
    wall_time_ns: int = 0

    def group_totals(self) -> dict[str, int]:
        totals = {name: 0 for name in OPERATOR_CLASSES}
        for stat in self.operators:
            totals[stat.op_class] += stat.output_rows
        return totals

    @property
    def total_cost_units(self) -> float:
        return sum(stat.cost_units for stat in self.operators)

    @property
    def tuples_output(self) -> int:
        return sum(self.node_output.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "operators": [
                {"node": s.node_id, "label": s.label, "class": s.op_class, "rows": s.output_rows, "cost": s.cost_units}
                for s in self.operators
            ],
            "groups": self.group_totals(),
            "cost_units": self.total_cost_units,
        }


@dataclass(frozen=True)
class ExecutionResult:
    columns: tuple[str, ...]
    rows: list[tuple[int, ...]]

    def canonical(self) -> Counter:
        """Row multiset with columns in sorted order, for order-insensitive comparison."""
        order = sorted(range(len(self.columns)), key=self.columns.__getitem__)
        return Counter(tuple(row[i] for i in order) for row in self.rows)


def _positions(columns: tuple[str, ...], wanted: tuple[str, ...]) -> list[int]:
    index = {c: i for i, c in enumerate(columns)}
    try:
        return [index[c] for c in wanted]
    except KeyError as exc:
        raise ExecutionError(f"Column {exc.args[0]} is not produced here") from None


def execute(
    plan: Plan,
    tables: Mapping[str, Table],
    filter_mode: FilterMode | None = None,
    *,
    apply_filters: bool = True,
    model: FilterCostModel | None = None,
) -> tuple[ExecutionResult, ExecMetrics]:
    """Run ``plan`` over in-memory tables, building each join's hash table before its probe side.

    Filters use their own mode unless ``filter_mode`` overrides it; with
    ``apply_filters=False`` the plan runs without any bitvectors.
    """
    model = model or FilterCostModel()
    metrics = ExecMetrics()
    bitvectors: dict[int, RuntimeBitvector] = {}
    by_source = {bv.source_join: bv for bv in plan.filters} if apply_filters else {}

    missing = sorted(r for r in plan.relations if r not in tables)
    if missing:
        raise ExecutionError(f"No table data for relations {missing}")

    def apply(node_id: int, filter_ids: tuple[int, ...], columns: tuple[str, ...], rows: list[tuple[int, ...]]) -> tuple[list[tuple[int, ...]], int]:
        checks = 0
        if not apply_filters:
            return rows, checks
        for fid in filter_ids:
            bitvector = bitvectors[fid]
            pos = _positions(columns, plan.filter(fid).probe_columns)
            checks += len(rows)
            rows = [row for row in rows if tuple(row[p] for p in pos) in bitvector]
        return rows, checks

    def run(node: PlanNode) -> tuple[tuple[str, ...], list[tuple[int, ...]]]:
        if isinstance(node, Leaf):
            table = tables[node.relation]
            columns = table.qualified_columns
            rows, checks = apply(node.node_id, node.filters, columns, list(table.rows))
            cost = checks * model.filter_check_cost_per_tuple
            metrics.operators.append(OperatorStat(node.node_id, f"SCAN {node.relation}", "Leaf", len(rows), cost))
            metrics.node_output[node.node_id] = len(rows)
            return columns, rows

        assert isinstance(node, HashJoin)
        build_columns, build_rows = run(node.build)
        build_keys = tuple(b for _, b in node.join_columns)
        build_pos = _positions(build_columns, build_keys)
        table: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for row in build_rows:
            table.setdefault(tuple(row[p] for p in build_pos), []).append(row)

        own = by_source.get(node.node_id)
        if own is not None:
            mode = filter_mode or own.mode
            bitvectors[own.filter_id] = RuntimeBitvector(mode, own.build_columns, table.keys())

        probe_columns, probe_rows = run(node.probe)
        probe_pos = _positions(probe_columns, tuple(p for p, _ in node.join_columns))
        out: list[tuple[int, ...]] = []
        for row in probe_rows:
            for match in table.get(tuple(row[p] for p in probe_pos), ()):
                out.append(row + match)
        columns = probe_columns + build_columns
        cost = len(build_rows) * model.build_cost_per_tuple + len(probe_rows) * model.probe_cost_per_tuple
        metrics.operators.append(OperatorStat(node.node_id, f"HJ#{node.node_id}", "Join", len(out), cost))

        if node.filters and apply_filters:
            out, checks = apply(node.node_id, node.filters, columns, out)
            metrics.operators.append(
                OperatorStat(node.node_id, f"FILTER@HJ#{node.node_id}", "Other", len(out), checks * model.filter_check_cost_per_tuple)
            )
        metrics.node_output[node.node_id] = len(out)
        return columns, out

    started = time.perf_counter_ns()
    columns, rows = run(plan.root)
    metrics.wall_time_ns = time.perf_counter_ns() - started
    LOGGER.info("Executed %s: %d rows, %.1f cost units", plan.signature(), len(rows), metrics.total_cost_units)
    return ExecutionResult(columns, rows), metrics


def tuple_breakdown(metrics: ExecMetrics, baseline: ExecMetrics | None = None) -> dict[str, float]:
    """Output tuples per operator class, optionally normalized against a baseline run."""
    totals = metrics.group_totals()
    if baseline is None:
        return {name: totals[name] for name in OPERATOR_CLASSES}
    reference = baseline.group_totals()
    out: dict[str, float] = {}
    for name in OPERATOR_CLASSES:
        if reference[name] == 0:
            out[name] = 1.0 if totals[name] == 0 else float("inf")
        else:
            out[name] = totals[name] / reference[name]
    return out
