from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from bvqo.costing.cout import CostReport
from bvqo.errors import ConfigError
from bvqo.execution.benchmark import BreakevenSeries
from bvqo.execution.compare import QueryComparison
from bvqo.execution.engine import OPERATOR_CLASSES, tuple_breakdown
from bvqo.io_utils import dumps_json, write_csv
from bvqo.oracle.verify import VerificationReport
from bvqo.planning.explain import explain_plan, explain_plan_dict, format_card
from bvqo.planning.nodes import Plan

BENCHMARK_COLUMNS = ("e", "cost_with", "cost_without", "wall_with_ns", "wall_without_ns")
SELECTIVITY_GROUPS = ("S", "M", "L")


@dataclass(frozen=True)
class ExplainSection:
    title: str
    plan: Plan
    report: CostReport


def _check_format(fmt: str) -> None:
    if fmt not in ("text", "json"):
        raise ConfigError(f"Unknown output format: {fmt}")


def render_explain(sections: Sequence[ExplainSection], fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return dumps_json(
            {
                s.title: explain_plan_dict(s.plan, s.report.per_node, s.report.total)
                for s in sections
            }
        )
    blocks = []
    for section in sections:
        body = explain_plan(section.plan, section.report.per_node, section.report.total)
        blocks.append(f"== {section.title}: {section.plan.signature()} ==\n{body}")
    return "\n\n".join(blocks)


def render_explain_workload(queries: Sequence[tuple[str, Sequence[ExplainSection]]], fmt: str = "text") -> str:
    """One explain block per query; a single query renders exactly like render_explain."""
    _check_format(fmt)
    if len(queries) == 1:
        return render_explain(queries[0][1], fmt)
    if fmt == "json":
        return dumps_json(
            {
                name: {s.title: explain_plan_dict(s.plan, s.report.per_node, s.report.total) for s in sections}
                for name, sections in queries
            }
        )
    return "\n\n".join(f"# {name}\n{render_explain(sections)}" for name, sections in queries)


def render_verification(reports: Sequence[VerificationReport], fmt: str = "text") -> str:
    _check_format(fmt)
    failures = [r for r in reports if not r.holds]
    if fmt == "json":
        return dumps_json(
            {
                "graphs": len(reports),
                "counterexamples": len(failures),
                "reports": [r.to_dict() for r in reports],
            }
        )
    lines = []
    for r in reports:
        lines.append(
            f"{r.shape.value:<9} n={len(r.relations)} seed={r.seed} space={r.plan_space_size} "
            f"candidates={r.candidate_count} cand_min={format_card(r.candidate_min)} "
            f"global_min={format_card(r.global_min)} {r.verdict.value}"
        )
        if not r.holds:
            lines.append(f"  witness {r.witness_plan.signature()} beats {r.candidate_plan.signature()}")
    lines.append(f"{len(reports)} graphs verified, {len(failures)} counterexamples")
    return "\n".join(lines)


def render_benchmark(series: BreakevenSeries, fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return dumps_json(series.to_dict())
    lines = [
        f"fact={series.fact_size} dim={series.dim_size} "
        f"C_p={series.model.probe_cost_per_tuple:g} C_f={series.model.filter_check_cost_per_tuple:g}",
        f"{'e':>5} {'with':>12} {'without':>12}",
    ]
    for p in series.points:
        lines.append(f"{p.eliminated:>5.2f} {p.cost_with:>12.1f} {p.cost_without:>12.1f}")
    breakeven = series.breakeven
    lines.append("break-even: none in sweep" if breakeven is None else f"break-even: e={breakeven:.3f}")
    return "\n".join(lines)


def write_benchmark_csv(path: Path, series: BreakevenSeries) -> None:
    write_csv(
        path,
        BENCHMARK_COLUMNS,
        ((p.eliminated, p.cost_with, p.cost_without, p.wall_with_ns, p.wall_without_ns) for p in series.points),
    )


def selectivity_groups(rows: Sequence[QueryComparison]) -> dict[str, list[QueryComparison]]:
    """Cheapest third of the queries by baseline cost in S, the most expensive third in L."""
    ordered = sorted(rows, key=lambda r: (r.baseline_cost, r.name))
    size = math.ceil(len(ordered) / 3) if ordered else 0
    return {
        "S": ordered[:size],
        "M": ordered[size : 2 * size],
        "L": ordered[2 * size :],
    }


def _rollup(rows: Sequence[QueryComparison]) -> dict[str, Any]:
    baseline = sum(r.baseline_cost for r in rows)
    aware = sum(r.aware_cost for r in rows)
    return {
        "queries": [r.name for r in rows],
        "baseline_cost": baseline,
        "aware_cost": aware,
        "ratio": round(aware / baseline, 6) if baseline else 1.0,
    }


def _class_totals(rows: Sequence[QueryComparison], aware: bool) -> dict[str, int]:
    totals = {name: 0 for name in OPERATOR_CLASSES}
    for r in rows:
        for name, value in tuple_breakdown(r.aware if aware else r.baseline).items():
            totals[name] += int(value)
    return totals


def render_comparison(rows: Sequence[QueryComparison], fmt: str = "text") -> str:
    _check_format(fmt)
    groups = selectivity_groups(rows)
    baseline_tuples = _class_totals(rows, aware=False)
    aware_tuples = _class_totals(rows, aware=True)
    if fmt == "json":
        return dumps_json(
            {
                "queries": [r.to_dict() for r in rows],
                "groups": {name: _rollup(groups[name]) for name in SELECTIVITY_GROUPS},
                "total": _rollup(rows),
                "tuples": {"baseline": baseline_tuples, "aware": aware_tuples},
            }
        )
    lines = [f"{'query':<12} {'baseline':>12} {'aware':>12} {'ratio':>7} {'cout_b':>8} {'cout_a':>8}"]
    for r in rows:
        lines.append(
            f"{r.name:<12} {r.baseline_cost:>12.1f} {r.aware_cost:>12.1f} {r.ratio:>7.3f} "
            f"{r.baseline.tuples_output:>8} {r.aware.tuples_output:>8}"
        )
    for name in SELECTIVITY_GROUPS:
        rollup = _rollup(groups[name])
        lines.append(f"group {name}: {len(rollup['queries'])} queries, ratio {rollup['ratio']:.3f}")
    total = _rollup(rows)
    lines.append(f"total: baseline {total['baseline_cost']:.1f}, aware {total['aware_cost']:.1f}, ratio {total['ratio']:.3f}")
    for name in OPERATOR_CLASSES:
        lines.append(f"tuples {name}: baseline {baseline_tuples[name]}, aware {aware_tuples[name]}")
    return "\n".join(lines)
