from __future__ import annotations

from typing import Any, Mapping

from bvqo.planning.nodes import HashJoin, Leaf, Plan, PlanNode


def format_card(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.1f}"


def node_label(node: PlanNode) -> str:
    if isinstance(node, Leaf):
        return f"SCAN {node.relation}"
    return f"HJ#{node.node_id}"


def _filter_list(plan: Plan, node: PlanNode) -> str:
    return "[" + ", ".join(plan.filter(fid).label for fid in node.filters) + "]"


def explain_plan(plan: Plan, cardinalities: Mapping[int, float] | None = None, total: float | None = None) -> str:
    lines: list[str] = []

    def card_suffix(node: PlanNode) -> str:
        if cardinalities is None:
            return ""
        return f" card={format_card(cardinalities[node.node_id])}"

    def walk(node: PlanNode, depth: int) -> None:
        pad = "  " * depth
        if isinstance(node, Leaf):
            lines.append(f"{pad}SCAN {node.relation} filters={_filter_list(plan, node)}{card_suffix(node)}")
            return
        build = node.build.relation if isinstance(node.build, Leaf) else f"HJ#{node.build.node_id}"
        lines.append(f"{pad}HJ#{node.node_id}(build={build}, filters={_filter_list(plan, node)}){card_suffix(node)}")
        walk(node.build, depth + 1)
        walk(node.probe, depth + 1)

    walk(plan.root, 0)
    for bv in plan.filters:
        keys = ", ".join(bv.build_columns)
        lines.append(
            f"{bv.label}: HJ#{bv.source_join} -> {node_label(plan.node(bv.landing_node))} "
            f"keys=({keys}) mode={bv.mode}"
        )
    if total is not None:
        lines.append(f"Cout={format_card(total)}")
    return "\n".join(lines)


def explain_plan_dict(plan: Plan, cardinalities: Mapping[int, float] | None = None, total: float | None = None) -> dict[str, Any]:
    def encode(node: PlanNode) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "id": node.node_id,
            "filters": [plan.filter(fid).label for fid in node.filters],
        }
        if isinstance(node, Leaf):
            payload["op"] = "SCAN"
            payload["relation"] = node.relation
        else:
            assert isinstance(node, HashJoin)
            payload["op"] = "HJ"
            payload["join_columns"] = [list(pair) for pair in node.join_columns]
            payload["build"] = encode(node.build)
            payload["probe"] = encode(node.probe)
        if cardinalities is not None:
            payload["card"] = cardinalities[node.node_id]
        return payload

    out: dict[str, Any] = {
        "signature": plan.signature(),
        "root": encode(plan.root),
        "filters": [
            {
                "id": bv.label,
                "source": bv.source_join,
                "landing": bv.landing_node,
                "keys": list(bv.build_columns),
                "probe_columns": list(bv.probe_columns),
                "mode": str(bv.mode),
            }
            for bv in plan.filters
        ],
    }
    if total is not None:
        out["cout"] = total
    return out
