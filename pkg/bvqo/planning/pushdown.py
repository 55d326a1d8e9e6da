from __future__ import annotations

from bvqo.catalog.model import relation_of
from bvqo.planning.nodes import BitvectorFilter, FilterMode, HashJoin, Leaf, Plan, PlanNode


def push_down_bitvectors(plan: Plan, mode: FilterMode | None = None) -> Plan:
    """Create one filter per hash join and push each as deep as it can go.

    Traversal is pre-order. A join's own filter goes to its probe child; a
    filter inherited from above moves to whichever child (build or probe)
    produces all of its probe-side columns. When no single child qualifies, it
    stays on the join as a residual filter. Existing annotations are discarded,
    which makes the operation idempotent.
    """
    mode = mode or FilterMode.perfect()
    filters: list[BitvectorFilter] = []
    pending: list[tuple[int, tuple[str, ...], tuple[str, ...]]] = []

    def visit(node: PlanNode, inherited: list[int]) -> None:
        if isinstance(node, Leaf):
            _land(inherited, node.node_id)
            return
        assert isinstance(node, HashJoin)
        to_build: list[int] = []
        to_probe: list[int] = []
        residual: list[int] = []
        for index in inherited:
            probe_relations = {relation_of(c) for c in pending[index][2]}
            targets = [
                child
                for child in (node.build, node.probe)
                if probe_relations <= child.relations
            ]
            if len(targets) != 1:
                residual.append(index)
            elif targets[0] is node.build:
                to_build.append(index)
            else:
                to_probe.append(index)
        if node.join_columns:
            probe_cols = tuple(p for p, _ in node.join_columns)
            build_cols = tuple(b for _, b in node.join_columns)
            pending.append((node.node_id, build_cols, probe_cols))
            to_probe.append(len(pending) - 1)
        _land(residual, node.node_id)
        visit(node.build, to_build)
        visit(node.probe, to_probe)

    landing: dict[int, int] = {}

    def _land(indices: list[int], node_id: int) -> None:
        for index in indices:
            landing[index] = node_id

    visit(plan.root, [])
    for index, (source, build_cols, probe_cols) in enumerate(pending):
        filters.append(
            BitvectorFilter(
                filter_id=index,
                source_join=source,
                build_columns=build_cols,
                probe_columns=probe_cols,
                landing_node=landing[index],
                mode=mode,
            )
        )
    return plan.without_filters().with_filters(tuple(filters))
