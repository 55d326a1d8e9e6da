from __future__ import annotations

import itertools

import pytest

from bvqo.errors import PlanError
from bvqo.graph.join_graph import JoinGraph
from bvqo.graph.snowflake import decompose
from bvqo.optimizer.baseline import baseline_plan, canonical_order
from bvqo.planning.builder import has_cross_product, is_partially_ordered, right_deep
from bvqo.planning.explain import explain_plan
from bvqo.planning.nodes import FilterMode, HashJoin, Leaf, Plan, SemiJoin, Subexpression
from bvqo.planning.pushdown import push_down_bitvectors


def test_baseline_order_follows_catalog(pushdown_graph):
    assert canonical_order(pushdown_graph) == ["B", "A", "C", "D"]
    assert baseline_plan(pushdown_graph).signature() == "T(B,A,C,D)"


def test_pushdown_matches_golden(pushdown_graph, golden_dir):
    expected = (golden_dir / "pushdown_example.txt").read_text(encoding="utf-8").rstrip("\n")
    assert explain_plan(baseline_plan(pushdown_graph)) == expected


def test_filter_spanning_both_children_stays_residual(pushdown_graph):
    plan = baseline_plan(pushdown_graph)
    bv0 = plan.filter(0)
    assert bv0.source_join == 0
    assert bv0.probe_relations == frozenset({"A", "C"})
    assert bv0.landing_node == 2
    assert plan.node(2).filters == (0,)
    assert plan.node(6) == Leaf("B", (1, 2), 6)


def test_one_filter_per_join(pushdown_graph):
    plan = baseline_plan(pushdown_graph)
    assert len(plan.filters) == len(plan.joins())
    for bv in plan.filters:
        join = plan.node(bv.source_join)
        assert isinstance(join, HashJoin)
        assert bv.build_columns == tuple(b for _, b in join.join_columns)
        assert bv.probe_columns == tuple(p for p, _ in join.join_columns)
        # a filter only ever lands inside its creator's probe subtree
        assert bv.landing_node in plan.subtree_ids(join.probe.node_id)


def test_pushdown_is_idempotent(pushdown_graph):
    once = baseline_plan(pushdown_graph)
    assert push_down_bitvectors(once) == once


def test_star_filters_all_land_on_fact(star_catalog):
    graph = JoinGraph.from_catalog(star_catalog)
    plan = push_down_bitvectors(right_deep(["F", "D1", "D2", "D3"], graph))
    fact_leaf = next(n for n in plan.nodes if isinstance(n, Leaf) and n.relation == "F")
    assert fact_leaf.filters == (0, 1, 2)


def test_filters_can_land_on_build_side(chain_catalog):
    graph = JoinGraph.from_catalog(chain_catalog)
    # T(R1, R0, R2, R3): the top join probes R2, which is the build side of the join below
    plan = push_down_bitvectors(right_deep(["R1", "R0", "R2", "R3"], graph))
    assert not has_cross_product(plan, graph)
    landings = {plan.filter(f).label: plan.node(plan.filter(f).landing_node) for f in range(len(plan.filters))}
    assert isinstance(landings["bv0"], Leaf) and landings["bv0"].relation == "R2"
    assert isinstance(landings["bv1"], Leaf) and landings["bv1"].relation == "R1"


def test_mode_is_stamped_on_every_filter(pushdown_graph):
    plan = baseline_plan(pushdown_graph, FilterMode.lossy(0.1))
    assert {str(bv.mode) for bv in plan.filters} == {"lossy:0.1"}


def test_semijoin_and_subexpression_memo_keys(pushdown_graph):
    plan = baseline_plan(pushdown_graph)
    bv1 = plan.semijoin(1)
    assert bv1.source == Subexpression.base("C")
    assert bv1.probe_columns == ("B.c",)
    scan_b = plan.subexpression(6)
    assert scan_b.relations == frozenset({"B"})
    assert {sj.build_columns for sj in scan_b.semijoins} == {("C.c",), ("A.b",)}
    assert plan.semijoin(0).source == Subexpression.base("D")
    assert isinstance(bv1, SemiJoin)


def test_plan_ids_must_be_preorder():
    with pytest.raises(PlanError):
        Plan(Leaf("A", node_id=1))


@pytest.mark.parametrize("text", ["perfect", "lossy:0.05", "LOSSY:0.5"])
def test_filter_mode_parse(text):
    assert str(FilterMode.parse(text)) == text.lower()


@pytest.mark.parametrize("text", ["bloom", "lossy:x", "lossy:1.5"])
def test_filter_mode_parse_rejects(text):
    with pytest.raises(PlanError):
        FilterMode.parse(text)


@pytest.mark.parametrize(
    "branches",
    [
        [[("R1", 50, 0.5)]],
        [[("R1", 50, 0.5), ("R2", 30, 0.6)]],
        [[("R1", 50, 0.5), ("R2", 30, 0.6), ("R3", 20, 0.7)]],
        [[("R1", 50, 0.5), ("R2", 30, 0.6), ("R3", 20, 0.7), ("R4", 10, 0.8)]],
        [[("R1", 50, 0.5), ("R2", 30, 0.6), ("R3", 20, 0.7), ("R4", 10, 0.8), ("R5", 8, 0.9)]],
        [[("A1", 40, 0.5), ("A2", 20, 0.6)], [("B1", 30, 0.7), ("B2", 15, 0.4), ("B3", 9, 0.8)]],
        [[("A1", 40, 0.5)], [("B1", 30, 0.7), ("B2", 15, 0.4)], [("C1", 25, 0.6), ("C2", 12, 0.3)]],
    ],
)
def test_filters_land_on_the_parent_in_partially_ordered_plans(make_snowflake, branches):
    graph = JoinGraph.from_catalog(make_snowflake(("F", 200), branches))
    shape = decompose(graph, "F")
    dims = [u for branch in shape.branches for u in branch]
    checked = 0
    for tail in itertools.permutations(dims):
        order = ["F", *tail]
        plan = push_down_bitvectors(right_deep(order, graph))
        if not is_partially_ordered(plan, shape):
            continue
        checked += 1
        for bv in plan.filters:
            source = plan.node(bv.source_join)
            assert isinstance(source, HashJoin) and isinstance(source.build, Leaf)
            landing = plan.node(bv.landing_node)
            assert isinstance(landing, Leaf)
            assert landing.relation == shape.parent_of(source.build.relation), plan.signature()
    assert checked > 0
