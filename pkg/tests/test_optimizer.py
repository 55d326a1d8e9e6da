from __future__ import annotations

import pytest

from bvqo.catalog.loader import load_catalog_file
from bvqo.catalog.model import Catalog, JoinEdge, PkFk, Relation
from bvqo.config import OptimizerSettings
from bvqo.costing.cardinality import StatisticalProvider
from bvqo.costing.cout import cout
from bvqo.errors import GraphError, ShapeMismatchError
from bvqo.execution.datagen import generate_tables
from bvqo.execution.exact import ExactProvider
from bvqo.graph.join_graph import JoinGraph
from bvqo.graph.snowflake import decompose, extract_snowflake
from bvqo.optimizer.candidates import (
    Provenance,
    best_candidate,
    branch_candidates,
    chain_order,
    snowflake_candidates,
    star_candidates,
)
from bvqo.optimizer.heuristic import join_branches, optimize_join_graph, optimize_snowflake, sort_branches
from bvqo.oracle.verify import verify_theorem
from bvqo.oracle.workloads import run_theorem_suite
from bvqo.planning.builder import has_cross_product
from bvqo.planning.nodes import Leaf, Plan
from bvqo.planning.pushdown import push_down_bitvectors


# ── Candidate sets ──────────────────────────────────────────────────────────
def test_star_candidates(star_catalog):
    graph = JoinGraph.from_catalog(star_catalog)
    candidates = star_candidates(decompose(graph, "F"))
    assert candidates.provenance is Provenance.STAR
    assert candidates.signatures() == [
        "T(F,D1,D2,D3)",
        "T(D1,F,D2,D3)",
        "T(D2,F,D1,D3)",
        "T(D3,F,D1,D2)",
    ]
    assert not any(has_cross_product(p, graph) for p in candidates.plans)


def test_branch_candidates(chain_catalog):
    graph = JoinGraph.from_catalog(chain_catalog)
    chain = chain_order(graph)
    assert chain == ["R0", "R1", "R2", "R3"]
    candidates = branch_candidates(chain, graph)
    assert len(candidates) == len(chain)
    assert candidates.signatures() == [
        "T(R3,R2,R1,R0)",
        "T(R2,R3,R1,R0)",
        "T(R1,R2,R3,R0)",
        "T(R0,R1,R2,R3)",
    ]
    assert not any(has_cross_product(p, graph) for p in candidates.plans)


def test_branch_candidates_reject_reversed_chain(chain_catalog):
    graph = JoinGraph.from_catalog(chain_catalog)
    with pytest.raises(ShapeMismatchError):
        branch_candidates(["R3", "R2", "R1", "R0"], graph)


def test_snowflake_candidates(three_branches):
    graph = JoinGraph.from_catalog(three_branches)
    shape = extract_snowflake(graph)
    candidates = snowflake_candidates(shape)
    assert len(candidates) == 6
    assert candidates.signatures()[:4] == [
        "T(R0,R11,R21,R22,R31,R32)",
        "T(R11,R0,R21,R22,R31,R32)",
        "T(R21,R22,R0,R11,R31,R32)",
        "T(R22,R21,R0,R11,R31,R32)",
    ]
    assert not any(has_cross_product(p, graph) for p in candidates.plans)


def test_star_candidates_reject_snowflakes(three_branches):
    shape = extract_snowflake(JoinGraph.from_catalog(three_branches))
    with pytest.raises(ShapeMismatchError):
        star_candidates(shape)


def test_best_candidate_is_cheapest(star_catalog):
    graph = JoinGraph.from_catalog(star_catalog)
    provider = StatisticalProvider(star_catalog)
    candidates = star_candidates(decompose(graph, "F"))
    plan, report = best_candidate(candidates, provider)
    assert report.total == min(cout(p, provider).total for p in candidates.plans)
    assert plan in candidates.plans


# ── Branch ordering ─────────────────────────────────────────────────────────
def test_sort_branches_priorities(make_snowflake):
    catalog = make_snowflake(("F", 1000), [[("D1", 100, 0.5)], [("BIG", 2000, 0.9)], [("D3", 50, 0.2)]])
    shape = decompose(JoinGraph.from_catalog(catalog), "F")
    assert sort_branches(shape) == [("BIG",), ("D3",), ("D1",)]
    retention = OptimizerSettings(selectivity_order="retention")
    assert sort_branches(shape, retention) == [("BIG",), ("D1",), ("D3",)]


def test_sort_branches_keeps_groups_together():
    relations = (
        Relation("F", 1000, ("id", "d1", "d2", "d3", "n"), ("id",)),
        Relation("D1", 100, ("id", "tag"), ("id",)),
        Relation("D2", 100, ("id", "tag"), ("id",)),
        Relation("D3", 100, ("id",), ("id",)),
        Relation("N", 200, ("id", "n"), ("id",)),
    )
    edges = (
        JoinEdge("F", "D1", ("d1",), ("id",), PkFk.LEFT_TO_RIGHT, 0.7, 1.0),
        JoinEdge("F", "D2", ("d2",), ("id",), PkFk.LEFT_TO_RIGHT, 0.6, 1.0),
        JoinEdge("F", "D3", ("d3",), ("id",), PkFk.LEFT_TO_RIGHT, 0.1, 1.0),
        JoinEdge("F", "N", ("n",), ("n",), PkFk.NONE, 0.5, 0.5),
        JoinEdge("D1", "D2", ("tag",), ("tag",), PkFk.NONE, 0.9, 0.9),
    )
    shape = decompose(JoinGraph.from_catalog(Catalog(relations, edges)), "F")
    assert sort_branches(shape) == [("D2",), ("D1",), ("D3",), ("N",)]


def test_join_branches_swaps_larger_tables_to_probe(make_snowflake):
    graph = JoinGraph.from_catalog(make_snowflake(("F", 100), [[("D", 1000, 0.5)]]))
    node = join_branches([("D",)], "F", None, graph)
    assert node.build == Leaf("F")
    assert node.probe == Leaf("D")
    assert node.join_columns == (("D.id", "F.fk_D"),)


# ── Heuristic optimizer ─────────────────────────────────────────────────────
def test_optimize_snowflake_beats_fact_rightmost(three_branches):
    graph = JoinGraph.from_catalog(three_branches)
    provider = StatisticalProvider(three_branches)
    shape = extract_snowflake(graph)
    plan = optimize_snowflake(shape, provider)
    baseline = push_down_bitvectors(Plan.of(join_branches(sort_branches(shape), shape.fact, None, graph)))
    assert plan.relations == frozenset(three_branches.names)
    assert cout(plan, provider).total <= cout(baseline, provider).total


def test_optimizer_reaches_the_enumerated_optimum(three_branches):
    tables = generate_tables(three_branches, seed=11)
    provider = ExactProvider(tables, three_branches)
    graph = JoinGraph.from_catalog(three_branches)
    plan = optimize_join_graph(graph, provider)
    report = verify_theorem(graph, provider, seed=11)
    assert report.holds
    assert cout(plan, provider).total == pytest.approx(report.global_min)


def test_optimize_cyclic_graph(pushdown_graph, pushdown_catalog):
    plan = optimize_join_graph(pushdown_graph, StatisticalProvider(pushdown_catalog))
    assert plan.relations == frozenset("ABCD")
    assert not has_cross_product(plan, pushdown_graph)
    assert len(plan.filters) == len(plan.joins())


def test_optimize_graph_with_two_facts(workloads_dir):
    catalog = load_catalog_file(workloads_dir / "synthetic" / "q10.json")
    graph = JoinGraph.from_catalog(catalog)
    plan = optimize_join_graph(graph, StatisticalProvider(catalog))
    assert plan.relations == frozenset(catalog.names)
    assert not has_cross_product(plan, graph)


def test_disconnected_components_meet_in_a_cross_product(make_snowflake):
    star = make_snowflake(("F", 100), [[("D1", 10, 0.5)]])
    other = make_snowflake(("G", 60), [[("E1", 5, 0.4)]])
    catalog = Catalog(relations=star.relations + other.relations, edges=star.edges + other.edges)
    plan = optimize_join_graph(JoinGraph.from_catalog(catalog), StatisticalProvider(catalog))
    assert plan.relations == frozenset({"F", "D1", "G", "E1"})
    assert sum(1 for j in plan.joins() if j.is_cross_product) == 1


def test_single_relation_plan():
    catalog = Catalog(relations=(Relation("A", 10, ("id",), ("id",)),))
    plan = optimize_join_graph(JoinGraph.from_catalog(catalog), StatisticalProvider(catalog))
    assert plan.root == Leaf("A", node_id=0)
    assert plan.filters == ()


def test_empty_graph_is_rejected():
    catalog = Catalog(relations=())
    with pytest.raises(GraphError):
        optimize_join_graph(JoinGraph.from_catalog(catalog), StatisticalProvider(catalog))


def test_candidate_theorems_on_small_random_shapes():
    reports = run_theorem_suite(sizes=(3, 4), seeds=3)
    assert len(reports) == 3 * 2 * 3
    assert all(r.holds for r in reports), [r.to_dict() for r in reports if not r.holds]
