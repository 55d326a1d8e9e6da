from __future__ import annotations

import itertools
from dataclasses import replace

import pytest

from bvqo.catalog.model import Catalog, JoinEdge, PkFk, Relation
from bvqo.errors import GraphError
from bvqo.graph.join_graph import GraphShape, JoinGraph, classify, find_fact_tables, snowflake_root
from bvqo.graph.snowflake import Priority, decompose, extract_snowflake, group_branches
from bvqo.planning.nodes import Leaf


def test_classify_shapes(star_catalog, chain_catalog, three_branches, pushdown_catalog):
    assert classify(JoinGraph.from_catalog(star_catalog)) is GraphShape.STAR
    assert classify(JoinGraph.from_catalog(chain_catalog)) is GraphShape.BRANCH
    assert classify(JoinGraph.from_catalog(three_branches)) is GraphShape.SNOWFLAKE
    assert classify(JoinGraph.from_catalog(pushdown_catalog)) is GraphShape.GENERAL


def test_single_relation_is_a_branch():
    catalog = Catalog(relations=(Relation("A", 10, ("id",), ("id",)),))
    graph = JoinGraph.from_catalog(catalog)
    assert classify(graph) is GraphShape.BRANCH
    assert snowflake_root(graph) == "A"


def test_disconnected_graph_is_general(make_snowflake):
    star = make_snowflake(("F", 100), [[("D1", 10, 0.5)]])
    lonely = Relation("L", 5, ("id",), ("id",))
    graph = JoinGraph.from_catalog(Catalog(relations=star.relations + (lonely,), edges=star.edges))
    assert not graph.is_connected()
    assert graph.components() == [["F", "D1"], ["L"]]
    assert classify(graph) is GraphShape.GENERAL


def test_empty_graph_cannot_be_classified():
    with pytest.raises(GraphError):
        classify(JoinGraph.from_catalog(Catalog(relations=())))


def test_fact_tables_and_roots(star_catalog, chain_catalog):
    star = JoinGraph.from_catalog(star_catalog)
    assert find_fact_tables(star) == ["F"]
    assert snowflake_root(star) == "F"
    assert snowflake_root(JoinGraph.from_catalog(chain_catalog)) == "R0"


def test_extract_snowflake_branches(three_branches):
    shape = extract_snowflake(JoinGraph.from_catalog(three_branches))
    assert shape.fact == "R0"
    assert shape.branches == (("R11",), ("R21", "R22"), ("R31", "R32"))
    assert shape.residual_edges == ()
    assert shape.parent_of("R22") == "R21"
    assert shape.parent_of("R21") == "R0"
    assert shape.branch_of("R32") == 2


def test_group_priorities(make_snowflake):
    catalog = make_snowflake(("F", 1000), [[("D1", 100, 0.5)], [("BIG", 5000, 0.9)]])
    groups = group_branches(decompose(JoinGraph.from_catalog(catalog), "F"))
    assert [(g.branches, g.priority) for g in groups] == [
        ((("D1",),), Priority.P1),
        ((("BIG",),), Priority.P3),
    ]


def _connected_dims_catalog() -> Catalog:
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
    return Catalog(relations=relations, edges=edges)


def test_connected_branches_form_one_group():
    shape = decompose(JoinGraph.from_catalog(_connected_dims_catalog()), "F")
    assert ("D1", "D2") in [tuple(sorted(e)) for e in shape.residual_edges]
    groups = {g.branches: g.priority for g in group_branches(shape)}
    assert groups[(("D1",), ("D2",))] is Priority.P2
    assert groups[(("D3",),)] is Priority.P1
    assert groups[(("N",),)] is Priority.P0


def test_collapse_keeps_outside_edges(star_catalog):
    graph = JoinGraph.from_catalog(star_catalog)
    collapsed = graph.collapse(["F", "D1"], Leaf("F"), 50.0)
    name = "{D1,F}"
    assert collapsed.units == [name, "D2", "D3"]
    assert collapsed.members(name) == frozenset({"F", "D1"})
    assert collapsed.cardinality(name) == 50.0
    assert collapsed.is_composite(name) and collapsed.is_optimized(name)
    assert collapsed.is_pkfk(name, "D2")
    assert collapsed.base_relations() == frozenset(graph.units)
    assert collapsed.unit_of("D1") == name


def _relabel(catalog: Catalog, names: dict[str, str]) -> Catalog:
    relations = tuple(
        sorted((replace(r, name=names[r.name]) for r in catalog.relations), key=lambda r: r.name)
    )
    edges = tuple(replace(e, left=names[e.left], right=names[e.right]) for e in catalog.edges)
    return Catalog(relations=relations, edges=edges)


@pytest.mark.parametrize(
    "fixture",
    ["star_catalog", "chain_catalog", "three_branches", "pushdown_catalog", "connected_dims"],
)
def test_classification_ignores_relation_names(fixture, request):
    catalog = _connected_dims_catalog() if fixture == "connected_dims" else request.getfixturevalue(fixture)
    expected = classify(JoinGraph.from_catalog(catalog))
    original = catalog.names
    for labels in itertools.islice(itertools.permutations(f"T{i}" for i in range(len(original))), 120):
        renamed = _relabel(catalog, dict(zip(original, labels)))
        assert classify(JoinGraph.from_catalog(renamed)) is expected


def test_residual_edges_chain_branches_into_one_group():
    relations = (
        Relation("F", 1000, ("id", "d1", "d2", "d3", "d4"), ("id",)),
        Relation("D1", 100, ("id", "a"), ("id",)),
        Relation("D2", 100, ("id", "a", "b"), ("id",)),
        Relation("D3", 100, ("id", "b"), ("id",)),
        Relation("D4", 100, ("id",), ("id",)),
    )
    edges = (
        JoinEdge("F", "D1", ("d1",), ("id",), PkFk.LEFT_TO_RIGHT, 0.5, 1.0),
        JoinEdge("F", "D2", ("d2",), ("id",), PkFk.LEFT_TO_RIGHT, 0.5, 1.0),
        JoinEdge("F", "D3", ("d3",), ("id",), PkFk.LEFT_TO_RIGHT, 0.5, 1.0),
        JoinEdge("F", "D4", ("d4",), ("id",), PkFk.LEFT_TO_RIGHT, 0.5, 1.0),
        JoinEdge("D1", "D2", ("a",), ("a",), PkFk.NONE, 0.8, 0.8),
        JoinEdge("D2", "D3", ("b",), ("b",), PkFk.NONE, 0.8, 0.8),
    )
    shape = decompose(JoinGraph.from_catalog(Catalog(relations=relations, edges=edges)), "F")
    assert len(shape.residual_edges) == 2
    groups = group_branches(shape)
    assert [(g.branches, g.priority) for g in groups] == [
        ((("D1",), ("D2",), ("D3",)), Priority.P2),
        ((("D4",),), Priority.P1),
    ]
