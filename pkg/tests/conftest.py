from __future__ import annotations

from pathlib import Path
from typing import Callable, Sequence

import pytest

from bvqo.catalog.loader import load_catalog_file
from bvqo.catalog.model import Catalog, JoinEdge, PkFk, Relation
from bvqo.graph.join_graph import JoinGraph

ROOT = Path(__file__).resolve().parents[1]
WORKLOADS = ROOT / "workloads"
GOLDEN = Path(__file__).resolve().parent / "golden"

# (name, rows, fraction of the parent's rows that find a match)
Dim = tuple[str, int, float]


def snowflake_catalog(fact: tuple[str, int], branches: Sequence[Sequence[Dim]]) -> Catalog:
    """PKFK snowflake: each branch is a chain hanging off the fact, parents referencing children by ``id``."""
    fact_name, fact_rows = fact
    children: dict[str, list[Dim]] = {fact_name: [b[0] for b in branches if b]}
    for branch in branches:
        for parent, child in zip(branch, branch[1:]):
            children.setdefault(parent[0], []).append(child)

    names = [(fact_name, fact_rows)] + [(d[0], d[1]) for b in branches for d in b]
    relations = []
    for name, rows in names:
        columns = ("id", *(f"fk_{c[0]}" for c in children.get(name, ())), "payload")
        relations.append(Relation(name, rows, columns, ("id",)))
    edges = [
        JoinEdge(parent, child, (f"fk_{child}",), ("id",), PkFk.LEFT_TO_RIGHT, selectivity, 1.0)
        for parent, kids in children.items()
        for child, _, selectivity in kids
    ]
    return Catalog(relations=tuple(relations), edges=tuple(edges))


@pytest.fixture
def make_snowflake() -> Callable[..., Catalog]:
    return snowflake_catalog


@pytest.fixture
def workloads_dir() -> Path:
    return WORKLOADS


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture
def pushdown_catalog() -> Catalog:
    return load_catalog_file(WORKLOADS / "pushdown_example.json")


@pytest.fixture
def pushdown_graph(pushdown_catalog: Catalog) -> JoinGraph:
    return JoinGraph.from_catalog(pushdown_catalog)


@pytest.fixture
def three_branches() -> Catalog:
    return load_catalog_file(WORKLOADS / "snowflake_three_branches.json")


@pytest.fixture
def star_catalog() -> Catalog:
    return snowflake_catalog(
        ("F", 1000),
        [[("D1", 100, 0.5)], [("D2", 80, 0.9)], [("D3", 50, 0.2)]],
    )


@pytest.fixture
def chain_catalog() -> Catalog:
    return snowflake_catalog(("R0", 400), [[("R1", 120, 0.6), ("R2", 60, 0.5), ("R3", 30, 0.7)]])
