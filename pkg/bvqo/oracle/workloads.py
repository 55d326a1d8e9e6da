from __future__ import annotations

import logging
import sys
from typing import Sequence

import numpy as np
from tqdm import tqdm

from bvqo.catalog.model import Catalog, JoinEdge, PkFk, Relation
from bvqo.errors import ConfigError
from bvqo.execution.datagen import generate_tables
from bvqo.execution.exact import ExactProvider
from bvqo.graph.join_graph import JoinGraph
from bvqo.oracle.enumerate import DEFAULT_CAP
from bvqo.oracle.verify import VerificationReport, verify_theorem
from bvqo.planning.nodes import FilterMode

LOGGER = logging.getLogger(__name__)

SHAPE_KINDS = ("star", "branch", "snowflake")
FACT_ROWS = (60, 200)
DIM_ROWS = (5, 60)
SELECTIVITY_RANGE = (0.3, 1.0)


def _layout(kind: str, size: int, rng: np.random.Generator) -> list[list[str]]:
    """Branches hanging off the fact, as lists of relation names."""
    dims = size - 1
    if kind == "star":
        return [[f"D{i}"] for i in range(1, dims + 1)]
    if kind == "branch":
        return [[f"R{i}" for i in range(1, dims + 1)]] if dims else []
    if kind != "snowflake":
        raise ConfigError(f"Unknown shape kind: {kind!r}; expected one of {SHAPE_KINDS}")
    if dims <= 1:
        return [["B1_1"]] if dims else []
    # at least one branch of length two, the rest split at random
    count = int(rng.integers(1, dims)) if dims > 2 else 1
    lengths = [1] * count
    lengths[0] += 1
    for _ in range(dims - sum(lengths)):
        lengths[int(rng.integers(0, count))] += 1
    return [[f"B{b}_{j}" for j in range(1, length + 1)] for b, length in enumerate(lengths, start=1)]


def random_shape_catalog(kind: str, size: int, rng: np.random.Generator) -> Catalog:
    """A seeded PKFK star, chain or snowflake over ``size`` relations.

    The fact (or chain start R0) is the largest relation. Every edge points
    from a foreign key toward the referenced relation's ``id`` key.
    """
    if size < 1:
        raise ConfigError(f"shape size must be positive, got {size}")
    fact = "R0" if kind == "branch" else "F"
    branches = _layout(kind, size, rng)
    children: dict[str, list[str]] = {fact: [b[0] for b in branches]}
    for branch in branches:
        for parent, child in zip(branch, branch[1:]):
            children.setdefault(parent, []).append(child)

    names = [fact] + [u for b in branches for u in b]
    relations = []
    for name in names:
        low, high = FACT_ROWS if name == fact else DIM_ROWS
        columns = ("id", *(f"fk_{c}" for c in children.get(name, ())), "payload")
        relations.append(Relation(name, int(rng.integers(low, high + 1)), columns, ("id",)))

    edges = []
    for parent in names:
        for child in children.get(parent, ()):
            selectivity = round(float(rng.uniform(*SELECTIVITY_RANGE)), 3)
            edges.append(JoinEdge(parent, child, (f"fk_{child}",), ("id",), PkFk.LEFT_TO_RIGHT, selectivity, 1.0))
    return Catalog(relations=tuple(relations), edges=tuple(edges))


def run_theorem_suite(
    kinds: Sequence[str] = SHAPE_KINDS,
    sizes: Sequence[int] = (3, 4, 5, 6, 7),
    seeds: int = 20,
    base_seed: int = 7,
    mode: FilterMode | None = None,
    cap: int = DEFAULT_CAP,
) -> list[VerificationReport]:
    """Verify the candidate theorems on seeded random data for every kind and size."""
    unknown = [k for k in kinds if k not in SHAPE_KINDS]
    if unknown:
        raise ConfigError(f"Unknown shape kinds {unknown}; expected any of {list(SHAPE_KINDS)}")
    jobs = [(kind, size, base_seed + trial) for kind in kinds for size in sizes for trial in range(seeds)]
    reports: list[VerificationReport] = []
    progress = tqdm(jobs, desc="Verifying", unit="graph", file=sys.stderr, disable=not sys.stderr.isatty())
    for kind, size, seed in progress:
        rng = np.random.default_rng([seed, size, SHAPE_KINDS.index(kind)])
        catalog = random_shape_catalog(kind, size, rng)
        tables = generate_tables(catalog, seed)
        provider = ExactProvider(tables, catalog)
        reports.append(verify_theorem(JoinGraph.from_catalog(catalog), provider, mode, seed=seed, cap=cap))
    failures = sum(1 for r in reports if not r.holds)
    LOGGER.info("Theorem suite: %d graphs, %d counterexamples", len(reports), failures)
    return reports
