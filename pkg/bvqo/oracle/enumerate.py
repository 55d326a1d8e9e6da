from __future__ import annotations

import itertools
import logging
from typing import Iterator

from bvqo.errors import OracleCapError
from bvqo.graph.join_graph import JoinGraph
from bvqo.planning.builder import chain_join, has_cross_product
from bvqo.planning.nodes import FilterMode, Plan
from bvqo.planning.pushdown import push_down_bitvectors

LOGGER = logging.getLogger(__name__)

DEFAULT_CAP = 8


def _check_cap(graph: JoinGraph, cap: int) -> None:
    if len(graph) > cap:
        raise OracleCapError(f"Join graph has {len(graph)} relations; the enumeration cap is {cap}")


def no_cp_orders(graph: JoinGraph, cap: int = DEFAULT_CAP) -> Iterator[list[str]]:
    """Every leaf order T(X0, …, Xn) whose prefixes are all connected, in lexicographic unit order."""
    _check_cap(graph, cap)
    units = graph.units

    def extend(order: list[str], remaining: list[str]) -> Iterator[list[str]]:
        if not remaining:
            yield list(order)
            return
        for unit in remaining:
            if order and not any(graph.has_edge(unit, placed) for placed in order):
                continue
            order.append(unit)
            yield from extend(order, [u for u in remaining if u != unit])
            order.pop()

    yield from extend([], units)


def enumerate_right_deep_no_cp(
    graph: JoinGraph,
    cap: int = DEFAULT_CAP,
    mode: FilterMode | None = None,
) -> Iterator[Plan]:
    """Every right-deep plan without cross products, with filters pushed down."""
    for order in no_cp_orders(graph, cap):
        yield push_down_bitvectors(Plan.of(chain_join(order, graph)), mode)


def count_no_cp_permutations_naive(graph: JoinGraph, cap: int = DEFAULT_CAP) -> int:
    """Generate-and-test count over all permutations, independent of the pruned enumeration."""
    _check_cap(graph, cap)
    count = 0
    for order in itertools.permutations(graph.units):
        if not has_cross_product(Plan.of(chain_join(order, graph)), graph):
            count += 1
    LOGGER.debug("Naive count for %d relations: %d", len(graph), count)
    return count
