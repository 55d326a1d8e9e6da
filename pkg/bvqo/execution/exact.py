from __future__ import annotations

import logging
import threading
from typing import Mapping

from bvqo.catalog.model import Catalog
from bvqo.costing.cardinality import CardinalityProvider, check_resolvable
from bvqo.errors import ExecutionError
from bvqo.execution.bitvector import RuntimeBitvector
from bvqo.execution.table import Table
from bvqo.graph.join_graph import JoinGraph
from bvqo.planning.nodes import SemiJoin, Subexpression

LOGGER = logging.getLogger(__name__)

Rows = tuple[tuple[str, ...], list[tuple[int, ...]]]


class ExactProvider(CardinalityProvider):
    """True cardinalities by direct evaluation over the tables.

    A subexpression is the join of its relations filtered by each of its
    semi-joins; results are memoized per canonical subexpression and filters
    per (source, key columns, mode), so plans sharing sub-results share work.
    """

    exact = True

    def __init__(self, tables: Mapping[str, Table], catalog: Catalog) -> None:
        missing = [r.name for r in catalog.relations if r.name not in tables]
        if missing:
            raise ExecutionError(f"Tables do not cover relations {missing}")
        self._tables = dict(tables)
        self._catalog = catalog
        self._joins: dict[frozenset[str], Rows] = {}
        self._rows: dict[Subexpression, Rows] = {}
        self._filters: dict[tuple[Subexpression, tuple[str, ...], object], RuntimeBitvector] = {}
        self._lock = threading.RLock()

    def cardinality(self, target: Subexpression) -> int:
        return len(self.rows(target)[1])

    def rows(self, target: Subexpression) -> Rows:
        with self._lock:
            cached = self._rows.get(target)
            if cached is not None:
                return cached
            check_resolvable(target, target.semijoins)
            columns, rows = self._join(target.relations)
            for semijoin in sorted(target.semijoins, key=lambda sj: sj.sort_key):
                rows = self.apply(semijoin, columns, rows)
            result = (columns, rows)
            self._rows[target] = result
            return result

    def bitvector(self, semijoin: SemiJoin) -> RuntimeBitvector:
        key = (semijoin.source, semijoin.build_columns, semijoin.mode)
        with self._lock:
            cached = self._filters.get(key)
            if cached is None:
                columns, rows = self.rows(semijoin.source)
                positions = [columns.index(c) for c in semijoin.build_columns]
                cached = RuntimeBitvector(
                    semijoin.mode, semijoin.build_columns, (tuple(r[p] for p in positions) for r in rows)
                )
                self._filters[key] = cached
            return cached

    def apply(self, semijoin: SemiJoin, columns: tuple[str, ...], rows: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
        """Rows surviving one semi-join, in input order."""
        bitvector = self.bitvector(semijoin)
        positions = [columns.index(c) for c in semijoin.probe_columns]
        return [row for row in rows if tuple(row[p] for p in positions) in bitvector]

    def _join(self, relations: frozenset[str]) -> Rows:
        cached = self._joins.get(relations)
        if cached is not None:
            return cached
        order = self._join_order(relations)
        if len(order) == 1:
            table = self._tables[order[0]]
            result: Rows = (table.qualified_columns, list(table.rows))
        else:
            last = order[-1]
            columns, rows = self._join(frozenset(order[:-1]))
            table = self._tables[last]
            pairs = self._catalog.join_columns(order[:-1], [last])
            left_pos = [columns.index(a) for a, _ in pairs]
            right_pos = [table.qualified_columns.index(b) for _, b in pairs]
            index: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
            for row in table.rows:
                index.setdefault(tuple(row[p] for p in right_pos), []).append(row)
            joined = [
                row + match
                for row in rows
                for match in index.get(tuple(row[p] for p in left_pos), ())
            ]
            result = (columns + table.qualified_columns, joined)
        self._joins[relations] = result
        return result

    def _join_order(self, relations: frozenset[str]) -> list[str]:
        """Catalog order, each next relation connected to the prefix when possible."""
        remaining = [r for r in self._catalog.names if r in relations]
        if len(remaining) != len(relations):
            raise ExecutionError(f"Unknown relations in {sorted(relations)}")
        order = [remaining.pop(0)]
        while remaining:
            pick = next((r for r in remaining if self._catalog.edges_across(order, [r])), remaining[0])
            remaining.remove(pick)
            order.append(pick)
        return order


def exact_provider(tables: Mapping[str, Table], graph: JoinGraph) -> ExactProvider:
    return ExactProvider(tables, graph.catalog)
