from __future__ import annotations

import logging
from typing import Mapping

import numpy as np

from bvqo.catalog.model import Catalog, JoinEdge, PkFk
from bvqo.errors import DataGenerationError, ShapeMismatchError
from bvqo.execution.table import Table
from bvqo.graph.snowflake import SnowflakeShape

LOGGER = logging.getLogger(__name__)

SELECTIVITY_TOLERANCE = 0.02
PAYLOAD_DOMAIN = 100

Selectivities = Mapping[tuple[str, str], float]


def _tolerance(rows: int) -> float:
    # a table of n rows can only realize multiples of 1/n
    return max(SELECTIVITY_TOLERANCE, 0.5 / rows) if rows else 1.0


def _sides(edge: JoinEdge) -> tuple[str, str]:
    """(referencing side, referenced side) for value generation."""
    if edge.pkfk is PkFk.NONE:
        return edge.left, edge.right
    return edge.foreign_side, edge.key_side  # type: ignore[return-value]


def _realized(fk_values: np.ndarray, ref_values: np.ndarray) -> float:
    if len(fk_values) == 0:
        return 1.0
    present = {tuple(r) for r in ref_values.tolist()}
    hits = sum(1 for row in fk_values.tolist() if tuple(row) in present)
    return hits / len(fk_values)


def generate_tables(
    catalog: Catalog,
    seed: int,
    selectivities: Selectivities | None = None,
) -> dict[str, Table]:
    """Seeded integer tables matching the catalog's cardinalities and semi-join selectivities.

    Keys are dense row numbers. For every edge, exactly round(s * n) rows of
    the referencing side receive values present on the referenced side and
    the rest receive values above its maximum, so |R ⋉ S| / |R| is realized
    up to rounding. A column already fixed by an earlier role is checked
    instead of regenerated; a mismatch is reported as infeasible.
    """
    overrides = dict(selectivities or {})
    rng = np.random.default_rng(seed)
    values: dict[str, dict[str, np.ndarray]] = {r.name: {} for r in catalog.relations}

    for relation in catalog.relations:
        for column in relation.key_columns:
            values[relation.name][column] = np.arange(relation.cardinality, dtype=np.int64)

    for edge in catalog.edges:
        fk_side, ref_side = _sides(edge)
        fk_cols = edge.columns_of(fk_side)
        ref_cols = edge.columns_of(ref_side)
        fk_card = catalog.cardinality(fk_side)
        ref_card = catalog.cardinality(ref_side)
        target = overrides.get((fk_side, ref_side), edge.selectivity_from(fk_side))
        if not 0.0 <= target <= 1.0:
            raise DataGenerationError(f"Selectivity {target} for {fk_side} -> {ref_side} is outside [0, 1]")

        ref_store = values[ref_side]
        if any(c not in ref_store for c in ref_cols):
            if any(c in ref_store for c in ref_cols):
                raise DataGenerationError(f"Columns {list(ref_cols)} of {ref_side} are only partly generated")
            domain = rng.integers(0, max(1, ref_card // 2), size=ref_card, dtype=np.int64)
            for column in ref_cols:
                ref_store[column] = domain.copy()
        ref_values = np.column_stack([ref_store[c] for c in ref_cols]) if ref_card else np.empty((0, len(ref_cols)), dtype=np.int64)

        fk_store = values[fk_side]
        assigned = [c in fk_store for c in fk_cols]
        if all(assigned):
            fk_values = np.column_stack([fk_store[c] for c in fk_cols]) if fk_card else np.empty((0, len(fk_cols)), dtype=np.int64)
            realized = _realized(fk_values, ref_values)
            if abs(realized - target) > _tolerance(fk_card):
                raise DataGenerationError(
                    f"Infeasible selectivity for {fk_side} -> {ref_side}: columns are fixed by another role "
                    f"and realize {realized:.3f} instead of {target:.3f}"
                )
            continue
        if any(assigned):
            raise DataGenerationError(f"Columns {list(fk_cols)} of {fk_side} are only partly generated")

        matched = int(round(target * fk_card))
        distinct = np.unique(ref_values, axis=0) if ref_card else ref_values
        if matched and len(distinct) == 0:
            raise DataGenerationError(f"{fk_side} -> {ref_side} needs matches but {ref_side} is empty")
        generated = np.empty((fk_card, len(fk_cols)), dtype=np.int64)
        order = rng.permutation(fk_card)
        hit_rows, miss_rows = order[:matched], order[matched:]
        if matched:
            generated[hit_rows] = distinct[rng.integers(0, len(distinct), size=matched)]
        ceiling = int(ref_values.max()) + 1 if ref_card else 0
        generated[miss_rows] = (ceiling + rng.integers(0, max(1, fk_card), size=len(miss_rows)))[:, None]
        for i, column in enumerate(fk_cols):
            fk_store[column] = generated[:, i].copy()

    tables: dict[str, Table] = {}
    for relation in catalog.relations:
        store = values[relation.name]
        for column in relation.columns:
            if column not in store:
                store[column] = rng.integers(0, PAYLOAD_DOMAIN, size=relation.cardinality, dtype=np.int64)
        if relation.cardinality:
            matrix = np.column_stack([store[c] for c in relation.columns])
            rows = tuple(tuple(row) for row in matrix.tolist())
        else:
            rows = ()
        tables[relation.name] = Table(relation.name, relation.columns, rows)
    LOGGER.info("Generated %d tables with seed %d", len(tables), seed)
    return tables


def generate_snowflake_data(
    shape: SnowflakeShape,
    selectivities: Selectivities | None,
    seed: int,
) -> dict[str, Table]:
    graph = shape.graph
    if any(graph.is_composite(u) for u in shape.relations):
        raise ShapeMismatchError("Data can only be generated for shapes over base relations")
    tables = generate_tables(graph.catalog, seed, selectivities)
    return {name: tables[name] for name in shape.relations}
