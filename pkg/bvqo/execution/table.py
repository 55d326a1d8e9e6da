from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from bvqo.catalog.model import Catalog, qualify
from bvqo.errors import DataError
from bvqo.io_utils import ensure_dir, write_csv

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Table:
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise DataError(f"Table {self.name} has a row of width {len(row)}, expected {width}")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def qualified_columns(self) -> tuple[str, ...]:
        return tuple(qualify(self.name, c) for c in self.columns)

    def check_unique(self, key_columns: tuple[str, ...]) -> None:
        if not key_columns:
            return
        positions = [self.columns.index(c) for c in key_columns]
        keys = {tuple(row[p] for p in positions) for row in self.rows}
        if len(keys) != len(self.rows):
            raise DataError(f"Key {list(key_columns)} of table {self.name} is not unique")


def load_table(path: Path, name: str | None = None) -> Table:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"Cannot read table {path}: {exc}") from exc
    if not lines:
        raise DataError(f"Table file {path} is empty; a header line is required")
    header = tuple(h.strip() for h in lines[0].split(","))
    body = [line for line in lines[1:] if line.strip()]
    rows: tuple[tuple[int, ...], ...] = ()
    if body:
        try:
            values = np.loadtxt(body, delimiter=",", dtype=np.int64, ndmin=2)
        except ValueError as exc:
            raise DataError(f"Table {path} must contain integer cells only: {exc}") from exc
        if values.shape[1] != len(header):
            raise DataError(f"Table {path} has {values.shape[1]} columns but header lists {len(header)}")
        rows = tuple(tuple(row) for row in values.tolist())
    return Table(name=name or path.stem, columns=header, rows=rows)


def load_tables(directory: Path, catalog: Catalog) -> dict[str, Table]:
    tables: dict[str, Table] = {}
    for relation in catalog.relations:
        path = directory / f"{relation.name}.csv"
        if not path.exists():
            raise DataError(f"Missing data file for relation {relation.name}: {path}")
        table = load_table(path, relation.name)
        missing = [c for c in relation.columns if c not in table.columns]
        if missing:
            raise DataError(f"Table {relation.name} lacks catalog columns {missing}")
        table.check_unique(relation.key_columns)
        tables[relation.name] = table
    LOGGER.info("Loaded %d tables from %s", len(tables), directory)
    return tables


def write_tables(directory: Path, tables: Mapping[str, Table]) -> dict[str, Path]:
    ensure_dir(directory)
    outputs: dict[str, Path] = {}
    for name in sorted(tables):
        table = tables[name]
        path = directory / f"{name}.csv"
        write_csv(path, table.columns, table.rows)
        outputs[name] = path
    return outputs
