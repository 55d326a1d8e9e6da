from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from bvqo.errors import CatalogError


class PkFk(str, Enum):
    """Which side of an edge holds the unique key."""

    LEFT_TO_RIGHT = "LeftToRight"
    RIGHT_TO_LEFT = "RightToLeft"
    NONE = "None"


def qualify(relation: str, column: str) -> str:
    return f"{relation}.{column}"


def relation_of(qualified_column: str) -> str:
    return qualified_column.split(".", 1)[0]


@dataclass(frozen=True, slots=True)
class Relation:
    name: str
    cardinality: int
    columns: tuple[str, ...]
    key_columns: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name or "." in self.name:
            raise CatalogError(f"Invalid relation name: {self.name!r}")
        if self.cardinality < 0:
            raise CatalogError(f"Relation {self.name} has negative cardinality {self.cardinality}")
        if len(set(self.columns)) != len(self.columns):
            raise CatalogError(f"Relation {self.name} repeats a column name")
        missing = [c for c in self.key_columns if c not in self.columns]
        if missing:
            raise CatalogError(f"Relation {self.name} key columns not in schema: {missing}")

    def qualified_columns(self) -> tuple[str, ...]:
        return tuple(qualify(self.name, c) for c in self.columns)


@dataclass(frozen=True, slots=True)
class JoinEdge:
    left: str
    right: str
    left_cols: tuple[str, ...]
    right_cols: tuple[str, ...]
    pkfk: PkFk = PkFk.NONE
    sel_lr: float = 1.0
    sel_rl: float = 1.0

    def __post_init__(self) -> None:
        if self.left == self.right:
            raise CatalogError(f"Self-join edge on {self.left} is not allowed")
        if not self.left_cols or len(self.left_cols) != len(self.right_cols):
            raise CatalogError(f"Edge {self.left}-{self.right} needs equal-length, non-empty column lists")
        for name, value in (("sel_lr", self.sel_lr), ("sel_rl", self.sel_rl)):
            if not 0.0 <= value <= 1.0:
                raise CatalogError(f"Edge {self.left}-{self.right} {name}={value} is outside [0, 1]")

    @property
    def key_side(self) -> str | None:
        if self.pkfk is PkFk.LEFT_TO_RIGHT:
            return self.right
        if self.pkfk is PkFk.RIGHT_TO_LEFT:
            return self.left
        return None

    @property
    def foreign_side(self) -> str | None:
        key = self.key_side
        if key is None:
            return None
        return self.left if key == self.right else self.right

    def touches(self, relation: str) -> bool:
        return relation in (self.left, self.right)

    def other(self, relation: str) -> str:
        return self.right if relation == self.left else self.left

    def columns_of(self, relation: str) -> tuple[str, ...]:
        return self.left_cols if relation == self.left else self.right_cols

    def selectivity_from(self, relation: str) -> float:
        """|relation ⋉ other| / |relation|."""
        return self.sel_lr if relation == self.left else self.sel_rl

    def column_pairs(self, relation: str) -> tuple[tuple[str, str], ...]:
        """(column of ``relation``, matching column of the other side), qualified."""
        other = self.other(relation)
        return tuple(
            (qualify(relation, mine), qualify(other, theirs))
            for mine, theirs in zip(self.columns_of(relation), self.columns_of(other))
        )


@dataclass(frozen=True)
class Catalog:
    relations: tuple[Relation, ...]
    edges: tuple[JoinEdge, ...] = ()
    _by_name: dict[str, Relation] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_name: dict[str, Relation] = {}
        for relation in self.relations:
            if relation.name in by_name:
                raise CatalogError(f"Duplicate relation name: {relation.name}")
            by_name[relation.name] = relation
        object.__setattr__(self, "_by_name", by_name)

        seen_pairs: set[frozenset[str]] = set()
        for edge in self.edges:
            for side in (edge.left, edge.right):
                if side not in by_name:
                    raise CatalogError(f"Edge {edge.left}-{edge.right} references unknown relation {side!r}")
            pair = frozenset((edge.left, edge.right))
            if pair in seen_pairs:
                raise CatalogError(f"More than one edge between {edge.left} and {edge.right}")
            seen_pairs.add(pair)
            for side in (edge.left, edge.right):
                cols = edge.columns_of(side)
                unknown = [c for c in cols if c not in by_name[side].columns]
                if unknown:
                    raise CatalogError(f"Edge {edge.left}-{edge.right} uses unknown columns of {side}: {unknown}")
            key_side = edge.key_side
            if key_side is not None:
                key_cols = by_name[key_side].key_columns
                if not key_cols or sorted(edge.columns_of(key_side)) != sorted(key_cols):
                    raise CatalogError(
                        f"Edge {edge.left}-{edge.right} is PKFK toward {key_side} "
                        f"but its columns are not that relation's key"
                    )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def relation(self, name: str) -> Relation:
        try:
            return self._by_name[name]
        except KeyError:
            raise CatalogError(f"Unknown relation: {name!r}") from None

    def __contains__(self, name: object) -> bool:
        return name in self._by_name

    def cardinality(self, name: str) -> int:
        return self.relation(name).cardinality

    def edge_between(self, a: str, b: str) -> JoinEdge | None:
        for edge in self.edges:
            if edge.touches(a) and edge.touches(b):
                return edge
        return None

    def edges_of(self, name: str) -> list[JoinEdge]:
        return [e for e in self.edges if e.touches(name)]

    def edges_across(self, left: Iterable[str], right: Iterable[str]) -> list[JoinEdge]:
        left_set, right_set = set(left), set(right)
        return [
            e
            for e in self.edges
            if (e.left in left_set and e.right in right_set) or (e.right in left_set and e.left in right_set)
        ]

    def join_columns(self, left: Iterable[str], right: Iterable[str]) -> tuple[tuple[str, str], ...]:
        """Qualified (left column, right column) pairs over every edge between two relation sets."""
        left_set = set(left)
        pairs: list[tuple[str, str]] = []
        for edge in self.edges_across(left_set, right):
            side = edge.left if edge.left in left_set else edge.right
            pairs.extend(edge.column_pairs(side))
        return tuple(sorted(pairs))

    def semijoin_selectivity(self, source: str, target: str) -> float:
        """Stored |source ⋉ target| / |source|."""
        edge = self.edge_between(source, target)
        if edge is None:
            raise CatalogError(f"No join edge between {source} and {target}")
        return edge.selectivity_from(source)
