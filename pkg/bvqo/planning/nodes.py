from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator

from bvqo.catalog.model import relation_of
from bvqo.errors import PlanError


@dataclass(frozen=True, slots=True)
class FilterMode:
    """Perfect filters are exact key sets; lossy ones are Bloom filters with a target fp rate."""

    kind: str = "perfect"
    fp_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("perfect", "lossy"):
            raise PlanError(f"Unknown filter mode: {self.kind}")
        if self.kind == "perfect" and self.fp_rate != 0.0:
            raise PlanError("Perfect filters cannot have a false-positive rate")
        if not 0.0 <= self.fp_rate < 1.0:
            raise PlanError(f"False-positive rate must be within [0, 1), got {self.fp_rate}")

    @classmethod
    def perfect(cls) -> FilterMode:
        return cls()

    @classmethod
    def lossy(cls, fp_rate: float) -> FilterMode:
        return cls(kind="lossy", fp_rate=fp_rate)

    @classmethod
    def parse(cls, text: str) -> FilterMode:
        value = text.strip().lower()
        if value == "perfect":
            return cls.perfect()
        if value.startswith("lossy:"):
            try:
                return cls.lossy(float(value.split(":", 1)[1]))
            except ValueError as exc:
                raise PlanError(f"Invalid lossy filter mode: {text!r}") from exc
        raise PlanError(f"Filter mode must be 'perfect' or 'lossy:<fp>', got {text!r}")

    @property
    def is_perfect(self) -> bool:
        return self.kind == "perfect"

    def __str__(self) -> str:
        return "perfect" if self.is_perfect else f"lossy:{self.fp_rate:g}"


@dataclass(frozen=True, slots=True)
class Leaf:
    relation: str
    filters: tuple[int, ...] = ()
    node_id: int = -1

    @property
    def relations(self) -> frozenset[str]:
        return frozenset((self.relation,))

    def children(self) -> tuple[PlanNode, ...]:
        return ()


@dataclass(frozen=True, slots=True)
class HashJoin:
    """Hash join; ``join_columns`` pairs are (probe-side column, build-side column)."""

    build: PlanNode
    probe: PlanNode
    join_columns: tuple[tuple[str, str], ...] = ()
    filters: tuple[int, ...] = ()
    node_id: int = -1

    @property
    def relations(self) -> frozenset[str]:
        return self.build.relations | self.probe.relations

    def children(self) -> tuple[PlanNode, ...]:
        return (self.build, self.probe)

    @property
    def is_cross_product(self) -> bool:
        return not self.join_columns


PlanNode = Leaf | HashJoin


@dataclass(frozen=True, slots=True)
class BitvectorFilter:
    filter_id: int
    source_join: int
    build_columns: tuple[str, ...]
    probe_columns: tuple[str, ...]
    landing_node: int
    mode: FilterMode = FilterMode()

    @property
    def key_columns(self) -> tuple[str, ...]:
        return self.build_columns

    @property
    def probe_relations(self) -> frozenset[str]:
        return frozenset(relation_of(c) for c in self.probe_columns)

    @property
    def label(self) -> str:
        return f"bv{self.filter_id}"


@dataclass(frozen=True)
class Subexpression:
    """Canonical description of an intermediate result: the join of
    ``relations`` restricted by every semi-join applied inside it."""

    relations: frozenset[str]
    semijoins: frozenset[SemiJoin] = frozenset()

    @classmethod
    def base(cls, relation: str) -> Subexpression:
        return cls(frozenset((relation,)))

    def with_semijoins(self, extra: frozenset[SemiJoin] | set[SemiJoin] | tuple[SemiJoin, ...]) -> Subexpression:
        return Subexpression(self.relations, self.semijoins | frozenset(extra))

    def without(self, semijoin: SemiJoin) -> Subexpression:
        return Subexpression(self.relations, self.semijoins - {semijoin})

    @cached_property
    def sort_key(self) -> tuple:
        """Deterministic ordering key, independent of hash seeds."""
        return (tuple(sorted(self.relations)), tuple(sorted(sj.sort_key for sj in self.semijoins)))


@dataclass(frozen=True)
class SemiJoin:
    """A filter built from ``source`` on ``build_columns``, probed with ``probe_columns``."""

    source: Subexpression
    probe_columns: tuple[str, ...]
    build_columns: tuple[str, ...]
    mode: FilterMode = FilterMode()

    @property
    def sort_key(self) -> tuple:
        return (self.source.sort_key, self.probe_columns, self.build_columns, str(self.mode))

    @property
    def probe_relations(self) -> frozenset[str]:
        return frozenset(relation_of(c) for c in self.probe_columns)


def _preorder(node: PlanNode) -> Iterator[PlanNode]:
    yield node
    if isinstance(node, HashJoin):
        yield from _preorder(node.build)
        yield from _preorder(node.probe)


def _renumber(node: PlanNode, counter: list[int]) -> PlanNode:
    node_id = counter[0]
    counter[0] += 1
    if isinstance(node, Leaf):
        return Leaf(node.relation, (), node_id)
    build = _renumber(node.build, counter)
    probe = _renumber(node.probe, counter)
    return HashJoin(build, probe, node.join_columns, (), node_id)


@dataclass(frozen=True)
class Plan:
    """A hash-join tree. Node ids are dense and assigned in pre-order (node, build, probe)."""

    root: PlanNode
    filters: tuple[BitvectorFilter, ...] = field(default=())

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for index, node in enumerate(_preorder(self.root)):
            if node.node_id != index:
                raise PlanError("Plan node ids must be dense pre-order integers; build plans with Plan.of")
            if isinstance(node, Leaf):
                if node.relation in seen:
                    raise PlanError(f"Relation {node.relation} appears in more than one leaf")
                seen.add(node.relation)

    @classmethod
    def of(cls, root: PlanNode) -> Plan:
        """Number a fresh tree; any filter annotations are dropped."""
        return cls(_renumber(root, [0]))

    # ── Navigation ──────────────────────────────────────────────────────────
    @cached_property
    def nodes(self) -> tuple[PlanNode, ...]:
        return tuple(_preorder(self.root))

    def node(self, node_id: int) -> PlanNode:
        if not 0 <= node_id < len(self.nodes):
            raise PlanError(f"No plan node with id {node_id}")
        return self.nodes[node_id]

    def filter(self, filter_id: int) -> BitvectorFilter:
        for bv in self.filters:
            if bv.filter_id == filter_id:
                return bv
        raise PlanError(f"No filter with id {filter_id}")

    @property
    def relations(self) -> frozenset[str]:
        return self.root.relations

    @cached_property
    def parents(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for node in self.nodes:
            for child in node.children():
                out[child.node_id] = node.node_id
        return out

    def subtree_ids(self, node_id: int) -> frozenset[int]:
        return frozenset(n.node_id for n in _preorder(self.node(node_id)))

    def joins(self) -> list[HashJoin]:
        return [n for n in self.nodes if isinstance(n, HashJoin)]

    def right_deep_order(self) -> list[str] | None:
        """T(X0, …, Xn) leaf order for right-deep trees, else None."""
        order: list[str] = []
        node = self.root
        while isinstance(node, HashJoin):
            if not isinstance(node.build, Leaf):
                return None
            order.append(node.build.relation)
            node = node.probe
        order.append(node.relation)
        return order[::-1]

    def signature(self) -> str:
        order = self.right_deep_order()
        if order is not None:
            return f"T({','.join(order)})"
        return _nested_signature(self.root)

    # ── Filter semantics ────────────────────────────────────────────────────
    def with_filters(self, filters: tuple[BitvectorFilter, ...]) -> Plan:
        landing: dict[int, list[int]] = {}
        for bv in filters:
            landing.setdefault(bv.landing_node, []).append(bv.filter_id)
        root = _annotate(self.root, landing)
        return Plan(root, tuple(sorted(filters, key=lambda bv: bv.filter_id)))

    def without_filters(self) -> Plan:
        return Plan.of(self.root)

    @cached_property
    def _subexpressions(self) -> dict[int, Subexpression]:
        return {}

    def semijoin(self, filter_id: int) -> SemiJoin:
        bv = self.filter(filter_id)
        source = self.node(bv.source_join)
        if not isinstance(source, HashJoin):
            raise PlanError(f"Filter {bv.label} is not created by a hash join")
        return SemiJoin(
            source=self.subexpression(source.build.node_id),
            probe_columns=bv.probe_columns,
            build_columns=bv.build_columns,
            mode=bv.mode,
        )

    def subexpression(self, node_id: int) -> Subexpression:
        cache = self._subexpressions
        if node_id not in cache:
            node = self.node(node_id)
            semijoins = frozenset(
                self.semijoin(fid)
                for inner in _preorder(node)
                for fid in inner.filters
            )
            cache[node_id] = Subexpression(node.relations, semijoins)
        return cache[node_id]


def _annotate(node: PlanNode, landing: dict[int, list[int]]) -> PlanNode:
    applied = tuple(sorted(landing.get(node.node_id, ())))
    if isinstance(node, Leaf):
        return replace(node, filters=applied)
    return replace(
        node,
        build=_annotate(node.build, landing),
        probe=_annotate(node.probe, landing),
        filters=applied,
    )


def _nested_signature(node: PlanNode) -> str:
    if isinstance(node, Leaf):
        return node.relation
    return f"HJ({_nested_signature(node.build)}, {_nested_signature(node.probe)})"
