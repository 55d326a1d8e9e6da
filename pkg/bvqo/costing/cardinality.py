from __future__ import annotations

import logging
import threading
from abc import ABC, abstractmethod
from typing import Iterable

from bvqo.catalog.model import Catalog, JoinEdge, PkFk
from bvqo.errors import PlanError
from bvqo.planning.nodes import Plan, SemiJoin, Subexpression

LOGGER = logging.getLogger(__name__)


class CardinalityProvider(ABC):
    """Answers |target / (filters…)| for canonical subexpressions."""

    exact: bool = False

    @abstractmethod
    def cardinality(self, target: Subexpression) -> float: ...

    def plan_cardinalities(self, plan: Plan) -> dict[int, float]:
        return {node.node_id: self.cardinality(plan.subexpression(node.node_id)) for node in plan.nodes}


def check_resolvable(target: Subexpression, semijoins: Iterable[SemiJoin]) -> None:
    for semijoin in semijoins:
        if not semijoin.probe_relations <= target.relations:
            missing = sorted(semijoin.probe_relations - target.relations)
            raise PlanError(f"Filter columns {list(semijoin.probe_columns)} need relations {missing} not in the target")
        if semijoin.source.relations & target.relations and not semijoin.source.relations <= target.relations:
            raise PlanError("Filter source partially overlaps its target")


def filtered_cardinality(
    target: str | Subexpression,
    filters: Iterable[SemiJoin],
    provider: CardinalityProvider,
) -> float:
    base = Subexpression.base(target) if isinstance(target, str) else target
    semijoins = tuple(filters)
    check_resolvable(base, semijoins)
    return provider.cardinality(base.with_semijoins(semijoins))


def _edge_join_size(edge: JoinEdge, left_card: float, right_card: float) -> float:
    if edge.pkfk is PkFk.LEFT_TO_RIGHT:
        return left_card * edge.sel_lr
    if edge.pkfk is PkFk.RIGHT_TO_LEFT:
        return right_card * edge.sel_rl
    return max(left_card * edge.sel_lr, right_card * edge.sel_rl)


class StatisticalProvider(CardinalityProvider):
    """Catalog-driven estimates under independence.

    A join multiplies base cardinalities by one factor per edge, where the
    factor makes the two-relation case match the PKFK rule |A⋈B| = |A ⋉ B|.
    A semi-join retains its edge selectivities scaled by how much its source
    was itself reduced. A filter whose source is already joined into the
    target only contributes the source reductions the target lacks.
    """

    def __init__(self, catalog: Catalog) -> None:
        self._catalog = catalog
        self._joins: dict[frozenset[str], float] = {}
        self._memo: dict[Subexpression, float] = {}
        self._lock = threading.Lock()

    @property
    def catalog(self) -> Catalog:
        return self._catalog

    def base_join(self, relations: frozenset[str]) -> float:
        cached = self._joins.get(relations)
        if cached is not None:
            return cached
        size = 1.0
        for name in sorted(relations):
            size *= self._catalog.cardinality(name)
        for edge in self._catalog.edges:
            if edge.left in relations and edge.right in relations:
                left = self._catalog.cardinality(edge.left)
                right = self._catalog.cardinality(edge.right)
                size *= _edge_join_size(edge, left, right) / (left * right) if left and right else 0.0
        self._joins[relations] = size
        return size

    def cardinality(self, target: Subexpression) -> float:
        with self._lock:
            return self._estimate(target)

    def _estimate(self, target: Subexpression) -> float:
        cached = self._memo.get(target)
        if cached is not None:
            return cached
        check_resolvable(target, target.semijoins)
        size = self.base_join(target.relations)
        for semijoin in sorted(target.semijoins, key=lambda sj: sj.sort_key):
            size *= self._retained(target, semijoin)
        size = max(0.0, size)
        self._memo[target] = size
        return size

    def _retained(self, target: Subexpression, semijoin: SemiJoin) -> float:
        source = semijoin.source
        if source.relations <= target.relations:
            covered = Subexpression(source.relations, source.semijoins & target.semijoins)
            denominator = self._estimate(covered)
            fraction = self._estimate(source) / denominator if denominator > 0 else 0.0
        else:
            fraction = 1.0
            for edge in self._catalog.edges_across(semijoin.probe_relations, source.relations):
                side = edge.left if edge.left in semijoin.probe_relations else edge.right
                fraction *= edge.selectivity_from(side)
            base = self.base_join(source.relations)
            fraction *= self._estimate(source) / base if base > 0 else 0.0
        fraction = min(1.0, max(0.0, fraction))
        if not semijoin.mode.is_perfect:
            fraction += semijoin.mode.fp_rate * (1.0 - fraction)
        return fraction
