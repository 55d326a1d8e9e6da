from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from bvqo.catalog.model import Catalog, JoinEdge, PkFk, Relation
from bvqo.config import DEFAULT_ELIMINATION_GRID
from bvqo.costing.model import FilterCostModel
from bvqo.errors import ConfigError
from bvqo.execution.engine import execute
from bvqo.execution.table import Table
from bvqo.graph.join_graph import JoinGraph
from bvqo.planning.builder import right_deep
from bvqo.planning.pushdown import push_down_bitvectors

LOGGER = logging.getLogger(__name__)

BENCH_FACT = "F"
BENCH_DIM = "D"


@dataclass(frozen=True, slots=True)
class BreakevenPoint:
    eliminated: float
    cost_with: float
    cost_without: float
    wall_with_ns: int
    wall_without_ns: int


@dataclass(frozen=True)
class BreakevenSeries:
    fact_size: int
    dim_size: int
    model: FilterCostModel
    points: tuple[BreakevenPoint, ...] = field(default=())

    @property
    def breakeven(self) -> float | None:
        """Eliminated fraction where the filtered run stops being costlier, linearly interpolated."""
        previous: BreakevenPoint | None = None
        for point in self.points:
            gap = point.cost_with - point.cost_without
            if gap <= 0:
                if previous is None:
                    return point.eliminated
                before = previous.cost_with - previous.cost_without
                span = point.eliminated - previous.eliminated
                return previous.eliminated + span * before / (before - gap) if before != gap else point.eliminated
            previous = point
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "fact_size": self.fact_size,
            "dim_size": self.dim_size,
            "probe_cost_per_tuple": self.model.probe_cost_per_tuple,
            "filter_check_cost_per_tuple": self.model.filter_check_cost_per_tuple,
            "breakeven": self.breakeven,
            "points": [
                {
                    "e": p.eliminated,
                    "cost_with": p.cost_with,
                    "cost_without": p.cost_without,
                    "wall_with_ns": p.wall_with_ns,
                    "wall_without_ns": p.wall_without_ns,
                }
                for p in self.points
            ],
        }


def _bench_catalog(fact_size: int, dim_size: int, eliminated: float) -> Catalog:
    return Catalog(
        relations=(
            Relation(BENCH_DIM, dim_size, ("id", "payload"), ("id",)),
            Relation(BENCH_FACT, fact_size, ("id", "dim_id", "payload"), ("id",)),
        ),
        edges=(
            JoinEdge(BENCH_FACT, BENCH_DIM, ("dim_id",), ("id",), PkFk.LEFT_TO_RIGHT, 1.0 - eliminated, 1.0),
        ),
    )


def _bench_tables(fact_size: int, dim_size: int, eliminated: float, rng: np.random.Generator) -> dict[str, Table]:
    dim_rows = tuple((i, int(v)) for i, v in enumerate(rng.integers(0, 100, size=dim_size)))
    misses = int(round(eliminated * fact_size))
    foreign = rng.integers(0, dim_size, size=fact_size)
    foreign[rng.permutation(fact_size)[:misses]] = dim_size  # one past the last key
    payload = rng.integers(0, 100, size=fact_size)
    fact_rows = tuple((i, int(f), int(p)) for i, (f, p) in enumerate(zip(foreign.tolist(), payload.tolist())))
    return {
        BENCH_DIM: Table(BENCH_DIM, ("id", "payload"), dim_rows),
        BENCH_FACT: Table(BENCH_FACT, ("id", "dim_id", "payload"), fact_rows),
    }


def breakeven_benchmark(
    fact_size: int,
    dim_size: int,
    grid: Sequence[float] = DEFAULT_ELIMINATION_GRID,
    model: FilterCostModel | None = None,
    seed: int = 7,
) -> BreakevenSeries:
    """Sweep the eliminated fraction of a single fact-dimension join.

    The dimension is the build side and the fact probes it. For each point the
    plan runs once with its bitvector and once without; both simulated cost
    units and wall time are recorded.
    """
    if fact_size < 1 or dim_size < 1:
        raise ConfigError("benchmark sizes must be positive")
    if not grid:
        raise ConfigError("elimination grid must not be empty")
    model = model or FilterCostModel()
    rng = np.random.default_rng(seed)
    points: list[BreakevenPoint] = []
    for eliminated in sorted(grid):
        if not 0.0 <= eliminated <= 1.0:
            raise ConfigError(f"eliminated fraction must be within [0, 1], got {eliminated}")
        graph = JoinGraph.from_catalog(_bench_catalog(fact_size, dim_size, eliminated))
        plan = push_down_bitvectors(right_deep([BENCH_FACT, BENCH_DIM], graph))
        tables = _bench_tables(fact_size, dim_size, eliminated, rng)
        _, with_filter = execute(plan, tables, model=model)
        _, without_filter = execute(plan, tables, apply_filters=False, model=model)
        points.append(
            BreakevenPoint(
                eliminated=eliminated,
                cost_with=with_filter.total_cost_units,
                cost_without=without_filter.total_cost_units,
                wall_with_ns=with_filter.wall_time_ns,
                wall_without_ns=without_filter.wall_time_ns,
            )
        )
        LOGGER.info(
            "e=%.2f cost with filter %.1f, without %.1f", eliminated, with_filter.total_cost_units, without_filter.total_cost_units
        )
    return BreakevenSeries(fact_size=fact_size, dim_size=dim_size, model=model, points=tuple(points))
