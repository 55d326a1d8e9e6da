from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from bvqo.errors import ConfigError, PlanError
from bvqo.planning.nodes import FilterMode

SEED_ENV_VAR = "BVQO_SEED"
DEFAULT_ELIMINATION_GRID = tuple(round(0.05 * i, 2) for i in range(20))


@dataclass(slots=True)
class OptimizerSettings:
    p2_larger_first: bool = True
    selectivity_order: str = "elimination"

    def __post_init__(self) -> None:
        if self.selectivity_order not in ("elimination", "retention"):
            raise ConfigError(f"Unknown selectivity order: {self.selectivity_order}")


@dataclass(slots=True)
class RunConfig:
    subcommand: str
    workload: Path | None = None
    data_dir: Path | None = None
    seed: int = 7
    threshold: float = 0.05
    filter_mode: str = "perfect"
    cap: int = 8
    output_format: str = "text"
    out: Path | None = None
    plot: Path | None = None
    verbose: bool = False
    verify_sizes: tuple[int, ...] = (3, 4, 5, 6, 7)
    verify_seeds: int = 20
    bench_fact_size: int = 20_000
    bench_dim_size: int = 200
    bench_grid: tuple[float, ...] = DEFAULT_ELIMINATION_GRID
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)

    def resolved_seed(self) -> int:
        raw = os.environ.get(SEED_ENV_VAR)
        if raw is None or not raw.strip():
            return self.seed
        try:
            return int(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc

    def validate(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be within [0, 1], got {self.threshold}")
        try:
            FilterMode.parse(self.filter_mode)
        except PlanError as exc:
            raise ConfigError(str(exc)) from exc
        if self.cap < 1:
            raise ConfigError(f"cap must be positive, got {self.cap}")
        if self.output_format not in ("text", "json"):
            raise ConfigError(f"Unknown output format: {self.output_format}")
        if self.workload is not None and not self.workload.exists():
            raise ConfigError(f"Workload not found: {self.workload}")
        if self.data_dir is not None and not self.data_dir.is_dir():
            raise ConfigError(f"Data directory not found: {self.data_dir}")
        if self.verify_seeds < 1:
            raise ConfigError("verify seeds must be positive")
        if self.bench_fact_size < 1 or self.bench_dim_size < 1:
            raise ConfigError("benchmark sizes must be positive")
