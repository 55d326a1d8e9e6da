from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from tqdm import tqdm

from bvqo.catalog.loader import load_catalog_file
from bvqo.catalog.model import Catalog
from bvqo.config import RunConfig
from bvqo.costing.cardinality import CardinalityProvider, StatisticalProvider
from bvqo.costing.cout import cout
from bvqo.costing.model import FilterCostModel
from bvqo.errors import ConfigError
from bvqo.execution.benchmark import breakeven_benchmark
from bvqo.execution.compare import compare_query
from bvqo.execution.datagen import generate_tables
from bvqo.execution.exact import ExactProvider
from bvqo.execution.table import Table, load_tables, write_tables
from bvqo.graph.join_graph import JoinGraph
from bvqo.optimizer.baseline import baseline_plan
from bvqo.optimizer.heuristic import optimize_join_graph
from bvqo.oracle.verify import verify_theorem
from bvqo.oracle.workloads import run_theorem_suite
from bvqo.planning.nodes import FilterMode
from bvqo.reporting.report_generator import (
    ExplainSection,
    render_benchmark,
    render_comparison,
    render_explain_workload,
    render_verification,
    write_benchmark_csv,
)
from bvqo.visualization.charts import render_breakeven_chart, render_join_graph

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunOutcome:
    text: str
    counterexamples: int = 0


def load_workload(path: Path | None) -> list[tuple[str, Catalog]]:
    """One query per JSON file; a directory yields its files in name order."""
    if path is None:
        raise ConfigError("a workload path is required")
    if path.is_dir():
        files = sorted(path.glob("*.json"))
        if not files:
            raise ConfigError(f"No workload files in {path}")
        return [(f.stem, load_catalog_file(f)) for f in files]
    return [(path.stem, load_catalog_file(path))]


def _tables_for(config: RunConfig, name: str, catalog: Catalog, multi: bool) -> dict[str, Table]:
    if config.data_dir is None:
        return generate_tables(catalog, config.resolved_seed())
    directory = config.data_dir / name if multi else config.data_dir
    return load_tables(directory, catalog)


def _cost_model(config: RunConfig) -> FilterCostModel:
    return FilterCostModel(elimination_threshold=config.threshold)


def run_explain(config: RunConfig) -> RunOutcome:
    mode = FilterMode.parse(config.filter_mode)
    queries = load_workload(config.workload)
    rendered: list[tuple[str, list[ExplainSection]]] = []
    for name, catalog in queries:
        # ── Stage 1: Join graph + cardinalities ─────────────────────────────
        graph = JoinGraph.from_catalog(catalog)
        provider: CardinalityProvider
        if config.data_dir is not None:
            provider = ExactProvider(_tables_for(config, name, catalog, len(queries) > 1), catalog)
        else:
            provider = StatisticalProvider(catalog)

        # ── Stage 2: Baseline and bitvector-aware plans ─────────────────────
        baseline = baseline_plan(graph, mode)
        aware = optimize_join_graph(graph, provider, config.optimizer, mode)
        rendered.append(
            (
                name,
                [
                    ExplainSection("baseline", baseline, cout(baseline, provider)),
                    ExplainSection("bitvector-aware", aware, cout(aware, provider)),
                ],
            )
        )

        # ── Visualization ───────────────────────────────────────────────────
        if config.plot is not None:
            target = config.plot if len(queries) == 1 else config.plot.with_name(f"{config.plot.stem}.{name}{config.plot.suffix}")
            render_join_graph(graph, target)
    return RunOutcome(render_explain_workload(rendered, config.output_format))


def run_verify(config: RunConfig) -> RunOutcome:
    mode = FilterMode.parse(config.filter_mode)
    seed = config.resolved_seed()
    if config.workload is not None:
        reports = []
        queries = load_workload(config.workload)
        for name, catalog in queries:
            tables = _tables_for(config, name, catalog, len(queries) > 1)
            provider = ExactProvider(tables, catalog)
            reports.append(verify_theorem(JoinGraph.from_catalog(catalog), provider, mode, seed=seed, cap=config.cap))
    else:
        reports = run_theorem_suite(
            sizes=config.verify_sizes,
            seeds=config.verify_seeds,
            base_seed=seed,
            mode=mode,
            cap=config.cap,
        )
    failures = sum(1 for r in reports if not r.holds)
    if failures and not mode.is_perfect:
        LOGGER.info("%d counterexamples under lossy filters; preconditions do not hold", failures)
        failures = 0
    return RunOutcome(render_verification(reports, config.output_format), counterexamples=failures)


def run_bench(config: RunConfig) -> RunOutcome:
    series = breakeven_benchmark(
        config.bench_fact_size,
        config.bench_dim_size,
        config.bench_grid,
        _cost_model(config),
        seed=config.resolved_seed(),
    )
    if config.out is not None:
        write_benchmark_csv(config.out, series)
        LOGGER.info("Benchmark CSV written to %s", config.out)
    if config.plot is not None:
        render_breakeven_chart(series, config.plot)
    return RunOutcome(render_benchmark(series, config.output_format))


def run_compare(config: RunConfig) -> RunOutcome:
    mode = FilterMode.parse(config.filter_mode)
    model = _cost_model(config)
    queries = load_workload(config.workload)
    rows = []
    progress = tqdm(queries, desc="Comparing", unit="query", file=sys.stderr, disable=not sys.stderr.isatty())
    for name, catalog in progress:
        tables = _tables_for(config, name, catalog, len(queries) > 1)
        rows.append(compare_query(name, JoinGraph.from_catalog(catalog), tables, model, mode, config.optimizer))
    return RunOutcome(render_comparison(rows, config.output_format))


def run_generate(config: RunConfig) -> RunOutcome:
    if config.out is None:
        raise ConfigError("generate needs an output directory (--out)")
    queries = load_workload(config.workload)
    seed = config.resolved_seed()
    lines = []
    for name, catalog in queries:
        directory = config.out / name if len(queries) > 1 else config.out
        outputs = write_tables(directory, generate_tables(catalog, seed))
        lines.extend(f"{name}.{relation}: {path}" for relation, path in outputs.items())
    return RunOutcome("\n".join(lines))


def run(config: RunConfig) -> RunOutcome:
    config.validate()
    handlers = {
        "explain": run_explain,
        "verify": run_verify,
        "bench": run_bench,
        "compare": run_compare,
        "generate": run_generate,
    }
    if config.subcommand not in handlers:
        raise ConfigError(f"Unknown subcommand: {config.subcommand}")
    return handlers[config.subcommand](config)
