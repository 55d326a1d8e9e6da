from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import questionary
from questionary import Style

from bvqo import __version__
from bvqo.config import DEFAULT_ELIMINATION_GRID, OptimizerSettings, RunConfig
from bvqo.errors import BvqoError, InputError, OracleCapError
from bvqo.io_utils import write_text
from bvqo.pipeline import RunOutcome, run

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILURE = 2
EXIT_COUNTEREXAMPLE = 3

SUBCOMMANDS = ("explain", "verify", "bench", "compare", "generate")

CLI_STYLE = Style(
    [
        ("qmark", "fg:#f97316 bold"),
        ("question", "fg:#e2e8f0 bold"),
        ("answer", "fg:#38bdf8 bold"),
        ("pointer", "fg:#f59e0b bold"),
        ("highlighted", "fg:#22d3ee bold"),
        ("selected", "fg:#22c55e"),
        ("separator", "fg:#64748b"),
        ("instruction", "fg:#94a3b8"),
        ("text", "fg:#e5e7eb"),
    ]
)

_WIZARD_CHOICES = {
    "Explain plans for a workload": "explain",
    "Verify the candidate theorems on random graphs": "verify",
    "Run the break-even micro-benchmark": "bench",
    "Compare baseline and bitvector-aware plans": "compare",
    "Generate CSV tables for a workload": "generate",
}


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bvqo", description="Bitvector-aware join-order optimizer.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workload", type=Path, help="query JSON file or directory of query files")
    common.add_argument("--data", type=Path, dest="data_dir", help="directory of headered integer CSV tables")
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--threshold", type=float, default=0.05, help="minimum eliminated fraction to keep a filter")
    common.add_argument("--filter-mode", default="perfect", help="perfect or lossy:<fp>")
    common.add_argument("--cap", type=int, default=8, help="largest graph the oracle enumerates")
    common.add_argument("--format", choices=("text", "json"), default="text", dest="output_format")
    common.add_argument("--out", type=Path)
    common.add_argument("--plot", type=Path, help="PNG path for the join graph or break-even chart")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--p2-smaller-first", action="store_true", help="order connected branch groups smallest first")
    common.add_argument("--selectivity-order", choices=("elimination", "retention"), default="elimination")

    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("explain", parents=[common], help="print baseline and bitvector-aware plans")
    verify = sub.add_parser("verify", parents=[common], help="check candidate optimality against enumeration")
    verify.add_argument("--sizes", type=_int_list, default=(3, 4, 5, 6, 7))
    verify.add_argument("--seeds", type=int, default=20)
    bench = sub.add_parser("bench", parents=[common], help="sweep the eliminated fraction of one join")
    bench.add_argument("--fact-size", type=int, default=20_000)
    bench.add_argument("--dim-size", type=int, default=200)
    bench.add_argument("--grid", type=_float_list, default=DEFAULT_ELIMINATION_GRID)
    sub.add_parser("compare", parents=[common], help="execute baseline and aware plans per query")
    sub.add_parser("generate", parents=[common], help="write generated tables for a workload")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(
        subcommand=args.subcommand,
        workload=args.workload,
        data_dir=args.data_dir,
        seed=args.seed,
        threshold=args.threshold,
        filter_mode=args.filter_mode,
        cap=args.cap,
        output_format=args.output_format,
        out=args.out,
        plot=args.plot,
        verbose=args.verbose,
        optimizer=OptimizerSettings(
            p2_larger_first=not args.p2_smaller_first,
            selectivity_order=args.selectivity_order,
        ),
    )
    if args.subcommand == "verify":
        config.verify_sizes = args.sizes
        config.verify_seeds = args.seeds
    if args.subcommand == "bench":
        config.bench_fact_size = args.fact_size
        config.bench_dim_size = args.dim_size
        config.bench_grid = args.grid
    return config


def _emit(config: RunConfig, outcome: RunOutcome) -> None:
    # bench writes CSV and generate writes tables to --out; their summaries go to stdout
    target = None if config.subcommand in ("bench", "generate") else config.out
    write_text(target, outcome.text)


def execute_config(config: RunConfig) -> int:
    try:
        outcome = run(config)
        _emit(config, outcome)
    except (InputError, OracleCapError, OSError) as exc:
        print(f"bvqo: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BvqoError as exc:
        print(f"bvqo: failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:  # noqa: BLE001
        LOGGER.debug("Unhandled failure", exc_info=True)
        print(f"bvqo: failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if outcome.counterexamples:
        print(f"bvqo: {outcome.counterexamples} counterexample(s) found", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# ── Interactive launcher ────────────────────────────────────────────────────
def _ask_path(message: str, default: str) -> Path:
    value = questionary.path(message, default=default, style=CLI_STYLE).ask()
    if not value:
        raise KeyboardInterrupt
    return Path(value).expanduser().resolve()


def _ask_text(message: str, default: str) -> str:
    value = questionary.text(message, default=default, style=CLI_STYLE).ask()
    if value is None:
        raise KeyboardInterrupt
    return value.strip() or default


def _wizard() -> int:
    questionary.print("\nbvqo", style="bold fg:#22d3ee")
    questionary.print("Join ordering with bitvector filters: explain, verify, benchmark, compare.\n", style="fg:#94a3b8")

    picked = questionary.select("Choose mode", choices=list(_WIZARD_CHOICES), style=CLI_STYLE).ask()
    if picked is None:
        return EXIT_INPUT
    config = RunConfig(subcommand=_WIZARD_CHOICES[picked])

    try:
        if config.subcommand in ("explain", "compare", "generate"):
            config.workload = _ask_path("Workload file or folder", "./workloads/synthetic")
        if config.subcommand == "generate":
            config.out = _ask_path("Output folder for tables", "./data")
        if config.subcommand == "bench":
            config.bench_fact_size = int(_ask_text("Fact table rows", str(config.bench_fact_size)))
            config.bench_dim_size = int(_ask_text("Dimension table rows", str(config.bench_dim_size)))
        config.seed = int(_ask_text("Seed", str(config.seed)))
    except ValueError:
        questionary.print("Expected an integer.", style="fg:#f59e0b")
        return EXIT_INPUT

    summary = [
        f"Mode: {config.subcommand}",
        f"Workload: {config.workload or '-'}",
        f"Seed: {config.seed}",
        f"Filter threshold: {config.threshold}",
    ]
    if config.out is not None:
        summary.append(f"Output: {config.out}")
    questionary.print("\nRun configuration", style="bold fg:#e2e8f0")
    for line in summary:
        questionary.print(f"- {line}", style="fg:#cbd5e1")

    confirm = questionary.confirm("Start now?", default=True, style=CLI_STYLE).ask()
    if not confirm:
        questionary.print("Cancelled.", style="fg:#f59e0b")
        return EXIT_OK

    questionary.print("\nRunning...\n", style="fg:#f59e0b")
    code = execute_config(config)
    if code == EXIT_OK:
        questionary.print("\nCompleted successfully.", style="bold fg:#22c55e")
    return code


def launch_cli(argv: Sequence[str] | None = None) -> int:
    arguments = list(sys.argv[1:] if argv is None else argv)
    if not arguments:
        if not sys.stdin.isatty():
            build_parser().print_usage(sys.stderr)
            return EXIT_INPUT
        _configure_logging(False)
        try:
            return _wizard()
        except KeyboardInterrupt:
            return EXIT_INPUT
    try:
        args = build_parser().parse_args(arguments)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    _configure_logging(args.verbose)
    return execute_config(config_from_args(args))
