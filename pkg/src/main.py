"""
FD Tracer - Main Entry Point

Command line for the traced finite domain solver:

    python src/main.py solve --builtin sorted --trace compact
    python src/main.py solve -m model.fd --trace run.fdtrace.jsonl --analyze tree,stats
    python src/main.py analyze tree run.fdtrace.jsonl -o tree.dot
    python src/main.py oracle --builtin nqueens:4

Exit status: 0 on success (solve/oracle: at least one solution),
1 when there is no solution or validation finds violations, 2 on error.
"""

import argparse
import sys
from contextlib import ExitStack
from pathlib import Path
from typing import List, Optional, TextIO

# Add src to Python path
sys.path.append(str(Path(__file__).parent))

import structlog

from config import TRACE_FORMATS, VAL_STRATEGIES, VAR_STRATEGIES, SolverConfig, configure_logging, load_config
from errors import ConfigError, FDTracerError
from model_parser import Model
from models import load_builtin, load_model_file
from oracle import oracle_solve
from search import Solver
from trace_analyzers import ANALYZERS, EvolutionAnalyzer, TraceValidator
from trace_model import TraceWriter, read_trace

logger = structlog.get_logger("fd_tracer")

EXIT_OK, EXIT_NO_SOLUTION, EXIT_ERROR = 0, 1, 2


def _load_model(args: argparse.Namespace, config: SolverConfig) -> Model:
    if args.model:
        return load_model_file(Path(args.model))
    return load_builtin(args.builtin, config.random_max_vars, config.random_max_value,
                        config.random_max_constraints)


def _analyzer_kinds(names: Optional[str]) -> List[str]:
    if not names:
        return []
    kinds = [kind.strip() for kind in names.split(",") if kind.strip()]
    unknown = [kind for kind in kinds if kind not in ANALYZERS]
    if unknown:
        raise ConfigError(f"unknown analyzer(s) {', '.join(unknown)}; choose from {', '.join(ANALYZERS)}")
    return kinds


def _model_stem(model: Model) -> str:
    return Path(model.name).stem.replace(":", "-") or "model"


def _resolve_trace(args: argparse.Namespace, config: SolverConfig, stem: str):
    """(destination, format): destination is a path, "-" for stdout, or None."""
    trace, fmt = args.trace, args.format
    if trace in TRACE_FORMATS:
        return "-", trace
    if trace == "off":
        return None, fmt or config.trace_format
    if trace == "auto":
        fmt = fmt or config.trace_format
        extension = config.trace_extension if fmt == "jsonl" else f".fdtrace.{fmt}.txt"
        return str(Path(args.output_dir or config.output_dir) / f"{stem}{extension}"), fmt
    if trace is None:
        return ("-" if fmt else None), fmt or config.trace_format
    return trace, fmt or config.trace_format


def cmd_solve(args: argparse.Namespace, config: SolverConfig) -> int:
    """Post and label a model, streaming its trace and live analyzers."""
    model = _load_model(args, config)
    stem = _model_stem(model)
    destination, fmt = _resolve_trace(args, config, stem)
    kinds = _analyzer_kinds(args.analyze)
    if destination is None and not kinds:
        kinds = ["stats"]
        logger.info("no_trace_output", analyzer="stats")

    with ExitStack() as stack:
        sinks = []
        if destination == "-":
            sinks.append(TraceWriter(sys.stdout, fmt))
        elif destination is not None:
            Path(destination).parent.mkdir(parents=True, exist_ok=True)
            stream = stack.enter_context(open(destination, "w", encoding="utf-8"))
            sinks.append(TraceWriter(stream, fmt))
        analyzers = {kind: ANALYZERS[kind]() for kind in kinds}
        sinks.extend(analyzers.values())

        solver = Solver(model, sinks, config, args.var_strategy, args.val_strategy)
        max_solutions = args.max_solutions if args.max_solutions is not None else config.max_solutions
        solutions = []
        for solution in solver.solve(max_solutions):
            solutions.append(solution)
            if destination != "-":
                print(solution, flush=True)

    if destination == "-":
        for solution in solutions:
            print(solution)

    engine = solver.engine
    if engine is not None and engine.sink_failures:
        logger.warning("trace_sinks_failed", failures=engine.sink_failures)
    if analyzers:
        _write_analyses(analyzers, Path(args.output_dir or config.output_dir), stem)

    logger.info("solve_finished", model=model.name, solutions=len(solutions),
                events=engine.chrono if engine else 0)
    return EXIT_OK if solutions else EXIT_NO_SOLUTION


def _write_analyses(analyzers, output_dir: Path, stem: str):
    output_dir.mkdir(parents=True, exist_ok=True)
    for kind, analyzer in analyzers.items():
        path = output_dir / f"{stem}.{kind}{analyzer.extension}"
        path.write_text(analyzer.render(), encoding="utf-8")
        logger.info("analysis_written", analyzer=kind, path=str(path))
        if isinstance(analyzer, EvolutionAnalyzer):
            updates = output_dir / f"{stem}.{kind}.updates{analyzer.extension}"
            updates.write_text(analyzer.render_updates(), encoding="utf-8")
        if isinstance(analyzer, TraceValidator) and not analyzer.result().ok:
            logger.warning("trace_violations", count=len(analyzer.result().violations), path=str(path))


def cmd_analyze(args: argparse.Namespace, config: SolverConfig) -> int:
    """Run one analyzer over a JSON Lines trace file."""
    analyzer = ANALYZERS[args.kind]()
    with ExitStack() as stack:
        source: TextIO = (
            sys.stdin if args.trace == "-"
            else stack.enter_context(open(args.trace, "r", encoding="utf-8"))
        )
        for event in read_trace(source):
            analyzer(event)

    text = analyzer.render()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.updates:
        if not isinstance(analyzer, EvolutionAnalyzer):
            raise ConfigError("--updates only applies to the evolution analyzer")
        Path(args.updates).write_text(analyzer.render_updates(), encoding="utf-8")

    if isinstance(analyzer, TraceValidator) and not analyzer.result().ok:
        return EXIT_NO_SOLUTION
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, config: SolverConfig) -> int:
    """Print every solution found by exhaustive enumeration."""
    model = _load_model(args, config)
    max_product = args.max_product if args.max_product is not None else config.oracle_max_product
    solutions = oracle_solve(model, max_product)
    for solution in solutions:
        print(solution)
    return EXIT_OK if solutions else EXIT_NO_SOLUTION


def _add_model_source(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--builtin", metavar="NAME[:N]",
                        help="sorted, nqueens:<n>, random:<seed> or a bundled model name")
    source.add_argument("-m", "--model", metavar="PATH", help="model file (.fd)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fd-tracer",
        description="Finite domain solver with a generic execution trace and trace analyzers",
    )
    parser.add_argument("--config", metavar="PATH", help="configuration file (default: config.ini)")
    parser.add_argument("--log-level", help="logging level (DEBUG, INFO, WARNING, ...)")
    parser.add_argument("--log-format", choices=("console", "json"), help="log rendering on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="solve a model and emit its trace")
    _add_model_source(solve)
    solve.add_argument("--trace", metavar="PATH|auto|off|FORMAT",
                       help="trace destination; a format name writes that format to stdout, "
                            "auto writes <output-dir>/<model><extension>")
    solve.add_argument("--format", choices=TRACE_FORMATS, help="trace format (alone: trace to stdout)")
    solve.add_argument("--analyze", metavar="KIND[,KIND]",
                       help=f"live analyzers: {', '.join(ANALYZERS)}")
    solve.add_argument("--output-dir", metavar="DIR", help="where live analyzer results are written")
    solve.add_argument("--max-solutions", type=int, metavar="N", help="stop after N solutions (0 = all)")
    solve.add_argument("--var-strategy", choices=VAR_STRATEGIES)
    solve.add_argument("--val-strategy", choices=VAL_STRATEGIES)
    solve.set_defaults(handler=cmd_solve)

    analyze = commands.add_parser("analyze", help="analyze a .fdtrace.jsonl file")
    analyze.add_argument("kind", choices=tuple(ANALYZERS))
    analyze.add_argument("trace", help="trace file, or - for stdin")
    analyze.add_argument("-o", "--output", metavar="PATH", help="result file (default: stdout)")
    analyze.add_argument("--updates", metavar="PATH", help="evolution only: dominant update tags CSV")
    analyze.set_defaults(handler=cmd_analyze)

    oracle = commands.add_parser("oracle", help="enumerate solutions by brute force")
    _add_model_source(oracle)
    oracle.add_argument("--max-product", type=int, metavar="N", help="search space size limit")
    oracle.set_defaults(handler=cmd_oracle)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, load configuration and dispatch; returns the exit status."""
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        if args.config and not Path(args.config).exists():
            raise ConfigError(f"config file {args.config} not found")
        config = load_config(args.config).with_overrides(
            log_level=args.log_level, log_format=args.log_format
        )
        configure_logging(config.log_level, config.log_format)
        if getattr(args, "max_solutions", None) is not None and args.max_solutions < 0:
            raise ConfigError("--max-solutions must be >= 0")
        return args.handler(args, config)
    except (FDTracerError, OSError) as e:
        logger.debug("command_failed", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
