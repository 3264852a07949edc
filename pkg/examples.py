"""
Example Usage of FD Tracer

This script demonstrates various ways to use FD Tracer: solving with a
live trace, saving a trace file, running analyzers on it and comparing
search strategies.
"""

import io
import sys
from pathlib import Path

# Add src to Python path
sys.path.append(str(Path(__file__).parent / "src"))

from config import configure_logging
from model_parser import parse_model, render_model
from models import generate_nqueens, generate_sorted
from oracle import oracle_solve
from search import Solver
from trace_analyzers import (
    EvolutionAnalyzer, SearchTreeBuilder, StatsAnalyzer, detect_useless_activations, validate_trace,
)
from trace_model import TraceRecorder, TraceWriter, load_trace

OUTPUT_DIR = Path("examples_output")


def example_compact_trace():
    """Example 1: The sorted model with its trace on screen."""
    print("\nExample 1: Compact Trace")
    print("-" * 40)

    writer = TraceWriter(sys.stdout, "compact")
    for solution in Solver(generate_sorted(), [writer]).solve():
        print(f"Solution: {solution}")
    print(f"{writer.count} events")


def example_trace_file():
    """Example 2: Save a JSON Lines trace and analyze it offline."""
    print("\nExample 2: Trace File")
    print("-" * 40)

    OUTPUT_DIR.mkdir(exist_ok=True)
    trace_file = OUTPUT_DIR / "example2_queens6.fdtrace.jsonl"

    with open(trace_file, "w", encoding="utf-8") as stream:
        solutions = Solver(generate_nqueens(6), [TraceWriter(stream)]).solve_all()
    print(f"{len(solutions)} solutions, trace saved: {trace_file}")

    events = load_trace(trace_file)
    report = validate_trace(events)
    print(f"Validation: {len(report.violations)} violation(s) in {report.events} events")
    print(f"Useless activations: {len(detect_useless_activations(events))}")


def example_live_analyzers():
    """Example 3: Several analyzers attached to one run."""
    print("\nExample 3: Live Analyzers")
    print("-" * 40)

    tree, evolution, stats = SearchTreeBuilder(), EvolutionAnalyzer(), StatsAnalyzer()
    Solver(generate_nqueens(5), [tree, evolution, stats]).solve_all()

    OUTPUT_DIR.mkdir(exist_ok=True)
    dot_file = OUTPUT_DIR / "example3_queens5.dot"
    csv_file = OUTPUT_DIR / "example3_queens5.csv"
    dot_file.write_text(tree.render(), encoding="utf-8")
    csv_file.write_text(evolution.render(), encoding="utf-8")

    print(stats.render(), end="")
    print(f"Search tree saved: {dot_file} (render with: dot -Tpng {dot_file} -o tree.png)")
    print(f"Domain evolution saved: {csv_file}")


def example_strategies():
    """Example 4: Comparing labelling strategies on n-queens."""
    print("\nExample 4: Strategies")
    print("-" * 40)

    model = generate_nqueens(12)
    for var_strategy, val_strategy in (("input_order", "min"), ("first_fail", "min"),
                                       ("middle_first", "middle")):
        stats = StatsAnalyzer()
        solver = Solver(model, [stats], var_strategy=var_strategy, val_strategy=val_strategy)
        solution = solver.solve_all(max_solutions=1)[0]
        result = stats.result()
        print(f"{var_strategy:>12}/{val_strategy:<6} events={result['events']:>6} "
              f"failures={result['failures']:>4} first={solution}")


def example_model_language():
    """Example 5: A model written in the model language, checked by the oracle."""
    print("\nExample 5: Model Language")
    print("-" * 40)

    model = parse_model("""
        % three distinct digits with a fixed gap
        [A, B, C] :: 1..5;
        A #= B + 2;
        B ## C;
        C #> A;
        label [A, B, C] var input_order;
    """, context="example5")
    print(render_model(model))

    recorder = TraceRecorder()
    found = Solver(model, [recorder]).solve_all()
    expected = oracle_solve(model)
    print(f"Search: {[str(s) for s in found]}")
    print(f"Oracle: {[str(s) for s in expected]}")
    print(f"Agreement: {set(found) == set(expected)} after {len(recorder.events)} events")

    buffer = io.StringIO()
    Solver(model, [TraceWriter(buffer, "full")]).solve_all(max_solutions=1)
    print(buffer.getvalue().split("\n\n")[0])


def main():
    """Run all examples."""
    configure_logging("WARNING")
    print("FD Tracer - Examples")
    print("=" * 50)
    print("These examples show different ways to use FD Tracer")

    try:
        example_compact_trace()
        example_trace_file()
        example_live_analyzers()
        example_strategies()
        example_model_language()

        print("\nAll examples completed successfully!")
        print("Check the 'examples_output' folder for traces and analyses")

    except Exception as e:
        print(f"\nError running examples: {e}")
        print("Make sure you've installed all dependencies:")
        print("pip install -r requirements.txt")


if __name__ == "__main__":
    main()
