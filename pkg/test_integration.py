"""
Integration Test Suite for FD Tracer

Tests the complete workflow from model input to trace files and
analyzer results through the command line, including real file
generation and validation.
"""

import io
import shutil
import subprocess
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import mock

# Add src to Python path
sys.path.append(str(Path(__file__).parent / "src"))

from config import configure_logging
from main import main
from trace_analyzers import validate_trace
from trace_model import load_trace, serialize

configure_logging("WARNING")

ROOT = Path(__file__).parent
SORTED_SOLUTION = "{X:3, Y:2, Z:1}"


def run_cli(*argv):
    """Run the command line in-process; returns (status, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        status = main(["--log-level", "WARNING", *argv])
    return status, out.getvalue(), err.getvalue()


class TestCompleteWorkflow(unittest.TestCase):
    """Test solve, trace files and offline analysis end to end."""

    def setUp(self):
        """Set up test environment."""
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def write_model(self, name, text):
        path = self.temp_dir / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_compact_trace_on_stdout(self):
        """Test the sorted trace followed by its solution."""
        status, out, _ = run_cli("solve", "--builtin", "sorted", "--trace", "compact")
        lines = out.splitlines()
        self.assertEqual(status, 0)
        self.assertEqual(len(lines), 41)
        self.assertEqual(lines[0], "1 [1] Tell X##Y X:[1,2,3] Y:[1,2,3]")
        self.assertEqual(lines[39], "40 [1] Told X##Y X:[1,2,3] Y:[1,2,3]")
        self.assertEqual(lines[40], SORTED_SOLUTION)

    def test_format_alone_writes_stdout(self):
        """Test --format without --trace."""
        status, out, _ = run_cli("solve", "--builtin", "sorted", "--format", "full")
        self.assertEqual(status, 0)
        self.assertIn("port       = WAKE-UP", out)
        self.assertEqual(out.count("chrono     = "), 40)

    def test_solve_then_validate(self):
        """Test writing a JSON Lines trace and validating it offline."""
        trace = self.temp_dir / "sorted.fdtrace.jsonl"
        status, out, _ = run_cli("solve", "--builtin", "sorted", "--trace", str(trace))
        self.assertEqual(status, 0)
        self.assertEqual(out.strip(), SORTED_SOLUTION)
        self.assertEqual(len(load_trace(trace)), 40)

        status, out, _ = run_cli("analyze", "validate", str(trace))
        self.assertEqual(status, 0)
        self.assertEqual(out, "40 events, 0 violation(s)\n")

    def test_validate_reports_violations(self):
        """Test exit status 1 for a trace with a missing event."""
        events = load_trace_of("sorted", self.temp_dir)
        broken = self.temp_dir / "broken.fdtrace.jsonl"
        broken.write_text("".join(serialize(e) + "\n" for e in events if e.chrono != 2), encoding="utf-8")
        status, out, _ = run_cli("analyze", "validate", str(broken))
        self.assertEqual(status, 1)
        self.assertIn("rule=chrono", out)

    def test_offline_analyzers(self):
        """Test tree, evolution and useless analyses of a trace file."""
        trace = self.temp_dir / "queens.fdtrace.jsonl"
        run_cli("solve", "--builtin", "nqueens:4", "--trace", str(trace))
        dot = self.temp_dir / "queens.dot"
        status, _, _ = run_cli("analyze", "tree", str(trace), "-o", str(dot))
        self.assertEqual(status, 0)
        text = dot.read_text(encoding="utf-8")
        self.assertTrue(text.startswith("digraph search_tree {"))
        self.assertEqual(text.count("shape=doublecircle"), 2)

        updates = self.temp_dir / "queens.updates.csv"
        status, out, _ = run_cli("analyze", "evolution", str(trace), "--updates", str(updates))
        self.assertEqual(status, 0)
        self.assertTrue(out.startswith("step,trigger,Q1,Q2,Q3,Q4\n1,tell,4,4,4,4\n"))
        self.assertEqual(len(updates.read_text(encoding="utf-8").splitlines()), len(out.splitlines()))

        status, out, _ = run_cli("analyze", "useless", str(trace))
        self.assertEqual(status, 0)
        self.assertIn("useless activations:", out)

    def test_updates_needs_evolution(self):
        """Test --updates with another analyzer."""
        trace = self.temp_dir / "sorted.fdtrace.jsonl"
        run_cli("solve", "--builtin", "sorted", "--trace", str(trace))
        status, _, err = run_cli("analyze", "stats", str(trace), "--updates", str(self.temp_dir / "u.csv"))
        self.assertEqual(status, 2)
        self.assertIn("error:", err)

    def test_analyze_from_stdin(self):
        """Test reading a trace from standard input."""
        trace = self.temp_dir / "sorted.fdtrace.jsonl"
        run_cli("solve", "--builtin", "sorted", "--trace", str(trace))
        with mock.patch("sys.stdin", io.StringIO(trace.read_text(encoding="utf-8"))):
            status, out, _ = run_cli("analyze", "stats", "-")
        self.assertEqual(status, 0)
        self.assertIn("events: 40\n", out)

    def test_malformed_trace_exit_status(self):
        """Test exit status 2 with the offending line number."""
        events = load_trace_of("sorted", self.temp_dir)
        broken = self.temp_dir / "truncated.fdtrace.jsonl"
        broken.write_text(serialize(events[0]) + "\n" + serialize(events[1])[:30] + "\n", encoding="utf-8")
        status, _, err = run_cli("analyze", "stats", str(broken))
        self.assertEqual(status, 2)
        self.assertTrue(err.startswith("error: line 2: malformed JSON"), err)

    def test_live_analyzers_output_dir(self):
        """Test analyzer files written next to each other during solving."""
        status, out, _ = run_cli("solve", "--builtin", "nqueens:4", "--trace", "off",
                                 "--analyze", "tree,evolution,stats,validate", "--output-dir", str(self.temp_dir))
        self.assertEqual(status, 0)
        self.assertEqual(out.splitlines(), ["{Q1:2, Q2:4, Q3:1, Q4:3}", "{Q1:3, Q2:1, Q3:4, Q4:2}"])
        for name in ("nqueens-4.tree.dot", "nqueens-4.evolution.csv", "nqueens-4.evolution.updates.csv",
                     "nqueens-4.stats.txt", "nqueens-4.validate.txt"):
            self.assertTrue((self.temp_dir / name).exists(), name)
        self.assertIn("solutions: 2", (self.temp_dir / "nqueens-4.stats.txt").read_text(encoding="utf-8"))
        self.assertIn("0 violation(s)", (self.temp_dir / "nqueens-4.validate.txt").read_text(encoding="utf-8"))

    def test_default_stats_without_trace(self):
        """Test that a run without outputs still reports statistics."""
        status, _, _ = run_cli("solve", "--builtin", "sorted", "--output-dir", str(self.temp_dir))
        self.assertEqual(status, 0)
        self.assertTrue((self.temp_dir / "sorted.stats.txt").exists())

    def test_auto_trace_file_name(self):
        """Test --trace auto naming the file after the model and configured extension."""
        status, out, _ = run_cli("solve", "--builtin", "nqueens:4", "--trace", "auto",
                                 "--output-dir", str(self.temp_dir / "traces"))
        self.assertEqual(status, 0)
        self.assertEqual(len(out.splitlines()), 2)
        self.assertTrue(validate_trace(load_trace(self.temp_dir / "traces" / "nqueens-4.fdtrace.jsonl")).ok)

        config = self.temp_dir / "custom.ini"
        config.write_text("[trace]\nextension = .trace.jsonl\n\n[output]\ndefault_output_dir = "
                          f"{self.temp_dir}\n", encoding="utf-8")
        status, _, _ = run_cli("--config", str(config), "solve", "--builtin", "sorted", "--trace", "auto")
        self.assertEqual(status, 0)
        self.assertEqual(len(load_trace(self.temp_dir / "sorted.trace.jsonl")), 40)

    def test_max_solutions(self):
        """Test stopping after the first solution."""
        status, out, _ = run_cli("solve", "--builtin", "nqueens:4", "--trace", "off", "--analyze", "stats",
                                 "--max-solutions", "1", "--output-dir", str(self.temp_dir))
        self.assertEqual(status, 0)
        self.assertEqual(out.splitlines(), ["{Q1:2, Q2:4, Q3:1, Q4:3}"])

    def test_model_file(self):
        """Test solving a model file with its own label directive."""
        model = self.write_model("pair.fd", "var A in 1..3;\nvar B in 1..3;\nA #= B + 2;\nlabel [B, A] val middle;\n")
        status, out, _ = run_cli("solve", "-m", str(model), "--trace", "off", "--output-dir", str(self.temp_dir))
        self.assertEqual(status, 0)
        self.assertEqual(out.splitlines(), ["{B:1, A:3}"])

    def test_unsatisfiable_model_exit_status(self):
        """Test exit status 1 when there is no solution."""
        model = self.write_model("unsat.fd", "var X in 1..3;\nX #= 1;\nX #= 2;\n")
        status, out, _ = run_cli("solve", "-m", str(model), "--trace", "off", "--output-dir", str(self.temp_dir))
        self.assertEqual(status, 1)
        self.assertEqual(out, "")

    def test_parse_error_exit_status(self):
        """Test exit status 2 and a located message for a bad model."""
        model = self.write_model("bad.fd", "var X in 1..3;\nX #> ;\n")
        status, _, err = run_cli("solve", "-m", str(model))
        self.assertEqual(status, 2)
        self.assertTrue(err.startswith("error: 2:6:"), err)
        self.assertEqual(len(err.splitlines()), 1, err)

    def test_oracle_command(self):
        """Test brute-force enumeration on the command line."""
        status, out, _ = run_cli("oracle", "--builtin", "nqueens:4")
        self.assertEqual(status, 0)
        self.assertEqual(out.splitlines(), ["{Q1:2, Q2:4, Q3:1, Q4:3}", "{Q1:3, Q2:1, Q3:4, Q4:2}"])

        status, _, err = run_cli("oracle", "--builtin", "nqueens:8", "--max-product", "100")
        self.assertEqual(status, 2)
        self.assertIn("oracle limit", err)

    def test_configuration_errors(self):
        """Test missing config files, unknown models and bad limits."""
        status, _, _ = run_cli("--config", str(self.temp_dir / "missing.ini"), "solve", "--builtin", "sorted")
        self.assertEqual(status, 2)
        status, _, err = run_cli("solve", "--builtin", "sudoku")
        self.assertEqual(status, 2)
        self.assertIn("error:", err)
        status, _, _ = run_cli("solve", "--builtin", "sorted", "--max-solutions", "-1")
        self.assertEqual(status, 2)
        status, _, _ = run_cli("solve", "--builtin", "sorted", "--analyze", "heatmap")
        self.assertEqual(status, 2)

    def test_script_entry_point(self):
        """Test running src/main.py as a script."""
        result = subprocess.run(
            [sys.executable, "src/main.py", "solve", "--builtin", "sorted", "--format", "compact"],
            capture_output=True,
            text=True,
            cwd=ROOT,
        )
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertEqual(len(result.stdout.splitlines()), 41)
        self.assertEqual(result.stdout.splitlines()[-1], SORTED_SOLUTION)


def load_trace_of(builtin, directory):
    """Solve a builtin model into a JSON Lines file and read it back."""
    trace = Path(directory) / f"{builtin}.fdtrace.jsonl"
    run_cli("solve", "--builtin", builtin, "--trace", str(trace))
    return load_trace(trace)


def run_integration_tests():
    """Run all integration tests."""
    print("Running FD Tracer Integration Tests")
    print("=" * 60)

    # Create test suite
    test_suite = unittest.TestSuite()
    tests = unittest.TestLoader().loadTestsFromTestCase(TestCompleteWorkflow)
    test_suite.addTests(tests)

    # Run tests
    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(test_suite)

    # Print summary
    print("\n" + "=" * 60)
    if result.wasSuccessful():
        print("All integration tests passed!")
        print(f"Ran {result.testsRun} tests successfully")
    else:
        print("Some integration tests failed!")
        print(f"Failures: {len(result.failures)}")
        print(f"Errors: {len(result.errors)}")

    return result.wasSuccessful()


if __name__ == "__main__":
    try:
        success = run_integration_tests()
        sys.exit(0 if success else 1)
    except ImportError as e:
        print(f"Import error: {e}")
        print("Make sure all dependencies are installed:")
        print("pip install -r requirements.txt")
        sys.exit(1)
