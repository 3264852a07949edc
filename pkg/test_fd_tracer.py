"""
Test Suite for FD Tracer

Basic tests for domains, the constraint catalog, the model language,
built-in models and configuration.
"""

import sys
import tempfile
import unittest
from pathlib import Path

# Add src to Python path
sys.path.append(str(Path(__file__).parent / "src"))

from config import SolverConfig, configure_logging, load_config
from constraints import (
    Eq, EqConst, EqOffset, Geq, Gt, Neq, NeqConst, NeqOffset,
    awakening_condition, check_satisfied, is_solved, parse_functor, reduce_step,
)
from errors import ConfigError, ConstraintError, DomainError, ModelSyntaxError
from fd_domain import Domain, DomainState, Modification, UpdateType, VarRef, classify_update, intersect, remove_values
from model_parser import parse_model, render_model
from models import generate_nqueens, generate_random, generate_sorted, load_builtin, load_model_file, MODELS_DIR

configure_logging("WARNING")

X, Y, Z = VarRef(1, "X"), VarRef(2, "Y"), VarRef(3, "Z")


def state(**domains):
    """DomainState over X, Y, Z from keyword value lists."""
    refs = {"X": X, "Y": Y, "Z": Z}
    return DomainState((refs[name], Domain.of(values)) for name, values in domains.items())


class TestDomains(unittest.TestCase):
    """Test finite domain operations."""

    def test_intersect(self):
        """Test sorted set intersection."""
        self.assertEqual(intersect(Domain.of([2, 3]), Domain.of([2])), Domain.of([2]))
        self.assertEqual(intersect(Domain.of([3]), Domain.of([2])), Domain())
        self.assertEqual(intersect(Domain.of([1, 2, 4]), Domain.of([2, 4, 5])), Domain.of([2, 4]))

    def test_remove_values(self):
        """Test withdrawal of values."""
        self.assertEqual(remove_values(Domain.range(1, 3), [1]), Domain.of([2, 3]))
        self.assertEqual(remove_values(Domain.of([2, 3]), []), Domain.of([2, 3]))
        self.assertTrue(remove_values(Domain.of([2]), [2]).is_empty())

    def test_classify_update(self):
        """Test the five update types and their order."""
        self.assertEqual(classify_update(Domain.of([2, 3]), [3]),
                         [UpdateType.ANY, UpdateType.GROUND, UpdateType.MAX])
        self.assertEqual(classify_update(Domain.range(1, 3), [1]), [UpdateType.ANY, UpdateType.MIN])
        self.assertEqual(classify_update(Domain.of([2]), [2]), [UpdateType.ANY, UpdateType.EMPTY])
        self.assertEqual(classify_update(Domain.range(1, 5), [3]), [UpdateType.ANY])

    def test_classify_update_errors(self):
        """Test rejection of empty or foreign withdrawals."""
        with self.assertRaises(DomainError):
            classify_update(Domain.of([1, 2]), [])
        with self.assertRaises(DomainError):
            classify_update(Domain.of([1, 2]), [5])

    def test_domain_rendering(self):
        """Test the bracketed comma list rendering."""
        self.assertEqual(str(Domain.range(1, 3)), "[1,2,3]")
        self.assertEqual(str(Domain()), "[]")
        self.assertEqual(str(Modification(X, UpdateType.GROUND)), "X->ground")

    def test_domain_bounds(self):
        """Test min/max and their absence on empty domains."""
        d = Domain.of([5, 2, 9, 2])
        self.assertEqual(d.values, (2, 5, 9))
        self.assertEqual((d.min, d.max), (2, 9))
        with self.assertRaises(DomainError):
            Domain().min

    def test_domain_state_is_persistent(self):
        """Test that replace() leaves the original state untouched."""
        before = state(X=[1, 2, 3], Y=[1, 2])
        after = before.replace(X, Domain.of([2]))
        self.assertEqual(before[X], Domain.range(1, 3))
        self.assertEqual(after[X], Domain.of([2]))
        self.assertEqual(after[Y], before[Y])
        self.assertNotEqual(before, after)

    def test_domain_state_errors(self):
        """Test duplicate and unknown variables."""
        with self.assertRaises(DomainError):
            DomainState([(X, Domain.of([1])), (X, Domain.of([2]))])
        with self.assertRaises(DomainError):
            state(X=[1])[Z]


class TestConstraintCatalog(unittest.TestCase):
    """Test the eight primitive constraints."""

    def test_reduction_examples(self):
        """Test withdrawn sets of the reduction operators."""
        self.assertEqual(reduce_step(Neq(X, Y), state(X=[3], Y=[2, 3]), Y), Domain.of([3]))
        self.assertEqual(reduce_step(Gt(X, Y), state(X=[1, 2, 3], Y=[1, 2, 3]), X), Domain.of([1]))
        self.assertEqual(reduce_step(Geq(X, Y), state(X=[2], Y=[2, 3]), Y), Domain.of([3]))
        self.assertEqual(reduce_step(EqConst(X, 2), state(X=[2, 3]), X), Domain.of([3]))
        self.assertEqual(reduce_step(Eq(X, Y), state(X=[1, 2], Y=[1, 2]), X), Domain())

    def test_offset_reductions(self):
        """Test the offset forms in both directions."""
        d = state(X=[1, 2, 3, 4], Y=[1, 2])
        # X = Y + 2
        self.assertEqual(reduce_step(EqOffset(X, Y, 2), d, X), Domain.of([1, 2]))
        self.assertEqual(reduce_step(EqOffset(X, Y, 2), state(X=[3], Y=[1, 2]), Y), Domain.of([2]))
        self.assertEqual(reduce_step(NeqOffset(X, Y, 1), state(X=[1, 2, 3], Y=[2]), X), Domain.of([3]))
        self.assertEqual(reduce_step(NeqOffset(X, Y, 1), state(X=[3], Y=[1, 2]), Y), Domain.of([2]))
        self.assertEqual(reduce_step(NeqConst(X, 2), state(X=[1, 2, 3]), X), Domain.of([2]))

    def test_solved_conditions(self):
        """Test the solved conditions."""
        self.assertTrue(is_solved(Geq(X, Y), state(X=[2], Y=[2])))
        self.assertTrue(is_solved(Neq(X, Y), state(X=[3], Y=[2])))
        self.assertFalse(is_solved(Eq(X, Y), state(X=[1, 2], Y=[1, 2])))
        self.assertTrue(is_solved(EqConst(X, 3), state(X=[3])))
        self.assertTrue(is_solved(NeqConst(X, 3), state(X=[1, 2])))

    def test_awakening_conditions(self):
        """Test the awakening condition lists."""
        self.assertEqual(awakening_condition(Neq(X, Y)),
                         [Modification(X, UpdateType.GROUND), Modification(Y, UpdateType.GROUND)])
        self.assertEqual(awakening_condition(Gt(X, Y)),
                         [Modification(X, UpdateType.MAX), Modification(Y, UpdateType.MIN)])
        self.assertEqual(awakening_condition(EqConst(X, 2)), [])

    def test_ground_satisfaction(self):
        """Test check_satisfied on ground assignments."""
        self.assertTrue(check_satisfied(Gt(X, Y), {X: 3, Y: 2}))
        self.assertFalse(check_satisfied(NeqOffset(X, Y, 1), {X: 3, Y: 2}))
        self.assertTrue(check_satisfied(EqConst(X, 3), {X: 3}))

    def test_renderings(self):
        """Test abstract and concrete renderings."""
        self.assertEqual(Neq(X, Y).abstract(), "X##Y")
        self.assertEqual(Geq(X, Y).abstract(), "X#>=Y")
        self.assertEqual(EqOffset(X, Y, 2).abstract(), "X#=Y+2")
        self.assertEqual(NeqConst(X, 4).abstract(), "X##4")
        self.assertEqual(Neq(X, Y).functor(), "diff(var(1,X),var(2,Y))")
        self.assertEqual(EqConst(X, 2).functor(), "assign(var(1,X),2)")

    def test_parse_functor(self):
        """Test rebuilding forms from their concrete rendering."""
        for form in (Eq(X, Y), Neq(X, Z), EqOffset(Y, X, 3), NeqOffset(X, Y, 1),
                     Gt(Y, Z), Geq(X, Y), EqConst(X, -2), NeqConst(Z, 5)):
            self.assertEqual(parse_functor(form.functor()), form)
        with self.assertRaises(ConstraintError):
            parse_functor("lt(var(1,X),var(2,Y))")
        with self.assertRaises(ConstraintError):
            parse_functor("diff(var(1,X))")

    def test_same_variable_rejected(self):
        """Test that binary forms need two distinct variables."""
        with self.assertRaises(ConstraintError):
            Neq(X, X)


class TestModelLanguage(unittest.TestCase):
    """Test the model parser and renderer."""

    SORTED = """
        % sorted triple
        var X in 1..3; var Y in 1..3; var Z in 1..3;
        X ## Y;
        X #>= Y;
        Y #> Z;
        label [X, Y, Z] var first_fail val min;
    """

    def test_simple_model(self):
        """Test a two-variable difference model."""
        model = parse_model("var X in 1..3; var Y in 1..3; X ## Y;")
        self.assertEqual(len(model.variables), 2)
        self.assertEqual(model.constraints[0].form, Neq(X, Y))
        self.assertIsNone(model.labelling)

    def test_sorted_program(self):
        """Test that the sorted program parses to the built-in model."""
        self.assertEqual(parse_model(self.SORTED, context="sorted([X, Y, Z])"), generate_sorted())

    def test_bundled_files(self):
        """Test the shipped .fd files against the generators."""
        sorted_model = load_model_file(MODELS_DIR / "sorted.fd", context="sorted([X, Y, Z])")
        self.assertEqual(sorted_model, generate_sorted())
        queens = load_model_file(MODELS_DIR / "queens4.fd", context="queens(4)")
        self.assertEqual(queens, generate_nqueens(4))

    def test_normalisation(self):
        """Test offset normalisation and the #\\= alias."""
        model = parse_model("var A in 1..5; var B in 1..5; A #= B + 0; A #= B - 2; A #\\= B + (-1); A ## 3;")
        a, b = model.var_refs
        forms = [c.form for c in model.constraints]
        self.assertEqual(forms, [Eq(a, b), EqOffset(b, a, 2), NeqOffset(b, a, 1), NeqConst(a, 3)])

    def test_syntax_errors(self):
        """Test rejected statements and their positions."""
        cases = [
            "var X in 1..3; X #> 3;",
            "var X in 1..3; var Y in 1..3; X #< Y;",
            "var X in 3..1;",
            "var X in 1..3; X ## Y;",
            "var X in 1..3; X ## X;",
            "var X in 1..3; var Y in 1..3; X #> Y + 1;",
            "var X in 1..3 X ## 1;",
            "var X in 1..3; var X in 1..2;",
        ]
        for text in cases:
            with self.subTest(text=text):
                with self.assertRaises(ModelSyntaxError):
                    parse_model(text)

    def test_error_position(self):
        """Test that errors carry line and column."""
        with self.assertRaises(ModelSyntaxError) as ctx:
            parse_model("var X in 1..3;\nX #> 3;")
        self.assertEqual(ctx.exception.line, 2)
        self.assertEqual(ctx.exception.column, 6)

    def test_render_round_trip(self):
        """Test parse(render(m)) == m on generated models."""
        models = [generate_sorted(), generate_nqueens(5)] + [generate_random(seed) for seed in range(20)]
        for model in models:
            with self.subTest(model=model.name):
                context = model.constraints[0].context if model.constraints else "model"
                self.assertEqual(parse_model(render_model(model), context=context), model)


class TestBuiltinModels(unittest.TestCase):
    """Test the built-in generators."""

    def test_sorted(self):
        """Test the sorted triple model."""
        model = generate_sorted()
        self.assertEqual(model.var_refs, [X, Y, Z])
        self.assertEqual([c.abstract for c in model.constraints], ["X##Y", "X#>=Y", "Y#>Z"])
        self.assertEqual(model.labelling.var_strategy, "first_fail")

    def test_nqueens_sizes(self):
        """Test constraint counts of n-queens."""
        self.assertEqual(len(generate_nqueens(4).constraints), 18)
        self.assertEqual(len(generate_nqueens(1).constraints), 0)
        with self.assertRaises(ConfigError):
            generate_nqueens(0)

    def test_random_models_are_reproducible(self):
        """Test that a seed fixes the model."""
        self.assertEqual(generate_random(7), generate_random(7))
        model = generate_random(11, max_vars=3, max_value=4, max_constraints=5)
        self.assertLessEqual(len(model.variables), 3)
        self.assertLessEqual(len(model.constraints), 5)
        for _, domain in model.variables:
            self.assertTrue(set(domain.values) <= set(range(1, 5)))

    def test_load_builtin(self):
        """Test builtin model references."""
        self.assertEqual(load_builtin("sorted"), generate_sorted())
        self.assertEqual(len(load_builtin("nqueens:6").variables), 6)
        self.assertEqual(len(load_builtin("queens4").variables), 4)
        with self.assertRaises(ConfigError):
            load_builtin("nqueens:x")
        with self.assertRaises(ConfigError):
            load_builtin("unknown")


class TestConfiguration(unittest.TestCase):
    """Test config.ini loading."""

    def test_default_config_file(self):
        """Test the shipped config.ini."""
        config = load_config()
        self.assertEqual(config.var_strategy, "first_fail")
        self.assertEqual(config.oracle_max_product, 10_000_000)

    def test_missing_file_uses_defaults(self):
        """Test fallback to defaults."""
        self.assertEqual(load_config(Path("/nonexistent/config.ini")), SolverConfig())

    def test_invalid_values(self):
        """Test ConfigError on bad values."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "config.ini"
            path.write_text("[search]\nvar_strategy = random\n", encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_config(path)
            path.write_text("[search]\nmax_solutions = many\n", encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_config(path)

    def test_overrides(self):
        """Test CLI-style overrides."""
        config = SolverConfig().with_overrides(val_strategy="middle", log_level=None)
        self.assertEqual(config.val_strategy, "middle")
        self.assertEqual(config.log_level, "WARNING")
        with self.assertRaises(ConfigError):
            SolverConfig().with_overrides(trace_format="xml")


def run_tests():
    """Run all tests and return results."""
    print("Running FD Tracer Tests")
    print("=" * 40)

    # Create test suite
    test_suite = unittest.TestSuite()

    # Add test classes
    test_classes = [TestDomains, TestConstraintCatalog, TestModelLanguage, TestBuiltinModels, TestConfiguration]

    for test_class in test_classes:
        tests = unittest.TestLoader().loadTestsFromTestCase(test_class)
        test_suite.addTests(tests)

    # Run tests
    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(test_suite)

    # Print summary
    print("\n" + "=" * 40)
    if result.wasSuccessful():
        print("All tests passed!")
        print(f"Ran {result.testsRun} tests successfully")
    else:
        print("Some tests failed!")
        print(f"Failures: {len(result.failures)}")
        print(f"Errors: {len(result.errors)}")

    return result.wasSuccessful()


if __name__ == "__main__":
    try:
        success = run_tests()
        if not success:
            sys.exit(1)
    except ImportError as e:
        print(f"Import error: {e}")
        print("Make sure all dependencies are installed:")
        print("pip install -r requirements.txt")
        sys.exit(1)
    except Exception as e:
        print(f"Test error: {e}")
        sys.exit(1)
