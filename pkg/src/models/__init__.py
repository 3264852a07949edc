"""
Built-in Models Module
Part of FD Tracer

Generators for the bundled example problems (sorted triple, n-queens),
seeded random models for differential testing, and lookup of the `.fd`
files shipped next to this module.
"""

from pathlib import Path
from typing import List, Optional

import numpy as np

from constraints import Eq, EqConst, EqOffset, Geq, Gt, Neq, NeqConst, NeqOffset, PrimitiveConstraint
from errors import ConfigError
from fd_domain import Domain, VarRef
from model_parser import LabelDirective, Model, ModelConstraint, parse_model

MODELS_DIR = Path(__file__).parent
MODEL_EXTENSION = ".fd"


def _constraint(form: PrimitiveConstraint, context: str) -> ModelConstraint:
    return ModelConstraint(form, form.abstract(), context)


def generate_sorted() -> Model:
    """
    Three variables in 1..3 that must be pairwise different and sorted
    in decreasing order. The unique solution is {X:3, Y:2, Z:1}.
    """
    x, y, z = VarRef(1, "X"), VarRef(2, "Y"), VarRef(3, "Z")
    context = "sorted([X, Y, Z])"
    return Model(
        variables=tuple((var, Domain.range(1, 3)) for var in (x, y, z)),
        constraints=(
            _constraint(Neq(x, y), context),
            _constraint(Geq(x, y), context),
            _constraint(Gt(y, z), context),
        ),
        labelling=LabelDirective((x, y, z), "first_fail", "min"),
        name="sorted",
    )


def generate_nqueens(n: int, var_strategy: str = "first_fail", val_strategy: str = "min") -> Model:
    """
    N-queens over queens Q1..Qn, one per column, valued by row.

    Args:
        n: Board size (>= 1)
        var_strategy: Labelling variable strategy
        val_strategy: Labelling value strategy

    Returns:
        Model with 3*n*(n-1)/2 difference constraints
    """
    if n < 1:
        raise ConfigError(f"n-queens needs n >= 1, got {n}")
    queens = [VarRef(i, f"Q{i}") for i in range(1, n + 1)]
    context = f"queens({n})"
    constraints: List[ModelConstraint] = []
    for i in range(n):
        for j in range(i + 1, n):
            gap = j - i
            constraints.append(_constraint(Neq(queens[i], queens[j]), context))
            constraints.append(_constraint(NeqOffset(queens[i], queens[j], gap), context))
            constraints.append(_constraint(NeqOffset(queens[j], queens[i], gap), context))
    return Model(
        variables=tuple((q, Domain.range(1, n)) for q in queens),
        constraints=tuple(constraints),
        labelling=LabelDirective(tuple(queens), var_strategy, val_strategy),
        name=f"nqueens:{n}",
    )


_BINARY_FORMS = (Eq, Neq, EqOffset, NeqOffset, Gt, Geq)
_UNARY_FORMS = (EqConst, NeqConst)


def generate_random(seed: int, max_vars: int = 4, max_value: int = 6,
                    max_constraints: int = 6) -> Model:
    """
    Seeded random model over interval domains within 1..max_value.

    Args:
        seed: Seed for numpy's default_rng; the same seed gives the same model
        max_vars: Upper bound on the number of variables
        max_value: Largest domain value
        max_constraints: Upper bound on the number of constraints

    Returns:
        Model labelling every variable in declaration order
    """
    rng = np.random.default_rng(seed)
    n_vars = int(rng.integers(1, max_vars + 1))
    variables = []
    for i in range(1, n_vars + 1):
        lo, hi = sorted(int(v) for v in rng.integers(1, max_value + 1, size=2))
        variables.append((VarRef(i, f"V{i}"), Domain.range(lo, hi)))

    context = f"random({seed})"
    constraints: List[ModelConstraint] = []
    for _ in range(int(rng.integers(0, max_constraints + 1))):
        if n_vars < 2 or rng.random() < 0.25:
            cls = _UNARY_FORMS[int(rng.integers(len(_UNARY_FORMS)))]
            var = variables[int(rng.integers(n_vars))][0]
            form: PrimitiveConstraint = cls(var, int(rng.integers(1, max_value + 1)))
        else:
            cls = _BINARY_FORMS[int(rng.integers(len(_BINARY_FORMS)))]
            i, j = (int(k) for k in rng.choice(n_vars, size=2, replace=False))
            x, y = variables[i][0], variables[j][0]
            if cls in (EqOffset, NeqOffset):
                form = cls(x, y, int(rng.integers(1, max(max_value, 2))))
            else:
                form = cls(x, y)
        constraints.append(_constraint(form, context))

    return Model(
        variables=tuple(variables),
        constraints=tuple(constraints),
        labelling=LabelDirective(tuple(var for var, _ in variables), "first_fail", "min"),
        name=f"random:{seed}",
    )


def bundled_models() -> List[str]:
    """Names of the `.fd` files shipped with the package."""
    return sorted(path.stem for path in MODELS_DIR.glob(f"*{MODEL_EXTENSION}"))


def load_model_file(path: Path, context: Optional[str] = None) -> Model:
    """Parse a model file; constraint context defaults to the file name."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_model(text, context=context or path.name)


def load_builtin(builtin: str, max_vars: int = 4, max_value: int = 6, max_constraints: int = 6) -> Model:
    """
    Resolve a built-in model reference.

    Args:
        builtin: "sorted", "nqueens:<n>", "random:<seed>" or the stem of a
            bundled `.fd` file (e.g. "queens4")
        max_vars, max_value, max_constraints: Bounds for random models

    Raises:
        ConfigError: unknown name or bad size argument
    """
    name, _, arg = builtin.partition(":")
    if name in ("nqueens", "random"):
        try:
            value = int(arg)
        except ValueError:
            raise ConfigError(f"builtin {name} needs an integer argument, got {arg!r}") from None
        if name == "nqueens":
            return generate_nqueens(value)
        return generate_random(value, max_vars, max_value, max_constraints)
    if name == "sorted" and not arg:
        return generate_sorted()

    path = MODELS_DIR / f"{name}{MODEL_EXTENSION}"
    if arg or not path.exists():
        known = ["sorted", "nqueens:<n>", "random:<seed>"] + bundled_models()
        raise ConfigError(f"unknown builtin model {builtin!r} (known: {', '.join(known)})")
    return load_model_file(path)
