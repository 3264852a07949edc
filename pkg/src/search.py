"""
Search Module
Part of FD Tracer

Depth-first labelling on top of the propagation engine: variable and
value ordering strategies, tell/told driven backtracking and the Solver
driver that posts a model, labels it and unwinds every tell.
"""

from contextlib import closing
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import structlog

from config import SolverConfig
from constraints import EqConst
from fd_domain import Domain, DomainState, VarRef
from model_parser import Model
from propagation import Halted, PropagationEngine, TraceSink

logger = structlog.get_logger(__name__)


class VarStrategy(str, Enum):
    """Variable selection heuristics."""

    INPUT_ORDER = "input_order"
    FIRST_FAIL = "first_fail"
    MIDDLE_FIRST = "middle_first"


class ValStrategy(str, Enum):
    """Value enumeration orders."""

    MIN = "min"
    MIDDLE = "middle"


@dataclass(frozen=True)
class Solution:
    """A ground assignment of the labelled variables."""

    assignment: Tuple[Tuple[VarRef, int], ...]

    @classmethod
    def from_state(cls, domains: DomainState, variables: Sequence[VarRef]) -> "Solution":
        return cls(tuple((var, domains[var].min) for var in variables))

    def as_dict(self) -> Dict[VarRef, int]:
        return dict(self.assignment)

    def by_name(self) -> Dict[str, int]:
        return {var.name: value for var, value in self.assignment}

    def values(self) -> Tuple[int, ...]:
        return tuple(value for _, value in self.assignment)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{var.name}:{value}" for var, value in self.assignment) + "}"


def middle_out(variables: Sequence[VarRef]) -> List[VarRef]:
    """Reorder a list starting from its middle element, then alternating outward."""
    n = len(variables)
    if n == 0:
        return []
    mid = (n - 1) // 2
    order = [mid]
    step = 1
    while len(order) < n:
        if mid + step < n:
            order.append(mid + step)
        if mid - step >= 0:
            order.append(mid - step)
        step += 1
    return [variables[i] for i in order]


def select_variable(strategy: VarStrategy, domains: DomainState,
                    variables: Sequence[VarRef]) -> Optional[VarRef]:
    """
    Choose the next variable to label.

    Args:
        strategy: Selection heuristic
        domains: Current domain state (at a propagation fixpoint)
        variables: Labelling list

    Returns:
        The chosen non-ground variable, or None when all are ground
    """
    strategy = VarStrategy(strategy)
    if strategy is VarStrategy.MIDDLE_FIRST:
        variables = middle_out(variables)
    candidates = [var for var in variables if not domains[var].is_singleton()]
    if not candidates:
        return None
    if strategy is VarStrategy.INPUT_ORDER:
        return candidates[0]
    if strategy is VarStrategy.FIRST_FAIL:
        return min(candidates, key=lambda var: (len(domains[var]), var.index))
    position = {var: i for i, var in enumerate(candidates)}
    return min(candidates, key=lambda var: (len(domains[var]), position[var]))


def value_order(strategy: ValStrategy, domain: Domain) -> List[int]:
    """Values of a domain in enumeration order."""
    strategy = ValStrategy(strategy)
    if strategy is ValStrategy.MIN:
        return list(domain.values)
    middle = (domain.min + domain.max) // 2
    return sorted(domain.values, key=lambda v: (abs(v - middle), v))


def labelling_context(variables: Sequence[VarRef]) -> str:
    return "labelling([" + ", ".join(var.name for var in variables) + "])"


def label(engine: PropagationEngine, variables: Sequence[VarRef],
          var_strategy: VarStrategy = VarStrategy.FIRST_FAIL,
          val_strategy: ValStrategy = ValStrategy.MIN,
          context: Optional[str] = None) -> Iterator[Solution]:
    """
    Enumerate solutions depth-first by telling `var #= value` per choice.

    Every tell is matched by a told before the next alternative is tried,
    also when the consumer stops early and the generator is closed.

    Args:
        engine: Engine at a propagation fixpoint with the model told
        variables: Labelling list
        var_strategy: Variable selection heuristic
        val_strategy: Value enumeration order
        context: Context of the labelling constraints

    Yields:
        Solutions in depth-first order
    """
    context = context or labelling_context(variables)
    var = select_variable(var_strategy, engine.domains, variables)
    if var is None:
        yield Solution.from_state(engine.domains, variables)
        return

    for value in value_order(val_strategy, engine.domains[var]):
        outcome = engine.tell(engine.new_constraint(EqConst(var, value), context))
        try:
            if not isinstance(outcome, Halted):
                yield from label(engine, variables, var_strategy, val_strategy, context)
        finally:
            engine.told()


class Solver:
    """
    Posts a model on a fresh engine and labels it.

    Args:
        model: Problem to solve
        sinks: Trace sinks attached to the engine
        config: Settings providing default strategies
        var_strategy: Overrides the model's label directive
        val_strategy: Overrides the model's label directive
    """

    def __init__(self, model: Model, sinks: Sequence[TraceSink] = (),
                 config: Optional[SolverConfig] = None,
                 var_strategy: Optional[str] = None, val_strategy: Optional[str] = None):
        self.model = model
        self.sinks = list(sinks)
        self.config = config or SolverConfig()
        directive = model.labelling
        self.variables: Tuple[VarRef, ...] = (
            directive.variables if directive is not None else tuple(model.var_refs)
        )
        self.var_strategy = VarStrategy(
            var_strategy or (directive.var_strategy if directive else self.config.var_strategy)
        )
        self.val_strategy = ValStrategy(
            val_strategy or (directive.val_strategy if directive else self.config.val_strategy)
        )
        self.engine: Optional[PropagationEngine] = None
        self.solution_count = 0

    def solve(self, max_solutions: int = 0) -> Iterator[Solution]:
        """
        Post the model constraints, then label.

        Args:
            max_solutions: Stop after this many solutions (0 means all)

        Yields:
            Solutions in depth-first order. When the generator finishes or
            is closed, every tell has been matched by a told.
        """
        engine = PropagationEngine(self.model.initial_state(), self.sinks)
        self.engine = engine
        self.solution_count = 0
        logger.info("model_posting", model=self.model.name,
                    variables=len(self.model.variables), constraints=len(self.model.constraints))
        try:
            for mc in self.model.constraints:
                outcome = engine.tell(engine.new_constraint(mc.form, mc.context, mc.abstract))
                if isinstance(outcome, Halted):
                    logger.info("model_inconsistent", constraint=mc.abstract)
                    return

            search = label(engine, self.variables, self.var_strategy, self.val_strategy)
            with closing(search):
                for solution in search:
                    self.solution_count += 1
                    logger.info("solution_found", solution=str(solution), chrono=engine.chrono)
                    yield solution
                    if max_solutions and self.solution_count >= max_solutions:
                        break
        finally:
            while engine.depth:
                engine.told()
            logger.info("search_finished", solutions=self.solution_count, events=engine.chrono)

    def solve_all(self, max_solutions: int = 0) -> List[Solution]:
        return list(self.solve(max_solutions))
