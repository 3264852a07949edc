"""
Oracle Module
Part of FD Tracer

Brute-force reference solver: enumerates the Cartesian product of the
initial domains with numpy and keeps the assignments satisfying every
model constraint. Used as ground truth for differential testing.
"""

import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import structlog

from errors import OracleLimitError
from fd_domain import VarRef
from model_parser import Model
from search import Solution

logger = structlog.get_logger(__name__)

DEFAULT_MAX_PRODUCT = 10_000_000


def search_space_size(model: Model) -> int:
    """Number of candidate assignments (product of initial domain sizes)."""
    return math.prod(len(domain) for _, domain in model.variables)


def oracle_solve(model: Model, max_product: int = DEFAULT_MAX_PRODUCT,
                 variables: Optional[Sequence[VarRef]] = None) -> List[Solution]:
    """
    Enumerate all solutions of a model by exhaustive search.

    Args:
        model: Problem to solve
        max_product: Refuse models whose search space is larger
        variables: Variables each solution is reported over (default: all,
            in declaration order)

    Returns:
        Distinct solutions in lexicographic order of the declared variables

    Raises:
        OracleLimitError: the search space exceeds max_product
    """
    size = search_space_size(model)
    if size > max_product:
        raise OracleLimitError(f"search space {size} exceeds the oracle limit {max_product}")

    declared = model.var_refs
    reported = list(variables) if variables is not None else declared
    if not declared:
        return [Solution(())]

    first, rest = declared[0], declared[1:]
    if rest:
        grids = np.meshgrid(*[np.array(domain.values) for _, domain in model.variables[1:]],
                            indexing="ij")
        columns: Dict[VarRef, np.ndarray] = {var: grid.ravel() for var, grid in zip(rest, grids)}
        rows = int(np.prod([len(domain) for _, domain in model.variables[1:]]))
    else:
        columns, rows = {}, 1

    solutions: List[Solution] = []
    seen = set()
    for value in model.variables[0][1].values:
        columns[first] = np.full(rows, value)
        mask = np.ones(rows, dtype=bool)
        for c in model.constraints:
            mask &= np.asarray(c.form.holds(columns), dtype=bool)
        for row in np.flatnonzero(mask):
            solution = Solution(tuple((var, int(columns[var][row])) for var in reported))
            if solution not in seen:
                seen.add(solution)
                solutions.append(solution)

    logger.debug("oracle_finished", model=model.name, candidates=size, solutions=len(solutions))
    return solutions
