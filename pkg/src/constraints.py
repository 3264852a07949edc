"""
Constraint Catalog Module
Part of FD Tracer

The eight primitive constraints: reduction operators, solved conditions,
awakening conditions and ground satisfaction semantics.

    x = y       eq(var(1,X),var(2,Y))          X#=Y
    x != y      diff(var(1,X),var(2,Y))        X##Y
    x = y + n   eqN(var(1,X),var(2,Y),n)       X#=Y+n
    x != y + n  diffN(var(1,X),var(2,Y),n)     X##Y+n
    x > y       gt(var(1,X),var(2,Y))          X#>Y
    x >= y      geq(var(1,X),var(2,Y))         X#>=Y
    x = n       assign(var(1,X),n)             X#=n
    x != n      exclude(var(1,X),n)            X##n
"""

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Tuple, Union

from errors import ConstraintError
from fd_domain import EMPTY, Domain, DomainState, Modification, UpdateType, VarRef, intersect


class PrimitiveConstraint(ABC):
    """Common interface of the eight primitive constraint forms."""

    functor_name = ""

    @property
    @abstractmethod
    def variables(self) -> Tuple[VarRef, ...]:
        """Variables of the constraint, in textual order (x first)."""

    @abstractmethod
    def withdrawn(self, domains: DomainState, var: VarRef) -> Domain:
        """Values W_var removed by the reduction operator for var."""

    @abstractmethod
    def solved(self, domains: DomainState) -> bool:
        """Solved condition over nonempty domains."""

    @abstractmethod
    def awakening(self) -> List[Modification]:
        """Awakening condition as a list of disjuncts."""

    @abstractmethod
    def holds(self, assignment: Mapping[VarRef, Any]) -> Any:
        """
        Ground satisfaction. Works on integers and, elementwise, on numpy
        arrays (the oracle evaluates whole columns at once).
        """

    @abstractmethod
    def abstract(self) -> str:
        """Surface syntax rendering, e.g. X#>=Y."""

    @abstractmethod
    def _functor_args(self) -> List[str]:
        pass

    def functor(self) -> str:
        """Concrete functor rendering, e.g. diff(var(1,X),var(2,Y))."""
        return f"{self.functor_name}({','.join(self._functor_args())})"


def _var_term(var: VarRef) -> str:
    return f"var({var.index},{var.name})"


def _offset(n: int) -> str:
    return f"+{n}" if n >= 0 else str(n)


class _Binary(PrimitiveConstraint):
    """Shared plumbing for the two-variable forms."""

    x: VarRef
    y: VarRef

    def __post_init__(self):
        if self.x == self.y:
            raise ConstraintError(f"{self.functor_name} needs two distinct variables, got {self.x} twice")

    @property
    def variables(self) -> Tuple[VarRef, ...]:
        return (self.x, self.y)

    def _check_var(self, var: VarRef):
        if var != self.x and var != self.y:
            raise ConstraintError(f"{var} does not occur in {self.abstract()}")

    def _functor_args(self) -> List[str]:
        return [_var_term(self.x), _var_term(self.y)]


@dataclass(frozen=True)
class Eq(_Binary):
    x: VarRef
    y: VarRef
    functor_name = "eq"

    def withdrawn(self, domains, var):
        self._check_var(var)
        common = intersect(domains[self.x], domains[self.y])
        own = domains[var]
        return Domain(tuple(v for v in own.values if v not in common))

    def solved(self, domains):
        dx, dy = domains[self.x], domains[self.y]
        return dx.is_singleton() and dx == dy

    def awakening(self):
        return [Modification(self.x, UpdateType.ANY), Modification(self.y, UpdateType.ANY)]

    def holds(self, assignment):
        return assignment[self.x] == assignment[self.y]

    def abstract(self):
        return f"{self.x.name}#={self.y.name}"


@dataclass(frozen=True)
class Neq(_Binary):
    x: VarRef
    y: VarRef
    functor_name = "diff"

    def withdrawn(self, domains, var):
        self._check_var(var)
        other = domains[self.y] if var == self.x else domains[self.x]
        own = domains[var]
        if other.is_singleton() and other.values[0] in own:
            return other
        return EMPTY

    def solved(self, domains):
        return intersect(domains[self.x], domains[self.y]).is_empty()

    def awakening(self):
        return [Modification(self.x, UpdateType.GROUND), Modification(self.y, UpdateType.GROUND)]

    def holds(self, assignment):
        return assignment[self.x] != assignment[self.y]

    def abstract(self):
        return f"{self.x.name}##{self.y.name}"


@dataclass(frozen=True)
class EqOffset(_Binary):
    x: VarRef
    y: VarRef
    n: int
    functor_name = "eqN"

    def withdrawn(self, domains, var):
        self._check_var(var)
        dx, dy = domains[self.x], domains[self.y]
        if var == self.x:
            shifted = {v + self.n for v in dy.values}
            return Domain(tuple(v for v in dx.values if v not in shifted))
        shifted = {v - self.n for v in dx.values}
        return Domain(tuple(v for v in dy.values if v not in shifted))

    def solved(self, domains):
        dx, dy = domains[self.x], domains[self.y]
        return dx.is_singleton() and dy.is_singleton() and dx.values[0] == dy.values[0] + self.n

    def awakening(self):
        return [Modification(self.x, UpdateType.ANY), Modification(self.y, UpdateType.ANY)]

    def holds(self, assignment):
        return assignment[self.x] == assignment[self.y] + self.n

    def abstract(self):
        return f"{self.x.name}#={self.y.name}{_offset(self.n)}"

    def _functor_args(self):
        return super()._functor_args() + [str(self.n)]


@dataclass(frozen=True)
class NeqOffset(_Binary):
    x: VarRef
    y: VarRef
    n: int
    functor_name = "diffN"

    def withdrawn(self, domains, var):
        self._check_var(var)
        dx, dy = domains[self.x], domains[self.y]
        if var == self.x:
            if dy.is_singleton() and dy.values[0] + self.n in dx:
                return Domain((dy.values[0] + self.n,))
            return EMPTY
        if dx.is_singleton() and dx.values[0] - self.n in dy:
            return Domain((dx.values[0] - self.n,))
        return EMPTY

    def solved(self, domains):
        dx = set(domains[self.x].values)
        return all(v + self.n not in dx for v in domains[self.y].values)

    def awakening(self):
        return [Modification(self.x, UpdateType.GROUND), Modification(self.y, UpdateType.GROUND)]

    def holds(self, assignment):
        return assignment[self.x] != assignment[self.y] + self.n

    def abstract(self):
        return f"{self.x.name}##{self.y.name}{_offset(self.n)}"

    def _functor_args(self):
        return super()._functor_args() + [str(self.n)]


@dataclass(frozen=True)
class Gt(_Binary):
    x: VarRef
    y: VarRef
    functor_name = "gt"

    def withdrawn(self, domains, var):
        self._check_var(var)
        dx, dy = domains[self.x], domains[self.y]
        if var == self.x:
            if dy.is_empty():
                return dx
            return Domain(tuple(v for v in dx.values if v <= dy.min))
        if dx.is_empty():
            return dy
        return Domain(tuple(v for v in dy.values if v >= dx.max))

    def solved(self, domains):
        return domains[self.x].min > domains[self.y].max

    def awakening(self):
        return [Modification(self.x, UpdateType.MAX), Modification(self.y, UpdateType.MIN)]

    def holds(self, assignment):
        return assignment[self.x] > assignment[self.y]

    def abstract(self):
        return f"{self.x.name}#>{self.y.name}"


@dataclass(frozen=True)
class Geq(_Binary):
    x: VarRef
    y: VarRef
    functor_name = "geq"

    def withdrawn(self, domains, var):
        self._check_var(var)
        dx, dy = domains[self.x], domains[self.y]
        if var == self.x:
            if dy.is_empty():
                return dx
            return Domain(tuple(v for v in dx.values if v < dy.min))
        if dx.is_empty():
            return dy
        return Domain(tuple(v for v in dy.values if v > dx.max))

    def solved(self, domains):
        return domains[self.x].min >= domains[self.y].max

    def awakening(self):
        return [Modification(self.x, UpdateType.MAX), Modification(self.y, UpdateType.MIN)]

    def holds(self, assignment):
        return assignment[self.x] >= assignment[self.y]

    def abstract(self):
        return f"{self.x.name}#>={self.y.name}"


class _Unary(PrimitiveConstraint):
    x: VarRef
    n: int

    @property
    def variables(self) -> Tuple[VarRef, ...]:
        return (self.x,)

    def _check_var(self, var: VarRef):
        if var != self.x:
            raise ConstraintError(f"{var} does not occur in {self.abstract()}")

    def awakening(self):
        return []

    def _functor_args(self) -> List[str]:
        return [_var_term(self.x), str(self.n)]


@dataclass(frozen=True)
class EqConst(_Unary):
    x: VarRef
    n: int
    functor_name = "assign"

    def withdrawn(self, domains, var):
        self._check_var(var)
        return Domain(tuple(v for v in domains[self.x].values if v != self.n))

    def solved(self, domains):
        return domains[self.x].values == (self.n,)

    def holds(self, assignment):
        return assignment[self.x] == self.n

    def abstract(self):
        return f"{self.x.name}#={self.n}"


@dataclass(frozen=True)
class NeqConst(_Unary):
    x: VarRef
    n: int
    functor_name = "exclude"

    def withdrawn(self, domains, var):
        self._check_var(var)
        return Domain((self.n,)) if self.n in domains[self.x] else EMPTY

    def solved(self, domains):
        return self.n not in domains[self.x]

    def holds(self, assignment):
        return assignment[self.x] != self.n

    def abstract(self):
        return f"{self.x.name}##{self.n}"


FORMS = {cls.functor_name: cls for cls in (Eq, Neq, EqOffset, NeqOffset, Gt, Geq, EqConst, NeqConst)}

# Argument types of each functor, in order
_ARITY: Dict[type, Tuple[type, ...]] = {
    Eq: (VarRef, VarRef),
    Neq: (VarRef, VarRef),
    EqOffset: (VarRef, VarRef, int),
    NeqOffset: (VarRef, VarRef, int),
    Gt: (VarRef, VarRef),
    Geq: (VarRef, VarRef),
    EqConst: (VarRef, int),
    NeqConst: (VarRef, int),
}


@dataclass(frozen=True)
class ConstraintInstance:
    """
    A told constraint: identifier (tell order), abstract text, concrete
    form and invocation context.
    """

    id: int
    abstract: str
    form: PrimitiveConstraint
    context: str

    @property
    def vars(self) -> Tuple[VarRef, ...]:
        return self.form.variables

    @property
    def concrete(self) -> str:
        return self.form.functor()

    def __str__(self) -> str:
        return self.abstract


ConstraintLike = Union[ConstraintInstance, PrimitiveConstraint]


def _form(c: ConstraintLike) -> PrimitiveConstraint:
    return c.form if isinstance(c, ConstraintInstance) else c


def reduce_step(c: ConstraintLike, domains: DomainState, var: VarRef) -> Domain:
    """
    Apply the reduction operator of c for var.

    Returns:
        The withdrawn value set W_var (empty when nothing is removed).
        The domain state is not modified.
    """
    return _form(c).withdrawn(domains, var)


def is_solved(c: ConstraintLike, domains: DomainState) -> bool:
    """Solved condition of c over nonempty domains."""
    return _form(c).solved(domains)


def awakening_condition(c: ConstraintLike) -> List[Modification]:
    """Awakening disjuncts of c; empty for the unary forms."""
    return _form(c).awakening()


def check_satisfied(c: ConstraintLike, assignment: Mapping[VarRef, Any]) -> Any:
    """True iff a ground assignment satisfies c."""
    return _form(c).holds(assignment)


_FUNCTOR_RE = re.compile(r"^\s*([A-Za-z]+)\((.*)\)\s*$")
_ARG_RE = re.compile(r"\s*(?:var\(\s*(\d+)\s*,\s*([A-Za-z_]\w*)\s*\)|(-?\d+))\s*(?:,|$)")


def parse_functor(text: str) -> PrimitiveConstraint:
    """
    Rebuild a constraint form from its concrete rendering.

    Raises:
        ConstraintError: unknown functor or wrong arguments
    """
    match = _FUNCTOR_RE.match(text)
    if not match or match.group(1) not in FORMS:
        raise ConstraintError(f"unknown constraint functor {text!r}")
    name, body = match.groups()

    args: List[Any] = []
    pos = 0
    while pos < len(body):
        arg = _ARG_RE.match(body, pos)
        if not arg or arg.end() == pos:
            raise ConstraintError(f"bad argument list in {text!r}")
        if arg.group(1) is not None:
            args.append(VarRef(int(arg.group(1)), arg.group(2)))
        else:
            args.append(int(arg.group(3)))
        pos = arg.end()

    cls = FORMS[name]
    shape = _ARITY[cls]
    if len(args) != len(shape) or not all(isinstance(a, t) for a, t in zip(args, shape)):
        raise ConstraintError(f"wrong arguments for {name}: {text!r}")
    return cls(*args)
