"""
Finite Domain Module
Part of FD Tracer

Finite integer domains, the domain state of a model, and the
classification of domain updates into the five modification types
(min, max, any, ground, empty).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Iterator, List, NamedTuple, Sequence, Tuple

from errors import DomainError


@dataclass(frozen=True, order=True)
class VarRef:
    """A model variable: unique 1-based index plus its source name."""

    index: int
    name: str

    def __post_init__(self):
        if not self.name:
            raise DomainError("variable name must be nonempty")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Domain:
    """
    Finite ordered set of integers.

    Values are kept strictly increasing; construct with Domain.of() to
    normalise arbitrary iterables.
    """

    values: Tuple[int, ...] = ()

    @classmethod
    def of(cls, values: Iterable[int]) -> "Domain":
        """Build a domain from any iterable of integers."""
        return cls(tuple(sorted(set(values))))

    @classmethod
    def range(cls, lo: int, hi: int) -> "Domain":
        """Build the interval domain lo..hi (empty when lo > hi)."""
        return cls(tuple(range(lo, hi + 1)))

    @property
    def min(self) -> int:
        if not self.values:
            raise DomainError("min of an empty domain")
        return self.values[0]

    @property
    def max(self) -> int:
        if not self.values:
            raise DomainError("max of an empty domain")
        return self.values[-1]

    def is_empty(self) -> bool:
        return not self.values

    def is_singleton(self) -> bool:
        return len(self.values) == 1

    def is_interval(self) -> bool:
        return bool(self.values) and self.values[-1] - self.values[0] + 1 == len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __contains__(self, value: int) -> bool:
        return value in self.values

    def __str__(self) -> str:
        return "[" + ",".join(str(v) for v in self.values) + "]"


EMPTY = Domain()


class UpdateType(str, Enum):
    """The five kinds of domain modification."""

    MIN = "min"
    MAX = "max"
    ANY = "any"
    GROUND = "ground"
    EMPTY = "empty"


# Emission order of classify_update
UPDATE_ORDER = (UpdateType.ANY, UpdateType.GROUND, UpdateType.MIN, UpdateType.MAX, UpdateType.EMPTY)


class Modification(NamedTuple):
    """An update type attached to a variable, rendered as X->type."""

    var: VarRef
    type: UpdateType

    def __str__(self) -> str:
        return f"{self.var.name}->{self.type.value}"


def intersect(a: Domain, b: Domain) -> Domain:
    """Sorted set intersection of two domains."""
    if len(a) > len(b):
        a, b = b, a
    other = set(b.values)
    return Domain(tuple(v for v in a.values if v in other))


def remove_values(d: Domain, withdrawn: Iterable[int]) -> Domain:
    """Return d without the withdrawn values, order preserved."""
    removed = set(withdrawn)
    if not removed:
        return d
    return Domain(tuple(v for v in d.values if v not in removed))


def classify_update(old: Domain, withdrawn: Iterable[int]) -> List[UpdateType]:
    """
    Classify the removal of withdrawn values from old.

    Args:
        old: Domain before the update
        withdrawn: Nonempty subset of old

    Returns:
        Update types in canonical order [any, ground, min, max, empty];
        min/max are only reported when the new domain is nonempty.
    """
    removed = set(withdrawn)
    if not removed:
        raise DomainError("cannot classify an empty withdrawal")
    if not removed.issubset(old.values):
        raise DomainError(f"withdrawn values {sorted(removed)} not a subset of {old}")

    new = remove_values(old, removed)
    kinds = {UpdateType.ANY}
    if new.is_empty():
        kinds.add(UpdateType.EMPTY)
    else:
        if new.is_singleton():
            kinds.add(UpdateType.GROUND)
        if new.min != old.min:
            kinds.add(UpdateType.MIN)
        if new.max != old.max:
            kinds.add(UpdateType.MAX)
    return [kind for kind in UPDATE_ORDER if kind in kinds]


class DomainState:
    """
    Total map from the model's variables to their current domains.

    Instances are treated as immutable values: replace() returns a new
    state sharing the variable index, so engine snapshots and trace
    events can keep references without copying.
    """

    __slots__ = ("_vars", "_domains", "_position")

    def __init__(self, entries: Iterable[Tuple[VarRef, Domain]]):
        pairs = list(entries)
        self._vars: Tuple[VarRef, ...] = tuple(var for var, _ in pairs)
        self._domains: Tuple[Domain, ...] = tuple(domain for _, domain in pairs)
        self._position: Dict[VarRef, int] = {var: i for i, var in enumerate(self._vars)}
        if len(self._position) != len(self._vars):
            raise DomainError("duplicate variable in domain state")

    @classmethod
    def _derive(cls, parent: "DomainState", domains: Tuple[Domain, ...]) -> "DomainState":
        state = cls.__new__(cls)
        state._vars = parent._vars
        state._domains = domains
        state._position = parent._position
        return state

    @property
    def variables(self) -> Tuple[VarRef, ...]:
        return self._vars

    def __getitem__(self, var: VarRef) -> Domain:
        try:
            return self._domains[self._position[var]]
        except KeyError:
            raise DomainError(f"unknown variable {var}") from None

    def __contains__(self, var: VarRef) -> bool:
        return var in self._position

    def __len__(self) -> int:
        return len(self._vars)

    def __iter__(self) -> Iterator[VarRef]:
        return iter(self._vars)

    def items(self) -> Iterator[Tuple[VarRef, Domain]]:
        return zip(self._vars, self._domains)

    def replace(self, var: VarRef, domain: Domain) -> "DomainState":
        """Return a new state where var is bound to domain."""
        i = self._position[var]
        domains = self._domains[:i] + (domain,) + self._domains[i + 1:]
        return DomainState._derive(self, domains)

    def restrict(self, variables: Sequence[VarRef]) -> List[Tuple[VarRef, Domain]]:
        """Pairs (var, domain) for the given variables, in the given order."""
        return [(var, self[var]) for var in variables]

    def all_singleton(self) -> bool:
        return all(d.is_singleton() for d in self._domains)

    def sizes(self) -> List[int]:
        return [len(d) for d in self._domains]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DomainState):
            return NotImplemented
        return self._vars == other._vars and self._domains == other._domains

    def __hash__(self) -> int:
        return hash((self._vars, self._domains))

    def __repr__(self) -> str:
        inner = ", ".join(f"{var.name}:{domain}" for var, domain in self.items())
        return f"DomainState({inner})"
