"""
Propagation Engine Module
Part of FD Tracer

The prioritised rule machine over the partitioned store <A,S,Q,T,R>
with tell/told control and snapshot backtracking. Every step is
reported to the attached trace sinks as an immutable TraceEvent.

Rule priority: select > reject > wake-up > reduce > true > suspend.
"""

from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import structlog

from constraints import ConstraintInstance, PrimitiveConstraint, awakening_condition, is_solved, reduce_step
from errors import EngineError
from fd_domain import Domain, DomainState, Modification, VarRef, classify_update, remove_values
from trace_model import Port, StoreEntry, StorePartition, TraceEvent

logger = structlog.get_logger(__name__)

TraceSink = Callable[[TraceEvent], None]


@dataclass(frozen=True)
class Fired:
    """A rule applied and emitted one event."""

    port: Port


@dataclass(frozen=True)
class Fixpoint:
    """No rule applies and nothing was rejected."""


@dataclass(frozen=True)
class Halted:
    """The store is rejected; R holds the given constraint."""

    constraint_id: int


StepOutcome = Union[Fired, Fixpoint, Halted]


class _Snapshot(NamedTuple):
    store: StorePartition
    domains: DomainState
    suspended: Dict[int, int]
    constraint: ConstraintInstance


def _entry(c: ConstraintInstance) -> StoreEntry:
    return StoreEntry(c.id, c.abstract)


class PropagationEngine:
    """
    Solver state plus the propagation and control rules.

    The engine is single-threaded. Sinks receive events in chrono order;
    a failing sink is logged and counted but never stops the solver.

    Args:
        domains: Initial domain state of the model
        sinks: Trace sinks called with each event
    """

    def __init__(self, domains: DomainState, sinks: Sequence[TraceSink] = ()):
        self.domains = domains
        self.store = StorePartition()
        self.pending_mods: Tuple[Modification, ...] = ()
        self.chrono = 0
        self.control_stack: List[_Snapshot] = []
        self.sinks: List[TraceSink] = list(sinks)
        self.sink_failures = 0

        self._instances: Dict[int, ConstraintInstance] = {}
        self._next_id = 1
        # var -> told constraints whose awakening condition mentions var
        self._watchers: Dict[VarRef, List[ConstraintInstance]] = defaultdict(list)
        # suspended constraint id -> suspension stamp; S is ordered by decreasing stamp
        self._suspended: Dict[int, int] = {}
        self._stamp = 0
        self._wake_cache: Optional[List[Tuple[ConstraintInstance, Tuple[Modification, ...]]]] = None

    @property
    def depth(self) -> int:
        return len(self.control_stack)

    def state(self) -> Tuple[StorePartition, DomainState]:
        """Current (store, domains) pair, comparable across tell/told."""
        return self.store, self.domains

    def constraint(self, constraint_id: int) -> ConstraintInstance:
        return self._instances[constraint_id]

    def new_constraint(self, form: PrimitiveConstraint, context: str,
                       abstract: Optional[str] = None) -> ConstraintInstance:
        """Create a constraint instance with the next identifier."""
        instance = ConstraintInstance(self._next_id, abstract or form.abstract(), form, context)
        self._next_id += 1
        return instance

    # ------------------------------------------------------------------
    # Control rules
    # ------------------------------------------------------------------

    def tell(self, c: ConstraintInstance) -> StepOutcome:
        """
        Push the current state, make c active and propagate.

        Returns:
            Fixpoint or Halted, the outcome of the propagation phase
        """
        if self.store.A:
            raise EngineError(f"tell({c.abstract}) while {self.store.A[0].abstract} is active")
        if c.id in self._instances:
            raise EngineError(f"constraint id {c.id} already told")
        for var in c.vars:
            if var not in self.domains:
                raise EngineError(f"{c.abstract} uses unknown variable {var}")

        self.control_stack.append(_Snapshot(self.store, self.domains, dict(self._suspended), c))
        self._instances[c.id] = c
        self._next_id = max(self._next_id, c.id + 1)
        for mod in awakening_condition(c):
            watchers = self._watchers[mod.var]
            if not watchers or watchers[-1] is not c:
                watchers.append(c)

        self.store = replace(self.store, A=(_entry(c),))
        self._set_pending(())
        self._emit(Port.TELL, c)
        return self.run_propagation()

    def told(self):
        """Emit told for the constraint of the matching tell, then restore its snapshot."""
        if not self.control_stack:
            raise EngineError("told on an empty control stack")
        snapshot = self.control_stack[-1]
        self._emit(Port.TOLD, snapshot.constraint)
        self.control_stack.pop()

        c = snapshot.constraint
        for mod in awakening_condition(c):
            watchers = self._watchers[mod.var]
            if watchers and watchers[-1] is c:
                watchers.pop()
        del self._instances[c.id]

        self.store = snapshot.store
        self.domains = snapshot.domains
        self._suspended = snapshot.suspended
        self._set_pending(())

    # ------------------------------------------------------------------
    # Propagation rules
    # ------------------------------------------------------------------

    def propagation_step(self) -> StepOutcome:
        """Fire the highest-priority applicable rule, emitting exactly one event."""
        store = self.store

        if store.Q and not store.A and not store.R:
            head = store.Q[0]
            c = self._instances[head.id]
            self._emit(Port.SELECT, c)
            self.store = replace(store, A=(head,), Q=store.Q[1:])
            self._set_pending(())
            return Fired(Port.SELECT)

        active = self._instances[store.A[0].id] if store.A else None

        if active is not None and any(self.domains[x].is_empty() for x in active.vars):
            self._emit(Port.REJECT, active)
            self.store = replace(store, A=(), R=(store.A[0],))
            self._set_pending(())
            return Halted(active.id)

        if not store.R and self.pending_mods:
            woken = self._next_wake()
            if woken is not None:
                c, cause = woken
                entry = _entry(c)
                self._emit(Port.WAKE_UP, c, cause=cause)
                i = store.S.index(entry)
                self.store = replace(store, S=store.S[:i] + store.S[i + 1:], Q=store.Q + (entry,))
                del self._suspended[c.id]
                return Fired(Port.WAKE_UP)

        if active is None or store.R:
            return Halted(store.R[0].id) if store.R else Fixpoint()

        for x in active.vars:
            withdrawn = reduce_step(active, self.domains, x)
            if withdrawn:
                old = self.domains[x]
                update = tuple(Modification(x, kind) for kind in classify_update(old, withdrawn.values))
                self._emit(Port.REDUCE, active, withdrawn=(x, withdrawn), update=update)
                self.domains = self.domains.replace(x, remove_values(old, withdrawn.values))
                self._set_pending(update)
                return Fired(Port.REDUCE)

        entry = store.A[0]
        if is_solved(active, self.domains):
            self._emit(Port.TRUE, active)
            self.store = replace(store, A=(), T=(entry,) + store.T)
            self._set_pending(())
            return Fired(Port.TRUE)

        self._emit(Port.SUSPEND, active)
        self.store = replace(store, A=(), S=(entry,) + store.S)
        self._stamp += 1
        self._suspended[active.id] = self._stamp
        self._set_pending(())
        return Fired(Port.SUSPEND)

    def run_propagation(self) -> StepOutcome:
        """Apply propagation steps until a fixpoint or a rejection."""
        while True:
            outcome = self.propagation_step()
            if not isinstance(outcome, Fired):
                return outcome

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _set_pending(self, mods: Tuple[Modification, ...]):
        self.pending_mods = mods
        self._wake_cache = None

    def _next_wake(self) -> Optional[Tuple[ConstraintInstance, Tuple[Modification, ...]]]:
        """Front-most suspended constraint whose awakening condition meets pending_mods."""
        if self._wake_cache is None:
            pending = set(self.pending_mods)
            found: Dict[int, ConstraintInstance] = {}
            for var in {mod.var for mod in pending}:
                for c in self._watchers.get(var, ()):
                    if c.id in self._suspended:
                        found[c.id] = c
            # S never gains members between a reduce and the wake-ups it causes
            ordered = sorted(found.values(), key=lambda c: -self._suspended[c.id])
            cache = []
            for c in ordered:
                cause = tuple(mod for mod in awakening_condition(c) if mod in pending)
                if cause:
                    cache.append((c, cause))
            cache.reverse()
            self._wake_cache = cache
        return self._wake_cache.pop() if self._wake_cache else None

    def _emit(self, port: Port, c: ConstraintInstance,
              withdrawn: Optional[Tuple[VarRef, Domain]] = None,
              update: Optional[Tuple[Modification, ...]] = None,
              cause: Optional[Tuple[Modification, ...]] = None):
        self.chrono += 1
        if not self.sinks:
            return
        event = TraceEvent(self.chrono, self.depth, port, c, self.domains, self.store,
                           withdrawn, update, cause)
        for sink in self.sinks:
            try:
                sink(event)
            except Exception as e:
                self.sink_failures += 1
                logger.warning("trace_sink_failed", chrono=event.chrono, sink=repr(sink), error=str(e))
