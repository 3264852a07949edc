"""
Trace Analyzers Module
Part of FD Tracer

Folds over the event stream. Each analyzer is a trace sink (call it
with every event in chrono order) so it can run live on the engine or
over a `.fdtrace.jsonl` file:

- SearchTreeBuilder: search tree, rendered as a graphviz DOT digraph
- EvolutionAnalyzer: domain sizes per tell, reject and solution (CSV)
- StatsAnalyzer: counters over the whole run
- UselessActivationDetector: selected constraints that never reduced
- TraceValidator: well-formedness and rule priority checks
"""

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from constraints import PrimitiveConstraint, awakening_condition, is_solved, reduce_step
from errors import TraceFormatError
from fd_domain import Domain, Modification, UpdateType, VarRef, classify_update, remove_values
from trace_model import Port, StoreEntry, TraceEvent

LABELLING_PREFIX = "labelling("


def is_labelling(event: TraceEvent) -> bool:
    return event.constraint.context.startswith(LABELLING_PREFIX)


class _PhaseTracker:
    """
    Follows tell/told nesting and recognises solutions.

    A phase is opened by a tell. It ends in a solution when the next
    control event is a told, the phase saw no reject and every domain in
    the told event is a singleton.
    """

    def __init__(self):
        self.open = False
        self.rejected = False
        self.depth = 0

    def observe(self, event: TraceEvent) -> bool:
        """Update the state; True when the event closes a solution phase."""
        if event.port is Port.TELL:
            self.open, self.rejected = True, False
            self.depth += 1
        elif event.port is Port.REJECT:
            self.rejected = True
        elif event.port is Port.TOLD:
            if self.depth == 0:
                raise TraceFormatError(f"told without matching tell at chrono {event.chrono}")
            solution = self.open and not self.rejected and event.domains.all_singleton()
            self.open = False
            self.depth -= 1
            return solution
        return False


# ---------------------------------------------------------------------------
# Search tree
# ---------------------------------------------------------------------------

class NodeKind(str, Enum):
    INTERNAL = "internal"
    FAILURE = "failure"
    SOLUTION = "solution"


@dataclass
class TreeNode:
    """A search tree node: incoming arc label, reduced domains, kind."""

    label: str = ""
    content: Dict[VarRef, Domain] = field(default_factory=dict)
    kind: NodeKind = NodeKind.INTERNAL
    children: List["TreeNode"] = field(default_factory=list)
    id: int = 0

    def is_choice_point(self) -> bool:
        return len(self.children) >= 2

    def preorder(self) -> Iterable["TreeNode"]:
        yield self
        for child in self.children:
            yield from child.preorder()


@dataclass
class SearchTree:
    """Root node plus the model constraints merged on the root arc."""

    root: TreeNode
    model_tells: List[str] = field(default_factory=list)

    def nodes(self) -> List[TreeNode]:
        return list(self.root.preorder())

    def arcs(self) -> int:
        return len(self.nodes()) - 1

    def count(self, kind: NodeKind) -> int:
        return sum(1 for node in self.root.preorder() if node.kind is kind)

    @property
    def failures(self) -> int:
        return self.count(NodeKind.FAILURE)

    @property
    def solutions(self) -> int:
        return self.count(NodeKind.SOLUTION)

    @property
    def choice_points(self) -> int:
        return sum(1 for node in self.root.preorder() if node.is_choice_point())


class SearchTreeBuilder:
    """
    Rebuilds the depth-first search tree: a tell moves down, a told moves up.

    Consecutive model tells (non-labelling context) at the root are merged
    into the root arc; reduce events fill the content of the node whose
    propagation phase they belong to.
    """

    extension = ".dot"

    def __init__(self):
        self.root = TreeNode()
        self.model_tells: List[str] = []
        self._current = self.root
        self._stack: List[TreeNode] = []
        self._phases = _PhaseTracker()
        self._last_chrono = 0

    def __call__(self, event: TraceEvent):
        if not self._last_chrono and not self.root.content:
            self.root.content = dict(event.domains.items())
        self._last_chrono = event.chrono
        solution = self._phases.observe(event)

        if event.port is Port.TELL:
            self._stack.append(self._current)
            at_root = self._current is self.root and not self.root.children
            if at_root and not is_labelling(event) and self.root.kind is NodeKind.INTERNAL:
                self.model_tells.append(event.constraint.abstract)
            else:
                child = TreeNode(label=event.constraint.abstract)
                self._current.children.append(child)
                self._current = child
        elif event.port is Port.REDUCE:
            var, withdrawn = event.withdrawn
            self._current.content[var] = remove_values(event.domains[var], withdrawn.values)
        elif event.port is Port.REJECT:
            self._current.kind = NodeKind.FAILURE
        elif event.port is Port.TOLD:
            if solution and self._current.kind is NodeKind.INTERNAL and not self._current.children:
                self._current.kind = NodeKind.SOLUTION
            self._current = self._stack.pop()

    def result(self) -> SearchTree:
        if self._stack:
            raise TraceFormatError(
                f"unbalanced trace: {len(self._stack)} tell(s) without told after chrono {self._last_chrono}"
            )
        for number, node in enumerate(self.root.preorder()):
            node.id = number
        return SearchTree(self.root, list(self.model_tells))

    def render(self) -> str:
        return emit_dot(self.result())


def build_search_tree(events: Iterable[TraceEvent]) -> SearchTree:
    """Fold a whole event stream into its search tree."""
    builder = SearchTreeBuilder()
    for event in events:
        builder(event)
    return builder.result()


_SHAPES = {NodeKind.INTERNAL: "ellipse", NodeKind.FAILURE: "box", NodeKind.SOLUTION: "doublecircle"}


def _dot_string(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def emit_dot(tree: SearchTree) -> str:
    """
    Render a search tree as a graphviz digraph.

    Nodes are numbered in preorder (n0 is the root). Failures are boxes,
    solutions double circles and other nodes ellipses; node labels list
    the domains reduced in the node's propagation phase.
    """
    nodes = tree.nodes()
    lines = ["digraph search_tree {", '\tnode [fontname="Helvetica"];']
    if tree.model_tells:
        lines.append("\tstart [shape=point];")
    for node in nodes:
        content = "\n".join(f"{var.name}:{domain}" for var, domain in sorted(node.content.items()))
        lines.append(f"\tn{node.id} [shape={_SHAPES[node.kind]}, label={_dot_string(content)}];")
    if tree.model_tells:
        lines.append(f"\tstart -> n0 [label={_dot_string(', '.join(tree.model_tells))}];")
    for node in nodes:
        for child in node.children:
            lines.append(f"\tn{node.id} -> n{child.id} [label={_dot_string(child.label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Domain evolution
# ---------------------------------------------------------------------------

class Trigger(str, Enum):
    TELL = "tell"
    REJECT = "reject"
    SOLUTION = "solution"


# Strongest first
UPDATE_DOMINANCE = (UpdateType.EMPTY, UpdateType.GROUND, UpdateType.MIN, UpdateType.MAX, UpdateType.ANY)


@dataclass(frozen=True)
class EvolutionRow:
    """Domain sizes at one trigger, plus the dominant update per variable since the previous row."""

    step: int
    trigger: Trigger
    sizes: Tuple[int, ...]
    updates: Tuple[Optional[UpdateType], ...]


class EvolutionAnalyzer:
    """Domain size matrix: one row per tell, reject and solution."""

    extension = ".csv"

    def __init__(self):
        self.variables: List[VarRef] = []
        self.rows: List[EvolutionRow] = []
        self._phases = _PhaseTracker()
        self._updates: Dict[VarRef, UpdateType] = {}

    def __call__(self, event: TraceEvent):
        if not self.variables:
            self.variables = list(event.domains.variables)
        solution = self._phases.observe(event)

        if event.port is Port.REDUCE:
            for mod in event.update:
                current = self._updates.get(mod.var)
                if current is None or UPDATE_DOMINANCE.index(mod.type) < UPDATE_DOMINANCE.index(current):
                    self._updates[mod.var] = mod.type
        elif event.port is Port.TELL:
            self._row(event, Trigger.TELL)
        elif event.port is Port.REJECT:
            self._row(event, Trigger.REJECT)
        elif solution:
            self._row(event, Trigger.SOLUTION)

    def _row(self, event: TraceEvent, trigger: Trigger):
        sizes = tuple(len(event.domains[var]) for var in self.variables)
        updates = tuple(self._updates.get(var) for var in self.variables)
        self.rows.append(EvolutionRow(event.chrono, trigger, sizes, updates))
        self._updates = {}

    def result(self) -> List[EvolutionRow]:
        return list(self.rows)

    def as_array(self) -> np.ndarray:
        """Size matrix with shape (rows, variables)."""
        return np.array([row.sizes for row in self.rows], dtype=int).reshape(len(self.rows), len(self.variables))

    def _csv(self, cell) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["step", "trigger"] + [var.name for var in self.variables])
        for row in self.rows:
            writer.writerow([row.step, row.trigger.value] + cell(row))
        return buffer.getvalue()

    def render(self) -> str:
        return self._csv(lambda row: list(row.sizes))

    def render_updates(self) -> str:
        """Companion CSV with the dominant update tag per variable (blank if none)."""
        return self._csv(lambda row: [u.value if u is not None else "" for u in row.updates])


def evolution_matrix(events: Iterable[TraceEvent]) -> List[EvolutionRow]:
    analyzer = EvolutionAnalyzer()
    for event in events:
        analyzer(event)
    return analyzer.result()


# ---------------------------------------------------------------------------
# Useless activations
# ---------------------------------------------------------------------------

@dataclass
class ActivationRecord:
    """One select-initiated stay of a constraint in the active slot."""

    constraint_id: int
    abstract: str
    activated_at: int
    reduces: int = 0
    terminal: Optional[Port] = None

    def __str__(self) -> str:
        terminal = self.terminal.value if self.terminal else "?"
        return (f"chrono={self.activated_at} constraint=({self.constraint_id}, {self.abstract}) "
                f"reduces={self.reduces} terminal={terminal}")


class UselessActivationDetector:
    """Reports selects whose constraint left A without reducing anything."""

    extension = ".txt"
    _TERMINALS = (Port.TRUE, Port.SUSPEND, Port.REJECT)

    def __init__(self):
        self.records: List[ActivationRecord] = []
        self.activations = 0
        self._current: Optional[ActivationRecord] = None

    def __call__(self, event: TraceEvent):
        if event.port is Port.SELECT:
            c = event.constraint
            self._current = ActivationRecord(c.id, c.abstract, event.chrono)
            self.activations += 1
        elif event.port in (Port.TELL, Port.TOLD):
            self._current = None
        elif self._current is not None:
            if event.port is Port.REDUCE:
                self._current.reduces += 1
            elif event.port in self._TERMINALS:
                self._current.terminal = event.port
                if self._current.reduces == 0:
                    self.records.append(self._current)
                self._current = None

    def result(self) -> List[ActivationRecord]:
        return list(self.records)

    def render(self) -> str:
        lines = [str(record) for record in self.records]
        lines.append(f"useless activations: {len(self.records)} of {self.activations} selects")
        return "\n".join(lines) + "\n"


def detect_useless_activations(events: Iterable[TraceEvent]) -> List[ActivationRecord]:
    detector = UselessActivationDetector()
    for event in events:
        detector(event)
    return detector.result()


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

class StatsAnalyzer:
    """Run counters: events per port, search tree shape, withdrawn values."""

    extension = ".txt"

    def __init__(self):
        self.ports: Counter = Counter()
        self.events = 0
        self.max_depth = 0
        self.withdrawn_values = 0
        self._tree = SearchTreeBuilder()

    def __call__(self, event: TraceEvent):
        self.events += 1
        self.ports[event.port] += 1
        self.max_depth = max(self.max_depth, event.depth)
        if event.port is Port.REDUCE:
            self.withdrawn_values += len(event.withdrawn[1])
        self._tree(event)

    def result(self) -> Dict[str, float]:
        tree = self._tree.result()
        selects = self.ports[Port.SELECT]
        stats: Dict[str, float] = {"events": self.events}
        stats.update({port.value: self.ports[port] for port in Port})
        stats.update({
            "solutions": tree.solutions,
            "failures": tree.failures,
            "choice_points": tree.choice_points,
            "nodes": len(tree.nodes()),
            "max_depth": self.max_depth,
            "withdrawn_values": self.withdrawn_values,
            "reduce_per_select": round(self.ports[Port.REDUCE] / selects, 3) if selects else 0.0,
        })
        return stats

    def render(self) -> str:
        return "".join(f"{key}: {value}\n" for key, value in self.result().items())


def trace_stats(events: Iterable[TraceEvent]) -> Dict[str, float]:
    analyzer = StatsAnalyzer()
    for event in events:
        analyzer(event)
    return analyzer.result()


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class Violation(NamedTuple):
    chrono: int
    rule: str
    message: str

    def __str__(self) -> str:
        return f"chrono={self.chrono} rule={self.rule} message={self.message}"


@dataclass
class ValidationReport:
    violations: List[Violation]
    events: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        lines = [str(v) for v in self.violations]
        lines.append(f"{self.events} events, {len(self.violations)} violation(s)")
        return "\n".join(lines) + "\n"


def _mods(mods: Iterable[Modification]) -> str:
    return "[" + ", ".join(str(mod) for mod in mods) + "]"


class TraceValidator:
    """
    Checks a trace against the engine's invariants.

    Rules: chrono (contiguity), depth (tell/told accounting), balance,
    partition (store snapshot), state (port preconditions), priority
    (no higher-priority rule was applicable), cause (wake-up cause within
    the last reduce's update list), update (reduce classification).
    """

    extension = ".txt"

    def __init__(self):
        self.violations: List[Violation] = []
        self.events = 0
        self._last_chrono: Optional[int] = None
        self._depth = 0
        self._tells: List[int] = []
        self._forms: Dict[int, PrimitiveConstraint] = {}
        self._pending: Tuple[Modification, ...] = ()

    def _fail(self, event: TraceEvent, rule: str, message: str):
        self.violations.append(Violation(event.chrono, rule, message))

    def __call__(self, event: TraceEvent):
        self.events += 1
        c = event.constraint
        self._forms.setdefault(c.id, c.form)
        self._check_chrono(event)
        self._check_depth(event)
        for problem in event.store.violations():
            self._fail(event, "partition", problem)
        self._check_state(event)
        self._check_priority(event)

        port = event.port
        if port is Port.REDUCE:
            self._check_reduce(event)
            self._pending = tuple(event.update or ())
        elif port is Port.WAKE_UP:
            self._check_cause(event)
        else:
            self._pending = ()

    def _check_chrono(self, event: TraceEvent):
        expected = 1 if self._last_chrono is None else self._last_chrono + 1
        if event.chrono != expected:
            self._fail(event, "chrono", f"chrono gap at {event.chrono}")
        self._last_chrono = event.chrono

    def _check_depth(self, event: TraceEvent):
        if event.port is Port.TELL:
            self._depth += 1
            self._tells.append(event.constraint.id)
        if event.depth != self._depth:
            self._fail(event, "depth", f"depth {event.depth}, expected {self._depth}")
        if event.port is Port.TOLD:
            if not self._tells:
                self._fail(event, "balance", "told without matching tell")
                return
            told = self._tells.pop()
            if told != event.constraint.id:
                self._fail(event, "balance", f"told names constraint {event.constraint.id}, matching tell was {told}")
            self._depth -= 1

    def _check_state(self, event: TraceEvent):
        store, entry = event.store, StoreEntry(event.constraint.id, event.constraint.abstract)
        port = event.port
        if port is Port.SELECT:
            if store.A:
                self._fail(event, "state", "select while A is not empty")
            if store.R:
                self._fail(event, "state", "select after a rejection")
            if not store.Q or store.Q[0].id != entry.id:
                self._fail(event, "state", "selected constraint is not the head of Q")
        elif port is Port.WAKE_UP:
            if entry.id not in {e.id for e in store.S}:
                self._fail(event, "state", "woken constraint is not suspended")
        elif port is not Port.TOLD:
            if tuple(e.id for e in store.A) != (entry.id,):
                self._fail(event, "state", f"{port.value} on a constraint that is not active")

    def _applicable_wake(self, event: TraceEvent) -> Optional[StoreEntry]:
        pending = set(self._pending)
        if not pending or event.store.R:
            return None
        for entry in event.store.S:
            form = self._forms.get(entry.id)
            if form is not None and pending.intersection(awakening_condition(form)):
                return entry
        return None

    def _check_priority(self, event: TraceEvent):
        port = event.port
        if port not in (Port.WAKE_UP, Port.REDUCE, Port.TRUE, Port.SUSPEND):
            return
        form = event.constraint.form
        if port is Port.WAKE_UP:
            first = self._applicable_wake(event)
            if first is not None and first.id != event.constraint.id:
                self._fail(event, "priority", f"wake-up of {first} should come first")
        else:
            if any(event.domains[x].is_empty() for x in form.variables):
                self._fail(event, "priority", f"reject applicable but {port.value} fired")
                return
            woken = self._applicable_wake(event)
            if woken is not None:
                self._fail(event, "priority", f"wake-up of {woken} applicable but {port.value} fired")
        if port in (Port.TRUE, Port.SUSPEND):
            if any(reduce_step(form, event.domains, x) for x in form.variables):
                self._fail(event, "priority", f"reduce applicable but {port.value} fired")
            elif port is Port.SUSPEND and is_solved(form, event.domains):
                self._fail(event, "priority", "true applicable but suspend fired")
            elif port is Port.TRUE and not is_solved(form, event.domains):
                self._fail(event, "state", "true on an unsolved constraint")

    def _check_reduce(self, event: TraceEvent):
        if event.withdrawn is None or not event.withdrawn[1]:
            self._fail(event, "update", "reduce without withdrawn values")
            return
        var, withdrawn = event.withdrawn
        old = event.domains[var]
        if not set(withdrawn.values).issubset(old.values):
            self._fail(event, "update", f"withdrawn {withdrawn} not within {var}:{old}")
            return
        expected = tuple(Modification(var, kind) for kind in classify_update(old, withdrawn.values))
        if tuple(event.update or ()) != expected:
            self._fail(event, "update", f"update {_mods(event.update or ())}, expected {_mods(expected)}")

    def _check_cause(self, event: TraceEvent):
        cause = event.cause or ()
        if not cause:
            self._fail(event, "cause", "wake-up without cause")
        elif not set(cause).issubset(self._pending):
            self._fail(event, "cause", f"cause {_mods(cause)} not in last update {_mods(self._pending)}")
        elif not set(cause).issubset(awakening_condition(event.constraint)):
            self._fail(event, "cause", f"cause {_mods(cause)} outside the awakening condition")

    def result(self) -> ValidationReport:
        violations = list(self.violations)
        if self._tells:
            violations.append(Violation(
                self._last_chrono or 0, "balance",
                f"{len(self._tells)} tell(s) without told at end of trace"))
        return ValidationReport(violations, self.events)

    def render(self) -> str:
        return self.result().render()


def validate_trace(events: Iterable[TraceEvent]) -> ValidationReport:
    validator = TraceValidator()
    for event in events:
        validator(event)
    return validator.result()


ANALYZERS = {
    "tree": SearchTreeBuilder,
    "evolution": EvolutionAnalyzer,
    "stats": StatsAnalyzer,
    "useless": UselessActivationDetector,
    "validate": TraceValidator,
}
