"""
Trace Model Module
Part of FD Tracer

The generic trace event, its machine format (JSON Lines), the compact
one-line layout and the full attribute dump, plus trace writers and
readers used by the analyzers.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, NamedTuple, Optional, TextIO, Tuple, Union

from constraints import ConstraintInstance, parse_functor
from errors import ConstraintError, DomainError, TraceFormatError
from fd_domain import Domain, DomainState, Modification, UpdateType, VarRef


class Port(str, Enum):
    """The eight event types."""

    TELL = "tell"
    TOLD = "told"
    SELECT = "select"
    REJECT = "reject"
    WAKE_UP = "wake-up"
    REDUCE = "reduce"
    TRUE = "true"
    SUSPEND = "suspend"

    @property
    def label(self) -> str:
        """Capitalised name used by the compact layout (Wake-up, Reduce, ...)."""
        return self.value.capitalize()


class StoreEntry(NamedTuple):
    """(constraint id, abstract representation) pair stored in a partition list."""

    id: int
    abstract: str

    def __str__(self) -> str:
        return f"({self.id}, {self.abstract})"


@dataclass(frozen=True)
class StorePartition:
    """
    The constraint store split into active, suspended, queued, solved
    and rejected lists. S is most-recently-suspended first; Q is FIFO.
    """

    A: Tuple[StoreEntry, ...] = ()
    S: Tuple[StoreEntry, ...] = ()
    Q: Tuple[StoreEntry, ...] = ()
    T: Tuple[StoreEntry, ...] = ()
    R: Tuple[StoreEntry, ...] = ()

    def lists(self) -> List[Tuple[str, Tuple[StoreEntry, ...]]]:
        return [("A", self.A), ("S", self.S), ("Q", self.Q), ("T", self.T), ("R", self.R)]

    def ids(self) -> List[int]:
        return [entry.id for _, entries in self.lists() for entry in entries]

    def violations(self) -> List[str]:
        """Partition invariant breaches (overlaps, |A| > 1, |R| > 1)."""
        problems = []
        if len(self.A) > 1:
            problems.append(f"|A| = {len(self.A)} > 1")
        if len(self.R) > 1:
            problems.append(f"|R| = {len(self.R)} > 1")
        ids = self.ids()
        if len(ids) != len(set(ids)):
            duplicated = sorted({i for i in ids if ids.count(i) > 1})
            problems.append(f"constraints {duplicated} appear in more than one list")
        return problems


@dataclass(frozen=True)
class TraceEvent:
    """
    One execution step with its full attribute set.

    domains and store describe the state immediately before the step.
    withdrawn/update are set on reduce events only, cause on wake-up only.
    """

    chrono: int
    depth: int
    port: Port
    constraint: ConstraintInstance
    domains: DomainState
    store: StorePartition
    withdrawn: Optional[Tuple[VarRef, Domain]] = None
    update: Optional[Tuple[Modification, ...]] = None
    cause: Optional[Tuple[Modification, ...]] = field(default=None)

    def constraint_domains(self) -> List[Tuple[VarRef, Domain]]:
        """Domains restricted to the variables of the concerned constraint."""
        return self.domains.restrict(self.constraint.vars)


# ---------------------------------------------------------------------------
# JSON Lines
# ---------------------------------------------------------------------------

def _modifications_to_json(mods: Iterable[Modification]) -> List[Dict[str, str]]:
    return [{"var": mod.var.name, "type": mod.type.value} for mod in mods]


def event_to_record(e: TraceEvent) -> Dict[str, Any]:
    """Plain dict form of an event, keys in serialization order."""
    record: Dict[str, Any] = {
        "chrono": e.chrono,
        "depth": e.depth,
        "port": e.port.value,
        "constraint": {
            "id": e.constraint.id,
            "abstract": e.constraint.abstract,
            "concrete": e.constraint.concrete,
            "context": e.constraint.context,
        },
        "domains": {var.name: list(domain.values) for var, domain in e.domains.items()},
        "store": {name: [[entry.id, entry.abstract] for entry in entries]
                  for name, entries in e.store.lists()},
    }
    if e.withdrawn is not None:
        var, values = e.withdrawn
        record["withdrawn"] = {"var": var.name, "values": list(values.values)}
    if e.update is not None:
        record["update"] = _modifications_to_json(e.update)
    if e.cause is not None:
        record["cause"] = _modifications_to_json(e.cause)
    return record


def serialize(e: TraceEvent) -> str:
    """One JSON Lines record (no trailing newline) for an event."""
    return json.dumps(event_to_record(e), ensure_ascii=False, separators=(",", ":"))


_REQUIRED_KEYS = ("chrono", "depth", "port", "constraint", "domains", "store")


def _require(condition: bool, message: str, line_no: Optional[int]):
    if not condition:
        raise TraceFormatError(message, line_no)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_value_array(values: Any) -> bool:
    """A list of integers in strictly increasing order."""
    return (isinstance(values, list) and all(_is_int(v) for v in values)
            and all(a < b for a, b in zip(values, values[1:])))


def _parse_modifications(raw: Any, by_name: Dict[str, VarRef], key: str,
                         line_no: Optional[int]) -> Tuple[Modification, ...]:
    _require(isinstance(raw, list), f"'{key}' must be a list", line_no)
    mods = []
    for item in raw:
        _require(isinstance(item, dict) and "var" in item and "type" in item,
                 f"malformed '{key}' item {item!r}", line_no)
        _require(item["var"] in by_name, f"unknown variable {item['var']!r} in '{key}'", line_no)
        try:
            kind = UpdateType(item["type"])
        except ValueError:
            raise TraceFormatError(f"unknown update type {item['type']!r}", line_no) from None
        mods.append(Modification(by_name[item["var"]], kind))
    return tuple(mods)


def record_to_event(record: Dict[str, Any], line_no: Optional[int] = None) -> TraceEvent:
    """Rebuild an event from its dict form, checking the schema."""
    _require(isinstance(record, dict), "record must be a JSON object", line_no)
    for key in _REQUIRED_KEYS:
        _require(key in record, f"missing required key '{key}'", line_no)

    _require(_is_int(record["chrono"]) and record["chrono"] >= 1, "chrono must be an integer >= 1", line_no)
    _require(_is_int(record["depth"]) and record["depth"] >= 1, "depth must be an integer >= 1", line_no)
    try:
        port = Port(record["port"])
    except ValueError:
        raise TraceFormatError(f"unknown port {record['port']!r}", line_no) from None

    raw_domains = record["domains"]
    _require(isinstance(raw_domains, dict), "'domains' must be an object", line_no)
    entries = []
    for i, (name, values) in enumerate(raw_domains.items(), start=1):
        _require(_is_value_array(values),
                 f"domain of {name} must be a strictly increasing list of integers", line_no)
        try:
            entries.append((VarRef(i, name), Domain.of(values)))
        except DomainError as e:
            raise TraceFormatError(str(e), line_no) from None
    domains = DomainState(entries)
    by_name = {var.name: var for var in domains}

    raw_c = record["constraint"]
    _require(isinstance(raw_c, dict), "'constraint' must be an object", line_no)
    for key in ("id", "abstract", "concrete", "context"):
        _require(key in raw_c, f"constraint is missing '{key}'", line_no)
    try:
        form = parse_functor(raw_c["concrete"])
    except ConstraintError as e:
        raise TraceFormatError(str(e), line_no) from None
    constraint = ConstraintInstance(raw_c["id"], raw_c["abstract"], form, raw_c["context"])

    raw_store = record["store"]
    _require(isinstance(raw_store, dict), "'store' must be an object", line_no)
    lists = {}
    for name in ("A", "S", "Q", "T", "R"):
        _require(isinstance(raw_store.get(name), list), f"store.{name} must be a list", line_no)
        try:
            lists[name] = tuple(StoreEntry(int(i), str(text)) for i, text in raw_store[name])
        except (TypeError, ValueError):
            raise TraceFormatError(f"store.{name} must hold [id, abstract] pairs", line_no) from None
    store = StorePartition(**lists)

    withdrawn = update = cause = None
    if port is Port.REDUCE:
        _require("withdrawn" in record and "update" in record,
                 "reduce event needs 'withdrawn' and 'update'", line_no)
        raw_w = record["withdrawn"]
        _require(isinstance(raw_w, dict) and raw_w.get("var") in by_name
                 and _is_value_array(raw_w.get("values")) and raw_w["values"],
                 "malformed 'withdrawn'", line_no)
        withdrawn = (by_name[raw_w["var"]], Domain.of(raw_w["values"]))
        update = _parse_modifications(record["update"], by_name, "update", line_no)
    else:
        _require("withdrawn" not in record and "update" not in record,
                 f"'withdrawn'/'update' not allowed on {port.value} events", line_no)
    if port is Port.WAKE_UP:
        _require("cause" in record, "wake-up event needs 'cause'", line_no)
        cause = _parse_modifications(record["cause"], by_name, "cause", line_no)
        _require(bool(cause), "wake-up cause must be nonempty", line_no)
    else:
        _require("cause" not in record, f"'cause' not allowed on {port.value} events", line_no)

    return TraceEvent(record["chrono"], record["depth"], port, constraint, domains, store,
                      withdrawn, update, cause)


def parse(line: str, line_no: Optional[int] = None) -> Optional[TraceEvent]:
    """
    Parse one JSON Lines record.

    Returns:
        The event, or None for a blank separator line

    Raises:
        TraceFormatError: malformed JSON or schema violation, with line number
    """
    if not line.strip():
        return None
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise TraceFormatError(f"malformed JSON: {e.msg}", line_no) from None
    return record_to_event(record, line_no)


def read_trace(stream: TextIO) -> Iterator[TraceEvent]:
    """Yield the events of a JSON Lines stream, skipping blank lines."""
    for line_no, line in enumerate(stream, start=1):
        event = parse(line, line_no)
        if event is not None:
            yield event


def load_trace(path: Union[str, Path]) -> List[TraceEvent]:
    """Read a whole .fdtrace.jsonl file."""
    with open(path, "r", encoding="utf-8") as f:
        return list(read_trace(f))


# ---------------------------------------------------------------------------
# Human formats
# ---------------------------------------------------------------------------

def format_compact(e: TraceEvent) -> str:
    """`<chrono> [<depth>] <Port> <abstract> <var:dom>* [<withdrawn>]`"""
    parts = [str(e.chrono), f"[{e.depth}]", e.port.label, e.constraint.abstract]
    parts.extend(f"{var.name}:{domain}" for var, domain in e.constraint_domains())
    if e.withdrawn is not None:
        var, values = e.withdrawn
        parts.append(f"{var.name}{values}")
    return " ".join(parts)


def _mods_text(mods: Iterable[Modification]) -> str:
    return "[" + ", ".join(str(mod) for mod in mods) + "]"


def _entries_text(entries: Iterable[StoreEntry]) -> str:
    return "[" + ", ".join(str(entry) for entry in entries) + "]"


def format_attributes(e: TraceEvent) -> str:
    """Multi-line dump of every attribute of an event."""
    c = e.constraint
    lines = [
        f"chrono     = {e.chrono}",
        f"depth      = {e.depth}",
        f"port       = {e.port.value.upper()}",
        f"constraint = ({c.id}, {c.abstract}, {c.concrete}, {c.context})",
        "domains    = [" + ", ".join(f"{var.name}::{d}" for var, d in e.domains.items()) + "]",
    ]
    if e.withdrawn is not None:
        var, values = e.withdrawn
        lines.append(f"withdrawn  = {var.name}::{values}")
    if e.update is not None:
        lines.append(f"update     = {_mods_text(e.update)}")
    if e.cause is not None:
        lines.append(f"cause      = {_mods_text(e.cause)}")
    for name, entries in e.store.lists():
        lines.append(f"store_{name}    = {_entries_text(entries)}")
    return "\n".join(lines)


class TraceWriter:
    """
    Trace sink writing one rendering per event to a text stream.

    Args:
        stream: Open text stream owned by the caller
        fmt: "jsonl", "compact" or "full"
    """

    FORMATTERS = {"jsonl": serialize, "compact": format_compact, "full": format_attributes}

    def __init__(self, stream: TextIO, fmt: str = "jsonl"):
        if fmt not in self.FORMATTERS:
            raise ValueError(f"unknown trace format {fmt!r}")
        self.stream = stream
        self.fmt = fmt
        self.count = 0
        self._format = self.FORMATTERS[fmt]

    def __call__(self, event: TraceEvent):
        self.stream.write(self._format(event))
        self.stream.write("\n\n" if self.fmt == "full" else "\n")
        self.count += 1


class TraceRecorder:
    """Trace sink keeping every event in memory."""

    def __init__(self):
        self.events: List[TraceEvent] = []

    def __call__(self, event: TraceEvent):
        self.events.append(event)
