"""Fact files, interpretations, background-knowledge saturation, datasets.

The file format is block-structured:

    begin(model).
    doublet_3_I.
    p(p7,4905,normal).
    qrs(r7,5026,normal).
    end(model).

Whitespace is insignificant outside tokens and ``%`` starts a comment that
runs to end of line.  The identifier line carries ``<class>_<situation>_
<source>``.  A fact whose second argument is an integer is an event record
(id, timestamp in ms, attributes); everything else is kept verbatim.
Relational predicates (suc, suci, timing, amplitude categories) are derived
by :func:`saturate`, never trusted from the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import InternalError, ParseError, UsageError
from .logic import FactIndex, Literal, PredicateSchema

_IDENT_RE = re.compile(r"^(\w+)_(\d+)_([A-Za-z][A-Za-z0-9]*)$")
_FACT_RE = re.compile(r"^([a-z][A-Za-z0-9_]*)\s*(?:\(([^()]*)\))?$")
_INT_RE = re.compile(r"^\d+$")
_CONST_RE = re.compile(r"^[a-z0-9][A-Za-z0-9_]*$")


@dataclass(frozen=True, slots=True)
class Event:
    """One time-stamped occurrence on a source."""

    eid: str
    pred: str
    time: int
    attrs: tuple[str, ...] = ()


@dataclass(frozen=True)
class Interpretation:
    """One labelled example: a situation seen from one source."""

    situation: int
    source: str
    label: str
    facts: frozenset[Literal]
    raw_events: tuple[Event, ...] = ()

    def __post_init__(self):
        ids = [e.eid for e in self.raw_events]
        if len(set(ids)) != len(ids):
            raise UsageError(
                f"duplicate event ids in {self.label}_{self.situation}_{self.source}")
        ordered = tuple(sorted(self.raw_events, key=lambda e: (e.time, e.eid)))
        object.__setattr__(self, "raw_events", ordered)

    @cached_property
    def index(self) -> FactIndex:
        return FactIndex(self.facts)

    @property
    def ident(self) -> str:
        return f"{self.label}_{self.situation}_{self.source}"


def _parse_statements(text: str):
    """Yield (statement_text, line_number) pairs, comments stripped."""
    buf: list[str] = []
    start_line = 1
    line = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch == ".":
            stmt = "".join(buf).strip()
            if stmt:
                yield stmt, start_line
            buf = []
            start_line = line
            i += 1
            continue
        if not buf and not ch.isspace():
            start_line = line
        buf.append(ch)
        i += 1
    tail = "".join(buf).strip()
    if tail:
        raise ParseError(f"trailing text without terminating '.': {tail!r}",
                         line=start_line)


def _parse_fact(stmt: str, line: int) -> Literal:
    m = _FACT_RE.match(stmt)
    if not m:
        raise ParseError(f"malformed fact {stmt!r}", line=line)
    pred, argtext = m.group(1), m.group(2)
    if argtext is None:
        return Literal(pred)
    args = tuple(a.strip() for a in argtext.split(","))
    for a in args:
        if not a:
            raise ParseError(f"empty argument in {stmt!r}", line=line)
        if not (_INT_RE.match(a) or _CONST_RE.match(a)):
            raise ParseError(f"non-ground or malformed argument {a!r} in fact "
                             f"{stmt!r}", line=line)
    return Literal(pred, args)


def _is_event_fact(f: Literal) -> bool:
    return (len(f.args) >= 2 and _INT_RE.match(f.args[1]) is not None
            and _CONST_RE.match(f.args[0]) is not None
            and not _INT_RE.match(f.args[0]))


def parse_model_file(text: str) -> list[Interpretation]:
    """Parse every begin(model)/end(model) block of text."""
    out: list[Interpretation] = []
    in_block = False
    ident: tuple[str, int, str] | None = None
    facts: list[Literal] = []
    events: list[Event] = []
    open_line = 0

    for stmt, line in _parse_statements(text):
        if stmt == "begin(model)":
            if in_block:
                raise ParseError("begin(model) inside an open block", line=line)
            in_block, ident, facts, events = True, None, [], []
            open_line = line
            continue
        if stmt == "end(model)":
            if not in_block or ident is None:
                raise ParseError("end(model) without identified block", line=line)
            label, situation, source = ident
            out.append(Interpretation(situation=situation, source=source,
                                      label=label, facts=frozenset(facts),
                                      raw_events=tuple(events)))
            in_block = False
            continue
        if not in_block:
            raise ParseError(f"statement outside begin(model) block: {stmt!r}",
                             line=line)
        if ident is None:
            m = _IDENT_RE.match(stmt)
            if not m:
                raise ParseError(
                    f"block identifier {stmt!r} does not match "
                    "<class>_<situation>_<source>", line=line)
            ident = (m.group(1), int(m.group(2)), m.group(3))
            continue
        fact = _parse_fact(stmt, line)
        facts.append(fact)
        if _is_event_fact(fact):
            events.append(Event(eid=fact.args[0], pred=fact.pred,
                                time=int(fact.args[1]), attrs=fact.args[2:]))

    if in_block:
        raise ParseError("missing end(model).", line=open_line)
    return out


def write_model_file(interpretations: Sequence[Interpretation]) -> str:
    """Inverse of parse_model_file (structural round-trip identity)."""
    lines: list[str] = []
    for interp in interpretations:
        lines.append("begin(model).")
        lines.append(f"{interp.ident}.")
        event_facts = []
        other_facts = []
        for f in sorted(interp.facts, key=str):
            (event_facts if _is_event_fact(f) else other_facts).append(f)
        event_facts.sort(key=lambda f: (int(f.args[1]), f.args[0]))
        for f in event_facts + other_facts:
            lines.append(f"{f}.")
        lines.append("end(model).")
    return "\n".join(lines) + ("\n" if lines else "")


# --------------------------------------------------------------------------
# symbolization / saturation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolizationConfig:
    """Thresholds turning millisecond delays and mmHg values into categories.

    Boundaries are inclusive on the middle category: v < lo maps to the
    first name, lo <= v <= hi to the second, v > hi to the third.
    """

    beat_ms: tuple[int, int] = (600, 1000)        # rr1 / pp1 / ss1
    wave_ms: tuple[int, int] = (120, 200)         # pr1 / ds1
    amp_mmhg: tuple[int, int] = (70, 110)         # dias / sys amplitude
    variation_mmhg: tuple[int, int] = (30, 60)    # cycle_abp pressure change
    cycle_window_ms: int = 1000
    suc_window: int = 8                           # max events apart for suc

    def __post_init__(self):
        for name in ("beat_ms", "wave_ms", "amp_mmhg", "variation_mmhg"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise UsageError(f"{name} thresholds must be increasing")

    def beat(self, ms: int) -> str:
        return _cat(ms, self.beat_ms, ("short", "normal", "long"))

    def wave(self, ms: int) -> str:
        return _cat(ms, self.wave_ms, ("short", "normal", "long"))

    def amp(self, mmhg: int) -> str:
        return _cat(mmhg, self.amp_mmhg, ("low", "normal", "high"))

    def variation(self, mmhg: int) -> str:
        return _cat(mmhg, self.variation_mmhg, ("low", "normal", "high"))


def _cat(value: int, bounds: tuple[int, int], names: tuple[str, str, str]) -> str:
    lo, hi = bounds
    if value < lo:
        return names[0]
    if value <= hi:
        return names[1]
    return names[2]


def _symbolize_event(e: Event, cfg: SymbolizationConfig) -> Literal:
    attrs = tuple(cfg.amp(int(a)) if _INT_RE.match(a) else a for a in e.attrs)
    return Literal(e.pred, (e.eid, *attrs))


def _amp_of(e: Event) -> int | None:
    for a in e.attrs:
        if _INT_RE.match(a):
            return int(a)
    return None


def saturate(interp: Interpretation, cfg: SymbolizationConfig,
             schema: PredicateSchema) -> Interpretation:
    """Extend facts with everything the background knowledge derives.

    Derived facts: timestamp-free event facts with symbolized attributes,
    suc/suci over the interpretation's timeline (suc windowed by
    cfg.suc_window), the schema's timing predicates, and cycle_abp.
    Deterministic and idempotent; an event-free interpretation is returned
    unchanged.
    """
    events = interp.raw_events
    if not events:
        return interp
    for a, b in zip(events, events[1:]):
        if (a.time, a.eid) > (b.time, b.eid):
            raise InternalError("raw events out of order after construction")

    derived: list[Literal] = [_symbolize_event(e, cfg) for e in events]

    for j, earlier in enumerate(events):
        for i in range(j + 1, min(j + 1 + cfg.suc_window, len(events))):
            derived.append(Literal("suc", (events[i].eid, earlier.eid)))
    for prev, nxt in zip(events, events[1:]):
        derived.append(Literal("suci", (nxt.eid, prev.eid)))

    by_pred: dict[str, list[Event]] = {}
    for e in events:
        by_pred.setdefault(e.pred, []).append(e)

    for decl in schema.decls:
        if not decl.derive:
            continue
        kind = decl.derive[0]
        if kind == "consecutive":
            stream = by_pred.get(decl.derive[1], [])
            for a, b in zip(stream, stream[1:]):
                cat = _timing_cat(cfg, decl.scale, b.time - a.time)
                derived.append(Literal(decl.name, (a.eid, b.eid, cat)))
        elif kind == "next":
            firsts = by_pred.get(decl.derive[1], [])
            seconds = by_pred.get(decl.derive[2], [])
            for a in firsts:
                later = [b for b in seconds if (b.time, b.eid) > (a.time, a.eid)]
                if later:
                    b = later[0]
                    cat = _timing_cat(cfg, decl.scale, b.time - a.time)
                    derived.append(Literal(decl.name, (a.eid, b.eid, cat)))
        elif kind == "cycle":
            derived.extend(_derive_cycles(events, decl.derive[1],
                                          decl.derive[2], decl.name, cfg))
        else:
            raise InternalError(f"unknown derivation kind {kind!r}")

    return Interpretation(situation=interp.situation, source=interp.source,
                          label=interp.label,
                          facts=interp.facts | frozenset(derived),
                          raw_events=events)


def _timing_cat(cfg: SymbolizationConfig, scale: str, ms: int) -> str:
    return cfg.wave(ms) if scale == "wave" else cfg.beat(ms)


def _derive_cycles(events: Sequence[Event], dias_pred: str, sys_pred: str,
                   name: str, cfg: SymbolizationConfig) -> list[Literal]:
    """cycle_abp(D, ampsd, S, ampds) for each diastole immediately followed
    by a systole; ampsd relates the previous systole to D (undef if none),
    ampds relates D to S."""
    out: list[Literal] = []
    prev_sys: Event | None = None
    for i, e in enumerate(events):
        if e.pred == dias_pred and i + 1 < len(events):
            nxt = events[i + 1]
            if (nxt.pred == sys_pred
                    and nxt.time - e.time <= cfg.cycle_window_ms):
                d_amp, s_amp = _amp_of(e), _amp_of(nxt)
                ampds = (cfg.variation(abs(s_amp - d_amp))
                         if d_amp is not None and s_amp is not None else "undef")
                if prev_sys is not None and d_amp is not None:
                    p_amp = _amp_of(prev_sys)
                    ampsd = (cfg.variation(abs(d_amp - p_amp))
                             if p_amp is not None else "undef")
                else:
                    ampsd = "undef"
                out.append(Literal(name, (e.eid, ampsd, nxt.eid, ampds)))
        if e.pred == sys_pred:
            prev_sys = e
    return out


def check_consistency(e1: Interpretation, e2: Interpretation) -> bool:
    """Two views of one situation agree iff their labels agree."""
    if e1.situation != e2.situation:
        raise UsageError(
            f"cannot compare situations {e1.situation} and {e2.situation}")
    return e1.label == e2.label


# --------------------------------------------------------------------------
# datasets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """Interpretations grouped by source and situation, plus the schema."""

    interpretations: tuple[Interpretation, ...]
    schema: PredicateSchema
    classes: tuple[str, ...]
    _by_key: dict[tuple[str, int], Interpretation] = field(
        init=False, repr=False, compare=False)

    def __post_init__(self):
        by_key: dict[tuple[str, int], Interpretation] = {}
        for i in self.interpretations:
            key = (i.source, i.situation)
            if key in by_key:
                raise UsageError(
                    f"situation {i.situation} appears twice for source {i.source}")
            by_key[key] = i
        object.__setattr__(self, "_by_key", by_key)

    def sources(self) -> list[str]:
        out: dict[str, None] = {}
        for i in self.interpretations:
            out.setdefault(i.source)
        return list(out)

    def situations(self) -> list[int]:
        return sorted({i.situation for i in self.interpretations})

    def by_source(self, source: str) -> list[Interpretation]:
        return [i for i in self.interpretations if i.source == source]

    def get(self, source: str, situation: int) -> Interpretation | None:
        return self._by_key.get((source, situation))

    def restrict(self, situations: Iterable[int]) -> "Dataset":
        keep = set(situations)
        return Dataset(tuple(i for i in self.interpretations
                             if i.situation in keep),
                       self.schema, self.classes)
