"""Multisource learning: aggregation, bottom-clause interleaving, automatic
bias construction, and the two-step biased learning pipeline.

The pipeline learns rules per source, merges aligned examples by set union
(dropping label-inconsistent situations), generates bottom clauses by
interleaving the events of every monosource rule pair, turns each bottom
clause into one DLAB block, and learns again on the aggregated data inside
the union of those blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping, Sequence

from .data import Dataset, Event, Interpretation
from .dlab import (ChoiceSpec, DlabTemplate, LiteralSpec, choice,
                   compile_template, inline, literal)
from .errors import InternalError, ParseError, UsageError
from .learner import LearnerParams, Theory, learn_class, learn_theory
from .logic import (Clause, Literal, PredicateSchema, Term, body_key,
                    event_variables, is_variable, standardize_apart)

GLOBAL_RELATIONS = ("suc", "suci")


# --------------------------------------------------------------------------
# aggregation
# --------------------------------------------------------------------------

@dataclass
class AggregationResult:
    examples: list[Interpretation]
    dropped: list[tuple[int, str]]  # (situation, reason)


def aggregate(dataset: Dataset, suc_window: int = 8) -> AggregationResult:
    """Union per-source facts per situation, recomputing cross-source
    suc/suci on the merged timeline; inconsistent or incomplete situations
    are dropped and reported."""
    sources = dataset.sources()
    if len(sources) < 2:
        raise UsageError("aggregation needs at least two sources")

    out: list[Interpretation] = []
    dropped: list[tuple[int, str]] = []
    for k in dataset.situations():
        views = [dataset.get(s, k) for s in sources]
        if any(v is None for v in views):
            dropped.append((k, "incomplete"))
            continue
        labels = {v.label for v in views}
        if len(labels) != 1:
            dropped.append((k, "inconsistent"))
            continue

        facts: set[Literal] = set()
        events: list[Event] = []
        origin: dict[str, str] = {}
        for v in views:
            facts |= v.facts
            for e in v.raw_events:
                if e.eid in origin:
                    raise UsageError(
                        f"event id {e.eid} appears on two sources in situation {k}")
                origin[e.eid] = v.source
                events.append(e)
        events.sort(key=lambda e: (e.time, e.eid))
        for j, earlier in enumerate(events):
            for i in range(j + 1, min(j + 1 + suc_window, len(events))):
                if origin[events[i].eid] != origin[earlier.eid]:
                    facts.add(Literal("suc", (events[i].eid, earlier.eid)))
        for prev, nxt in zip(events, events[1:]):
            if origin[nxt.eid] != origin[prev.eid]:
                facts.add(Literal("suci", (nxt.eid, prev.eid)))

        out.append(Interpretation(situation=k, source="AGG",
                                  label=labels.pop(), facts=frozenset(facts),
                                  raw_events=tuple(events)))
    if not out:
        raise UsageError("no situation survived aggregation")
    return AggregationResult(out, dropped)


# --------------------------------------------------------------------------
# interleavings and bottom clauses
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MergeItem:
    source: str
    var: Term
    event: Literal


@dataclass(frozen=True)
class Merge:
    items: tuple[MergeItem, ...]


@dataclass(frozen=True)
class InterleavingConstraint:
    """No foreign event may fall between source-adjacent before/after events."""

    source: str
    before: str
    after: str


def parse_constraints(text: str) -> list[InterleavingConstraint]:
    """One constraint per line: ``forbid_between <source> <before> <after>``."""
    out: list[InterleavingConstraint] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] != "forbid_between":
            raise ParseError(f"bad constraint {raw!r}", line=lineno)
        out.append(InterleavingConstraint(parts[1], parts[2], parts[3]))
    return out


def ordered_events(h: Clause, schema: PredicateSchema) -> list[tuple[Term, Literal]]:
    """Event variables of h sorted by the total order its suc/suci chain
    induces; raises if the chain does not order every pair."""
    ev_vars = event_variables(h, schema)
    ev_lit: dict[Term, Literal] = {}
    for b in h.body:
        if schema.is_event(b.pred) and b.args and is_variable(b.args[0]):
            ev_lit.setdefault(b.args[0], b)
    if len(ev_vars) <= 1:
        return [(v, ev_lit[v]) for v in ev_vars]

    after: dict[Term, set[Term]] = {v: set() for v in ev_vars}
    for b in h.body:
        if b.pred in GLOBAL_RELATIONS and len(b.args) == 2:
            x, y = b.args  # x occurs after y
            if x in after and y in after:
                after[x].add(y)
    changed = True
    while changed:  # transitive closure
        changed = False
        for v in ev_vars:
            extra = set()
            for w in after[v]:
                extra |= after[w]
            if not extra <= after[v]:
                after[v] |= extra
                changed = True
    for i, a in enumerate(ev_vars):
        for b2 in ev_vars[i + 1:]:
            if a not in after[b2] and b2 not in after[a]:
                raise UsageError(
                    f"event order not total in hypothesis: {h} ({a} vs {b2})")
    ranked = sorted(ev_vars, key=lambda v: (len(after[v]), v))
    return [(v, ev_lit[v]) for v in ranked]


def interleavings(h1: Clause, h2: Clause, schema: PredicateSchema,
                  sources: tuple[str, str]) -> list[Merge]:
    """Every way to intertwine the two hypotheses' event sequences while
    preserving each one's internal order: exactly C(n+p, n) merges."""
    shared = set(h1.variables()) & set(h2.variables())
    if shared:
        raise UsageError(f"hypotheses share variables {sorted(shared)}; "
                         "standardize apart first")
    ev1 = ordered_events(h1, schema)
    ev2 = ordered_events(h2, schema)
    n, p = len(ev1), len(ev2)
    merges: list[Merge] = []
    from itertools import combinations
    for slots in combinations(range(n + p), n):
        slotset = set(slots)
        items: list[MergeItem] = []
        i1 = i2 = 0
        for pos in range(n + p):
            if pos in slotset:
                var, ev = ev1[i1]
                items.append(MergeItem(sources[0], var, ev))
                i1 += 1
            else:
                var, ev = ev2[i2]
                items.append(MergeItem(sources[1], var, ev))
                i2 += 1
        merges.append(Merge(tuple(items)))
    if len(merges) != comb(n + p, n):
        raise InternalError("interleaving count mismatch")
    return merges


def violates(merge: Merge, con: InterleavingConstraint) -> bool:
    items = merge.items
    own = [i for i, it in enumerate(items) if it.source == con.source]
    for a, b in zip(own, own[1:]):  # adjacent in the constrained source
        if (items[a].event.pred == con.before
                and items[b].event.pred == con.after):
            if any(items[k].source != con.source for k in range(a + 1, b)):
                return True
    return False


def filter_constraints(merges: Iterable[Merge],
                       constraints: Iterable[InterleavingConstraint]) -> list[Merge]:
    constraints = list(constraints)
    return [m for m in merges
            if not any(violates(m, c) for c in constraints)]


@dataclass(frozen=True)
class BottomClause:
    """A maximally specific multisource clause plus the layout its DLAB
    block is built from: a mandatory head segment, per-event tail blocks,
    and the optional (non-connecting) literals attached to each."""

    clause: Clause
    merge: Merge
    head_mandatory: tuple[Literal, ...]
    head_options: tuple[Literal, ...]
    tail: tuple[tuple[tuple[Literal, ...], tuple[Literal, ...]], ...]


def make_bottom_clause(h1: Clause, h2: Clause, merge: Merge,
                       schema: PredicateSchema) -> BottomClause:
    """All literals of both hypotheses plus one new suci literal for every
    cross-source adjacent pair of the merge."""
    items = merge.items
    pos_of = {it.var: i for i, it in enumerate(items)}
    body_pool = list(h1.body) + list(h2.body)

    event_lits = {it.var: it.event for it in items}
    connectors: dict[int, list[Literal]] = {i: [] for i in range(len(items))}
    options: dict[int, list[Literal]] = {i: [] for i in range(len(items))}
    leftovers: list[Literal] = []
    used: set[int] = set()

    for i in range(1, len(items)):
        prev, cur = items[i - 1], items[i]
        if prev.source != cur.source:
            connectors[i].append(Literal("suci", (cur.var, prev.var)))
        else:
            for j, lit in enumerate(body_pool):
                if (j not in used and lit.pred in GLOBAL_RELATIONS
                        and lit.args == (cur.var, prev.var)):
                    connectors[i].append(lit)
                    used.add(j)
            if not connectors[i]:
                raise InternalError(
                    f"no ordering literal between {prev.var} and {cur.var}")

    for j, lit in enumerate(body_pool):
        if j in used or lit in event_lits.values():
            continue
        if schema.is_event(lit.pred):
            continue  # event literal already placed via the merge
        anchors = [pos_of[a] for a in lit.args if a in pos_of]
        if anchors:
            options[max(anchors)].append(lit)
        else:
            leftovers.append(lit)

    body: list[Literal] = []
    for i, it in enumerate(items):
        body.append(it.event)
        body.extend(connectors[i])
        body.extend(options[i])
    body.extend(leftovers)

    head_cut = min(2, len(items))
    head_mandatory = tuple(
        [items[i].event for i in range(head_cut)]
        + [c for i in range(head_cut) for c in connectors[i]])
    head_options = tuple([o for i in range(head_cut) for o in options[i]]
                         + leftovers)
    tail = tuple(
        ((items[i].event, *connectors[i]), tuple(options[i]))
        for i in range(head_cut, len(items)))

    return BottomClause(clause=Clause(h1.head, tuple(body)), merge=merge,
                        head_mandatory=head_mandatory,
                        head_options=head_options, tail=tail)


def bottom_clauses_for_pair(h1: Clause, h2: Clause, schema: PredicateSchema,
                            sources: tuple[str, str],
                            constraints: Iterable[InterleavingConstraint] = (),
                            ) -> list[BottomClause]:
    a, b = standardize_apart(h1, h2)
    merges = filter_constraints(interleavings(a, b, schema, sources),
                                constraints)
    return [make_bottom_clause(a, b, m, schema) for m in merges]


# --------------------------------------------------------------------------
# bias construction
# --------------------------------------------------------------------------

def _lit_spec(lit: Literal) -> LiteralSpec:
    return literal(lit.pred, *lit.args)


def _block_for(bt: BottomClause) -> ChoiceSpec:
    """One DLAB block spanning every clause equal to or more general than
    the bottom clause: head segment mandatory, every later event nested in
    a 0-1 block together with its connecting global literal, non-connecting
    relational literals individually optional."""

    def tail_spec(i: int) -> ChoiceSpec | None:
        if i >= len(bt.tail):
            return None
        mandatory, opts = bt.tail[i]
        parts: list = [choice("len", "len", *[_lit_spec(l) for l in mandatory])]
        parts.extend(choice(0, 1, _lit_spec(o)) for o in opts)
        deeper = tail_spec(i + 1)
        if deeper is not None:
            parts.append(deeper)
        return choice(0, 1, choice("len", "len", *parts))

    parts: list = [_lit_spec(l) for l in bt.head_mandatory]
    parts.extend(choice(0, 1, _lit_spec(o)) for o in bt.head_options)
    deeper = tail_spec(0)
    if deeper is not None:
        parts.append(deeper)
    return choice("len", "len", *parts)


def synthesize_bias(bottoms: Sequence[BottomClause]) -> DlabTemplate:
    """1-1 choice between the blocks of all bottom clauses."""
    if not bottoms:
        raise UsageError("cannot synthesize a bias from zero bottom clauses")
    return compile_template(choice(1, 1, *[_block_for(bt) for bt in bottoms]))


def naive_bias(schema: PredicateSchema, max_events: int) -> DlabTemplate:
    """Minimally restrictive grammar: any sequence of up to max_events events
    drawn from every source, every attribute value, and every relational
    predicate between every event pair."""
    if max_events < 1:
        raise UsageError("max_events must be >= 1")
    events = sorted(schema.event_preds(), key=lambda d: d.name)
    if not events:
        raise UsageError("schema declares no event predicates")
    relations = sorted(schema.relational_preds(), key=lambda d: d.name)

    def slot(j: int) -> ChoiceSpec:
        alts = []
        for d in events:
            args: list = [f"E{j}"]
            args.extend(inline(1, 1, *dom) for dom in d.domains)
            alts.append(literal(d.name, *args))
        return choice(1, 1, *alts)

    def rel_options(i: int, j: int) -> list[LiteralSpec]:
        out = []
        fresh = 0
        for d in relations:
            if not d.argspec:
                continue
            args: list = []
            dom_iter = iter(d.domains)
            for spec in d.argspec:
                if spec == "a":
                    args.append(f"E{i}")
                elif spec == "b":
                    args.append(f"E{j}")
                elif spec == "cat":
                    args.append(inline(1, 1, *next(dom_iter)))
                else:  # free variable
                    args.append(f"V{i}_{j}_{fresh}")
                    fresh += 1
            out.append(literal(d.name, *args))
        return out

    def level(j: int) -> ChoiceSpec | None:
        if j > max_events:
            return None
        parts: list = [slot(j)]
        rels = [o for i in range(1, j) for o in rel_options(i, j)]
        if rels:
            parts.append(choice(0, "len", *rels))
        deeper = level(j + 1)
        if deeper is not None:
            parts.append(deeper)
        return choice(0, 1, choice("len", "len", *parts))

    parts: list = [slot(1)]
    deeper = level(2)
    if deeper is not None:
        parts.append(deeper)
    return compile_template(choice("len", "len", *parts))


# --------------------------------------------------------------------------
# the pipeline
# --------------------------------------------------------------------------

@dataclass
class MultisourceResult:
    theory: Theory
    mono: dict[str, Theory]
    aggregated: list[Interpretation]
    dropped: list[tuple[int, str]]
    bottoms: dict[str, tuple[BottomClause, ...]]
    class_biases: dict[str, DlabTemplate]
    warnings: list[str] = field(default_factory=list)


def biased_multisource_learn(dataset: Dataset,
                             biases: Mapping[str, DlabTemplate],
                             constraints: Iterable[InterleavingConstraint] = (),
                             params: LearnerParams = LearnerParams(),
                             suc_window: int = 8) -> MultisourceResult:
    """Learn per source, aggregate, interleave rule pairs into bottom
    clauses, build one bias per class, and learn again on aggregated data."""
    sources = dataset.sources()
    if len(sources) != 2:
        raise UsageError("the pipeline handles exactly two sources")
    for s in sources:
        if s not in biases:
            raise UsageError(f"no bias supplied for source {s}")
    constraints = list(constraints)
    warnings: list[str] = []

    mono: dict[str, Theory] = {}
    for s in sources:
        mono[s] = learn_theory(dataset.by_source(s), biases[s], params)

    agg = aggregate(dataset, suc_window=suc_window)

    classes = sorted({i.label for i in dataset.interpretations})
    bottoms: dict[str, tuple[BottomClause, ...]] = {}
    class_biases: dict[str, DlabTemplate] = {}
    s1, s2 = sources
    for label in classes:
        h1s = list(mono[s1].clauses_for(label))
        h2s = list(mono[s2].clauses_for(label))
        if not h1s and not h2s:
            warnings.append(f"class {label}: no monosource rules on either "
                            "source; skipped")
            continue
        if not h1s:
            warnings.append(f"class {label}: empty theory on {s1}; pairing "
                            "with the empty hypothesis")
            h1s = [Clause(Literal("class", (label,)), ())]
        if not h2s:
            warnings.append(f"class {label}: empty theory on {s2}; pairing "
                            "with the empty hypothesis")
            h2s = [Clause(Literal("class", (label,)), ())]

        found: dict[tuple[str, ...], BottomClause] = {}
        for h1 in h1s:
            for h2 in h2s:
                pair_bottoms = bottom_clauses_for_pair(
                    h1, h2, dataset.schema, (s1, s2), constraints)
                if not pair_bottoms:
                    warnings.append(
                        f"class {label}: every merge of a pair was filtered "
                        "out; that pair contributes no bottom clause")
                for bt in pair_bottoms:
                    found.setdefault(body_key(bt.clause), bt)
        if not found:
            warnings.append(f"class {label}: no bottom clauses; skipped")
            continue
        bottoms[label] = tuple(found.values())
        class_biases[label] = synthesize_bias(bottoms[label])

    final = Theory()
    for label in classes:
        bias = class_biases.get(label)
        if bias is None:
            continue
        final.per_class[label] = learn_class(label, agg.examples, bias, params)

    return MultisourceResult(theory=final, mono=mono, aggregated=agg.examples,
                             dropped=agg.dropped, bottoms=bottoms,
                             class_biases=class_biases, warnings=warnings)


def deepest_bottom_events(bottoms: Iterable[BottomClause]) -> int:
    """Event count of the deepest bottom clause (head segment + tail)."""
    best = 0
    for bt in bottoms:
        best = max(best, len(bt.merge.items))
    return best
