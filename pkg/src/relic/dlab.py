"""DLAB declarative bias: parsing, counting, enumeration, membership, refinement.

A grammar is a tree of choice nodes ``MIN-MAX:[...]`` over terminals whose
arguments may themselves contain inline choices over constants, e.g.::

    len-len:[ p(P1,1-1:[normal,abnormal]), suc(P1,R0) ]

``len`` in a bound position resolves to the number of immediate children.
An inline choice with MIN < MAX generates literals of varying arity: the
chosen elements are spliced into the argument list in order, so
``p(2-len:[e1,e2,e3])`` generates p(e1,e2), p(e1,e3), p(e2,e3), p(e1,e2,e3).

A Selection records, per choice node, which children were chosen; the
search operates on selections, not clauses, since distinct selections can
induce the same clause.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Mapping, Union

from .errors import BiasError, ParseError, UsageError
from .logic import Clause, Literal, Term

# --------------------------------------------------------------------------
# build specs (programmatic construction) and compiled node table
# --------------------------------------------------------------------------

Bound = Union[int, str]  # int or "len"


@dataclass(frozen=True)
class InlineSpec:
    low: Bound
    high: Bound
    elements: tuple[Term, ...]


@dataclass(frozen=True)
class LiteralSpec:
    pred: str
    args: tuple[Union[Term, InlineSpec], ...]


@dataclass(frozen=True)
class ChoiceSpec:
    low: Bound
    high: Bound
    children: tuple[Union["ChoiceSpec", LiteralSpec], ...]


def inline(low: Bound, high: Bound, *elements: Term) -> InlineSpec:
    return InlineSpec(low, high, tuple(elements))


def literal(pred: str, *args: Union[Term, InlineSpec]) -> LiteralSpec:
    return LiteralSpec(pred, tuple(args))


def choice(low: Bound, high: Bound,
           *children: Union[ChoiceSpec, LiteralSpec]) -> ChoiceSpec:
    return ChoiceSpec(low, high, tuple(children))


@dataclass(frozen=True)
class ChoiceNode:
    nid: int
    low: int
    high: int
    children: tuple[int, ...]


@dataclass(frozen=True)
class InlineNode:
    nid: int
    low: int
    high: int
    elements: tuple[Term, ...]


@dataclass(frozen=True)
class TerminalNode:
    nid: int
    pred: str
    # ("t", term) for a fixed term, ("c", nid) for an inline choice
    items: tuple[tuple[str, object], ...]

    @property
    def inline_ids(self) -> tuple[int, ...]:
        return tuple(v for k, v in self.items if k == "c")  # type: ignore


Node = Union[ChoiceNode, InlineNode, TerminalNode]


@dataclass(frozen=True, eq=False)
class DlabTemplate:
    root: int
    nodes: tuple[Node, ...]
    _completions: dict[int, tuple] = field(default_factory=dict, repr=False)
    _counts: dict[int, int] = field(default_factory=dict, repr=False)

    def node(self, nid: int) -> Node:
        return self.nodes[nid]


def _resolve_bound(b: Bound, n_children: int, what: str) -> int:
    if b == "len":
        return n_children
    if not isinstance(b, int) or b < 0:
        raise BiasError(f"bad bound {b!r} in {what}")
    return b


def compile_template(spec: Union[ChoiceSpec, LiteralSpec]) -> DlabTemplate:
    """Assign node ids in preorder and validate all bounds."""
    nodes: list[Node] = []

    def build(s) -> int:
        nid = len(nodes)
        nodes.append(None)  # type: ignore  # reserve preorder slot
        if isinstance(s, LiteralSpec):
            items: list[tuple[str, object]] = []
            for a in s.args:
                if isinstance(a, InlineSpec):
                    cid = len(nodes)
                    n = len(a.elements)
                    low = _resolve_bound(a.low, n, f"{s.pred} inline choice")
                    high = min(_resolve_bound(a.high, n, f"{s.pred} inline choice"), n)
                    if low > high:
                        raise BiasError(
                            f"inline choice {a.low}-{a.high} in {s.pred} has min > max")
                    nodes.append(InlineNode(cid, low, high, a.elements))
                    items.append(("c", cid))
                else:
                    items.append(("t", a))
            nodes[nid] = TerminalNode(nid, s.pred, tuple(items))
        else:
            n = len(s.children)
            low = _resolve_bound(s.low, n, "choice")
            high = min(_resolve_bound(s.high, n, "choice"), n)
            if low > high:
                raise BiasError(f"choice {s.low}-{s.high} has min > max")
            if low > n:
                raise BiasError(f"choice requires {low} of {n} children")
            child_ids = tuple(build(c) for c in s.children)
            nodes[nid] = ChoiceNode(nid, low, high, child_ids)
        return nid

    root = build(spec)
    return DlabTemplate(root=root, nodes=tuple(nodes))


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------

_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|\d+")


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks: list[tuple[str, int]] = []
    pos = 0
    line = 1
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        if ch == "%":
            while pos < n and text[pos] != "\n":
                pos += 1
            continue
        m = _WORD_RE.match(text, pos)
        if m:
            toks.append((m.group(0), line))
            pos = m.end()
        else:
            toks.append((ch, line))
            pos += 1
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> str | None:
        j = self.i + ahead
        return self.toks[j][0] if j < len(self.toks) else None

    def line(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else \
            (self.toks[-1][1] if self.toks else 1)

    def take(self, expected: str | None = None) -> str:
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of grammar", line=self.line())
        tok, line = self.toks[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", line=line)
        self.i += 1
        return tok

    def bound(self) -> Bound:
        tok = self.take()
        if tok == "len":
            return "len"
        if tok.isdigit():
            return int(tok)
        raise ParseError(f"expected bound, found {tok!r}", line=self.line())

    def at_choice(self) -> bool:
        t = self.peek()
        return (t is not None and (t.isdigit() or t == "len")
                and self.peek(1) == "-")

    def node(self) -> Union[ChoiceSpec, LiteralSpec]:
        if self.at_choice():
            low = self.bound()
            self.take("-")
            high = self.bound()
            self.take(":")
            self.take("[")
            children = [self.node()]
            while self.peek() == ",":
                self.take(",")
                children.append(self.node())
            self.take("]")
            return ChoiceSpec(low, high, tuple(children))
        name = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError(f"expected literal, found {name!r}", line=self.line())
        if self.peek() != "(":
            return LiteralSpec(name, ())
        self.take("(")
        args: list[Union[Term, InlineSpec]] = [self.argitem()]
        while self.peek() == ",":
            self.take(",")
            args.append(self.argitem())
        self.take(")")
        return LiteralSpec(name, tuple(args))

    def argitem(self) -> Union[Term, InlineSpec]:
        if self.at_choice():
            low = self.bound()
            self.take("-")
            high = self.bound()
            self.take(":")
            self.take("[")
            elems = [self.take()]
            while self.peek() == ",":
                self.take(",")
                elems.append(self.take())
            self.take("]")
            return InlineSpec(low, high, tuple(elems))
        tok = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*|\d+", tok):
            raise ParseError(f"expected term, found {tok!r}", line=self.line())
        return tok


def parse_dlab(text: str) -> DlabTemplate:
    """Parse grammar text into a compiled template."""
    p = _Parser(text)
    spec = p.node()
    if p.i != len(p.toks):
        raise ParseError(f"trailing tokens after grammar: {p.peek()!r}",
                         line=p.line())
    return compile_template(spec)


def template_text(t: DlabTemplate) -> str:
    """Render a template back to parseable grammar text."""

    def render(nid: int) -> str:
        node = t.node(nid)
        if isinstance(node, TerminalNode):
            if not node.items:
                return node.pred
            parts = []
            for kind, v in node.items:
                if kind == "t":
                    parts.append(str(v))
                else:
                    ic = t.node(v)
                    parts.append(f"{ic.low}-{ic.high}:[{','.join(ic.elements)}]")
            return f"{node.pred}({','.join(parts)})"
        inner = ", ".join(render(c) for c in node.children)
        return f"{node.low}-{node.high}:[{inner}]"

    return render(t.root)


# --------------------------------------------------------------------------
# selections
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Selection:
    """Chosen child indices per choice/inline node (empty entries omitted)."""

    picks: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def get(self, nid: int) -> tuple[int, ...]:
        for k, v in self.picks:
            if k == nid:
                return v
        return ()

    def with_pick(self, nid: int, idx: int) -> "Selection":
        d = dict(self.picks)
        d[nid] = tuple(sorted((*d.get(nid, ()), idx)))
        return Selection(tuple(sorted(d.items())))

    def merged(self, extra: Mapping[int, tuple[int, ...]]) -> "Selection":
        d = dict(self.picks)
        for k, v in extra.items():
            if v:
                d[k] = tuple(sorted((*d.get(k, ()), *v)))
        return Selection(tuple(sorted(d.items())))


def start_selection(t: DlabTemplate) -> Selection:
    return Selection(())


def induce_body(t: DlabTemplate, sel: Selection) -> tuple[Literal, ...]:
    """The clause body a selection stands for, in tree order."""
    picks = dict(sel.picks)
    out: list[Literal] = []

    def walk(nid: int):
        node = t.node(nid)
        if isinstance(node, TerminalNode):
            args: list[Term] = []
            for kind, v in node.items:
                if kind == "t":
                    args.append(v)  # type: ignore
                else:
                    ic = t.node(v)
                    for idx in picks.get(v, ()):
                        args.append(ic.elements[idx])
            out.append(Literal(node.pred, tuple(args)))
        else:
            for idx in picks.get(nid, ()):
                walk(node.children[idx])

    walk(t.root)
    return tuple(out)


def clause_of(t: DlabTemplate, sel: Selection, label: str) -> Clause:
    return Clause(Literal("class", (label,)), induce_body(t, sel))


def is_valid(t: DlabTemplate, sel: Selection) -> bool:
    """Every reached choice holds between min and max children; unreached
    choices (and inline choices of unreached terminals) hold none."""
    picks = dict(sel.picks)
    reached: set[int] = set()

    def walk(nid: int) -> bool:
        node = t.node(nid)
        if isinstance(node, TerminalNode):
            for cid in node.inline_ids:
                reached.add(cid)
                ic = t.node(cid)
                chosen = picks.get(cid, ())
                if not ic.low <= len(chosen) <= ic.high:
                    return False
                if any(i >= len(ic.elements) for i in chosen):
                    return False
            return True
        reached.add(nid)
        chosen = picks.get(nid, ())
        if not node.low <= len(chosen) <= node.high:
            return False
        if any(i >= len(node.children) for i in chosen):
            return False
        return all(walk(node.children[i]) for i in chosen)

    if not walk(t.root):
        return False
    return all(k in reached for k, v in picks.items() if v)


# --------------------------------------------------------------------------
# counting and enumeration
# --------------------------------------------------------------------------

def count_space(t: DlabTemplate) -> int:
    """Exact number of distinct valid selections.

    count(terminal) is the product of its inline-choice counts; a choice
    contributes a sum over subset sizes of products of child counts,
    computed through the generating polynomial of its children.
    """

    def count(nid: int) -> int:
        cached = t._counts.get(nid)
        if cached is not None:
            return cached
        node = t.node(nid)
        if isinstance(node, TerminalNode):
            total = 1
            for cid in node.inline_ids:
                ic = t.node(cid)
                n = len(ic.elements)
                total *= sum(comb(n, k) for k in range(ic.low, ic.high + 1))
        elif isinstance(node, InlineNode):
            n = len(node.elements)
            total = sum(comb(n, k) for k in range(node.low, node.high + 1))
        else:
            poly = [1]
            for c in node.children:
                cc = count(c)
                nxt = [0] * (len(poly) + 1)
                for i, coeff in enumerate(poly):
                    nxt[i] += coeff
                    nxt[i + 1] += coeff * cc
                poly = nxt
            total = sum(poly[k] for k in range(node.low,
                                               min(node.high, len(poly) - 1) + 1))
        t._counts[nid] = total
        return total

    return count(t.root)


def _subsets(n: int, low: int, high: int) -> Iterator[tuple[int, ...]]:
    for k in range(low, high + 1):
        yield from itertools.combinations(range(n), k)


def _enum_picks(t: DlabTemplate, nid: int) -> Iterator[dict[int, tuple[int, ...]]]:
    node = t.node(nid)
    if isinstance(node, TerminalNode):
        inline_ids = node.inline_ids
        options = []
        for cid in inline_ids:
            ic = t.node(cid)
            options.append(list(_subsets(len(ic.elements), ic.low, ic.high)))
        for combo in itertools.product(*options):
            yield {cid: sub for cid, sub in zip(inline_ids, combo) if sub}
        return
    for subset in _subsets(len(node.children), node.low, node.high):
        child_iters = [list(_enum_picks(t, node.children[i])) for i in subset]
        for combo in itertools.product(*child_iters):
            merged: dict[int, tuple[int, ...]] = {nid: subset} if subset else {}
            for d in combo:
                merged.update(d)
            yield merged


def enumerate_selections(t: DlabTemplate, limit: int = 100_000) -> list[Selection]:
    """Every valid selection exactly once, in deterministic order."""
    total = count_space(t)
    if total > limit:
        raise UsageError(f"search space holds {total} clauses, over limit {limit}")
    return [Selection(tuple(sorted(p.items()))) for p in _enum_picks(t, t.root)]


def enumerate_bodies(t: DlabTemplate, limit: int = 100_000) -> list[tuple[Literal, ...]]:
    return [induce_body(t, s) for s in enumerate_selections(t, limit)]


def member(c: Clause, t: DlabTemplate) -> bool:
    """True iff some valid selection induces exactly c's body (as a multiset)."""
    target = Counter(c.body)

    def terminal_instances(node: TerminalNode) -> Iterator[Literal]:
        options = []
        for kind, v in node.items:
            if kind == "t":
                options.append([(v,)])
            else:
                ic = t.node(v)
                options.append([tuple(ic.elements[i] for i in sub)
                                for sub in _subsets(len(ic.elements), ic.low, ic.high)])
        for combo in itertools.product(*options):
            yield Literal(node.pred, tuple(a for part in combo for a in part))

    def match(nid: int, avail: Counter) -> Iterator[Counter]:
        node = t.node(nid)
        if isinstance(node, TerminalNode):
            seen: set[Literal] = set()
            for inst in terminal_instances(node):
                if inst in seen:
                    continue
                seen.add(inst)
                if avail[inst] > 0:
                    nxt = avail.copy()
                    nxt[inst] -= 1
                    yield nxt
            return
        for subset in _subsets(len(node.children), node.low, node.high):

            def seq(idx: int, av: Counter) -> Iterator[Counter]:
                if idx == len(subset):
                    yield av
                    return
                for nxt in match(node.children[subset[idx]], av):
                    yield from seq(idx + 1, nxt)

            yield from seq(0, avail)

    return any(not +rem for rem in match(t.root, target))


# --------------------------------------------------------------------------
# refinement
# --------------------------------------------------------------------------

def _min_completions(t: DlabTemplate, nid: int) -> tuple[dict[int, tuple[int, ...]], ...]:
    """All ways to satisfy the subtree at nid with the fewest chosen children."""
    cached = t._completions.get(nid)
    if cached is not None:
        return cached
    node = t.node(nid)
    out: list[dict[int, tuple[int, ...]]] = []
    if isinstance(node, TerminalNode):
        inline_ids = node.inline_ids
        options = []
        for cid in inline_ids:
            ic = t.node(cid)
            options.append(list(itertools.combinations(range(len(ic.elements)),
                                                       ic.low)))
        for combo in itertools.product(*options):
            out.append({cid: sub for cid, sub in zip(inline_ids, combo) if sub})
    else:
        for subset in itertools.combinations(range(len(node.children)), node.low):
            child_opts = [_min_completions(t, node.children[i]) for i in subset]
            for combo in itertools.product(*child_opts):
                merged: dict[int, tuple[int, ...]] = {nid: subset} if subset else {}
                for d in combo:
                    for k, v in d.items():
                        merged[k] = tuple(sorted((*merged.get(k, ()), *v)))
                out.append(merged)
    result = tuple(out)
    t._completions[nid] = result
    return result


def _reached_nodes(t: DlabTemplate, sel: Selection) -> list[int]:
    """Choice and inline nodes reachable under the current picks, in tree order."""
    picks = dict(sel.picks)
    out: list[int] = []

    def walk(nid: int):
        node = t.node(nid)
        if isinstance(node, TerminalNode):
            out.extend(node.inline_ids)
            return
        out.append(nid)
        for idx in picks.get(nid, ()):
            walk(node.children[idx])

    walk(t.root)
    return out


def refine(t: DlabTemplate, sel: Selection) -> list[Selection]:
    """All minimal valid selections strictly extending sel whose induced
    clause strictly grows.

    From the empty start selection this yields the min-completions of the
    root (the most general clauses of the space).  Extensions that leave
    the clause unchanged (a newly chosen subtree contributing no literal)
    are transparently refined further.  Output is sorted by induced body
    text so results are deterministic regardless of evaluation order.
    """
    base_key = tuple(sorted(str(b) for b in induce_body(t, sel)))
    results: dict[tuple, Selection] = {}

    def consider(candidate: Selection):
        key = tuple(sorted(str(b) for b in induce_body(t, candidate)))
        if key == base_key:
            for deeper in refine(t, candidate):
                dkey = tuple(sorted(str(b) for b in induce_body(t, deeper)))
                results.setdefault((dkey, deeper.picks), deeper)
        else:
            results.setdefault((key, candidate.picks), candidate)

    if not is_valid(t, sel):
        if sel.picks:
            raise UsageError("refine requires a valid or empty start selection")
        for completion in _min_completions(t, t.root):
            consider(Selection(()).merged(completion))
    else:
        for nid in _reached_nodes(t, sel):
            node = t.node(nid)
            chosen = set(sel.get(nid))
            high = node.high
            if len(chosen) >= high:
                continue
            if isinstance(node, InlineNode):
                for idx in range(len(node.elements)):
                    if idx not in chosen:
                        consider(sel.with_pick(nid, idx))
            else:
                for idx in range(len(node.children)):
                    if idx in chosen:
                        continue
                    for completion in _min_completions(t, node.children[idx]):
                        consider(sel.with_pick(nid, idx).merged(completion))

    return [results[k] for k in sorted(results, key=lambda kk: (kk[0], kk[1]))]
