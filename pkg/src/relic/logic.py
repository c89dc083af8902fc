"""First-order kernel: terms, literals, clauses, theta-subsumption, coverage.

Terms are plain strings under the case convention used throughout the fact
files and rule examples: a name starting with an uppercase character is a
variable, anything else (lowercase identifier or integer text) is a constant.
All values here are immutable; the matching procedures are pure functions and
safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import UsageError

Term = str
Substitution = dict[str, Term]


def is_variable(term: Term) -> bool:
    return term[:1].isupper()


def is_constant(term: Term) -> bool:
    return bool(term) and not term[:1].isupper()


@dataclass(frozen=True, slots=True)
class Literal:
    """A predicate applied to an ordered tuple of terms."""

    pred: str
    args: tuple[Term, ...] = ()

    @property
    def key(self) -> tuple[str, int]:
        """Predicate identity: name and arity together."""
        return (self.pred, len(self.args))

    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def variables(self) -> list[Term]:
        return [a for a in self.args if is_variable(a)]

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(self.args)})"


def lit(pred: str, *args: Term) -> Literal:
    """Shorthand constructor used heavily in tests and generators."""
    return Literal(pred, tuple(args))


@dataclass(frozen=True, slots=True)
class Clause:
    """head :- body, with the head of the form class(label)."""

    head: Literal
    body: tuple[Literal, ...] = ()

    @property
    def label(self) -> str:
        if len(self.head.args) != 1:
            raise UsageError(f"clause head {self.head} is not class(label)")
        return self.head.args[0]

    def variables(self) -> list[Term]:
        seen: dict[Term, None] = {}
        for literal in (self.head, *self.body):
            for v in literal.variables():
                seen.setdefault(v)
        return list(seen)

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- " + ", ".join(str(b) for b in self.body) + "."


def clause(label: str, body: Iterable[Literal] = ()) -> Clause:
    return Clause(Literal("class", (label,)), tuple(body))


def body_key(c: Clause) -> tuple[str, ...]:
    """Order-insensitive body fingerprint (multiset of literal texts)."""
    return tuple(sorted(str(b) for b in c.body))


def canonical_text(c: Clause) -> str:
    """Deterministic text used for dedup and tie-breaking."""
    return f"{c.head} :- " + ", ".join(body_key(c))


def apply_substitution(literal: Literal, subst: Mapping[str, Term]) -> Literal:
    """Replace every bound variable argument; constants pass through."""
    if not literal.args:
        return literal
    return Literal(literal.pred, tuple(subst.get(a, a) if is_variable(a) else a
                                       for a in literal.args))


def normalize(subst: Substitution) -> Substitution:
    """Resolve variable-to-variable chains so application is idempotent."""
    out: Substitution = {}
    for var, term in subst.items():
        seen = {var}
        while is_variable(term) and term in subst and term not in seen:
            seen.add(term)
            term = subst[term]
        out[var] = term
    return out


class FactIndex:
    """Ground facts indexed by (predicate, arity) for fast matching."""

    __slots__ = ("facts", "_by_key", "_pos_maps")

    def __init__(self, facts: Iterable[Literal]):
        self.facts = frozenset(facts)
        by_key: dict[tuple[str, int], list[tuple[Term, ...]]] = {}
        for f in self.facts:
            by_key.setdefault(f.key, []).append(f.args)
        # sorted so matching order (and thus found substitutions) is stable
        self._by_key = {k: tuple(sorted(v)) for k, v in by_key.items()}
        self._pos_maps: dict = {}

    def candidates(self, key: tuple[str, int]) -> tuple[tuple[Term, ...], ...]:
        return self._by_key.get(key, ())

    def candidates_at(self, key: tuple[str, int], pos: int,
                      value: Term) -> tuple[tuple[Term, ...], ...]:
        """Rows whose argument at pos equals value (built lazily per pos)."""
        mkey = (key, pos)
        table = self._pos_maps.get(mkey)
        if table is None:
            table = {}
            for args in self._by_key.get(key, ()):
                table.setdefault(args[pos], []).append(args)
            table = {v: tuple(rows) for v, rows in table.items()}
            self._pos_maps[mkey] = table
        return table.get(value, ())

    def __contains__(self, f: Literal) -> bool:
        return f in self.facts

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.facts)


def _as_index(facts: Iterable[Literal] | FactIndex) -> FactIndex:
    return facts if isinstance(facts, FactIndex) else FactIndex(facts)


def _match_args(pattern: Sequence[Term], ground: Sequence[Term],
                binding: Substitution, trail: list[str]) -> bool:
    """Extend binding so pattern == ground; record new entries on trail."""
    for p, g in zip(pattern, ground):
        if is_variable(p):
            bound = binding.get(p)
            if bound is None:
                binding[p] = g
                trail.append(p)
            elif bound != g:
                return False
        elif p != g:
            return False
    return True


@lru_cache(maxsize=16384)
def _match_order(body: tuple[Literal, ...]) -> tuple[int, ...]:
    """Connectivity-first literal order: fully bound literals become pure
    membership checks, otherwise prefer literals sharing already-bound
    variables; ties fall back to body position.  Purely an evaluation
    order; the covering result is order independent."""
    remaining = set(range(len(body)))
    bound: set[Term] = set()
    order: list[int] = []
    while remaining:
        def rank(i: int):
            vs = set(body[i].variables())
            unbound = vs - bound
            if not unbound:
                group = 0
            elif vs & bound:
                group = 1
            else:
                group = 2
            return (group, len(unbound), i)

        nxt = min(remaining, key=rank)
        remaining.remove(nxt)
        bound |= set(body[nxt].variables())
        order.append(nxt)
    return tuple(order)


def covers(c: Clause, facts: Iterable[Literal] | FactIndex) -> bool:
    """True iff some grounding of the body lies entirely inside facts.

    An empty body is vacuously covered.  Literals are matched with
    backtracking in a connectivity-first order (the result equals the
    documented left-to-right matching; see find_covering_substitution for
    the order-faithful variant).
    """
    index = _as_index(facts)
    body = c.body
    order = _match_order(body)
    binding: Substitution = {}

    def candidates(literal: Literal):
        for pos, a in enumerate(literal.args):
            if is_variable(a):
                v = binding.get(a)
                if v is not None:
                    return index.candidates_at(literal.key, pos, v)
            else:
                return index.candidates_at(literal.key, pos, a)
        return index.candidates(literal.key)

    def solve(i: int) -> bool:
        if i == len(order):
            return True
        literal = body[order[i]]
        for args in candidates(literal):
            trail: list[str] = []
            if _match_args(literal.args, args, binding, trail):
                if solve(i + 1):
                    return True
            for v in trail:
                del binding[v]
        return False

    return solve(0)


def find_covering_substitution(
        c: Clause, facts: Iterable[Literal] | FactIndex) -> Substitution | None:
    """First grounding found matching strictly left to right through the
    body (candidate facts in sorted order), or None."""
    index = _as_index(facts)
    body = c.body
    binding: Substitution = {}

    def solve(i: int) -> bool:
        if i == len(body):
            return True
        literal = body[i]
        for args in index.candidates(literal.key):
            trail: list[str] = []
            if _match_args(literal.args, args, binding, trail):
                if solve(i + 1):
                    return True
            for v in trail:
                del binding[v]
        return False

    return dict(binding) if solve(0) else None


def theory_covers(clauses: Iterable[Clause],
                  facts: Iterable[Literal] | FactIndex) -> bool:
    """Disjunctive reading of a class theory: any clause covering suffices."""
    index = _as_index(facts)
    return any(covers(c, index) for c in clauses)


def theta_subsumes(c: Clause, d: Clause) -> bool:
    """True iff some substitution maps every literal of c into d.

    Both heads and bodies participate: each literal of c, after the
    substitution, must occur among d's head and body literals.
    """
    targets = (d.head, *d.body)
    by_key: dict[tuple[str, int], list[tuple[Term, ...]]] = {}
    for t in targets:
        by_key.setdefault(t.key, []).append(t.args)

    literals = (c.head, *c.body)
    binding: Substitution = {}

    def solve(i: int) -> bool:
        if i == len(literals):
            return True
        literal = literals[i]
        for args in by_key.get(literal.key, ()):
            trail: list[str] = []
            if _match_args(literal.args, args, binding, trail):
                if solve(i + 1):
                    return True
            for v in trail:
                del binding[v]
        return False

    return solve(0)


def standardize_apart(c1: Clause, c2: Clause) -> tuple[Clause, Clause]:
    """Rename c2's variables away from c1's; c1 is returned unchanged.

    Renaming is deterministic: a colliding variable V becomes V_2, with an
    ordinal appended (V_2_3, ...) until the name is fresh in both clauses.
    """
    used = set(c1.variables()) | set(c2.variables())
    collisions = [v for v in c2.variables() if v in set(c1.variables())]
    mapping: Substitution = {}
    for v in collisions:
        candidate = f"{v}_2"
        ordinal = 2
        while candidate in used:
            ordinal += 1
            candidate = f"{v}_2_{ordinal}"
        mapping[v] = candidate
        used.add(candidate)
    if not mapping:
        return c1, c2
    renamed = Clause(apply_substitution(c2.head, mapping),
                     tuple(apply_substitution(b, mapping) for b in c2.body))
    return c1, renamed


ROLES = ("event", "relational", "global", "attribute")


@dataclass(frozen=True, slots=True)
class PredicateDecl:
    """Declared shape of one predicate within a problem."""

    name: str
    arity: int
    role: str
    source: str = "shared"
    # value domains for enumerated argument positions (attribute/category args)
    domains: tuple[tuple[str, ...], ...] = ()
    # for relational predicates: what each argument position holds
    # ("a"/"b" = earlier/later event id, "cat" = enumerated category,
    # "var" = free variable)
    argspec: tuple[str, ...] = ()
    # how saturation derives this predicate's facts, e.g.
    # ("consecutive", "qrs") or ("next", "p", "qrs") or ("cycle", "dias", "sys")
    derive: tuple[str, ...] = ()
    # threshold family for the derived category ("beat" or "wave")
    scale: str = "beat"

    def __post_init__(self):
        if self.role not in ROLES:
            raise UsageError(f"unknown predicate role {self.role!r}")


@dataclass(frozen=True)
class PredicateSchema:
    """All predicates of one problem, each declared exactly once."""

    decls: tuple[PredicateDecl, ...]
    _by_name: dict[str, PredicateDecl] = field(init=False, repr=False,
                                               compare=False)

    def __post_init__(self):
        by_name: dict[str, PredicateDecl] = {}
        for d in self.decls:
            if d.name in by_name:
                raise UsageError(f"predicate {d.name} declared twice")
            by_name[d.name] = d
        object.__setattr__(self, "_by_name", by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __getitem__(self, name: str) -> PredicateDecl:
        return self._by_name[name]

    def get(self, name: str) -> PredicateDecl | None:
        return self._by_name.get(name)

    def is_event(self, name: str) -> bool:
        d = self._by_name.get(name)
        return d is not None and d.role == "event"

    def event_preds(self, source: str | None = None) -> list[PredicateDecl]:
        return [d for d in self.decls if d.role == "event"
                and (source is None or d.source == source)]

    def relational_preds(self, source: str | None = None) -> list[PredicateDecl]:
        return [d for d in self.decls if d.role in ("relational", "global")
                and (source is None or d.source in (source, "shared"))]

    def sources(self) -> list[str]:
        out: dict[str, None] = {}
        for d in self.decls:
            if d.source != "shared":
                out.setdefault(d.source)
        return list(out)


def event_variables(c: Clause, schema: PredicateSchema) -> list[Term]:
    """Variables naming events in c, in first-occurrence order.

    An event variable is the first argument of an event-predicate literal.
    """
    out: dict[Term, None] = {}
    for b in c.body:
        if schema.is_event(b.pred) and b.args and is_variable(b.args[0]):
            out.setdefault(b.args[0])
    return list(out)


def event_literals(c: Clause, schema: PredicateSchema) -> list[Literal]:
    return [b for b in c.body if schema.is_event(b.pred)]
