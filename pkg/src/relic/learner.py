"""Top-down rule induction per class: beam search under a DLAB bias with the
accuracy heuristic, a zero-false-positive stop rule, and a covering loop."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .data import Interpretation
from .dlab import DlabTemplate, Selection, clause_of, refine, start_selection
from .errors import UsageError
from .logic import Clause, canonical_text, covers, theory_covers


def accuracy(tp: int, tn: int, fp: int, fn: int) -> float:
    """(TP + TN) / (TP + TN + FN + FP)."""
    total = tp + tn + fp + fn
    if total <= 0:
        raise UsageError("accuracy undefined on an empty example set")
    return (tp + tn) / total


@dataclass(frozen=True)
class ClauseScore:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float


def score_clause(c: Clause, pos: Sequence[Interpretation],
                 neg: Sequence[Interpretation]) -> ClauseScore:
    tp = sum(1 for e in pos if covers(c, e.index))
    fp = sum(1 for e in neg if covers(c, e.index))
    tn = len(neg) - fp
    fn = len(pos) - tp
    return ClauseScore(tp, tn, fp, fn, accuracy(tp, tn, fp, fn))


@dataclass(frozen=True)
class LearnerParams:
    beam_width: int = 10
    max_clauses_per_class: int = 8
    min_positive_coverage: int = 1
    max_false_positives: int = 0  # stop rule is exact by default

    def __post_init__(self):
        if self.beam_width < 1:
            raise UsageError("beam_width must be >= 1")
        if self.max_clauses_per_class < 1:
            raise UsageError("max_clauses_per_class must be >= 1")


@dataclass
class SearchStats:
    """nodes counts every selection produced by refine, kept or pruned."""

    nodes: int = 0
    time_ms: float = 0.0


@dataclass
class ClassResult:
    label: str
    clauses: tuple[Clause, ...]
    stats: SearchStats
    complete: bool


@dataclass
class Theory:
    """Learned clause set per class, plus per-class search statistics."""

    per_class: dict[str, ClassResult] = field(default_factory=dict)

    def clauses_for(self, label: str) -> tuple[Clause, ...]:
        result = self.per_class.get(label)
        return result.clauses if result else ()

    def labels(self) -> list[str]:
        return list(self.per_class)

    def total_nodes(self) -> int:
        return sum(r.stats.nodes for r in self.per_class.values())


@dataclass
class _Candidate:
    """One clause under consideration; equal clauses reached through
    different selections are pooled so every continuation stays reachable."""

    sels: tuple[Selection, ...]
    clause: Clause
    canon: str
    pos_cover: tuple[int, ...]
    neg_cover: tuple[int, ...]
    acc: float


def _coverage(c: Clause, pool: Sequence[Interpretation],
              among: Iterable[int]) -> tuple[int, ...]:
    return tuple(i for i in among if covers(c, pool[i].index))


def _is_additive(parent: Clause, child: Clause) -> bool:
    """True when the child body only adds literals; then its coverage is a
    subset of the parent's and only the parent's covered examples need a
    covering test."""
    return not (Counter(parent.body) - Counter(child.body))


def _beam_search(label: str, bias: DlabTemplate,
                 pos: Sequence[Interpretation],
                 remaining: list[int],
                 neg: Sequence[Interpretation],
                 params: LearnerParams,
                 stats: SearchStats,
                 node_hook: Callable[[int], None] | None) -> _Candidate | None:
    """One covering round: search for a clause with fp <= max_false_positives
    and tp >= min_positive_coverage among the remaining positives."""
    n_pos, n_neg = len(remaining), len(neg)
    all_neg = tuple(range(n_neg))
    start = start_selection(bias)
    root = _Candidate(sels=(start,), clause=clause_of(bias, start, label),
                      canon="", pos_cover=tuple(remaining), neg_cover=all_neg,
                      acc=0.0)
    beam = [root]
    score_cache: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {}
    expanded: set[Selection] = set()

    while beam:
        grouped: dict[str, _Candidate] = {}
        for parent in beam:
            for sel in parent.sels:
                if sel in expanded:
                    continue
                expanded.add(sel)
                children = refine(bias, sel)
                stats.nodes += len(children)
                if node_hook is not None:
                    node_hook(len(children))
                for child in children:
                    c = clause_of(bias, child, label)
                    canon = canonical_text(c)
                    known = grouped.get(canon)
                    if known is not None:
                        if child not in known.sels:
                            known.sels = (*known.sels, child)
                        continue
                    cached = score_cache.get(canon)
                    if cached is not None:
                        pos_cover, neg_cover = cached
                    elif _is_additive(parent.clause, c):
                        pos_cover = _coverage(c, pos, parent.pos_cover)
                        neg_cover = _coverage(c, neg, parent.neg_cover)
                    else:
                        pos_cover = _coverage(c, pos, remaining)
                        neg_cover = _coverage(c, neg, all_neg)
                    score_cache[canon] = (pos_cover, neg_cover)
                    tp, fp = len(pos_cover), len(neg_cover)
                    acc = accuracy(tp, n_neg - fp, fp, n_pos - tp)
                    grouped[canon] = _Candidate((child,), c, canon,
                                                pos_cover, neg_cover, acc)

        if not grouped:
            return None
        ordered = list(grouped.values())
        acceptable = [c for c in ordered
                      if len(c.neg_cover) <= params.max_false_positives
                      and len(c.pos_cover) >= params.min_positive_coverage]
        if acceptable:
            # the stop rule fires on the earliest round reaching fp = 0;
            # among that round's candidates prefer coverage, then brevity
            acceptable.sort(key=lambda c: (-c.acc, len(c.clause.body), c.canon))
            return acceptable[0]
        # a candidate below the coverage floor can never become acceptable:
        # refinement specializes, so tp only shrinks (its nodes still count)
        ordered = [c for c in ordered
                   if len(c.pos_cover) >= params.min_positive_coverage]
        ordered.sort(key=lambda c: (-c.acc, c.canon))
        beam = ordered[:params.beam_width]
    return None


def learn_class(label: str, examples: Sequence[Interpretation],
                bias: DlabTemplate, params: LearnerParams = LearnerParams(),
                node_hook: Callable[[int], None] | None = None) -> ClassResult:
    """Covering loop: accept zero-false-positive clauses until every positive
    is covered, the clause budget is spent, or the space is exhausted."""
    t0 = time.perf_counter()
    pos = [e for e in examples if e.label == label]
    neg = [e for e in examples if e.label != label]
    if not pos:
        raise UsageError(f"no positive examples for class {label}")

    stats = SearchStats()
    accepted: list[Clause] = []
    remaining = list(range(len(pos)))
    complete = False

    while remaining and len(accepted) < params.max_clauses_per_class:
        best = _beam_search(label, bias, pos, remaining, neg, params, stats,
                            node_hook)
        if best is None:
            break
        accepted.append(best.clause)
        covered = set(best.pos_cover)
        remaining = [i for i in remaining if i not in covered]
    complete = not remaining

    stats.time_ms = (time.perf_counter() - t0) * 1000.0
    return ClassResult(label=label, clauses=tuple(accepted), stats=stats,
                       complete=complete)


def learn_theory(examples: Sequence[Interpretation],
                 bias: DlabTemplate | Mapping[str, DlabTemplate],
                 params: LearnerParams = LearnerParams(),
                 classes: Sequence[str] | None = None) -> Theory:
    """learn_class per class label; bias may be shared or per class."""
    if classes is None:
        classes = sorted({e.label for e in examples})
    if len(classes) < 2:
        raise UsageError("need at least two classes (no negatives otherwise)")
    theory = Theory()
    for label in classes:
        class_bias = bias[label] if isinstance(bias, Mapping) else bias
        theory.per_class[label] = learn_class(label, examples, class_bias,
                                              params)
    return theory


def train_accuracy(clauses: Iterable[Clause], label: str,
                   examples: Sequence[Interpretation]) -> float:
    """Accuracy of one class theory over labelled examples (a covered
    example counts as a positive prediction)."""
    clauses = tuple(clauses)
    tp = tn = fp = fn = 0
    for e in examples:
        covered = theory_covers(clauses, e.index)
        if e.label == label:
            tp += covered
            fn += not covered
        else:
            fp += covered
            tn += not covered
    return accuracy(tp, tn, fp, fn)
