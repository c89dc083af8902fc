"""Seeded generator of aligned two-source rhythm examples.

Seven classes are produced over an ECG-like event stream (p/qrs with a
normal/abnormal shape) and a pressure-like stream (dias/sys with an mmHg
amplitude).  The beat patterns are design artifacts reverse-engineered so
that every class carries a separating rule in the published bias spaces:

  sr       regular conducted beats, rr/pp normal
  ves      isolated premature ventricular beat: short coupling, long pause
  bige     ventricular bigeminy: every other beat ectopic, no long pause
  doublet  a pair of adjacent ectopics closed by a long pause
  vt       a run of ectopics at short rr, no p waves
  svt      conducted tachycardia: short pp and rr (some examples end in a
           deterministic pause, which keeps single-source views partial)
  af       fibrillatory: abnormal rapid p-like waves, irregular rr,
           alternating high/normal pressure amplitude

Modes: "full" (ECG + ABP), "reduced" (qrs without shape + sys only),
"split" (P-wave-only vs QRS-only virtual sources, shapes stripped) and
"redundant" (the ECG duplicated under renamed predicates).  Output is fully
determined by the seed; timestamps use integer arithmetic only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable

from .data import Dataset, Event, Interpretation, SymbolizationConfig, saturate
from .dlab import DlabTemplate, choice, compile_template, inline, literal
from .errors import UsageError
from .logic import Clause, Literal, PredicateDecl, PredicateSchema, clause, lit

CLASSES = ("sr", "ves", "bige", "doublet", "vt", "svt", "af")
MODES = ("full", "reduced", "split", "redundant")

_SHAPES = ("normal", "abnormal")
_AMPS = ("low", "normal", "high")
_CATS = ("short", "normal", "long")


def cardiac_schema(mode: str = "full") -> PredicateSchema:
    """Predicate declarations (with derivation rules) for one dataset mode."""
    if mode not in MODES:
        raise UsageError(f"unknown mode {mode!r}")
    g = [PredicateDecl("suc", 2, "global", argspec=("b", "a")),
         PredicateDecl("suci", 2, "global", argspec=("b", "a"))]
    if mode == "full":
        return PredicateSchema((
            PredicateDecl("p", 2, "event", "ECG", ((_SHAPES),)),
            PredicateDecl("qrs", 2, "event", "ECG", ((_SHAPES),)),
            PredicateDecl("dias", 2, "event", "ABP", ((_AMPS),)),
            PredicateDecl("sys", 2, "event", "ABP", ((_AMPS),)),
            PredicateDecl("rr1", 3, "relational", "ECG", ((_CATS),),
                          ("a", "b", "cat"), derive=("consecutive", "qrs")),
            PredicateDecl("pr1", 3, "relational", "ECG", ((_CATS),),
                          ("a", "b", "cat"), derive=("next", "p", "qrs"),
                          scale="wave"),
            PredicateDecl("pp1", 3, "relational", "ECG", ((_CATS),),
                          ("a", "b", "cat"), derive=("consecutive", "p")),
            PredicateDecl("ss1", 3, "relational", "ABP", ((_CATS),),
                          ("a", "b", "cat"), derive=("consecutive", "sys")),
            PredicateDecl("ds1", 3, "relational", "ABP", ((_CATS),),
                          ("a", "b", "cat"), derive=("next", "dias", "sys"),
                          scale="wave"),
            PredicateDecl("cycle_abp", 4, "relational", "ABP", (),
                          ("a", "var", "b", "var"),
                          derive=("cycle", "dias", "sys")),
            *g))
    if mode == "reduced":
        return PredicateSchema((
            PredicateDecl("qrs", 1, "event", "ECG"),
            PredicateDecl("sys", 2, "event", "ABP", ((_AMPS),)),
            PredicateDecl("rr1", 3, "relational", "ECG", ((_CATS),),
                          ("a", "b", "cat"), derive=("consecutive", "qrs")),
            PredicateDecl("ss1", 3, "relational", "ABP", ((_CATS),),
                          ("a", "b", "cat"), derive=("consecutive", "sys")),
            *g))
    if mode == "split":
        return PredicateSchema((
            PredicateDecl("p", 1, "event", "P"),
            PredicateDecl("qrs", 1, "event", "QRS"),
            PredicateDecl("pp1", 3, "relational", "P", ((_CATS),),
                          ("a", "b", "cat"), derive=("consecutive", "p")),
            PredicateDecl("rr1", 3, "relational", "QRS", ((_CATS),),
                          ("a", "b", "cat"), derive=("consecutive", "qrs")),
            *g))
    # redundant: the ECG plus a renamed copy of itself
    return PredicateSchema((
        PredicateDecl("p", 2, "event", "ECG", ((_SHAPES),)),
        PredicateDecl("qrs", 2, "event", "ECG", ((_SHAPES),)),
        PredicateDecl("p_b", 2, "event", "ECG2", ((_SHAPES),)),
        PredicateDecl("qrs_b", 2, "event", "ECG2", ((_SHAPES),)),
        PredicateDecl("rr1", 3, "relational", "ECG", ((_CATS),),
                      ("a", "b", "cat"), derive=("consecutive", "qrs")),
        PredicateDecl("pr1", 3, "relational", "ECG", ((_CATS),),
                      ("a", "b", "cat"), derive=("next", "p", "qrs"),
                      scale="wave"),
        PredicateDecl("pp1", 3, "relational", "ECG", ((_CATS),),
                      ("a", "b", "cat"), derive=("consecutive", "p")),
        PredicateDecl("rr1_b", 3, "relational", "ECG2", ((_CATS),),
                      ("a", "b", "cat"), derive=("consecutive", "qrs_b")),
        PredicateDecl("pr1_b", 3, "relational", "ECG2", ((_CATS),),
                      ("a", "b", "cat"), derive=("next", "p_b", "qrs_b"),
                      scale="wave"),
        PredicateDecl("pp1_b", 3, "relational", "ECG2", ((_CATS),),
                      ("a", "b", "cat"), derive=("consecutive", "p_b")),
        *g))


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 1
    per_class: int = 10
    cycles: int = 6                 # beat budget per example
    mode: str = "full"
    timing_jitter_ms: int = 10
    amp_jitter: int = 4
    symbolization: SymbolizationConfig = field(default_factory=SymbolizationConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.cycles < 4:
            raise UsageError("need a budget of at least 4 beats")


@dataclass(frozen=True)
class RhythmTemplate:
    """Beat kinds plus the base interval (ms) after each beat."""

    label: str
    beats: tuple[str, ...]               # "N" conducted, "V" ectopic
    intervals: tuple[int, ...]           # len == len(beats) - 1
    pr_ms: int = 160                     # p-to-qrs lead time for N beats
    conducted_p: bool = True             # emit a p before each N beat
    fibrillatory: bool = False           # dense abnormal p-like waves
    sys_amp: tuple[int, ...] = ()        # per-beat systolic base amplitude
    dias_amp: int = 80


def rhythm_template(label: str, cycles: int, pause: bool) -> RhythmTemplate:
    """The deterministic beat plan for one example of one class."""
    if label == "sr":
        beats = ("N",) * cycles
        return RhythmTemplate(label, beats, (800,) * (cycles - 1),
                              sys_amp=(100,) * cycles)
    if label == "svt":
        iv = [450] * (cycles - 1)
        if pause:
            iv[-1] = 800
        beats = ("N",) * cycles
        return RhythmTemplate(label, beats, tuple(iv), pr_ms=140,
                              sys_amp=(100,) * cycles)
    if label == "vt":
        beats = ("V",) * cycles
        return RhythmTemplate(label, beats, (400,) * (cycles - 1),
                              conducted_p=False, sys_amp=(60,) * cycles,
                              dias_amp=60)
    if label == "af":
        iv = tuple(460 if i % 2 == 0 else 1080 for i in range(cycles - 1))
        amps = tuple(118 if i % 2 == 0 else 100 for i in range(cycles))
        return RhythmTemplate(label, ("N",) * cycles, iv, conducted_p=False,
                              fibrillatory=True, sys_amp=amps)
    if label == "ves":
        reps = max(1, cycles // 3)
        beats: list[str] = []
        iv: list[int] = []
        for r in range(reps):
            if r:
                iv.append(800)
            beats += ["N", "V", "N"]
            iv += [350, 1050]
        return RhythmTemplate(label, tuple(beats), tuple(iv),
                              sys_amp=tuple(55 if b == "V" else 100
                                            for b in beats))
    if label == "bige":
        reps = max(2, cycles // 2)
        beats = ("N", "V") * reps
        iv = []
        for r in range(reps):
            iv.append(350)
            if r < reps - 1:
                iv.append(730)
        return RhythmTemplate(label, beats, tuple(iv),
                              sys_amp=tuple(55 if b == "V" else 100
                                            for b in beats))
    if label == "doublet":
        reps = max(1, cycles // 4)
        beats = ("N", "V", "V", "N") * reps
        iv = []
        for r in range(reps):
            if r:
                iv.append(1100)
            iv += [350, 380, 1100]
        return RhythmTemplate(label, beats, tuple(iv),
                              sys_amp=tuple(55 if b == "V" else 100
                                            for b in beats))
    raise UsageError(f"unknown class {label!r}")


def _master_events(label: str, situation: int, cfg: GeneratorConfig
                   ) -> tuple[list[Event], list[Event]]:
    """The underlying recording: (ecg_events, abp_events), unjittered order."""
    rng = random.Random(f"{cfg.seed}:{label}:{situation}")
    jit = cfg.timing_jitter_ms

    def j(base: int) -> int:
        return base + rng.randint(-jit, jit)

    pause = label == "svt" and situation % 3 == 0
    tpl = rhythm_template(label, cfg.cycles, pause)

    qrs_times: list[int] = [1000]
    for iv in tpl.intervals:
        qrs_times.append(qrs_times[-1] + j(iv))

    ecg: list[Event] = []
    for i, (kind, t) in enumerate(zip(tpl.beats, qrs_times)):
        shape = "abnormal" if kind == "V" else "normal"
        ecg.append(Event(f"r{i}", "qrs", t, (shape,)))
        if tpl.conducted_p and kind == "N":
            ecg.append(Event(f"p{i}", "p", t - j(tpl.pr_ms), ("normal",)))
    if tpl.fibrillatory:
        k = 0
        for a, b in zip(qrs_times, qrs_times[1:]):
            t = a + 150
            while t < b - 120:
                ecg.append(Event(f"f{k}", "p", t, ("abnormal",)))
                k += 1
                t += 280 + rng.randint(-jit, jit)

    abp: list[Event] = []
    for i, t in enumerate(qrs_times):
        d_t = t + 100 + rng.randint(-jit, jit)
        s_t = d_t + 150 + rng.randint(-jit, jit)
        d_amp = tpl.dias_amp + rng.randint(-cfg.amp_jitter, cfg.amp_jitter)
        s_amp = tpl.sys_amp[i] + rng.randint(-cfg.amp_jitter, cfg.amp_jitter)
        abp.append(Event(f"d{i}", "dias", d_t, (str(d_amp),)))
        abp.append(Event(f"s{i}", "sys", s_t, (str(s_amp),)))
    return ecg, abp


def _as_interpretation(label: str, situation: int, source: str,
                       events: Iterable[Event]) -> Interpretation:
    events = tuple(events)
    facts = frozenset(Literal(e.pred, (e.eid, str(e.time), *e.attrs))
                      for e in events)
    return Interpretation(situation=situation, source=source, label=label,
                          facts=facts, raw_events=events)


def generate_example(label: str, situation: int, cfg: GeneratorConfig
                     ) -> tuple[Interpretation, ...]:
    """Aligned unsaturated interpretations for one situation, one per source."""
    if label not in CLASSES:
        raise UsageError(f"unknown class {label!r}")
    ecg, abp = _master_events(label, situation, cfg)
    if cfg.mode == "full":
        return (_as_interpretation(label, situation, "ECG", ecg),
                _as_interpretation(label, situation, "ABP", abp))
    if cfg.mode == "reduced":
        slim_ecg = [Event(e.eid, "qrs", e.time) for e in ecg if e.pred == "qrs"]
        slim_abp = [e for e in abp if e.pred == "sys"]
        return (_as_interpretation(label, situation, "ECG", slim_ecg),
                _as_interpretation(label, situation, "ABP", slim_abp))
    if cfg.mode == "split":
        pwaves = [Event(e.eid, "p", e.time) for e in ecg if e.pred == "p"]
        qrs = [Event(e.eid, "qrs", e.time) for e in ecg if e.pred == "qrs"]
        return (_as_interpretation(label, situation, "P", pwaves),
                _as_interpretation(label, situation, "QRS", qrs))
    twin = [Event(f"{e.eid}b", f"{e.pred}_b", e.time, e.attrs) for e in ecg]
    return (_as_interpretation(label, situation, "ECG", ecg),
            _as_interpretation(label, situation, "ECG2", twin))


def generate_dataset(cfg: GeneratorConfig) -> Dataset:
    """per_class aligned examples for each of the seven classes, saturated."""
    schema = cardiac_schema(cfg.mode)
    interps: list[Interpretation] = []
    situation = 0
    for label in CLASSES:
        for _ in range(cfg.per_class):
            for view in generate_example(label, situation, cfg):
                interps.append(saturate(view, cfg.symbolization, schema))
            situation += 1
    return Dataset(tuple(interps), schema, CLASSES)


# --------------------------------------------------------------------------
# ground-truth rules the generator is built to satisfy (full mode)
# --------------------------------------------------------------------------

def target_rules() -> dict[str, dict[str, Clause]]:
    """Hand-written separating rules per source for the full-mode dataset."""
    ecg = {
        "sr": clause("sr", (
            lit("qrs", "R0", "normal"), lit("p", "P1", "normal"),
            lit("suc", "P1", "R0"), lit("qrs", "R1", "normal"),
            lit("suc", "R1", "P1"), lit("rr1", "R0", "R1", "normal"),
            lit("p", "P2", "normal"), lit("suc", "P2", "R1"),
            lit("qrs", "R2", "normal"), lit("suc", "R2", "P2"),
            lit("rr1", "R1", "R2", "normal"))),
        "ves": clause("ves", (
            lit("qrs", "R0", "normal"), lit("qrs", "R1", "abnormal"),
            lit("suci", "R1", "R0"), lit("rr1", "R0", "R1", "short"),
            lit("qrs", "R2", "normal"), lit("suc", "R2", "R1"),
            lit("rr1", "R1", "R2", "long"))),
        "bige": clause("bige", (
            lit("qrs", "R0", "normal"), lit("qrs", "R1", "abnormal"),
            lit("suci", "R1", "R0"), lit("rr1", "R0", "R1", "short"),
            lit("qrs", "R2", "normal"), lit("suc", "R2", "R1"),
            lit("rr1", "R1", "R2", "normal"), lit("qrs", "R3", "abnormal"),
            lit("suci", "R3", "R2"), lit("rr1", "R2", "R3", "short"))),
        "doublet": clause("doublet", (
            lit("qrs", "R0", "abnormal"), lit("qrs", "R1", "abnormal"),
            lit("suci", "R1", "R0"), lit("rr1", "R0", "R1", "short"),
            lit("qrs", "R2", "normal"), lit("suc", "R2", "R1"),
            lit("rr1", "R1", "R2", "long"))),
        "vt": clause("vt", (
            lit("qrs", "R0", "abnormal"), lit("qrs", "R1", "abnormal"),
            lit("suci", "R1", "R0"), lit("rr1", "R0", "R1", "short"),
            lit("qrs", "R2", "abnormal"), lit("suci", "R2", "R1"),
            lit("rr1", "R1", "R2", "short"))),
        "svt": clause("svt", (
            lit("qrs", "R0", "normal"), lit("p", "P1", "normal"),
            lit("suc", "P1", "R0"), lit("qrs", "R1", "normal"),
            lit("suc", "R1", "P1"), lit("rr1", "R0", "R1", "short"),
            lit("p", "P2", "normal"), lit("suc", "P2", "R1"),
            lit("qrs", "R2", "normal"), lit("suc", "R2", "P2"),
            lit("rr1", "R1", "R2", "short"))),
        "af": clause("af", (
            lit("qrs", "R0", "normal"), lit("p", "P1", "abnormal"),
            lit("suc", "P1", "R0"), lit("qrs", "R1", "normal"),
            lit("suc", "R1", "P1"))),
    }
    abp = {
        "sr": clause("sr", (
            lit("sys", "S0", "normal"), lit("sys", "S1", "normal"),
            lit("ss1", "S0", "S1", "normal"), lit("sys", "S2", "normal"),
            lit("ss1", "S1", "S2", "normal"))),
        "ves": clause("ves", (
            lit("sys", "S0", "normal"), lit("sys", "S1", "low"),
            lit("ss1", "S0", "S1", "short"), lit("sys", "S2", "normal"),
            lit("ss1", "S1", "S2", "long"))),
        "bige": clause("bige", (
            lit("sys", "S0", "normal"), lit("sys", "S1", "low"),
            lit("ss1", "S0", "S1", "short"), lit("sys", "S2", "normal"),
            lit("ss1", "S1", "S2", "normal"), lit("sys", "S3", "low"),
            lit("ss1", "S2", "S3", "short"))),
        "doublet": clause("doublet", (
            lit("sys", "S0", "low"), lit("sys", "S1", "low"),
            lit("ss1", "S0", "S1", "short"), lit("sys", "S2", "normal"),
            lit("ss1", "S1", "S2", "long"))),
        "vt": clause("vt", (
            lit("sys", "S0", "low"), lit("sys", "S1", "low"),
            lit("ss1", "S0", "S1", "short"), lit("sys", "S2", "low"),
            lit("ss1", "S1", "S2", "short"))),
        "svt": clause("svt", (
            lit("cycle_abp", "D1", "VA", "S1", "VB"), lit("suc", "D1", "S0"),
            lit("sys", "S0", "normal"), lit("sys", "S1", "normal"),
            lit("ss1", "S0", "S1", "short"), lit("sys", "S2", "normal"),
            lit("ss1", "S1", "S2", "short"))),
        "af": clause("af", (
            lit("sys", "S0", "high"), lit("sys", "S1", "normal"),
            lit("ss1", "S0", "S1", "short"))),
    }
    return {"ECG": ecg, "ABP": abp}


# --------------------------------------------------------------------------
# authored monosource biases per mode
# --------------------------------------------------------------------------

def _shape_arg():
    return inline(1, 1, "normal", "abnormal")


def _cat_arg():
    return inline(1, 1, "short", "normal", "long")


def _amp_arg():
    return inline(1, 1, "low", "normal", "high")


def _ecg_bias(qrs: str = "qrs", p: str | None = "p", rr: str = "rr1",
              pr: str = "pr1", shapes: bool = True, units: int = 4,
              prefix: str = "R", p_prefix: str = "P") -> DlabTemplate:
    """Beat-sequence grammar: a mandatory first qrs, then up to units-1
    further qrs blocks, each with its ordering literal, optional rr timing,
    and an optional conducted p in between."""

    def qrs_lit(i: int):
        args = [f"{prefix}{i}"]
        if shapes:
            args.append(_shape_arg())
        return literal(qrs, *args)

    def p_lit(i: int):
        args = [f"{p_prefix}{i}"]
        if shapes:
            args.append(_shape_arg())
        return literal(p, *args)

    def unit(i: int):
        parts = [qrs_lit(i),
                 choice(1, 2,
                        literal("suc", f"{prefix}{i}", f"{prefix}{i-1}"),
                        literal("suci", f"{prefix}{i}", f"{prefix}{i-1}")),
                 choice(0, 1,
                        literal(rr, f"{prefix}{i-1}", f"{prefix}{i}", _cat_arg()))]
        if p is not None:
            parts.append(choice(0, 1, choice(
                "len", "len",
                p_lit(i),
                literal("suc", f"{p_prefix}{i}", f"{prefix}{i-1}"),
                literal("suc", f"{prefix}{i}", f"{p_prefix}{i}"),
                choice(0, 1, literal(pr, f"{p_prefix}{i}", f"{prefix}{i}",
                                     _cat_arg())))))
        if i + 1 < units:
            parts.append(unit(i + 1))
        return choice(0, 1, choice("len", "len", *parts))

    return compile_template(choice("len", "len", qrs_lit(0), unit(1)))


def _abp_bias(units: int = 4) -> DlabTemplate:
    def beat(i: int):
        parts = [literal("dias", f"D{i}", _amp_arg()),
                 literal("suc", f"D{i}", f"S{i-1}"),
                 literal("sys", f"S{i}", _amp_arg()),
                 literal("suc", f"S{i}", f"D{i}"),
                 choice(0, "len",
                        literal("ss1", f"S{i-1}", f"S{i}", _cat_arg()),
                        literal("ds1", f"D{i}", f"S{i}", _cat_arg()),
                        literal("cycle_abp", f"D{i}", f"VA{i}", f"S{i}", f"VB{i}"),
                        literal("suci", f"D{i}", f"S{i-1}"))]
        if i + 1 < units:
            parts.append(beat(i + 1))
        return choice(0, 1, choice("len", "len", *parts))

    return compile_template(choice(
        "len", "len",
        literal("dias", "D0", _amp_arg()),
        literal("sys", "S0", _amp_arg()),
        literal("suc", "S0", "D0"),
        choice(0, "len",
               literal("ds1", "D0", "S0", _cat_arg()),
               literal("cycle_abp", "D0", "VA0", "S0", "VB0")),
        beat(1)))


def _sys_only_bias(units: int = 4) -> DlabTemplate:
    def beat(i: int):
        parts = [literal("sys", f"S{i}", _amp_arg()),
                 literal("suc", f"S{i}", f"S{i-1}"),
                 choice(0, "len",
                        literal("suci", f"S{i}", f"S{i-1}"),
                        literal("ss1", f"S{i-1}", f"S{i}", _cat_arg()))]
        if i + 1 < units:
            parts.append(beat(i + 1))
        return choice(0, 1, choice("len", "len", *parts))

    return compile_template(choice("len", "len",
                                   literal("sys", "S0", _amp_arg()), beat(1)))


def _chain_bias(pred: str, timing: str, var: str, units: int) -> DlabTemplate:
    """Shape-free event chain with suc mandatory, suci/timing optional."""

    def unit(i: int):
        parts = [literal(pred, f"{var}{i}"),
                 literal("suc", f"{var}{i}", f"{var}{i-1}"),
                 choice(0, "len",
                        literal("suci", f"{var}{i}", f"{var}{i-1}"),
                        literal(timing, f"{var}{i-1}", f"{var}{i}", _cat_arg()))]
        if i + 1 < units:
            parts.append(unit(i + 1))
        return choice(0, 1, choice("len", "len", *parts))

    return compile_template(choice("len", "len", literal(pred, f"{var}0"),
                                   unit(1)))


def monosource_biases(mode: str = "full") -> dict[str, DlabTemplate]:
    """The per-source bias each monosource learning step runs under."""
    if mode == "full":
        return {"ECG": _ecg_bias(), "ABP": _abp_bias()}
    if mode == "reduced":
        return {"ECG": _chain_bias("qrs", "rr1", "R", 5),
                "ABP": _sys_only_bias()}
    if mode == "split":
        return {"P": _chain_bias("p", "pp1", "PA", 4),
                "QRS": _chain_bias("qrs", "rr1", "QB", 5)}
    if mode == "redundant":
        return {"ECG": _ecg_bias(),
                "ECG2": _ecg_bias(qrs="qrs_b", p="p_b", rr="rr1_b",
                                  pr="pr1_b", prefix="T", p_prefix="Q")}
    raise UsageError(f"unknown mode {mode!r}")
