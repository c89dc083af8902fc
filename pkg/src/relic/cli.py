"""Command-line surface tying the pipeline together.

Subcommands: synth, learn, learn-naive, learn-biased, crossval, count-space,
report.  Exit codes: 0 on success, 2 on usage errors, 1 on internal errors.
RELIC_THREADS caps fold-level parallelism during cross-validation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import (Dataset, SymbolizationConfig, parse_model_file,
                   saturate, write_model_file)
from .dlab import count_space, parse_dlab, template_text
from .errors import RelicError, UsageError
from .evaluate import (ClassReport, EvaluationReport, cross_validate,
                       emit_report)
from .learner import LearnerParams, learn_theory
from .multisource import (aggregate, biased_multisource_learn, naive_bias,
                          parse_constraints)
from .synth import GeneratorConfig, cardiac_schema, generate_dataset


def _load_dataset(paths: list[str], mode: str) -> Dataset:
    schema = cardiac_schema(mode)
    cfg = SymbolizationConfig()
    interps = []
    labels = set()
    for path in paths:
        for interp in parse_model_file(Path(path).read_text()):
            interps.append(saturate(interp, cfg, schema))
            labels.add(interp.label)
    if not interps:
        raise UsageError("no interpretations found in the given files")
    return Dataset(tuple(interps), schema, tuple(sorted(labels)))


def _load_biases(pairs: list[str]) -> dict[str, object]:
    biases = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"--bias expects SOURCE=FILE, got {pair!r}")
        source, path = pair.split("=", 1)
        biases[source] = parse_dlab(Path(path).read_text())
    return biases


def _params(args) -> LearnerParams:
    return LearnerParams(beam_width=args.beam_width,
                         max_clauses_per_class=args.max_clauses)


def _print_theory(theory, stream=None):
    stream = stream if stream is not None else sys.stdout
    for label, result in theory.per_class.items():
        flag = "" if result.complete else "  %% incomplete"
        print(f"%% class {label}: {len(result.clauses)} clause(s), "
              f"{result.stats.nodes} nodes, {result.stats.time_ms:.0f} ms{flag}",
              file=stream)
        for c in result.clauses:
            print(str(c), file=stream)


def cmd_synth(args) -> int:
    cfg = GeneratorConfig(seed=args.seed, per_class=args.per_class,
                          cycles=args.cycles, mode=args.mode)
    dataset = generate_dataset(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for source in dataset.sources():
        path = out / f"{source}.facts"
        path.write_text(write_model_file(dataset.by_source(source)))
        print(f"wrote {path}")
    return 0


def cmd_learn(args) -> int:
    dataset = _load_dataset(args.data, args.data_mode)
    bias = parse_dlab(Path(args.bias).read_text())
    pool = dataset.by_source(args.source)
    if not pool:
        raise UsageError(f"no interpretations for source {args.source}")
    theory = learn_theory(pool, bias, _params(args))
    _print_theory(theory)
    return 0


def cmd_learn_naive(args) -> int:
    dataset = _load_dataset(args.data, args.data_mode)
    agg = aggregate(dataset).examples
    bias = naive_bias(dataset.schema, args.max_events)
    theory = learn_theory(agg, bias, _params(args))
    _print_theory(theory)
    return 0


def cmd_learn_biased(args) -> int:
    dataset = _load_dataset(args.data, args.data_mode)
    biases = _load_biases(args.bias)
    constraints = (parse_constraints(Path(args.constraints).read_text())
                   if args.constraints else [])
    result = biased_multisource_learn(dataset, biases, constraints,
                                      _params(args))
    for w in result.warnings:
        print(f"%% warning: {w}", file=sys.stderr)
    _print_theory(result.theory)
    if args.artifacts:
        art = Path(args.artifacts)
        art.mkdir(parents=True, exist_ok=True)
        for source, theory in result.mono.items():
            with open(art / f"mono_{source}.rules", "w") as fh:
                _print_theory(theory, fh)
        for label, bottoms in result.bottoms.items():
            with open(art / f"bottoms_{label}.rules", "w") as fh:
                for bt in bottoms:
                    print(str(bt.clause), file=fh)
        for label, bias in result.class_biases.items():
            (art / f"bias_{label}.dlab").write_text(template_text(bias) + "\n")
        print(f"artifacts written under {art}")
    return 0


def cmd_crossval(args) -> int:
    dataset = _load_dataset(args.data, args.data_mode)
    folds = (len(dataset.situations()) if args.folds == "loo"
             else int(args.folds))
    biases = _load_biases(args.bias) if args.bias else None
    constraints = (parse_constraints(Path(args.constraints).read_text())
                   if args.constraints else [])
    report = cross_validate(dataset, args.cv_mode, folds, biases=biases,
                            constraints=constraints, params=_params(args),
                            source=args.source,
                            naive_max_events=args.max_events)
    for w in report.warnings:
        print(f"%% warning: {w}", file=sys.stderr)
    if args.json:
        payload = {"mode": report.mode, "meta": report.meta,
                   "rows": [vars(r) for r in report.rows]}
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {args.json}")
    print(emit_report(report, args.format), end="")
    return 0


def cmd_count_space(args) -> int:
    template = parse_dlab(Path(args.bias).read_text())
    print(count_space(template))
    return 0


def cmd_report(args) -> int:
    payload = json.loads(Path(args.json).read_text())
    report = EvaluationReport(mode=payload["mode"],
                              rows=[ClassReport(**r) for r in payload["rows"]],
                              meta=payload.get("meta", {}))
    print(emit_report(report, args.format), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="relic",
        description="biased multisource rule learning over symbolic event data")
    sub = top.add_subparsers(dest="command", required=True)

    def common_learning(p):
        p.add_argument("--data-mode", dest="data_mode", default="full",
                       choices=["full", "reduced", "split", "redundant"],
                       help="schema the fact files follow")
        p.add_argument("--beam-width", type=int, default=10)
        p.add_argument("--max-clauses", type=int, default=8)
        p.add_argument("data", nargs="+", help="fact files")

    p = sub.add_parser("synth", help="generate fact files")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--cycles", type=int, default=6)
    p.add_argument("--mode", default="full",
                   choices=["full", "reduced", "split", "redundant"])
    p.add_argument("--out", default="synth_out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("learn", help="monosource learning")
    p.add_argument("--source", required=True)
    p.add_argument("--bias", required=True, help="DLAB grammar file")
    common_learning(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("learn-naive", help="naive multisource learning")
    p.add_argument("--max-events", type=int, required=True)
    common_learning(p)
    p.set_defaults(func=cmd_learn_naive)

    p = sub.add_parser("learn-biased", help="biased multisource learning")
    p.add_argument("--bias", action="append", default=[],
                   metavar="SOURCE=FILE", help="per-source DLAB grammar")
    p.add_argument("--constraints", help="interleaving constraints file")
    p.add_argument("--artifacts", help="directory for intermediate artifacts")
    common_learning(p)
    p.set_defaults(func=cmd_learn_biased)

    p = sub.add_parser("crossval", help="cross-validated evaluation")
    p.add_argument("--folds", required=True, help="fold count or 'loo'")
    p.add_argument("--mode", required=True, dest="cv_mode",
                   choices=["mono", "naive", "biased"],
                   help="evaluation mode")
    p.add_argument("--source", help="source id (mono mode)")
    p.add_argument("--bias", action="append", default=[],
                   metavar="SOURCE=FILE")
    p.add_argument("--constraints")
    p.add_argument("--max-events", type=int, default=4,
                   help="naive bias depth (naive mode)")
    p.add_argument("--format", default="markdown",
                   choices=["csv", "markdown"])
    p.add_argument("--json", help="also save the report as JSON")
    common_learning(p)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("count-space", help="size of a DLAB search space")
    p.add_argument("--bias", required=True)
    p.set_defaults(func=cmd_count_space)

    p = sub.add_parser("report", help="render a saved JSON report")
    p.add_argument("--format", default="markdown",
                   choices=["csv", "markdown"])
    p.add_argument("json", help="report JSON written by crossval")
    p.set_defaults(func=cmd_report)
    return top


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RelicError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
