"""Command-line front end.

Exit codes: 0 success/verified, 1 verification failure, 2 usage or input
errors. All numeric output is exact rational text, never decimal.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algebra import sum_closed_value, sum_function_matrix
from .diagram import TraceDiagram, validate
from .dsl import parse_diagram_set, parse_matrix_file
from .engine import evaluate_closed, function_matrix
from .errors import DslSyntaxError, TraceDiagramError, UnboundLabelError
from .identities import (
    IDENTITY_DIMS,
    charpoly_diagrammatic,
    charpoly_oracle,
    pfaffian_scan,
    polarization_check,
    run_identity,
)


def _print_matrix(entries) -> None:
    for row in entries:
        print(" ".join(str(x) for x in row))


def _cmd_eval(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    entities = parse_diagram_set(text, default_dim=args.dim)
    if args.diagram:
        if args.diagram not in entities:
            print(
                f"no diagram named {args.diagram!r}; file has {sorted(entities)}",
                file=sys.stderr,
            )
            return 2
        entity = entities[args.diagram]
    elif len(entities) == 1:
        (entity,) = entities.values()
    else:
        print(
            f"file has {len(entities)} diagrams; pick one with --diagram",
            file=sys.stderr,
        )
        return 2

    binding = None
    if args.bind:
        binding = parse_matrix_file(Path(args.bind).read_text(encoding="utf-8"))

    if isinstance(entity, TraceDiagram):
        result = validate(entity)
        if not result.ok:
            for v in result.violations:
                print(f"invalid diagram: {v}", file=sys.stderr)
            return 2
        if entity.is_closed():
            print(evaluate_closed(entity, binding))
        else:
            _print_matrix(function_matrix(entity, binding).entries)
    else:
        terms_closed = all(d.is_closed() for _, d in entity.terms)
        if terms_closed:
            print(sum_closed_value(entity, binding))
        else:
            _print_matrix(sum_function_matrix(entity, binding).entries)
    return 0


def _emit_report(report, fmt: str) -> None:
    lines = report.record_lines() if fmt == "records" else report.text_lines()
    for line in lines:
        print(line)


def _cmd_verify(args) -> int:
    report = run_identity(
        args.identity, n=args.dim, trials=args.trials, seed=args.seed, jobs=args.jobs
    )
    _emit_report(report, args.format)
    return 0 if report.ok else 1


def _cmd_charpoly(args) -> int:
    binding = parse_matrix_file(Path(args.bind).read_text(encoding="utf-8"))
    a = binding.matrix(args.matrix)
    diag = charpoly_diagrammatic(a)
    oracle = charpoly_oracle(a)
    mismatch = False
    for i, (d, o) in enumerate(zip(diag, oracle)):
        flag = "" if d == o else "  MISMATCH"
        print(f"c{i} diagram={d} oracle={o}{flag}")
        mismatch |= d != o
    print("status=" + ("disagree" if mismatch else "agree"))
    return 1 if mismatch else 0


def _cmd_polarize(args) -> int:
    report = polarization_check(args.dim, trials=args.trials, seed=args.seed)
    _emit_report(report, args.format)
    return 0 if report.ok else 1


def _cmd_pfaffian(args) -> int:
    if args.dim % 2:
        print("pfaffian scan needs an even dimension", file=sys.stderr)
        return 2
    report = pfaffian_scan(args.dim, trials=args.trials, seed=args.seed, jobs=args.jobs)
    for rec in report.records:
        if rec.get("skipped"):
            print(f"trial={rec['trial']} skipped (Pf = 0)")
        else:
            print(f"trial={rec['trial']} ratio={rec['ratio']}")
    if report.status == "inconclusive":
        print("constant=inconclusive (all sampled Pfaffians were zero)")
        return 1
    if report.ok:
        print(f"constant={report.data['constant']}")
        return 0
    print("constant=inconsistent")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracediagrams",
        description="Evaluate trace diagrams exactly and verify their matrix identities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a .tdg diagram (value or function matrix)")
    p.add_argument("file", help="diagram file (.tdg)")
    p.add_argument("--bind", help="matrix binding file (.tmat)")
    p.add_argument("--diagram", help="which diagram to evaluate")
    p.add_argument("--dim", type=int, help="default dimension for builtin references")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("verify", help="run one identity's randomized exact checks")
    p.add_argument("identity", choices=sorted(IDENTITY_DIMS))
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", default="0")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("charpoly", help="characteristic polynomial, diagrams vs oracle")
    p.add_argument("--bind", required=True)
    p.add_argument("--matrix", default="A")
    p.set_defaults(fn=_cmd_charpoly)

    p = sub.add_parser("polarize", help="compare the multi-matrix sum with polarization")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", default="0")
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.set_defaults(fn=_cmd_polarize)

    p = sub.add_parser("pfaffian", help="scan the single-vertex pairing diagram ratio")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", default="0")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=_cmd_pfaffian)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return 2
    except UnboundLabelError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except DslSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return 2
    except TraceDiagramError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
