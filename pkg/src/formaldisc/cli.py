"""Command-line front end.

``formaldisc verify SPEC`` runs a suite; ``invert``, ``exp`` and ``compose``
are one-shot series calculators reading and writing the JSON series format.
Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .coords import Derivation, exp_derivation
from .errors import FormalDiscError, ParseError, ValidationError
from .series import TruncatedSeries
from .suite import SEED_LIMIT, emit_report, parse_spec, run_suite

SEED_ENV = "FORMALDISC_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: {exc.msg}", exc.lineno, exc.colno) from exc


def _series_arg(text: str, what: str) -> TruncatedSeries:
    data = _load_json(text, what)
    try:
        return TruncatedSeries.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{what}: {exc}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _cmd_verify(args) -> int:
    spec = parse_spec(args.spec)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise ValidationError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        if not 0 <= seed < SEED_LIMIT:
            raise ValidationError(f"{SEED_ENV} must be an unsigned 64-bit integer")
        spec = spec.with_seed(seed)
    report = run_suite(spec)
    data = emit_report(report, args.format, args.timings)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return 0 if report.ok else 1


def _cmd_invert(args) -> int:
    f = _series_arg(args.series, "--series")
    sys.stdout.write(_dump(f.invert_composition().to_json()))
    return 0


def _cmd_exp(args) -> int:
    data = _load_json(args.derivation, "--derivation")
    try:
        v = Derivation.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"--derivation: {exc}") from exc
    sys.stdout.write(_dump(exp_derivation(v).to_json()))
    return 0


def _cmd_compose(args) -> int:
    outer = _series_arg(args.outer, "--outer")
    inner = _series_arg(args.inner, "--inner")
    sys.stdout.write(_dump(outer.compose(inner).to_json()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="formaldisc", description="Exact formal-disc calculus and verification suites.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("spec", help="suite file (JSON)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--timings", action="store_true", help="include wall times (makes output non-reproducible)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("invert", help="compositional inverse of a series")
    p.add_argument("--series", required=True, help='e.g. {"coefficients": [[1, "1/1"], [2, "1/1"]], '
                                                    '"truncation_order": 6}')
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("exp", help="time-one flow of a vector field")
    p.add_argument("--derivation", required=True)
    p.set_defaults(func=_cmd_exp)

    p = sub.add_parser("compose", help="substitute --inner into --outer")
    p.add_argument("--outer", required=True)
    p.add_argument("--inner", required=True)
    p.set_defaults(func=_cmd_compose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"formaldisc: parse error: {exc}\n")
        return 2
    except (FormalDiscError, ValueError) as exc:
        sys.stderr.write(f"formaldisc: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
