"""Command-line interface.

Exit statuses:

* ``search``: 0 witness, 1 exhausted, 2 budget exceeded
* ``verify``: 0 exhausted at every order, 1 counterexample, 2 budget exceeded
* ``check``: 0 every identity (and structure, if given) holds, 1 something fails
* ``lab``: 0 all claims pass, 1 some claim fails, 4 budget exceeded on a mandatory claim
* ``b25``: 0 no counterexample, 1 counterexample, 2 budget exceeded
* any command: 3 for unreadable input (bad table, code, flag or checkpoint)
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import finder, paperlab
from .magma import Sided, StructureSpec, TableFormatError, analyze, format_table, parse_table, satisfies_structure
from .term import BMCode, TermError, counterexample, decode_bm, dual_identity, label, render, resolve_identity

EXIT_INPUT = 3
EXIT_LAB_BUDGET = 4


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _identity(text: str):
    try:
        return resolve_identity(text)
    except TermError as exc:
        raise InputError(str(exc)) from None


def _spec(args) -> StructureSpec:
    return StructureSpec(Sided(args.neutral), Sided(args.inverses))


def _emit(args, key: str, value) -> None:
    if args.machine:
        print(f"# {key} {value}")


def _add_structure(p, default_inverses="two-sided"):
    p.add_argument("--neutral", choices=["left", "right", "two-sided"], default="two-sided")
    p.add_argument("--inverses", choices=["left", "right", "two-sided", "none"], default=default_inverses)


def _add_identities(p, required=False):
    p.add_argument("--identity", "-i", action="append", default=[], required=required,
                   help="named tag (LB, M1, C, ASSOC, ...), Xij code, or equation like 'x(yz)=(xy)z'")


def cmd_check(args) -> int:
    try:
        m = parse_table(Path(args.table).read_text())
    except OSError as exc:
        raise InputError(str(exc)) from None
    identities = [_identity(s) for s in args.identity]
    report = analyze(m)
    ok = True
    summary = []
    for ident in identities:
        cx = counterexample(ident, m)
        name = label(ident)
        if cx is None:
            summary.append(f"{name}: holds")
            if args.machine:
                print(f"identity {name} holds")
        else:
            ok = False
            where = " ".join(f"{k}={v}" for k, v in cx.items())
            summary.append(f"{name}: fails at {where}")
            if args.machine:
                print(f"identity {name} fails {where}")
    if args.structure:
        spec = _spec(args)
        w = satisfies_structure(m, spec)
        if w is None:
            ok = False
        text = "none" if w is None else f"neutral={w.neutral}" + (
            "" if w.inverses is None else " inverses=" + ",".join(map(str, w.inverses)))
        summary.append(f"structure {spec}: {text}")
        if args.machine:
            print(f"structure {spec.neutral.value} {spec.inverses.value} {text}")
    if args.machine:
        for key, value in report.flags().items():
            print(f"property {key} {'yes' if value else 'no'}")
    else:
        for line in report.lines():
            print(line)
        summary += [f"loop: {'yes' if report.is_loop else 'no'}",
                    f"two-sided inverses: {'yes' if report.inverse_map_two_sided is not None else 'no'}"]
        print("; ".join(summary))
    return 0 if ok else 1


def _problem(args, target: str) -> finder.SearchProblem:
    try:
        orders = finder.parse_orders(args.order)
    except ValueError:
        raise InputError(f"bad order range {args.order!r}") from None
    try:
        return finder.SearchProblem(orders, _spec(args), tuple(_identity(s) for s in args.identity),
                                    finder.Target(target), deterministic=not args.nondeterministic,
                                    budget=args.budget, workers=args.workers)
    except finder.ConfigurationError as exc:
        raise InputError(str(exc)) from None


def cmd_search(args) -> int:
    problem = _problem(args, args.target)
    out = finder.search(problem)
    _emit(args, "status", out.status.value)
    _emit(args, "nodes", out.nodes_explored)
    _emit(args, "elapsed", f"{out.elapsed:.3f}")
    for s in out.per_order:
        _emit(args, "order-stats", f"{s.order} {s.status.value} {s.nodes}")
    if out.witness is not None:
        _emit(args, "order", out.witness.order)
        sys.stdout.write(format_table(out.witness))
        if not args.machine:
            print(f"witness of order {out.witness.order} after {out.nodes_explored} nodes", file=sys.stderr)
        return 0
    if not args.machine:
        lo, hi = problem.orders
        if out.status is finder.Status.EXHAUSTED:
            print(f"exhausted: no model meeting target {problem.target.value} at orders {lo}..{hi} "
                  f"({out.nodes_explored} nodes)")
        else:
            done = max((s.order for s in out.per_order if s.status is finder.Status.EXHAUSTED), default=0)
            print(f"budget exceeded after {out.nodes_explored} nodes; exhausted through order {done}")
    return 1 if out.status is finder.Status.EXHAUSTED else 2


def cmd_enumerate(args) -> int:
    problem = _problem(args, "any-model")
    count = 0
    for m in finder.enumerate_models(problem, up_to_iso=args.up_to_iso):
        if args.latin and not analyze(m).is_latin:
            continue
        count += 1
        sys.stdout.write(format_table(m))
        print()
    print(f"# models {count}")
    return 0


def cmd_verify(args) -> int:
    identities = [_identity(s) for s in args.identity]
    rep = finder.verify_absence(identities, _spec(args), args.max_order, args.budget, workers=args.workers)
    for s in rep.per_order:
        print(f"order {s.order}: {s.status.value} ({s.nodes} nodes, {s.elapsed:.2f}s)")
    print(f"status {rep.status.value}")
    if rep.witness is not None:
        sys.stdout.write(format_table(rep.witness))
        return 1
    return 0 if rep.status is finder.Status.EXHAUSTED else 2


def cmd_decode(args) -> int:
    try:
        ident = decode_bm(args.code)
    except TermError as exc:
        raise InputError(str(exc)) from None
    print(f"{render(ident.lhs)} = {render(ident.rhs)}")
    return 0


def cmd_dual(args) -> int:
    try:
        code = BMCode.parse(args.code)
    except TermError as exc:
        raise InputError(str(exc)) from None
    dual = dual_identity(decode_bm(code))
    print(label(dual))
    return 0


def cmd_lab(args) -> int:
    records = []
    failed = budget = False
    suites = ["fixtures", "classification", "onesided", "b25"] if args.suite == "all" else [args.suite]
    for suite in suites:
        if suite == "fixtures":
            claims = paperlab.reproduce_fixtures()
        elif suite == "onesided":
            claims = paperlab.run_onesided_suite(args.max_order or 5, args.budget, args.workers)
        elif suite == "b25":
            result, _ = paperlab.b25_campaign(args.max_order or 6, args.budget)
            claims = [result, paperlab.e14_by_duality()]
        else:
            rows = paperlab.run_classification(args.max_order or 6, args.budget, args.workers,
                                               include_unlisted=args.include_unlisted)
            for r in rows:
                records.append(r)
                if not r.consistent:
                    failed = True
                    budget |= r.status is finder.Status.BUDGET
                print(f"{'ok  ' if r.consistent else 'FAIL'} {r.code} paper={r.paper_answer} "
                      f"observed={r.observed} ({r.elapsed:.2f}s)")
            continue
        for c in claims:
            records.append(c)
            if not c.passed:
                failed = True
                budget |= c.observed.startswith("budget")
            print(f"{'ok  ' if c.passed else 'FAIL'} {c.claim_id}: {c.observed}")
    if args.out:
        paperlab.write_records(args.out, records)
    if budget:
        return EXIT_LAB_BUDGET
    return 1 if failed else 0


def cmd_b25(args) -> int:
    try:
        result, ckpt = paperlab.b25_campaign(args.max_order, args.budget,
                                             resume=args.checkpoint if args.resume else None,
                                             checkpoint_path=args.checkpoint)
    except paperlab.CheckpointError as exc:
        raise InputError(str(exc)) from None
    print(result.observed)
    print(f"searched orders: {' '.join(map(str, result.details['searched_orders'])) or 'none'}")
    if result.passed:
        return 0
    return 2 if result.observed.startswith("budget") else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bolmoufang", description=__doc__.splitlines()[0])
    parser.add_argument("--machine", action="store_true", help="line-oriented machine records")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="properties of a Cayley table file")
    p.add_argument("table")
    _add_identities(p)
    p.add_argument("--structure", action="store_true", help="also test --neutral/--inverses")
    _add_structure(p)
    p.set_defaults(func=cmd_check)

    def search_flags(p, target=True):
        p.add_argument("--order", default="1..5", help="N or LO..HI")
        _add_structure(p)
        _add_identities(p)
        if target:
            p.add_argument("--target", choices=[t.value for t in finder.Target], default="non-loop")
        p.add_argument("--budget", type=float, default=None, help="wall-clock seconds")
        p.add_argument("--nondeterministic", action="store_true")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("search", help="find a model meeting the target")
    search_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("enumerate", help="list all models")
    search_flags(p, target=False)
    p.add_argument("--up-to-iso", action="store_true")
    p.add_argument("--latin", action="store_true", help="keep only Latin tables")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="bounded check that every model is a loop")
    _add_identities(p, required=True)
    _add_structure(p)
    p.add_argument("--max-order", type=int, default=5)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lab", help="reproduce the published finite claims")
    p.add_argument("suite", choices=["fixtures", "classification", "onesided", "b25", "all"])
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--budget", type=float, default=None, help="seconds per row or claim")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--include-unlisted", action="store_true")
    p.add_argument("--out", help="write JSON-lines records here")
    p.set_defaults(func=cmd_lab)

    p = sub.add_parser("b25", help="resumable search for a non-group B25 magma with inverses")
    p.add_argument("--max-order", type=int, default=6)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--checkpoint", help="checkpoint file (written periodically)")
    p.add_argument("--resume", action="store_true", help="continue from --checkpoint")
    p.set_defaults(func=cmd_b25)

    p = sub.add_parser("decode", help="render an Xij code")
    p.add_argument("code")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("dual", help="code of the dual identity")
    p.add_argument("code")
    p.set_defaults(func=cmd_dual)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (InputError, TableFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
