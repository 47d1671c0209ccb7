"""
Command-line interface.

Sub-commands mirror the off-line and on-line stages:
- translate / compose / product / rank build the off-line artifacts
- run / batch simulate the supervised plant
- validate / verify check a DFA and a ranking
- example surveillance writes the bundled fixtures

Exit codes: 0 success, 2 invalid input, 3 specification unenforceable,
4 runtime protocol error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import settings
from .des import Des, load_des, save_des, synchronous_product
from .dfa import Dfa, export_dfa, import_dfa, lasso_check, translate
from .errors import ScheduleError, SupervisorError
from .formula import Formula, parse_formula
from .harness import build_config, run_session, simulate_batch, sweep_configs
from .plotdata import emit_plot_data
from .product import ProductAutomaton, build_product, load_product, save_product
from .ranking import RankingFunction, compute_ranking, save_ranking_csv, verify_ranking
from .supervisor import LinearSchedule, Supervisor, write_transcript
from .surveillance import write_fixtures

logger = logging.getLogger(__name__)


def parse_ap(text: Optional[str]) -> Optional[list[str]]:
    if text is None:
        return None
    return [name.strip() for name in text.split(",") if name.strip()]


def parse_perm(text: str) -> tuple[float, float]:
    """Parse "a,b" into the slope and offset of a linear schedule."""
    parts = text.split(",")
    if len(parts) != 2:
        raise ScheduleError(f"expected 'a,b', got '{text}'")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as err:
        raise ScheduleError(f"non-numeric schedule parameters '{text}'") from err


def load_spec(value: str, ap=None) -> Formula:
    """Formula from a file path if one exists, otherwise from the text itself."""
    path = Path(value)
    text = path.read_text(encoding="utf-8").strip() if path.is_file() else value
    return parse_formula(text, ap=ap)


def _offline(des_path: str, spec: str, dfa_path: Optional[str] = None):
    g = load_des(des_path)
    formula = load_spec(spec, ap=g.ap)
    dfa = import_dfa(dfa_path) if dfa_path else translate(formula, ap=g.ap)
    product = build_product(g, dfa)
    ranking = compute_ranking(product)
    print(f"📊 DFA {dfa.num_states} states, product {len(product.states)} states / {product.num_transitions} transitions")
    print(f"📊 alpha = {ranking.alpha}, initial rank = {ranking[product.initial]}")
    return g, formula, dfa, product, ranking


# Sub-commands


def cmd_translate(args) -> int:
    formula = load_spec(args.spec)
    dfa: Dfa = translate(formula, ap=parse_ap(args.ap), minimal=not args.no_minimize)
    export_dfa(dfa, args.out)
    print(f"✅ DFA with {dfa.num_states} states ({len(dfa.accepting)} accepting) written to {args.out}")
    return 0


def cmd_compose(args) -> int:
    if len(args.des) < 2:
        print("❌ compose needs at least two --des files")
        return 2
    composite: Des = load_des(args.des[0])
    for path in args.des[1:]:
        composite = synchronous_product(composite, load_des(path))
    save_des(composite, args.out)
    print(f"✅ composite with {len(composite.states)} states, {composite.num_transitions} transitions written to {args.out}")
    return 0


def cmd_product(args) -> int:
    product: ProductAutomaton = build_product(load_des(args.des), import_dfa(args.dfa))
    save_product(product, args.out)
    print(f"✅ product with {len(product.states)} states, {product.num_transitions} transitions written to {args.out}")
    return 0


def cmd_rank(args) -> int:
    product = load_product(args.product)
    ranking: RankingFunction = compute_ranking(product)
    save_ranking_csv(product, ranking, args.out)
    print(f"📊 alpha = {ranking.alpha}, initial rank = {ranking[product.initial]}")
    print(f"✅ ranks written to {args.out}")
    return 0


def cmd_run(args) -> int:
    a, b = parse_perm(args.perm)
    config = build_config(seed=args.seed, a=a, b=b, max_steps=args.max_steps)
    _, _, _, product, ranking = _offline(args.des, args.spec, args.dfa)
    supervisor = Supervisor(product, ranking, LinearSchedule(config.a, config.b))
    record, session = run_session(supervisor, config.seed, config.max_steps, record_transcript=bool(args.transcript))
    if args.transcript:
        write_transcript(session.transcript, args.transcript)
        print(f"✅ transcript written to {args.transcript}")
    if args.trace:
        emit_plot_data([record], args.trace, kind="trace")
        print(f"✅ rank trace written to {args.trace}")
    print(
        f"✅ accepted after {record.steps} steps "
        f"({record.legal_count} legal, {record.neutral_count} neutral, "
        f"mean pattern size {record.mean_pattern_size:.2f})"
    )
    return 0


def cmd_batch(args) -> int:
    configs = [
        build_config(seed=args.master_seed, a=a, b=b, runs=args.runs, max_steps=args.max_steps)
        for a, b in sweep_configs(args.perm_sweep)
    ]
    _, _, _, product, ranking = _offline(args.des, args.spec, args.dfa)
    summaries = simulate_batch(
        product,
        ranking,
        [(config.a, config.b) for config in configs],
        runs_per_config=configs[0].runs,
        master_seed=configs[0].seed,
        max_steps=configs[0].max_steps,
        workers=args.workers,
    )
    for summary in summaries:
        print(
            f"📊 a={summary.a:g} b={summary.b:g}: steps {summary.mean_steps:.2f} ± {summary.std_steps:.2f}, "
            f"pattern size {summary.mean_pattern_size:.3f} ± {summary.std_pattern_size:.3f}, "
            f"accepted {summary.accepted_count}/{summary.runs}"
        )
    emit_plot_data(summaries, args.out, kind="summary")
    print(f"✅ summary written to {args.out}")
    return 0


def cmd_example(args) -> int:
    for path in write_fixtures(args.out_dir):
        print(f"✅ {path}")
    return 0


def cmd_validate(args) -> int:
    dfa = import_dfa(args.dfa, strict=not args.lenient)
    formula = load_spec(args.spec, ap=dfa.ap)
    report = lasso_check(dfa, formula, args.prefix_bound, args.loop_bound)
    print(f"📊 {report.configurations} configurations, {report.lassos_covered} lassos covered")
    if report.passed:
        print("✅ DFA agrees with the formula on every bounded word and lasso")
        return 0
    for mismatch in report.mismatches[:10]:
        print(
            f"⚠️  {mismatch.kind}: prefix={[sorted(x) for x in mismatch.prefix]} "
            f"loop={[sorted(x) for x in mismatch.loop]} dfa={mismatch.dfa_accepts} formula={mismatch.formula_holds}"
        )
    print(f"❌ {len(report.mismatches)} mismatches")
    return 1


def cmd_verify(args) -> int:
    _, _, _, product, ranking = _offline(args.des, args.spec, args.dfa)
    report = verify_ranking(product, ranking)
    for name, states in report.failures.items():
        mark = "✅" if not states else "❌"
        print(f"{mark} {name}: {len(states)} failing states")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="online-supervisor",
        description="On-line permissive supervisory control of discrete event systems under scLTL",
    )
    parser.add_argument("--verbose", "-v", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="Translate a formula into a DFA")
    p.add_argument("--spec", required=True, help="Formula text or a file containing it")
    p.add_argument("--ap", help="Comma-separated vocabulary (defaults to the formula's atoms)")
    p.add_argument("--out", required=True)
    p.add_argument("--no-minimize", action="store_true")
    p.set_defaults(handler=cmd_translate)

    p = sub.add_parser("compose", help="Synchronous product of DES files")
    p.add_argument("--des", action="append", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_compose)

    p = sub.add_parser("product", help="Product of a DES and a DFA")
    p.add_argument("--des", required=True)
    p.add_argument("--dfa", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_product)

    p = sub.add_parser("rank", help="Compute the ranking function of a product")
    p.add_argument("--product", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_rank)

    for name, handler, help_text in (
        ("run", cmd_run, "Simulate one supervised run"),
        ("batch", cmd_batch, "Simulate a sweep of schedules"),
        ("verify", cmd_verify, "Check the ranking properties"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--des", required=True)
        p.add_argument("--spec", required=True, help="Formula text or a file containing it")
        p.add_argument("--dfa", help="Use this DFA instead of translating the formula")
        p.set_defaults(handler=handler)
        if name == "run":
            p.add_argument("--perm", required=True, help="a,b for max(a*k + b, 0), e.g. -0.5,20")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--max-steps", type=int)
            p.add_argument("--transcript", help="JSON-lines transcript output")
            p.add_argument("--trace", help="CSV rank trace output")
        elif name == "batch":
            p.add_argument("--perm-sweep", required=True, help='e.g. "b=30;a=-0.25,-0.5,-1,-2"')
            p.add_argument("--runs", type=int, default=1000)
            p.add_argument("--master-seed", type=int, default=0)
            p.add_argument("--max-steps", type=int)
            p.add_argument("--workers", type=int)
            p.add_argument("--out", required=True)

    p = sub.add_parser("example", help="Write bundled example fixtures")
    p.add_argument("name", choices=["surveillance"])
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_example)

    p = sub.add_parser("validate", help="Check a DFA against a formula on bounded lassos")
    p.add_argument("--dfa", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--prefix-bound", type=int, default=4)
    p.add_argument("--loop-bound", type=int, default=3)
    p.add_argument("--lenient", action="store_true", help="Complete non-total DFAs instead of rejecting them")
    p.set_defaults(handler=cmd_validate)

    return parser


VALUE_OPTIONS = ("--perm", "--perm-sweep")


def attach_option_values(argv: Sequence[str]) -> list[str]:
    """
    Rewrite "--perm -0.5,20" as "--perm=-0.5,20".

    argparse reads a value starting with "-" as another option unless it is
    a plain negative number, which schedule pairs never are.
    """
    result: list[str] = []
    items = iter(argv)
    for item in items:
        if item in VALUE_OPTIONS:
            value = next(items, None)
            if value is None:
                result.append(item)
            elif value.startswith("-") and not value.startswith("--"):
                result.append(f"{item}={value}")
            else:
                result.extend([item, value])
        else:
            result.append(item)
    return result


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(attach_option_values(sys.argv[1:] if argv is None else argv))
    level = {0: settings.log_level.upper(), 1: "INFO"}.get(args.verbose, "DEBUG")
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except SupervisorError as err:
        print(f"❌ {err}")
        return err.exit_code
