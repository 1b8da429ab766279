# dihedralis_cli.py

import argparse
import json
import logging
import sys

import pandas as pd
from sympy import Poly, symbols, sympify

from engines.dihedral_orchestrator import (
    DihedralOrchestrator,
    TowerSpec,
    minimal_S,
    scan_primes,
)
from engines.errors import DihedralisError, StageError
from engines.logging_config import set_console_level
from engines.quadform_engine import class_group
from engines.reptheory_engine import (
    C_ONE,
    DihedralGroupData,
    build_infinitesimal_lift,
    is_dihedral_deformation,
    max_order_above_sigma,
    remark_fixture,
    s4_example,
    s4_representation,
    truncate,
)
from engines.result_cache import ResultCache, save_report
from engines.settings import BOUND_POLICIES, OUTPUT_FORMATS, SCHEMA_VERSION, load_config
from engines.table_builder import build_table, render, summarize

EXIT_OK = 0
EXIT_ENGINE_ERROR = 2
EXIT_HYPOTHESES_NOT_MET = 3

X = symbols("x")


def parse_ramified_set(text):
    if not text:
        return ()
    return tuple(int(part) for part in text.replace(";", ",").split(",") if part.strip())


def parse_polynomial(text):
    """'x^3 - x + 1' -> [1, 0, -1, 1]"""
    poly = Poly(sympify(text.replace("^", "**"), locals={"x": X}), X)
    coeffs = poly.all_coeffs()
    if any(not c.is_integer for c in coeffs):
        raise ValueError(f"Polynomial must have integer coefficients: {text}")
    return [int(c) for c in coeffs]


def _tower(args):
    if args.disc is None or args.q is None or args.p is None:
        raise ValueError("--disc, --q and --p are required")
    return TowerSpec.build(args.disc, args.q, args.p, args.b, parse_ramified_set(args.ramified_set))


def _report(**fields):
    return {"schema": SCHEMA_VERSION, **fields}


# commands

def cmd_classgroup(args, config, orchestrator):
    if args.poly:
        coeffs = parse_polynomial(args.poly)
        payload = orchestrator.class_group_of(coeffs)
        return _report(input={"poly": [str(c) for c in coeffs]}, **payload), EXIT_OK
    if args.disc is None:
        raise ValueError("one of --disc or --poly is required")
    group = class_group(args.disc)
    return _report(input={"disc": str(args.disc)}, certification="reduced-forms", **group.to_dict()), EXIT_OK


def cmd_classpoly(args, config, orchestrator):
    if args.disc is None:
        raise ValueError("--disc is required")
    if args.q is None:
        coeffs = orchestrator.class_polynomial(args.disc)
        return _report(d=str(args.disc), kind="hilbert", coefficients=[str(c) for c in coeffs]), EXIT_OK
    sub = orchestrator.subfield_polynomial(args.disc, args.q)
    return _report(kind="subfield", **sub.to_dict()), EXIT_OK


def cmd_decide(args, config, orchestrator):
    tower = _tower(args)
    decision = orchestrator.decide_dihedral(tower)
    code = EXIT_HYPOTHESES_NOT_MET if decision.verdict == "HypothesesNotMet" else EXIT_OK
    return _report(**decision.to_dict()), code


def cmd_classify_primes(args, config, orchestrator):
    tower = _tower(args)
    rows = [c.to_dict() for c in scan_primes(tower, args.bound)]
    return _report(tower=tower.to_dict(), bound=str(args.bound), primes=rows), EXIT_OK


def cmd_minimal_s(args, config, orchestrator):
    tower = _tower(args)
    primes, entries = minimal_S(tower)
    return _report(tower=tower.to_dict(), minimal_S=["inf"] + [str(ell) for ell in primes],
                   entries=[e.to_dict() for e in entries]), EXIT_OK


def cmd_table(args, config, orchestrator):
    df = build_table(args.table, args.bound, config)
    report = _report(table=args.table, bound=str(args.bound), rows=df.to_dict(orient="records"),
                     summary=summarize(df, args.table).to_dict(orient="records"))
    return report, EXIT_OK, df


def _verdict_summary(rep, verdict):
    return {
        "dihedral": verdict.dihedral,
        "image_order": rep.image.order,
        "gamma_order": len(rep.gamma),
        "modules": [str(label) for label in verdict.classification.labels],
    }


def cmd_rep_check(args, config, orchestrator):
    run_all = not (args.s4_example or args.remark_example or args.nonsplit)
    checks = {}
    if run_all or args.s4_example:
        rep = s4_representation()
        checks["s4"] = _verdict_summary(rep, s4_example(rep))
    if run_all or args.remark_example:
        rep = remark_fixture()
        low = truncate(rep, 2)
        checks["remark"] = _verdict_summary(rep, is_dihedral_deformation(rep))
        checks["remark"]["truncated_dihedral"] = is_dihedral_deformation(low).dihedral
    if run_all or args.nonsplit:
        data = DihedralGroupData.standard(2, 3, c_order=3)
        split = build_infinitesimal_lift(data, C_ONE)
        nonsplit = build_infinitesimal_lift(data, C_ONE, "nonsplit")
        checks["nonsplit"] = {
            "n": data.c_order,
            "split_max_order": max_order_above_sigma(split),
            "nonsplit_max_order": max_order_above_sigma(nonsplit),
        }
    return _report(checks=checks), EXIT_OK


COMMANDS = {
    "classgroup": cmd_classgroup,
    "classpoly": cmd_classpoly,
    "decide": cmd_decide,
    "classify-primes": cmd_classify_primes,
    "minimal-s": cmd_minimal_s,
    "table": cmd_table,
    "rep-check": cmd_rep_check,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bound-policy", choices=BOUND_POLICIES, help="Class group certification policy.")
    common.add_argument("--precision", type=int, help="Starting precision in bits for CM evaluation.")
    common.add_argument("--jobs", type=int, help="Worker processes.")
    common.add_argument("--cache-dir", help="Cache directory (default: $DIHEDRALIS_CACHE or data/cache).")
    common.add_argument("--seed", type=int, help="Random seed.")
    common.add_argument("--format", choices=OUTPUT_FORMATS, default="json", help="Output format.")
    common.add_argument("--save", action="store_true", help="Also write the report under data/reports/.")
    common.add_argument("--verbose", action="store_true", help="Keep INFO logging on the console.")

    tower = argparse.ArgumentParser(add_help=False)
    tower.add_argument("--disc", type=int, help="Negative fundamental discriminant of L.")
    tower.add_argument("--q", type=int, help="Odd prime exactly dividing h(L).")
    tower.add_argument("--p", type=int, help="Coefficient characteristic.")
    tower.add_argument("--b", type=int, default=1, help="Exponent selecting chi among the order-q characters.")
    tower.add_argument("--ramified-set", default="", help="Comma separated primes allowed to ramify.")

    parser = argparse.ArgumentParser(prog="dihedralis", description="Dihedral deformation decisions for towers Q < L < M.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("classgroup", parents=[common, tower], help="Class group of L or of a number field.")
    p.add_argument("--poly", help="Defining polynomial, e.g. 'x^2+23'.")
    subparsers.add_parser("classpoly", parents=[common, tower], help="Hilbert class polynomial or the degree-2q polynomial of M.")
    subparsers.add_parser("decide", parents=[common, tower], help="Dihedrality of the universal deformation.")
    p = subparsers.add_parser("classify-primes", parents=[common, tower], help="Sort primes below a bound into S1, S2, S3.")
    p.add_argument("--bound", type=int, default=100)
    subparsers.add_parser("minimal-s", parents=[common, tower], help="Ramification set of the minimal deformation problem.")
    p = subparsers.add_parser("table", parents=[common], help="Case table, e.g. h15-q3-p5 or prime-disc(3,5).")
    p.add_argument("--table", required=True)
    p.add_argument("--bound", type=int, required=True)
    p = subparsers.add_parser("rep-check", parents=[common], help="Representation-theory fixtures.")
    p.add_argument("--s4-example", action="store_true")
    p.add_argument("--remark-example", action="store_true")
    p.add_argument("--nonsplit", action="store_true")
    return parser


def emit(report, fmt, df=None):
    if df is not None and fmt != "json":
        text = render(df, fmt)
        if fmt == "md":
            text += "\n\n" + pd.DataFrame(report["summary"]).to_markdown(index=False)
        return text
    return json.dumps(report, indent=2, sort_keys=True)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if not args.verbose:
        set_console_level(logging.WARNING)
    config = load_config(
        command=args.command,
        bound_policy=args.bound_policy,
        precision=args.precision,
        jobs=args.jobs,
        cache_dir=args.cache_dir,
        seed=args.seed,
        output_format=args.format,
    )
    orchestrator = DihedralOrchestrator(config, ResultCache(config.cache_dir))

    try:
        result = COMMANDS[args.command](args, config, orchestrator)
    except StageError as e:
        print(f"{e.error_name}: {e}", file=sys.stderr)
        return EXIT_ENGINE_ERROR
    except DihedralisError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ENGINE_ERROR
    except ValueError as e:
        print(f"ValueError: {e}", file=sys.stderr)
        return EXIT_ENGINE_ERROR

    report, code = result[0], result[1]
    df = result[2] if len(result) > 2 else None
    print(emit(report, config.output_format, df))
    if args.save:
        save_report(report, prefix=args.command.replace("-", "_"))
    return code


if __name__ == "__main__":
    sys.exit(main())
