"""Command-line interface: ``gpdgof {test,table,power,ingest}``.

Exit codes: 0 = fail to reject (or success), 1 = reject, 2 = usage or data error.
"""

import argparse
import json
import math
import sys

from . import montecarlo
from .core import AltSpec
from .datasets import load
from .estimate import CensoredSample, estimate_aml, estimate_censored, estimate_cmm
from .exceptions import DataError, SimulationIntegrityError
from .gof import (CENSORED, NEGATIVE, POSITIVE, REJECT, FAIL_TO_REJECT, censored_test,
                  test_negative, test_positive)

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_ERROR = 2


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _load(args):
    ds = load(args.data)
    if args.threshold is not None:
        ds = ds.exceedances(args.threshold)
    return ds


def _dataset_info(ds):
    return {"name": ds.name, "sha256": ds.digest, "n": ds.n, "threshold": ds.threshold,
            "provenance": ds.provenance}


# -- test ----------------------------------------------------------------------

def _run_case(case, ds, args, seed):
    if case == "censored":
        cs = ds.censored if ds.is_censored else CensoredSample.uncensored(ds.values)
        return censored_test(cs, args.alpha, args.variance_form)
    if ds.is_censored:
        raise UsageError(f"case {case!r} needs complete data; use --case censored")
    if case == "negative":
        return test_negative(ds.values, args.alpha, args.B, seed, args.bootstrap,
                             args.sided, args.jobs)
    return test_positive(ds.values, args.alpha, args.B, seed, args.bootstrap,
                         n_jobs=args.jobs)


def _format_report(rep):
    lines = [f"case: {rep.case}",
             f"  statistic: {rep.statistic:.6g}",
             f"  theta: {rep.estimates.theta:.6g}  beta: {rep.estimates.beta:.6g}"]
    if rep.kappa is not None:
        lines.append(f"  kappa: {rep.kappa:.6g}")
    for label, value in rep.critical_values.items():
        lines.append(f"  critical[{label}]: {value:.6g}")
    lines.append(f"  p-value: {rep.p_value:.4g}")
    lines.append(f"  decision at alpha={rep.alpha:g}: {rep.decision}")
    return "\n".join(lines)


def cmd_test(args):
    ds = _load(args)
    seed = montecarlo.resolve_seed(args.seed)
    case = args.case
    if case == "auto" and ds.is_censored:
        case = "censored"
    if case == "auto":
        # negative branch first; overall rejection needs both branches to reject
        reports = [_run_case("negative", ds, args, seed), _run_case("positive", ds, args, seed)]
        decision = REJECT if all(r.rejected for r in reports) else FAIL_TO_REJECT
    else:
        reports = [_run_case(case, ds, args, seed)]
        decision = reports[0].decision
    uses_seed = any(r.case != CENSORED for r in reports)
    if args.format == "json":
        if len(reports) == 1:
            out = reports[0].to_dict()
        else:
            out = {"case": "auto", "decision": decision, "alpha": args.alpha,
                   "branches": {r.case: r.to_dict() for r in reports}}
        out["dataset"] = _dataset_info(ds)
        if uses_seed:
            out["seed"] = seed
        print(json.dumps(out, indent=2))
    else:
        print(f"data: {ds.name} (n={ds.n}, sha256={ds.digest[:12]})")
        if uses_seed:
            print(f"seed: {seed}")
        for rep in reports:
            print(_format_report(rep))
        if len(reports) > 1:
            print(f"overall decision: {decision}")
    return EXIT_REJECT if decision == REJECT else EXIT_OK


# -- table ---------------------------------------------------------------------

def cmd_table(args):
    betas = args.betas
    if betas is None:
        betas = montecarlo.NEGATIVE_BETAS if args.case == "negative" else montecarlo.POSITIVE_BETAS
    if any((b < 0) != (args.case == "negative") for b in betas):
        raise UsageError(f"--betas must match --case {args.case}")
    if args.R < 100:
        raise UsageError("--R must be >= 100")
    table = montecarlo.build_table(betas, args.ns, args.alpha, args.R, args.seed,
                                   n_jobs=args.jobs)
    text = table.to_csv(args.out)
    meta = json.dumps(table.meta, indent=2, sort_keys=True)
    if "warning" in table.meta:
        print(f"warning: {table.meta['warning']}", file=sys.stderr)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out + ".meta.json", "w") as fh:
            fh.write(meta + "\n")
    return EXIT_OK


# -- power ---------------------------------------------------------------------

def _parse_alt(text):
    try:
        return AltSpec.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None


def cmd_power(args):
    if args.alt:
        if not args.n or args.beta_case is None:
            raise UsageError("--alt needs --n and --beta-case")
        alts = [_parse_alt(a) for a in args.alt]
        cells = [(n, b) for b in args.beta_case for n in args.n]
    else:
        preset = montecarlo.POWER_PRESETS[args.preset]
        alts = [_parse_alt(a) for a in preset["alternatives"]]
        cells = list(preset["cells"])
    if args.R < 100:
        raise UsageError("--R must be >= 100")
    critical = {}
    for n, beta in cells:
        critical[(n, beta)] = montecarlo.critical_value(beta, n, args.alpha, args.null_R,
                                                        args.seed, n_jobs=args.jobs)
    results = [montecarlo.power_study(alt, n, beta, args.alpha, args.R, args.seed,
                                      critical=critical[(n, beta)], n_jobs=args.jobs)
               for alt in alts for n, beta in cells]
    text = montecarlo.power_csv(results, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


# -- ingest --------------------------------------------------------------------

def _try(fn, *a):
    try:
        return fn(*a)
    except ValueError as exc:
        return exc


def cmd_ingest(args):
    ds = _load(args)
    print(f"name: {ds.name}")
    print(f"provenance: {ds.provenance}")
    print(f"sha256: {ds.digest}")
    if ds.threshold is not None:
        print(f"threshold: {ds.threshold:g} (exceedances x - threshold for x >= threshold)")
    x = ds.censored.times if ds.is_censored else ds.values
    print(f"n: {ds.n}")
    print(f"min: {x.min():.6g}  max: {x.max():.6g}  mean: {math.fsum(x) / x.shape[0]:.6g}")
    if ds.is_censored:
        print(f"events: {ds.censored.n_events}  censored: {ds.n - ds.censored.n_events}")
        est = _try(estimate_censored, ds.censored)
        print("IPCW CMM: " + (str(est) if isinstance(est, Exception) else
                              f"theta={est.theta_c:.6g} beta={est.beta_c:.6g}"))
        return EXIT_OK
    for label, fn in (("CMM", estimate_cmm), ("AML", estimate_aml)):
        est = _try(fn, x)
        print(f"{label}: " + (f"unavailable ({est})" if isinstance(est, Exception) else
                              f"theta={est.theta:.6g} beta={est.beta:.6g}"))
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _add_data_args(p):
    p.add_argument("--data", required=True,
                   help="bundled dataset name (ozone, bilbao) or CSV path")
    p.add_argument("--threshold", type=float,
                   help="keep x >= threshold and analyse the exceedances x - threshold")


def build_parser():
    parser = argparse.ArgumentParser(prog="gpdgof",
                                     description="Goodness-of-fit tests for the GPD.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run a goodness-of-fit test")
    _add_data_args(p)
    p.add_argument("--case", choices=("auto", "negative", "positive", "censored"),
                   default="auto")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--B", type=int, default=10_000, help="bootstrap replications")
    p.add_argument("--seed", type=int, help="master seed (random and printed if omitted)")
    p.add_argument("--bootstrap", choices=montecarlo.BOOTSTRAP_METHODS, default="parametric")
    p.add_argument("--sided", choices=("two-sided", "upper"), default="two-sided")
    p.add_argument("--variance-form", choices=("consistent", "printed"), default="consistent")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("table", help="simulate a critical-value table")
    p.add_argument("--case", choices=("negative", "positive"), default="negative")
    p.add_argument("--betas", type=_float_list)
    p.add_argument("--ns", type=_int_list, default=list(montecarlo.TABLE_NS))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--R", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("power", help="estimate power against alternatives")
    p.add_argument("--alt", action="append", help='alternative such as "Weibull(2,1)"')
    p.add_argument("--n", type=_int_list)
    p.add_argument("--beta-case", type=_float_list)
    p.add_argument("--preset", choices=sorted(montecarlo.POWER_PRESETS),
                   default="exp-uniform", help="alternative set used when --alt is absent")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--R", type=int, default=1000)
    p.add_argument("--null-R", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("ingest", help="parse a dataset and summarise it")
    _add_data_args(p)
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DataError, SimulationIntegrityError, ValueError, TypeError,
            ArithmeticError, OSError) as exc:
        print(f"gpdgof {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
