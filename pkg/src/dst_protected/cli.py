"""Command-line front end.

Exit status: 0 on success, 1 when two exact routes disagree, 2 on usage or
input errors. Exact rationals print as ``p/q``; decimals derived from exact
values print with a fixed number of places (``--digits`` or 15).

CSV columns per command:

  exact     n,l_n,ratio[,agree]
  constant  constant,digits,truncation_index,tail_bound
  simulate  n,statistic,trials,seed,mean,variance,std_error,ci_low,ci_high,
            ratio,exact,exact_decimal,z
  compare   n,exact_ratio,constant,residual,mc_ratio,mc_ci_low,mc_ci_high,
            log2n_frac
  build     nodes,leaves,k,protected,protected_labels,tree
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import mpmath

from . import __version__, asymptotics, dst_sim, exact_sequence
from .qseries import PrecisionConfig, PrecisionError, fixed

RATIO_DIGITS = 15
FLOAT_DIGITS = 15


class UsageError(Exception):
    pass


def _float(x: float) -> str:
    return format(x, f".{FLOAT_DIGITS}g")


def _exact(x: Fraction) -> str:
    return str(x)


def render(record: dict, fmt: str) -> str:
    rows = record["results"]
    if isinstance(rows, dict):
        rows = [rows]
    if fmt == "json":
        return json.dumps(record, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _record(command, parameters, results, **metadata):
    meta = {"version": __version__}
    meta.update(metadata)
    return {"command": command, "parameters": parameters, "results": results, "metadata": meta}


def cmd_exact(args):
    if args.n < 0:
        raise UsageError("--n must be non-negative")
    if args.n > args.n_cap:
        raise UsageError(f"--n {args.n} exceeds --n-cap {args.n_cap}")
    tables = {}
    if args.method in ("recursion", "both"):
        tables["recursion"] = exact_sequence.l_sequence_recursion(args.n)
    if args.method in ("closed-form", "both"):
        tables["closed-form"] = exact_sequence.l_closed_form_table(args.n)
    primary = tables.get("recursion") or tables["closed-form"]
    rows = []
    disagreements = 0
    for n, value in enumerate(primary.values):
        row = {
            "n": str(n),
            "l_n": _exact(value),
            "ratio": fixed(value / n, RATIO_DIGITS) if n else "",
        }
        if args.method == "both":
            agree = tables["recursion"][n] == tables["closed-form"][n]
            disagreements += not agree
            row["agree"] = "true" if agree else "false"
        rows.append(row)
    params = {"n": args.n, "method": args.method}
    record = _record("exact", params, rows, ratio_digits=RATIO_DIGITS)
    return record, 1 if disagreements else 0


def cmd_constant(args):
    if not 1 <= args.digits <= 1000:
        raise UsageError("--digits must be within 1..1000")
    cfg = PrecisionConfig(digits=args.digits)
    const = asymptotics.protected_constant(cfg)
    results = {
        "constant": fixed(const.value, args.digits),
        "digits": str(args.digits),
        "truncation_index": str(const.truncation_index),
        "tail_bound": mpmath.nstr(const.tail_bound, 4),
    }
    return _record("constant", {"digits": args.digits}, results, precision=args.digits), 0


def _exact_reference(n, statistic, limit):
    if n > limit:
        return None
    if statistic.kind == "leaves":
        return exact_sequence.expected_leaves(n)[n]
    if statistic.k == 0:
        return Fraction(n)
    if statistic.k == 1:
        return n - exact_sequence.expected_leaves(n)[n]
    if statistic.k == 2:
        if n < 2:
            return Fraction(0)
        return exact_sequence.l_from_m(exact_sequence.m_sequence_recursion(n), n)
    return None


def cmd_simulate(args):
    if args.n < 0 or args.trials < 1:
        raise UsageError("need --n >= 0 and --trials >= 1")
    try:
        statistic = dst_sim.Statistic.parse(args.statistic, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    mode = dst_sim.Mode(args.mode)
    stats = dst_sim.monte_carlo(args.n, args.trials, args.seed, statistic, mode=mode, workers=args.workers)
    exact = _exact_reference(args.n, statistic, args.exact_max_n)
    z = ""
    if exact is not None:
        diff = stats.mean - float(exact)
        if stats.std_error > 0:
            z = _float(diff / stats.std_error)
        else:
            z = "0" if diff == 0 else ("inf" if diff > 0 else "-inf")
    results = {
        "n": str(args.n),
        "statistic": statistic.name,
        "trials": str(stats.trials),
        "seed": str(stats.seed),
        "mean": _float(stats.mean),
        "variance": _float(stats.variance),
        "std_error": _float(stats.std_error),
        "ci_low": _float(stats.ci_low),
        "ci_high": _float(stats.ci_high),
        "ratio": _float(stats.mean / args.n) if args.n else "",
        "exact": _exact(exact) if exact is not None else "",
        "exact_decimal": fixed(exact, RATIO_DIGITS) if exact is not None else "",
        "z": z,
    }
    params = {"n": args.n, "trials": args.trials, "seed": args.seed, "statistic": statistic.name, "mode": mode.value}
    return _record("simulate", params, results, seed=args.seed, float_digits=FLOAT_DIGITS), 0


def _parse_n_list(text):
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise UsageError(f"bad --n-list {text!r}") from exc
    if not values:
        raise UsageError("--n-list is empty")
    if any(v < 1 for v in values):
        raise UsageError("--n-list entries must be >= 1")
    return values


def cmd_compare(args):
    Ns = _parse_n_list(args.n_list)
    if max(Ns) > args.n_cap:
        raise UsageError(f"--n-list entry exceeds --n-cap {args.n_cap}")
    cfg = PrecisionConfig(digits=args.digits)
    rows_out = []
    for row in asymptotics.residual_table(Ns, cfg):
        stats = dst_sim.monte_carlo(row.N, args.trials, args.seed, workers=args.workers)
        rows_out.append(
            {
                "n": str(row.N),
                "exact_ratio": fixed(row.exact_ratio, RATIO_DIGITS),
                "constant": fixed(row.constant, RATIO_DIGITS),
                "residual": fixed(row.residual, RATIO_DIGITS),
                "mc_ratio": _float(stats.mean / row.N),
                "mc_ci_low": _float(stats.ci_low / row.N),
                "mc_ci_high": _float(stats.ci_high / row.N),
                "log2n_frac": _float(row.log2N_frac),
            }
        )
    params = {"n_list": Ns, "trials": args.trials, "seed": args.seed, "digits": args.digits}
    return _record("compare", params, rows_out, seed=args.seed, precision=args.digits), 0


def cmd_build(args):
    if args.k < 0:
        raise UsageError("--k must be non-negative")
    try:
        items = dst_sim.read_strings(args.input)
        if not items:
            raise UsageError(f"{args.input}: no records")
        tree = dst_sim.build_from_strings(items)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    except (dst_sim.StringFileError, dst_sim.BitsExhausted) as exc:
        raise UsageError(f"{args.input}: {exc}") from exc
    protected = dst_sim.k_protected_nodes(tree, args.k)
    labels = sorted(n.label for n in protected if n.label is not None)
    results = {
        "nodes": str(tree.size),
        "leaves": str(dst_sim.count_leaves(tree)),
        "k": str(args.k),
        "protected": str(len(protected)),
        "protected_labels": " ".join(labels),
        "tree": tree.render(),
    }
    return _record("build", {"input": str(args.input), "k": args.k}, results), 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dst-protected",
        description="Expected 2-protected nodes in random digital search trees.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="CSV columns" + __doc__.split("CSV columns", 1)[1],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.set_defaults(func=func)
        return p

    p = add("exact", cmd_exact, "exact l_n for n = 0..N; columns n,l_n,ratio[,agree]")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("recursion", "closed-form", "both"), default="recursion")
    p.add_argument("--n-cap", type=int, default=2000)

    p = add("constant", cmd_constant, "asymptotic constant C; columns constant,digits,truncation_index,tail_bound")
    p.add_argument("--digits", type=int, default=30)

    p = add("simulate", cmd_simulate, "Monte Carlo summary for one n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--statistic", default="protected2", help="protected2, protectedK, protected (uses --k), leaves")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--mode", choices=[m.value for m in dst_sim.Mode], default=dst_sim.Mode.SPLIT.value)
    p.add_argument("--workers", type=int, default=1, help="threads; does not change results")
    p.add_argument("--exact-max-n", type=int, default=600, help="largest n for the exact reference value")

    p = add("compare", cmd_compare, "exact, asymptotic and simulated l_N/N side by side")
    p.add_argument("--n-list", required=True, help="comma-separated N values")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--digits", type=int, default=30)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-cap", type=int, default=2000)

    p = add("build", cmd_build, "build a DST from a string file and count protected nodes")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=2)
    return parser


def main(argv=None) -> int:
    # exact numerators of l_n run to hundreds of thousands of digits
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record, status = args.func(args)
    except (UsageError, PrecisionError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render(record, args.format))
    return status


if __name__ == "__main__":
    sys.exit(main())
