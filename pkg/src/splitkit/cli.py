"""Command line interface: ``splitkit run|sweep|validate|gen``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from .bench import (
    COLUMNS,
    ExperimentConfig,
    InfeasibleParameters,
    check_config,
    run_experiment,
    sweep,
)
from .errors import SplitkitError
from .spcp import gen_spcp_instance, save_instance

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_NOT_CONVERGED = 0, 1, 2, 3

# flag name -> (ExperimentConfig field, type)
CONFIG_FLAGS = {
    "method": ("method", str),
    "m": ("m", int),
    "rank-frac": ("rank_frac", float),
    "sparsity-frac": ("sparsity_frac", float),
    "gamma": ("gamma", float),
    "lambda": ("lam", float),
    "alpha": ("alpha", float),
    "theta": ("theta", float),
    "tau": ("tau", float),
    "eps": ("eps", float),
    "max-iter": ("max_iter", int),
    "seed": ("seed", int),
    "repeats": ("repeats", int),
    "beta1": ("beta1", float),
    "noise-std": ("noise_std", float),
    "eps-bar": ("eps_bar", float),
    "alpha-cap": ("alpha_cap", float),
}


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment, keys may use ``-`` or ``_``."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SplitkitError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("_", "-")
            if key not in CONFIG_FLAGS:
                raise SplitkitError(f"{path}:{lineno}: unknown key {key!r}")
            field, typ = CONFIG_FLAGS[key]
            try:
                values[field] = typ(value)
            except ValueError:
                raise SplitkitError(f"{path}:{lineno}: bad value {value!r} for {key}")
    return values


def build_config(args) -> ExperimentConfig:
    """Reference settings of the method, then the config file, then flags."""
    given = read_config_file(args.config) if args.config else {}
    for flag, (field, _) in CONFIG_FLAGS.items():
        v = getattr(args, field)
        if v is not None:
            given[field] = v
    method = given.pop("method", "ama")
    if args.no_reference:
        return ExperimentConfig(method=method, **given)
    return ExperimentConfig.reference(method, **given)


def _add_config_flags(p):
    for flag, (field, typ) in CONFIG_FLAGS.items():
        p.add_argument(f"--{flag}", dest=field, type=typ, default=None)
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument(
        "--no-reference", action="store_true",
        help="do not fill method parameters with the reference settings",
    )


def _add_output_flags(p):
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--output", "-o", help="write rows here instead of stdout")
    p.add_argument("--strict", action="store_true", help="exit 3 if any run does not converge")


def build_parser():
    parser = argparse.ArgumentParser(prog="splitkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment (with repeats)")
    _add_config_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("sweep", help="run one experiment per value of a parameter")
    _add_config_flags(p)
    _add_output_flags(p)
    p.add_argument("--axis", required=True, help="config field to vary, e.g. gamma or lambda")
    p.add_argument("--values", required=True, help="comma separated values")

    p = sub.add_parser("validate", help="check parameters against the convergence conditions")
    _add_config_flags(p)

    p = sub.add_parser("gen", help="write a synthetic instance file")
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--rank-frac", type=float, default=0.05)
    p.add_argument("--sparsity-frac", type=float, default=0.05)
    p.add_argument("--noise-std", type=float, default=1e-5)
    p.add_argument("--beta1", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", required=True)
    return parser


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_rows(rows, fmt, out):
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            method = row["method"] if row.get("seed") != "median" else f"{row['method']}/median"
            writer.writerow([method] + [_fmt(row[c]) for c in COLUMNS[1:]])
    else:
        for row in rows:
            clean = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}
            out.write(json.dumps(clean) + "\n")


def _emit(rows, args):
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_rows(rows, args.format, fh)
    else:
        write_rows(rows, args.format, sys.stdout)
    if args.strict and not all(r["converged"] for r in rows):
        print("error: at least one run did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _parse_values(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            out.append(int(tok) if tok.lstrip("-").isdigit() else float(tok))
    if not out:
        raise SplitkitError("--values is empty")
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            inst = gen_spcp_instance(
                args.m, args.rank_frac, args.sparsity_frac, args.noise_std, args.beta1, args.seed
            )
            save_instance(inst, args.output)
            print(f"wrote {args.output}: m={inst.m} r={inst.r} nnz(S)={inst.support_size}")
            return EXIT_OK
        cfg = build_config(args)
        if args.command == "validate":
            report = check_config(cfg)
            print(report.describe() if report is not None else f"{cfg.method}: parameters admissible")
            return EXIT_OK
        if args.command == "run":
            return _emit(run_experiment(cfg), args)
        return _emit(sweep(cfg, args.axis, _parse_values(args.values)), args)
    except InfeasibleParameters as exc:
        print(f"error: infeasible parameters: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(exc.report.describe(), file=sys.stderr)
        return EXIT_INFEASIBLE
    except SplitkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE if isinstance(exc, ValueError) else EXIT_ERROR


__all__ = ["main", "build_parser", "read_config_file", "write_rows"]
