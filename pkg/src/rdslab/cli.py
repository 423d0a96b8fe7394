"""Command line entry point: ``rdslab <subcommand> ...``.

Exit codes: 0 success, 1 usage or invalid input, 2 infeasible configuration,
3 data or parse error. Data goes to stdout or ``--out``; logs go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acm import DegreeDistributionSpec, generate_acm
from .blockmodel import ScenarioConfig, generate_block_network
from .errors import (DataError, DegenerateNetworkError, InfeasibleAlphaError,
                     InfeasibleConfigError, InputError, RdsLabError, UndefinedWeightError)
from .estimators import estimate_inclusion, hajek_many, mare
from .experiment import ExperimentPlan, build_default_plan, derive_seed, run_plan
from .ingest import apply_recipe, assign_status_prefix, canonicalize, read_snap_edgelist
from .network import network_stats, read_network, write_network
from .samplers import SampleRecord, draw_sample

log = logging.getLogger("rdslab")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen_acm(a) -> int:
    spec = DegreeDistributionSpec.load(a.spec)
    net, report = generate_acm(spec, a.n, a.n1, np.random.default_rng(a.seed), return_report=True)
    write_network(net, a.out)
    rep_path = a.report or str(Path(a.out).with_suffix(".report.json"))
    _emit(report.to_dict(), rep_path)
    log.info("wrote %s (%d nodes, %d entries)", a.out, net.n, net.n_entries)
    return EXIT_OK


def cmd_gen_block(a) -> int:
    cfg = ScenarioConfig(n=a.n, n1=a.n1, lam=a.lam, h=a.h, m=a.m, w=a.w, alpha=a.alpha, seed=a.seed)
    net = generate_block_network(cfg)
    write_network(net, a.out)
    log.info("wrote %s (%d nodes, %d entries)", a.out, net.n, net.n_entries)
    return EXIT_OK


def cmd_sample(a) -> int:
    net = read_network(a.net)
    lines = []
    for r in range(a.reps):
        seed = derive_seed(a.seed, r)
        rec = draw_sample(net, a.sampler, a.n, seed=seed, n_seeds=a.seeds, n_coupons=a.coupons)
        lines.append(json.dumps(rec.to_dict()))
    text = "\n".join(lines) + "\n"
    if a.out:
        Path(a.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _read_records(path) -> list[SampleRecord]:
    recs = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if line.strip():
                    try:
                        recs.append(SampleRecord.from_dict(json.loads(line)))
                    except (json.JSONDecodeError, InputError) as exc:
                        raise DataError(f"{path}:{lineno}: {exc}") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    return recs


def cmd_estimate(a) -> int:
    recs = _read_records(a.records)
    net = read_network(a.net) if a.net else None
    n = a.n if a.n is not None else (net.n if net else None)
    if n is None:
        raise InputError("give --n or --net")
    est = estimate_inclusion(recs, n)
    summary = {"sampler": est.sampler, "replicates": est.n_samp, "n": n,
               "pi_sum": float(est.pi.sum()), "zero_pi": int((est.pi == 0).sum())}
    if a.reference:
        ref = estimate_inclusion(_read_records(a.reference), n)
        res = mare(est, ref)
        summary["mare"] = {"value": res.value, "n_prime": res.n_prime, "reference": ref.sampler}
    if net is not None:
        weighted = _read_records(a.hajek_on) if a.hajek_on else recs
        summary["hajek"] = hajek_many(weighted, est, net.status, net.n1 / net.n).summary
    if a.out:
        with open(a.out, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["node_id", "pi_hat"])
            for i, p in enumerate(est.pi):
                wr.writerow([i, repr(float(p))])
    _emit(summary, a.summary)
    return EXIT_OK


def cmd_experiment(a) -> int:
    if a.default:
        plan = build_default_plan(a.scale, base_seed=a.seed, out_dir=a.out_dir or "results")
    else:
        plan = ExperimentPlan.load(a.plan)
        if a.out_dir:
            plan.out_dir = a.out_dir
    bundle = run_plan(plan, jobs=a.jobs)
    _emit({"out_dir": str(bundle.out_dir), "cells_computed": bundle.computed,
           "mare_rows": len(bundle.mare_rows), "failures": len(bundle.failures)}, None)
    return EXIT_OK


def _parse_thin(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise InputError(f"--thin expects k,l,upper|lower,fraction; got {text!r}")
    try:
        return (int(parts[0]), int(parts[1])), parts[2], float(parts[3])
    except ValueError:
        raise InputError(f"bad --thin value {text!r}") from None


def cmd_ingest(a) -> int:
    raw = read_snap_edgelist(a.inp)
    net, report = canonicalize(raw)
    if a.infect_first is not None:
        net = net.with_status(assign_status_prefix(net, a.infect_first))
    rng = np.random.default_rng(a.seed)
    steps = [_parse_thin(t) for t in a.thin or []]
    if a.recipe:
        net = apply_recipe(net, a.recipe, rng)
    if steps:
        net = apply_recipe(net, steps, rng)
    write_network(net, a.out)
    log.info("ingest: %s", json.dumps(report.to_dict()))
    return EXIT_OK


def cmd_stats(a) -> int:
    net = read_network(a.net)
    _emit(network_stats(net).to_dict(), a.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rdslab", description="RDS inclusion-probability approximations on "
                                           "partially directed networks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="JSON file whose keys mirror flag names")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default) or ERROR")
    p.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen-acm", help="sample a network from the attributed configuration model")
    s.add_argument("--spec", required=True, help="degree distribution JSON")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--n1", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--report", help="simplification report path (default: <out>.report.json)")
    s.set_defaults(func=cmd_gen_acm)

    s = sub.add_parser("gen-block", help="two-block network with target h, m, w, alpha")
    for name in ("n", "n1"):
        s.add_argument(f"--{name}", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    for name in ("h", "m", "w", "alpha"):
        s.add_argument(f"--{name}", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_block)

    s = sub.add_parser("sample", help="draw replicate samples as JSON lines")
    s.add_argument("--net", required=True)
    s.add_argument("--sampler", required=True, choices=["rds", "wrpi", "ss-in", "ss-pi", "ss-pa"])
    s.add_argument("--n", type=int, required=True, help="sample size")
    s.add_argument("--seeds", type=int, default=10, help="RDS seed count")
    s.add_argument("--coupons", type=int, default=2, help="RDS coupons per respondent")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("estimate", help="inclusion frequencies, MARE and Hajek summaries")
    s.add_argument("--records", required=True, help="JSON-lines sample records")
    s.add_argument("--n", type=int, help="population size (taken from --net if omitted)")
    s.add_argument("--net", help="network file; enables Hajek estimates")
    s.add_argument("--reference", help="RDS records for MARE")
    s.add_argument("--hajek-on", help="records to weight (default: --records)")
    s.add_argument("--out", help="CSV of node_id, pi_hat")
    s.add_argument("--summary", help="JSON summary path (default: stdout)")
    s.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("experiment", help="run or resume a scenario grid")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--plan", help="plan JSON")
    g.add_argument("--default", action="store_true", help="full 36-network grid")
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--jobs", type=int, default=None)
    s.add_argument("--seed", type=int, default=0, help="base seed for --default")
    s.add_argument("--out-dir", default=None)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("ingest", help="SNAP edge list to network JSON")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--infect-first", type=int)
    s.add_argument("--thin", action="append", metavar="K,L,TRIANGLE,FRACTION")
    s.add_argument("--recipe", help="named thinning recipe (upper90, lower70)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("stats", help="print h, m, w, alpha, lambda as JSON")
    s.add_argument("--net", required=True)
    s.add_argument("--out")
    s.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")
    s.set_defaults(func=cmd_stats)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Use config-file values as defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load config {known.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise DataError("config file must hold a JSON object")
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd = next((t for t in rest if t in sub_action.choices), None)
    if cmd is None:
        return
    sp = sub_action.choices[cmd]
    by_flag = {opt.lstrip("-"): act for act in sp._actions for opt in act.option_strings}
    for key, value in cfg.items():
        act = by_flag.get(key) or by_flag.get(key.replace("_", "-"))
        if act is None:
            raise InputError(f"config key {key!r} is not a flag of {cmd}")
        sp.set_defaults(**{act.dest: value})
        act.required = False
    # a config-supplied member of a required group satisfies the group
    for grp in sp._mutually_exclusive_groups:
        if any(by_flag.get(k) in grp._group_actions for k in cfg):
            grp.required = False


def _setup_logging(level: str | None) -> None:
    level = (level or os.environ.get("RDSLAB_LOG_LEVEL") or "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise InputError(f"unknown log level {level!r}")
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (InfeasibleConfigError, DegenerateNetworkError, UndefinedWeightError)):
        return EXIT_INFEASIBLE
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_USAGE


def _report(exc: Exception, code: int, as_json: bool) -> None:
    if as_json:
        obj = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        if isinstance(exc, InfeasibleAlphaError):
            obj["min_alpha"] = exc.min_alpha
        line = getattr(exc, "line", None)
        if line is not None:
            obj["line"] = line
        print(json.dumps(obj), file=sys.stderr)
    else:
        print(f"rdslab: {exc}", file=sys.stderr)


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    json_errors = "--json-errors" in argv
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        _setup_logging(args.log_level)
        if getattr(args, "jobs", "absent") is None:
            args.jobs = int(os.environ.get("RDSLAB_JOBS", "1"))
        if getattr(args, "jobs", 1) < 1:
            raise InputError("--jobs must be at least 1")
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        _report(exc, EXIT_USAGE, json_errors)
        return EXIT_USAGE
    except (RdsLabError, ValueError) as exc:
        code = _exit_code(exc)
        _report(exc, code, json_errors)
        return code
    except OSError as exc:
        _report(exc, EXIT_DATA, json_errors)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
