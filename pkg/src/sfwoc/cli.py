"""Command-line entry point: ``sfwoc <command> ...``.

Exit codes: 0 success, 1 usage or other error, 2 invalid instance,
3 enumeration cap exceeded, 4 I/O error. The default output directory is
taken from ``SFWOC_OUTPUT_DIR`` (falling back to ``./sfwoc-out``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import battery, io
from .errors import EnumerationCapError
from .exact import DEFAULT_CAP, build_micp, enumerate_optimum
from .experiment import (
    ExperimentConfig,
    csv_text,
    fw_csv,
    report_bounds,
    run_experiment,
    run_sfw_reps,
    sfw_csv,
    timing_csv,
    write_files,
    SUMMARY_COLUMNS,
)
from .fw import fw_run
from .lpformat import export_lp
from .model import OcInstance, validate_instance

log = logging.getLogger("sfwoc")

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_CAP, EXIT_IO = 0, 1, 2, 3, 4


class _InvalidInstance(Exception):
    pass


def _default_out() -> Path:
    return Path(os.environ.get("SFWOC_OUTPUT_DIR", "sfwoc-out"))


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("instance (file, or battery generator parameters)")
    g.add_argument("--instance", type=Path, help="instance JSON file; overrides the generator flags")
    g.add_argument("--N", type=int, default=100)
    g.add_argument("--T", type=int, default=24)
    g.add_argument("--u-max", type=int, default=4)
    g.add_argument("--s-in", type=int, nargs=2, default=(0, 20), metavar=("LO", "HI"))
    g.add_argument("--s-max", type=int, nargs=2, default=(20, 40), metavar=("LO", "HI"))
    g.add_argument("--alpha", type=float, nargs=2, default=(1.0, 2.0), metavar=("LO", "HI"))
    g.add_argument("--beta", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    g.add_argument("--target-scale", type=float, default=1.5)
    g.add_argument("--smooth-target", action="store_true", help="drop the floor in the target profile")
    g.add_argument("--instance-seed", type=int, default=0)


def _params(a) -> battery.BatteryParams:
    return battery.BatteryParams(
        N=a.N,
        T=a.T,
        u_max=a.u_max,
        s_in_range=tuple(a.s_in),
        s_max_range=tuple(a.s_max),
        alpha_range=tuple(a.alpha),
        beta_range=tuple(a.beta),
        target_scale=a.target_scale,
        seed=a.instance_seed,
        smooth_target=a.smooth_target,
    )


def _load(a) -> OcInstance:
    instance = io.read_instance(a.instance) if a.instance else battery.generate(_params(a))
    problems = validate_instance(instance)
    if problems:
        for v in problems:
            print(v, file=sys.stderr)
        raise _InvalidInstance(f"{len(problems)} violation(s)")
    return instance


def _out(a) -> Path:
    return a.out if a.out is not None else _default_out()


def cmd_validate(a) -> int:
    instance = io.read_instance(a.instance) if a.instance else battery.generate(_params(a))
    problems = validate_instance(instance)
    for v in problems:
        print(v)
    print(f"{len(problems)} violation(s)")
    return EXIT_INVALID if problems else EXIT_OK


def cmd_generate(a) -> int:
    instance = battery.generate(_params(a))
    target = a.output if a.output is not None else _out(a) / "instance.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    io.write_instance(instance, target)
    print(target)
    return EXIT_OK


def cmd_fw(a) -> int:
    instance = _load(a)
    res = fw_run(instance, a.K, workers=a.workers)
    write_files(_out(a), {"fw.csv": fw_csv(res), "fw_timing.csv": timing_csv(res.records)})
    print(f"final relaxed value = {res.final_value!r}")
    print(f"certified lower bound = {res.certified_lower_bound!r}")
    first = next((r.k for r in res.records if r.gap < a.tol), None)
    print(f"first k with fw_gap < {a.tol:g}: {first if first is not None else 'none'} (advisory)")
    return EXIT_OK


def cmd_sfw(a) -> int:
    instance = _load(a)
    if a.reference is not None:
        reference, certified = a.reference, a.reference
    else:
        fw = fw_run(instance, a.fw_K, workers=a.workers)
        reference, certified = fw.final_value, fw.certified_lower_bound
    seeds = [a.seed + r for r in range(a.reps)]
    runs = run_sfw_reps(instance, a.K, a.n, seeds, reference, a.workers)
    files = {}
    for r, run in enumerate(runs):
        files[f"sfw_rep{r:03d}.csv"] = sfw_csv(run, reference)
        files[f"sfw_rep{r:03d}_timing.csv"] = timing_csv(run.records)
    files["sfw_summary.csv"] = csv_text(
        SUMMARY_COLUMNS, [(s, r.best_value, r.best_value - reference, r.best_value - certified) for s, r in zip(seeds, runs)]
    )
    write_files(_out(a), files)
    for s, r in zip(seeds, runs):
        print(f"seed {s}: J = {r.best_value!r}, gamma = {r.best_value - reference!r}")
    return EXIT_OK


def cmd_exact(a) -> int:
    instance = _load(a)
    value, x = enumerate_optimum(instance, cap=a.cap)
    payload = {
        "J_star": value,
        "trajectories": [
            {"states": list(tr.labels(ag)[0]), "controls": list(tr.labels(ag)[1])}
            for ag, tr in zip(instance.agents, x)
        ],
    }
    write_files(_out(a), {"exact.json": json.dumps(payload, indent=1) + "\n"})
    print(f"J* = {value!r}")
    return EXIT_OK


def cmd_export(a) -> int:
    instance = _load(a)
    model = build_micp(instance)
    print(f"d(m) = {model.n_variables}")
    if a.count_only:
        return EXIT_OK
    target = a.output if a.output is not None else _out(a) / "model.lp"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(export_lp(model))
    print(target)
    return EXIT_OK


def cmd_bounds(a) -> int:
    instance = _load(a)
    _, text = report_bounds(instance, a.coarse, a.K, a.n, a.eps)
    print(text, end="")
    return EXIT_OK


def cmd_experiment(a) -> int:
    instance = _load(a)
    cfg = ExperimentConfig(
        K=a.K, n=a.n, reps=a.reps, seed=a.seed, fw_K=a.fw_K, workers=a.workers,
        eps=a.eps, coarse=a.coarse, out_dir=_out(a),
    )
    res = run_experiment(instance, cfg)
    last = res.aggregate[-1]
    print(f"relaxed proxy = {res.fw.final_value!r}")
    print(f"final mean gamma = {last[1]!r}, std = {last[2]!r}")
    print(f"gap bound C1/(2N) = {res.report.gap_bound!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfwoc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _add_instance_args(p)
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check an instance")
    p = add("generate", cmd_generate, "write a battery-fleet instance")
    p.add_argument("-o", "--output", type=Path, default=None)
    p = add("fw", cmd_fw, "Frank-Wolfe on the relaxed problem")
    p.add_argument("--K", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-3)
    p = add("sfw", cmd_sfw, "stochastic Frank-Wolfe runs")
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--n", type=int, default=20, help="samples per iteration")
    p.add_argument("--seed", type=int, default=0, help="master seed; rep r uses seed + r")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--fw-K", type=int, default=500, help="Frank-Wolfe iterations for the reference")
    p.add_argument("--reference", type=float, default=None, help="relaxed optimum proxy (skips Frank-Wolfe)")
    p = add("exact", cmd_exact, "exhaustive optimum of a small instance")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p = add("export-micp", cmd_export, "write the indicator model in LP format")
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("--count-only", action="store_true", help="only report d(m)")
    p = add("bounds", cmd_bounds, "relaxation-gap and concentration bounds")
    p.add_argument("--coarse", action="store_true", help="parameter-range constants (battery instances)")
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--eps", type=float, default=1.0)
    p = add("experiment", cmd_experiment, "relaxed reference plus repeated SFW runs")
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fw-K", type=int, default=500)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--coarse", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except _InvalidInstance as e:
        print(f"invalid instance: {e}", file=sys.stderr)
        return EXIT_INVALID
    except EnumerationCapError as e:
        print(f"refusing to enumerate: {e}", file=sys.stderr)
        return EXIT_CAP
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
