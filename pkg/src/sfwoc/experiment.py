"""Experiment orchestration and figure-ready CSV output.

File layout written into the output directory:

==========================  =====================================================
fw.csv                      k, f_yk, fw_gap, lower_bound
sfw_rep000.csv ...          k, J_xk, gamma_k, omega_k, n_k, swaps
sfw_aggregate.csv           k, mean_gamma, std_gamma, mean_gamma_certified, std_gamma_certified
sfw_summary.csv             seed, final_J, final_gamma, final_gamma_certified
bounds.txt                  constants and bound report
*_timing.csv                k, wall_ms (kept apart so the files above are reproducible byte for byte)
==========================  =====================================================

gamma_k uses the final relaxed value of the Frank-Wolfe run as the optimum
proxy; gamma_certified uses its certified lower bound instead (never smaller).
Standard deviations are population (ddof=0) over repetitions.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .battery import coarse_bounds, params_of
from .core import BoundReport, compute_constants
from .fw import RelaxedRunResult, fw_run
from .model import OcInstance
from .sfw import SfwRunResult, SfwSchedule, sfw_run, theorem_bounds

FW_COLUMNS = ("k", "f_yk", "fw_gap", "lower_bound")
SFW_COLUMNS = ("k", "J_xk", "gamma_k", "omega_k", "n_k", "swaps")
AGGREGATE_COLUMNS = ("k", "mean_gamma", "std_gamma", "mean_gamma_certified", "std_gamma_certified")
SUMMARY_COLUMNS = ("seed", "final_J", "final_gamma", "final_gamma_certified")
TIMING_COLUMNS = ("k", "wall_ms")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def fw_csv(result: RelaxedRunResult) -> str:
    return csv_text(FW_COLUMNS, [(r.k, r.value, r.gap, r.lower_bound) for r in result.records])


def sfw_csv(result: SfwRunResult, reference: float) -> str:
    return csv_text(
        SFW_COLUMNS,
        [(r.k, r.J, r.J - reference, r.omega, r.n, r.swaps) for r in result.records],
    )


def timing_csv(records) -> str:
    return csv_text(TIMING_COLUMNS, [(r.k, r.wall_ms) for r in records])


def aggregate_gammas(runs: list[SfwRunResult], reference: float, certified: float) -> list[tuple]:
    J = np.array([r.values for r in runs])
    g, gc = J - reference, J - certified
    return [
        (k, float(g[:, k].mean()), float(g[:, k].std()), float(gc[:, k].mean()), float(gc[:, k].std()))
        for k in range(J.shape[1])
    ]


def bounds_text(
    instance: OcInstance,
    report: BoundReport,
    K: int | None = None,
    n: int = 20,
    eps: float = 1.0,
    label: str = "tight",
) -> str:
    d = report.diameters
    lines = [
        f"bounds ({label})",
        f"N = {instance.N}",
        f"T = {instance.T}",
        f"diameter max = {d.max():.6g}",
        f"diameter mean = {d.mean():.6g}",
        f"C0 = {report.C0!r}",
        f"C1 = {report.C1!r}",
        f"gap bound C1/(2N) = {report.gap_bound!r}",
    ]
    if K is not None:
        tb = theorem_bounds(report.C0, report.C1, instance.N, SfwSchedule(K=K, n=n), eps)
        lines += [
            f"K = {K}",
            f"n_k = {n}",
            f"4C1/K = {tb.expectation_bound!r}",
            f"v_K = {tb.v_K!r}",
            f"m_K = {tb.m_K!r}",
            f"eps = {eps!r}",
            f"P[gamma_K < 4C1/K + eps] >= {tb.probability_lower_bound!r}",
            f"certified = {tb.certified}",
        ]
    return "\n".join(lines) + "\n"


def report_bounds(
    instance: OcInstance, coarse: bool = False, K: int | None = None, n: int = 20, eps: float = 1.0
) -> tuple[BoundReport, str]:
    if coarse:
        report, label = coarse_bounds(params_of(instance)), "coarse"
    else:
        report, label = compute_constants(instance), "tight"
    return report, bounds_text(instance, report, K, n, eps, label)


@dataclass
class ExperimentConfig:
    K: int = 100
    n: int = 20
    reps: int = 50
    seed: int = 0
    fw_K: int = 500
    workers: int = 1
    eps: float = 1.0
    coarse: bool = False
    out_dir: Path | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")


@dataclass
class ExperimentResult:
    fw: RelaxedRunResult
    runs: list[SfwRunResult]
    seeds: list[int]
    aggregate: list[tuple]
    report: BoundReport
    files: dict[str, str] = field(default_factory=dict)

    @property
    def final_gammas(self) -> np.ndarray:
        return np.array([r.best_value for r in self.runs]) - self.fw.final_value


def _one_rep(args):
    instance, schedule, reference = args
    return sfw_run(instance, schedule, reference=reference)


def run_sfw_reps(
    instance: OcInstance, K: int, n: int, seeds: list[int], reference: float, workers: int = 1
) -> list[SfwRunResult]:
    """Independent SFW runs, one per seed, returned in seed order."""
    jobs = [(instance, SfwSchedule(K=K, n=n, seed=s), reference) for s in seeds]
    if workers <= 1 or len(jobs) == 1:
        return [_one_rep(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_rep, jobs))


def run_experiment(instance: OcInstance, config: ExperimentConfig) -> ExperimentResult:
    """Relaxed reference by Frank-Wolfe, then repeated SFW runs with seeds seed + r."""
    fw = fw_run(instance, config.fw_K, workers=config.workers)
    seeds = [config.seed + r for r in range(config.reps)]
    runs = run_sfw_reps(instance, config.K, config.n, seeds, fw.final_value, config.workers)
    agg = aggregate_gammas(runs, fw.final_value, fw.certified_lower_bound)
    report, btxt = report_bounds(instance, config.coarse, config.K, config.n, config.eps)
    if config.coarse:
        btxt += "\n" + report_bounds(instance, False, config.K, config.n, config.eps)[1]
    files = {"fw.csv": fw_csv(fw), "fw_timing.csv": timing_csv(fw.records)}
    for r, (seed, run) in enumerate(zip(seeds, runs)):
        files[f"sfw_rep{r:03d}.csv"] = sfw_csv(run, fw.final_value)
        files[f"sfw_rep{r:03d}_timing.csv"] = timing_csv(run.records)
    files["sfw_aggregate.csv"] = csv_text(AGGREGATE_COLUMNS, agg)
    files["sfw_summary.csv"] = csv_text(
        SUMMARY_COLUMNS,
        [
            (s, run.best_value, run.best_value - fw.final_value, run.best_value - fw.certified_lower_bound)
            for s, run in zip(seeds, runs)
        ],
    )
    files["bounds.txt"] = btxt
    if config.out_dir is not None:
        write_files(config.out_dir, files)
    return ExperimentResult(fw, runs, seeds, agg, report, files)


def write_files(out_dir, files: dict[str, str]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
