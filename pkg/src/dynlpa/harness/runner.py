"""Seeded multi-trial experiment runner with CSV output."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .. import rng
from ..errors import InvariantViolation
from ..graph_models import DynamicGraphProcess
from ..metrics import Trajectory
from ..protocol import ProtocolConfig, run_protocol
from .config import ExperimentConfig, build, default_c_grid

__all__ = [
    "SUMMARY_HEADER",
    "TRIAL_HEADER",
    "TrialRecord",
    "SummaryRow",
    "trial_seed",
    "run_trial",
    "run_experiment",
    "tune_c",
    "write_summary",
]

log = logging.getLogger(__name__)

SUMMARY_HEADER = ["n", "model", "p_expr", "q_expr", "variant", "c", "trials", "successes", "total_rounds", "seed"]
TRIAL_HEADER = ["trial", "seed", "success", "rounds", "convergence_round"]


@dataclass
class TrialRecord:
    trial: int
    seed: int
    success: bool
    rounds: int
    convergence_round: int | None = None
    trajectory: Trajectory | None = None
    reference_labels: tuple = ()
    final_labels: tuple = ()

    def row(self):
        conv = "" if self.convergence_round is None else self.convergence_round
        return [self.trial, self.seed, int(self.success), self.rounds, conv]


@dataclass
class SummaryRow:
    n: int
    model: str
    p_expr: str
    q_expr: str
    variant: str
    c: str
    trials: int
    successes: int
    total_rounds: int
    seed: int

    def row(self):
        return [self.n, self.model, self.p_expr, self.q_expr, self.variant, self.c,
                self.trials, self.successes, self.total_rounds, self.seed]


def trial_seed(master: int, trial: int) -> int:
    return rng.derive_key(master, rng.TRIAL, trial) & ((1 << 63) - 1)


def run_trial(config: ExperimentConfig, trial: int) -> TrialRecord:
    built = build(config)
    seed = trial_seed(config.seed, trial)
    process = DynamicGraphProcess(built.partition, built.model, seed=rng.derive_key(seed, rng.GRAPH))
    pconf = ProtocolConfig(
        schedule=built.schedule,
        variant=config.variant,
        seed=seed,
        source_density=config.source_density,
        p_unknown=config.p_unknown,
        estimate_c=config.estimate_c,
        record_trajectory=config.trajectories,
    )
    result = run_protocol(process, pconf)
    part = built.partition
    finals = tuple(int(result.labels[s]) for s in part.starts)
    return TrialRecord(trial, seed, result.success, result.rounds, result.convergence_round,
                       result.trajectory, result.reference_labels, finals)


def _run_one(args):
    return run_trial(*args)


def _records(config: ExperimentConfig):
    workers = config.workers or os.cpu_count() or 1
    jobs = [(config, t) for t in range(config.trials)]
    if workers <= 1 or config.trials == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, i.e. by trial index
        return list(pool.map(_run_one, jobs, chunksize=max(1, config.trials // (4 * workers))))


def _artifact_path(out: str, index: int, n: int, suffix: str) -> Path:
    base = Path(out)
    return base.with_name(f"{base.stem}_{index:03d}_n{n}_{suffix}.csv")


def run_experiment(config: ExperimentConfig, index: int = 0):
    """Run all trials of ``config``; returns ``(summary, records)``.

    With ``config.out`` set, per-trial records (and trajectories when
    requested) are written next to the summary path.
    """
    built = build(config)
    records = _records(config)
    expected = built.total_rounds(config)
    for rec in records:
        if rec.rounds != expected:
            raise InvariantViolation(f"trial {rec.trial} used {rec.rounds} rounds, schedule says {expected}")
    summary = SummaryRow(
        n=config.n, model=built.model_label, p_expr=config.p, q_expr=config.q,
        variant=config.variant_label, c=config.c_label, trials=config.trials,
        successes=sum(r.success for r in records), total_rounds=expected, seed=config.seed,
    )
    if config.out:
        path = _artifact_path(config.out, index, config.n, "trials")
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRIAL_HEADER)
            for rec in records:
                writer.writerow(rec.row())
        for rec in records:
            if rec.trajectory is not None:
                rec.trajectory.write_csv(_artifact_path(config.out, index, config.n, f"trial{rec.trial}_trajectory"))
    log.info("n=%d q=%s c=%s: %d/%d good labelings in %d rounds", config.n, config.q,
             config.c_label, summary.successes, config.trials, expected)
    return summary, records


def tune_c(config: ExperimentConfig, grid=None, threshold: float = 0.98):
    """Smallest ``c`` on the grid whose success fraction exceeds ``threshold``.

    Returns ``(c, summary)`` or ``(None, last summary)`` when no grid value
    qualifies.
    """
    summary = None
    for c in grid or default_c_grid():
        summary, _ = run_experiment(replace(config, c=c, out=None))
        if summary.successes > threshold * summary.trials:
            return c, summary
    return None, summary


def write_summary(rows, path=None, stream=None):
    """Write summary rows with the fixed header to ``path`` and/or ``stream``."""
    targets = []
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        fh = open(path, "w", newline="", encoding="utf-8")
        targets.append(fh)
    if stream is not None:
        targets.append(stream)
    try:
        for target in targets:
            writer = csv.writer(target, lineterminator="\n")
            writer.writerow(SUMMARY_HEADER)
            for row in rows:
                writer.writerow(row.row())
    finally:
        if path:
            targets[0].close()
