"""Command line entry point.

Exit codes: 0 success, 1 parameter error, 2 I/O error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace

import numpy as np

from ..errors import ExpressionError, InvariantViolation, ParameterError
from ..graph_models import DynamicGraphProcess, new_partition, stationary_edge_prob
from .config import MULTI_SOURCE_C, ExperimentConfig, build, coerce, load_config_file, table_presets
from .runner import run_experiment, tune_c, write_summary

log = logging.getLogger("dynlpa")

EXIT_OK, EXIT_PARAM, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3

# CLI flag -> ExperimentConfig field (value parsed with coerce())
_VALUE_FLAGS = {
    "n": "n", "p": "p", "q": "q", "c": "c", "trials": "trials", "seed": "seed",
    "variant": "variant", "out": "out", "windows": "windows", "workers": "workers",
    "model": "model", "p_down": "p_down", "q_down": "q_down", "meg_init": "meg_init",
    "mixing_multiplier": "mixing_multiplier", "source_density": "source_density",
    "estimate_c": "estimate_c",
}
_SWITCHES = ("p_unknown", "sparse", "trajectories")


def _add_common(sp):
    sp.add_argument("--config", help="file of 'key = value' lines; flags override it")
    sp.add_argument("--n", help="number of nodes")
    sp.add_argument("--p", help="intra-community probability expression, e.g. 5/n or uniform(1/n,9/n)")
    sp.add_argument("--q", help="cross-community probability expression, e.g. n^-2")
    sp.add_argument("--c", help="phase constant, or five comma-separated per-phase constants")
    sp.add_argument("--trials", help="number of independent trials")
    sp.add_argument("--seed", help="master seed")
    sp.add_argument("--variant", choices=("two-source", "multi-source"))
    sp.add_argument("--out", help="summary CSV path; per-trial files are written beside it")
    sp.add_argument("--max-n", type=int, help="skip table rows with larger n")
    sp.add_argument("--trajectories", action="store_true", help="write per-trial (k, h) trajectories")
    sp.add_argument("--tune-c", action="store_true", help="search the smallest c on a 0.1 grid with >98%% successes")
    sp.add_argument("--workers", help="parallel trial processes (default: all cores)")
    sp.add_argument("--p-unknown", action="store_true", help="estimate p from observed degrees first")
    sp.add_argument("--sparse", action="store_true", help="observe OR-unions of snapshots when pn < 1")
    sp.add_argument("--windows", help="number of phase-4 windows")
    sp.add_argument("--source-density", help="multi-source election constant d")
    sp.add_argument("--estimate-c", help="constant of the estimation period length")
    sp.add_argument("--model", choices=("bernoulli", "meg"))
    sp.add_argument("--p-down", help="intra-community death rate (meg)")
    sp.add_argument("--q-down", help="cross-community death rate (meg)")
    sp.add_argument("--meg-init", choices=("stationary", "empty"))
    sp.add_argument("--mixing-multiplier", help="scale of the idle gap between meg observations")
    sp.add_argument("-v", "--verbose", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynlpa", description="Label propagation on dynamic planted-partition graphs.")
    sub = parser.add_subparsers(dest="command", metavar="{run,table1,table2,table3,meg}")
    sub.required = True
    for name, help_text in (
        ("run", "run one experiment configuration"),
        ("table1", "homogeneous p = 5/n grid"),
        ("table2", "non-homogeneous uniform(1/n, 9/n) grid"),
        ("table3", "non-homogeneous uniform(0, log n / n) grid"),
        ("meg", "edge-Markovian runs, with stationary density check"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    oracle = sub.add_parser("oracle")  # no help=: stays out of the listing
    oracle.add_argument("what", choices=("linkproc", "snapshot"))
    oracle.add_argument("--p", type=float, default=0.19)
    oracle.add_argument("--pair-rounds", type=int, default=10 ** 6)
    oracle.add_argument("--n", type=int, default=200)
    oracle.add_argument("--seed", type=int, default=0)
    return parser


def _overrides(args) -> dict:
    values = {}
    for flag, key in _VALUE_FLAGS.items():
        raw = getattr(args, flag, None)
        if raw is not None:
            values[key] = coerce(key, str(raw))
    for flag in _SWITCHES:
        if getattr(args, flag, False):
            values[flag] = True
    return values


def _base_values(args) -> dict:
    values = load_config_file(args.config) if args.config else {}
    values.update(_overrides(args))
    return values


def _configs(args) -> list[ExperimentConfig]:
    values = _base_values(args)
    if args.command == "meg":
        values.setdefault("model", "meg")
    if values.get("variant") == "multi-source" and "c" not in values:
        values["c"] = MULTI_SOURCE_C
    if args.command in ("table1", "table2", "table3"):
        # the grid fixes n, p, q and c
        fixed = {k: v for k, v in values.items() if k not in ("n", "p", "q", "c")}
        return table_presets(args.command, max_n=args.max_n, **fixed)
    known = {f.name for f in fields(ExperimentConfig)}
    cfg = ExperimentConfig(**{k: v for k, v in values.items() if k in known})
    if args.max_n is not None and cfg.n > args.max_n:
        return []
    return [cfg]


def _meg_density(cfg: ExperimentConfig) -> None:
    built = build(cfg)
    model = built.model
    process = DynamicGraphProcess(new_partition(cfg.n), model, seed=cfg.seed)
    stride = built.schedule.stride
    samples = []
    for _ in range(10):
        process.advance(stride)
        snap = process.next_snapshot()
        part = process.partition
        cu = part.community_of[snap.u]
        cv = part.community_of[snap.v]
        intra = int(np.sum(cu == cv))
        pairs = sum(s * (s - 1) // 2 for s in part.sizes)
        samples.append(intra / pairs)
    target = stationary_edge_prob(model.p_up, model.p_down)
    print(f"# meg intra density {np.mean(samples):.6g} (stationary {target:.6g}) over {len(samples)} snapshots",
          file=sys.stderr)


def _run_oracle(args) -> int:
    from .. import oracle

    if args.what == "linkproc":
        stats = oracle.linkproc_stats(args.p, args.pair_rounds, args.seed)
        for key, expected in stats["expected"].items():
            value, se = stats[key]
            print(f"{key},{value:.6g},{se:.3g},{expected:.6g}")
    else:
        from ..graph_models import TwoBlock

        part = new_partition(args.n)
        snap = oracle.naive_snapshot(part, TwoBlock(args.p, args.p / 10), args.seed, 1)
        print(f"edges,{len(snap)}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "oracle":
            return _run_oracle(args)
        rows = []
        configs = _configs(args)
        for index, cfg in enumerate(configs):
            if args.tune_c:
                c, summary = tune_c(cfg)
                if c is None:
                    log.warning("no c on the grid exceeded 98%% at n=%d q=%s", cfg.n, cfg.q)
                elif cfg.out:
                    summary, _ = run_experiment(replace(cfg, c=c), index)
            else:
                summary, _ = run_experiment(cfg, index)
            if args.command == "meg":
                _meg_density(cfg)
            if cfg.reported is not None:
                log.info("reference for n=%d q=%s: %d%% in %d steps", cfg.n, cfg.q, *cfg.reported)
            rows.append(summary)
        out = configs[0].out if configs else None
        write_summary(rows, path=out, stream=sys.stdout)
    except (ExpressionError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
