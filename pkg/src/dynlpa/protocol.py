"""Round-based simulation of the five-phase label propagation protocol.

Phases, in rule steps (see :mod:`dynlpa.schedule`):

1. source labeling: a node that saw exactly one distinct label over the
   whole phase takes it when the phase ends;
2-3. fast labeling: an unlabeled node adopts a label as soon as all its
   labeled neighbours in a round agree;
4. windows: every node that saw a single distinct label through a whole
   window takes it (multi-source runs use the minimal label instead);
5. majority: per-label neighbour counts are summed over the phase and the
   largest sum wins, ties going to the smallest label.

Phases 4 and 5 observe neighbourhoods thinned by :func:`linkproc_orient`.
Updates are synchronous: every node reads the labels in force before the
round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import extensions, rng
from .errors import InvariantViolation, ParameterError
from .graph_models import DynamicGraphProcess, Snapshot, nominal_probs, or_union
from .metrics import Trajectory, convergence_round, is_good_labeling
from .schedule import PhaseSchedule

__all__ = [
    "ProtocolConfig",
    "RunResult",
    "LabelEngine",
    "linkproc_coin_probs",
    "linkproc_orient",
    "undirected_arcs",
    "run_protocol",
]

_NONE = np.iinfo(np.int64).max
VARIANTS = ("two-source", "multi-source")


def linkproc_coin_probs(p):
    """``(P(C=1), P(C=-1), P(C=0))`` for orientation coins at edge probability ``p``."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p <= 0) or np.any(p > 1):
        raise ParameterError("link orientation needs 0 < p <= 1")
    s = np.sqrt(1.0 - p)
    side = (s - 1.0 + p) / p
    return side, side, (1.0 - s) ** 2 / p


def _rank_modulus(n: int) -> int:
    return n ** 3 if n ** 3 < 2 ** 64 else 0


def linkproc_draws(u, v, n, p, seed, round_idx):
    """Ranks ``M`` and coins ``C`` that node ``u`` draws for neighbour ``v`` (arrays)."""
    code = np.asarray(u, dtype=np.int64) * n + np.asarray(v, dtype=np.int64)
    ranks = rng.hash_bits(rng.derive_key(seed, round_idx, rng.LINK_RANK), code)
    mod = _rank_modulus(n)
    if mod:
        ranks = ranks % np.uint64(mod)
    x = rng.hash_uniform(rng.derive_key(seed, round_idx, rng.LINK_COIN), code)
    side = linkproc_coin_probs(p)[0]
    if np.ndim(side):
        side = side[np.asarray(u)]
    coins = np.where(x < side, 1, np.where(x < 2 * side, -1, 0)).astype(np.int8)
    return ranks, coins


def linkproc_orient(snapshot: Snapshot, p, seed: int, round_idx: int):
    """Direct the edges of ``snapshot``.

    Returns arcs ``(src, dst)``: ``dst`` counts ``src`` as a neighbour this
    round. ``p`` is a scalar or a per-node array (each node draws its coins
    with its own estimate).
    """
    u, v, n = snapshot.u, snapshot.v, snapshot.n
    if len(u) == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    m_uv, c_uv = linkproc_draws(u, v, n, p, seed, round_idx)
    m_vu, c_vu = linkproc_draws(v, u, n, p, seed, round_idx)
    # D^u(v): the endpoint with the larger rank decides with its own coin
    d_u = np.where(m_uv > m_vu, c_uv, np.where(m_uv < m_vu, -c_vu, -1))
    d_v = np.where(m_vu > m_uv, c_vu, np.where(m_vu < m_uv, -c_uv, -1))
    keep_u = d_u != -1  # u sees v
    keep_v = d_v != -1  # v sees u
    src = np.concatenate([v[keep_u], u[keep_v]])
    dst = np.concatenate([u[keep_u], v[keep_v]])
    return src, dst


def undirected_arcs(snapshot: Snapshot):
    return (np.concatenate([snapshot.u, snapshot.v]),
            np.concatenate([snapshot.v, snapshot.u]))


class LabelEngine:
    """All node states of one run, updated in bulk."""

    def __init__(self, labels, frozen=None):
        self.labels = np.array(labels, dtype=np.int64)
        n = len(self.labels)
        self.frozen = np.zeros(n, dtype=bool) if frozen is None else np.asarray(frozen, dtype=bool)
        self.memory = np.zeros(n, dtype=np.int64)
        self.conflict = np.zeros(n, dtype=bool)
        self._obs_dst = []
        self._obs_lab = []

    @property
    def n(self):
        return len(self.labels)

    def _visible(self, src, dst):
        lab = self.labels[src]
        mask = lab > 0
        return dst[mask], lab[mask]

    def _range(self, src, dst):
        d, z = self._visible(src, dst)
        lo = np.full(self.n, _NONE, dtype=np.int64)
        hi = np.zeros(self.n, dtype=np.int64)
        np.minimum.at(lo, d, z)
        np.maximum.at(hi, d, z)
        return lo, hi

    def _track_single(self, src, dst):
        lo, hi = self._range(src, dst)
        seen = hi > 0
        clash = seen & ((lo != hi) | ((self.memory != 0) & (self.memory != lo)))
        self.conflict |= clash
        fresh = seen & (self.memory == 0)
        self.memory[fresh] = lo[fresh]

    def phase1_step(self, src, dst):
        self._track_single(src, dst)

    def phase1_finalize(self):
        take = (self.labels == 0) & (self.memory != 0) & ~self.conflict & ~self.frozen
        self.labels[take] = self.memory[take]
        self._reset_memory()

    def spread_step(self, src, dst):
        lo, hi = self._range(src, dst)
        take = (self.labels == 0) & (hi > 0) & (lo == hi) & ~self.frozen
        self.labels[take] = lo[take]

    def window_step(self, src, dst):
        self._track_single(src, dst)

    def window_finalize(self):
        take = (self.memory != 0) & ~self.conflict & ~self.frozen
        self.labels[take] = self.memory[take]
        self._reset_memory()

    def min_window_step(self, src, dst):
        lo, _ = self._range(src, dst)
        cur = np.where(self.memory == 0, _NONE, self.memory)
        best = np.minimum(cur, lo)
        self.memory = np.where(best == _NONE, 0, best)

    def min_window_finalize(self):
        own = np.where(self.labels == 0, _NONE, self.labels)
        seen = np.where(self.memory == 0, _NONE, self.memory)
        best = np.minimum(own, seen)
        take = (best != _NONE) & ~self.frozen
        self.labels[take] = best[take]
        self._reset_memory()

    def majority_step(self, src, dst):
        d, z = self._visible(src, dst)
        self._obs_dst.append(d)
        self._obs_lab.append(z)

    def majority_decide(self):
        if self._obs_dst:
            d = np.concatenate(self._obs_dst)
            z = np.concatenate(self._obs_lab)
        else:
            d = z = np.empty(0, dtype=np.int64)
        self._obs_dst, self._obs_lab = [], []
        if len(d) == 0:
            return
        values, idx = np.unique(z, return_inverse=True)
        width = len(values)
        keys, counts = np.unique(d * width + idx, return_counts=True)
        node, lab = keys // width, values[keys % width]
        order = np.lexsort((lab, -counts, node))
        node, lab = node[order], lab[order]
        first = np.ones(len(node), dtype=bool)
        first[1:] = node[1:] != node[:-1]
        node, lab = node[first], lab[first]
        keep = ~self.frozen[node]
        self.labels[node[keep]] = lab[keep]

    def _reset_memory(self):
        self.memory[:] = 0
        self.conflict[:] = False


@dataclass
class ProtocolConfig:
    """How to run the protocol on a process.

    ``linkproc_p`` defaults to the model's nominal intra-community
    probability (adjusted for OR-unions when ``schedule.delta > 1``).
    ``sources`` optionally fixes one source node per community in the
    two-source variant; otherwise they are drawn from the seed.
    """

    schedule: PhaseSchedule
    variant: str = "two-source"
    seed: int = 0
    linkproc_p: float | None = None
    source_density: float = 2.0
    p_unknown: bool = False
    estimate_c: float = 30.0
    record_trajectory: bool = False
    sources: tuple[int, ...] | None = None


@dataclass
class RunResult:
    labels: np.ndarray
    success: bool
    rounds: int
    reference_labels: tuple[int, ...]
    source_labels: np.ndarray
    convergence_round: int | None = None
    trajectory: Trajectory | None = None
    estimates: np.ndarray | None = field(default=None, repr=False)


def _initial_labels(process, config):
    part = process.partition
    n = part.n
    if config.variant == "two-source":
        if config.sources is not None:
            if len(config.sources) != part.r:
                raise ParameterError(f"need {part.r} sources, got {len(config.sources)}")
            chosen = list(config.sources)
            for c, node in enumerate(chosen):
                if not part.starts[c] <= node < part.starts[c] + part.sizes[c]:
                    raise ParameterError(f"source {node} is not in community {c}")
        else:
            gen = rng.generator(config.seed, rng.SOURCE_PICK)
            chosen = [part.starts[c] + int(gen.integers(part.sizes[c])) for c in range(part.r)]
        labels = np.zeros(n, dtype=np.int64)
        labels[chosen] = np.arange(1, part.r + 1)
        return labels, labels > 0, tuple(range(1, part.r + 1))
    labels = extensions.elect_sources(n, config.source_density, config.seed)
    refs = []
    for c in range(part.r):
        block = labels[part.starts[c]: part.starts[c] + part.sizes[c]]
        block = block[block > 0]
        refs.append(int(block.min()) if len(block) else -(c + 1))
    return labels, np.zeros(n, dtype=bool), tuple(refs)


def _observation(process: DynamicGraphProcess, schedule: PhaseSchedule) -> Snapshot:
    snaps = [process.next_snapshot() for _ in range(schedule.delta)]
    snap = or_union(snaps)
    process.advance(schedule.gap)
    return snap


def run_protocol(process: DynamicGraphProcess, config: ProtocolConfig, on_step=None) -> RunResult:
    """Run all five phases against successive snapshots of ``process``.

    ``on_step(round, labels, snapshot)`` is called after every rule step.
    """
    if config.variant not in VARIANTS:
        raise ParameterError(f"unknown variant {config.variant!r}; expected one of {VARIANTS}")
    part = process.partition
    n = part.n
    sched = config.schedule
    labels, frozen, refs = _initial_labels(process, config)
    source_labels = labels.copy()
    engine = LabelEngine(labels, frozen)

    start = process.t
    estimates = None
    if config.p_unknown:
        rounds = extensions.estimation_rounds(n, config.estimate_c)
        degree_sum = np.zeros(n, dtype=np.int64)
        for _ in range(rounds):
            degree_sum += process.next_snapshot().degrees()
        estimates = extensions.estimate_degree(degree_sum, rounds, n)
        # with q << p a node's degree counts only its own community
        p_node = np.clip(estimates * part.r / n, 1.0 / n ** 2, 1.0)
        lp = 1.0 - (1.0 - p_node) ** sched.delta
    else:
        p = config.linkproc_p if config.linkproc_p is not None else nominal_probs(process.model)[0]
        if not 0 < p <= 1:
            raise ParameterError(f"link orientation probability {p} outside (0, 1]")
        lp = 1.0 - (1.0 - p) ** sched.delta if config.linkproc_p is None else p
    base = process.t  # protocol round 0

    traj = None
    # duplicate minimum labels across communities leave (k, h) undefined
    if config.record_trajectory and len(set(refs)) == len(refs):
        traj = Trajectory(refs)
        traj.record(0, engine.labels, part)

    multi = config.variant == "multi-source"
    plan = [("phase1", sched.phase1), ("spread", sched.phase2), ("spread", sched.phase3)]
    plan += [("window", sched.window_len)] * sched.window_count
    plan.append(("majority", sched.phase5))

    good_flags, good_rounds = [], []
    for kind, steps in plan:
        for step in range(steps):
            snap = _observation(process, sched)
            if kind in ("phase1", "spread"):
                src, dst = undirected_arcs(snap)
            else:
                src, dst = linkproc_orient(snap, lp, config.seed, snap.t)
            if kind == "phase1":
                engine.phase1_step(src, dst)
            elif kind == "spread":
                engine.spread_step(src, dst)
            elif kind == "window":
                (engine.min_window_step if multi else engine.window_step)(src, dst)
            else:
                engine.majority_step(src, dst)
            if step == steps - 1:
                if kind == "phase1":
                    engine.phase1_finalize()
                elif kind == "window":
                    (engine.min_window_finalize if multi else engine.window_finalize)()
                elif kind == "majority":
                    engine.majority_decide()
            t_rel = process.t - base
            if on_step is not None:
                on_step(t_rel, engine.labels, snap)
            if traj is not None:
                traj.record(t_rel, engine.labels, part)
                good_flags.append(traj.good[-1])
                good_rounds.append(t_rel)

    success = is_good_labeling(engine.labels, part)
    conv = convergence_round(good_rounds, good_flags) if traj is not None else None
    if process.t - base != sched.taus[-1]:
        raise InvariantViolation("schedule and process round counters disagree")
    return RunResult(
        labels=engine.labels,
        success=success,
        rounds=(process.t - start) + 1,
        reference_labels=refs,
        source_labels=source_labels,
        convergence_round=conv,
        trajectory=traj,
        estimates=estimates,
    )
