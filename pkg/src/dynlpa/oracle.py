"""Slow, straight-line reimplementations used to cross-check the fast paths.

Nothing here is vectorised on purpose. Where exact agreement is claimed the
oracle reads the same counter-addressed draws as the fast path (via the
pure-Python mixer in :mod:`dynlpa.rng`); otherwise it uses its own
``random.Random`` stream and agreement is statistical.
"""

from __future__ import annotations

import math
import random

from . import rng
from .errors import ParameterError
from .graph_models import Markovian, NonHomogeneous, Snapshot, TwoBlock

__all__ = [
    "naive_snapshot",
    "naive_pair_frequencies",
    "naive_protocol_round",
    "naive_run",
    "naive_linkproc",
    "linkproc_stats",
]

MAX_N = 2000


def _guard(n):
    if n > MAX_N:
        raise ParameterError(f"oracle is limited to n <= {MAX_N}, got {n}")


def _region_and_index(partition, u, v):
    """Block number and linear index of pair u < v, computed pair by pair."""
    r = partition.r
    cu = cv = None
    for c in range(r):
        lo = partition.starts[c]
        if lo <= u < lo + partition.sizes[c]:
            cu = c
        if lo <= v < lo + partition.sizes[c]:
            cv = c
    if cu == cv:
        i = u - partition.starts[cu]
        j = v - partition.starts[cu]
        return cu, j * (j - 1) // 2 + i
    region = r
    for a in range(r):
        for b in range(a + 1, r):
            if (a, b) == (cu, cv):
                i = u - partition.starts[a]
                j = v - partition.starts[b]
                return region, i * partition.sizes[b] + j
            region += 1
    raise AssertionError("unreachable")


def naive_snapshot(partition, model, seed: int, t: int, shared_draws: bool = True) -> Snapshot:
    """One Bernoulli draw per pair.

    ``shared_draws=True`` uses the addresses of the pairwise backend of
    :class:`~dynlpa.graph_models.DynamicGraphProcess`, so the result is
    identical to it. Otherwise draws come from an independent stream.
    """
    n = partition.n
    _guard(n)
    if isinstance(model, Markovian):
        raise ParameterError("naive_snapshot covers the Bernoulli models only")
    stream = random.Random(rng.derive_key(seed, t, 99))
    community = []
    for c, size in enumerate(partition.sizes):
        community += [c] * size
    pairs = []
    for u in range(n):
        for v in range(u + 1, n):
            same = community[u] == community[v]
            if isinstance(model, TwoBlock):
                prob = model.p if same else model.q
            elif same:
                frac = rng.scalar_uniform(rng.derive_key(seed, rng.PAIR_PROB), u * n + v)
                prob = model.p_low + (model.p_high - model.p_low) * frac
            else:
                prob = model.q
            if shared_draws:
                region, index = _region_and_index(partition, u, v)
                x = rng.scalar_uniform(rng.derive_key(seed, t, rng.PAIRWISE, region), index)
            else:
                x = stream.random()
            if x < prob:
                pairs.append((u, v))
    return Snapshot.from_pairs(t, n, pairs)


def _pair_probabilities(partition, model, seed):
    n = partition.n
    community = []
    for c, size in enumerate(partition.sizes):
        community += [c] * size
    codes, probs = [], []
    for u in range(n):
        for v in range(u + 1, n):
            if community[u] != community[v]:
                prob = model.q
            elif isinstance(model, TwoBlock):
                prob = model.p
            else:
                frac = rng.scalar_uniform(rng.derive_key(seed, rng.PAIR_PROB), u * n + v)
                prob = model.p_low + (model.p_high - model.p_low) * frac
            codes.append(u * n + v)
            probs.append(prob)
    return codes, probs


def naive_pair_frequencies(partition, model, seed: int, snapshots: int, draw_seed: int = 0):
    """Edge counts per pair over ``snapshots`` independent all-pairs draws.

    Pair probabilities come from a plain loop; the Bernoulli draws are
    taken in bulk from an unrelated generator. Returns ``(codes, probs,
    counts)`` with pairs ordered by code ``u * n + v``.
    """
    import numpy as np

    _guard(partition.n)
    if isinstance(model, Markovian):
        raise ParameterError("naive_pair_frequencies covers the Bernoulli models only")
    codes, probs = _pair_probabilities(partition, model, seed)
    probs = np.array(probs)
    gen = np.random.default_rng(draw_seed)
    counts = np.zeros(len(probs), dtype=np.int64)
    for _ in range(snapshots):
        counts += gen.random(len(probs)) < probs
    return np.array(codes, dtype=np.int64), probs, counts


def naive_linkproc(snapshot: Snapshot, p, seed: int, round_idx: int):
    """Set of directed pairs ``(observer, neighbour)`` kept by the orientation procedure."""
    n = snapshot.n
    mod = n ** 3 if n ** 3 < 2 ** 64 else 0
    rank_key = rng.derive_key(seed, round_idx, rng.LINK_RANK)
    coin_key = rng.derive_key(seed, round_idx, rng.LINK_COIN)

    def draw(a, b):
        m = rng.mix64((a * n + b) ^ rank_key)
        if mod:
            m %= mod
        pa = p[a] if hasattr(p, "__len__") else p
        side = (math.sqrt(1 - pa) - 1 + pa) / pa
        x = rng.scalar_uniform(coin_key, a * n + b)
        if x < side:
            return m, 1
        if x < 2 * side:
            return m, -1
        return m, 0

    kept = set()
    for a, b in sorted(snapshot.edges):
        m_ab, c_ab = draw(a, b)
        m_ba, c_ba = draw(b, a)
        if m_ab > m_ba:
            d_a, d_b = c_ab, -c_ab
        elif m_ab < m_ba:
            d_a, d_b = -c_ba, c_ba
        else:
            d_a = d_b = -1
        if d_a != -1:
            kept.add((a, b))
        if d_b != -1:
            kept.add((b, a))
    return kept


def _neighbour_labels(state, snapshot, directed, p, seed):
    n = snapshot.n
    seen = [[] for _ in range(n)]
    if directed:
        pairs = naive_linkproc(snapshot, p, seed, snapshot.t)
    else:
        pairs = set()
        for a, b in snapshot.edges:
            pairs.add((a, b))
            pairs.add((b, a))
    for observer, neighbour in pairs:
        z = state["labels"][neighbour]
        if z != 0:
            seen[observer].append(z)
    return seen


def new_state(labels, frozen=None):
    n = len(labels)
    return {
        "labels": [int(z) for z in labels],
        "frozen": [bool(f) for f in frozen] if frozen is not None else [False] * n,
        "memory": [0] * n,
        "conflict": [False] * n,
        "counts": [dict() for _ in range(n)],
    }


PHASES = ("phase1", "phase1-end", "spread", "window", "window-end",
          "min-window", "min-window-end", "majority", "majority-end")


def naive_protocol_round(state, snapshot, phase, p=None, seed=0):
    """Apply one rule step (or a phase/window end) and return the new state."""
    if phase not in PHASES:
        raise ParameterError(f"unsupported phase {phase!r}")
    labels = list(state["labels"])
    memory = list(state["memory"])
    conflict = list(state["conflict"])
    counts = [dict(c) for c in state["counts"]]
    frozen = state["frozen"]
    n = len(labels)

    if phase in ("phase1", "spread", "window", "min-window", "majority"):
        directed = phase in ("window", "min-window", "majority")
        seen = _neighbour_labels(state, snapshot, directed, p, seed)
        for v in range(n):
            visible = seen[v]
            distinct = set(visible)
            if phase in ("phase1", "window"):
                if distinct:
                    if len(distinct) > 1:
                        conflict[v] = True
                    else:
                        z = distinct.pop()
                        if memory[v] == 0:
                            memory[v] = z
                        elif memory[v] != z:
                            conflict[v] = True
            elif phase == "spread":
                if labels[v] == 0 and not frozen[v] and len(distinct) == 1:
                    labels[v] = distinct.pop()
            elif phase == "min-window":
                if distinct:
                    best = min(distinct)
                    if memory[v] == 0 or best < memory[v]:
                        memory[v] = best
            else:
                for z in visible:
                    counts[v][z] = counts[v].get(z, 0) + 1
        # "spread" reads labels from ``state``, so updates above are synchronous
    else:
        for v in range(n):
            if phase == "phase1-end":
                if labels[v] == 0 and not frozen[v] and memory[v] != 0 and not conflict[v]:
                    labels[v] = memory[v]
            elif phase == "window-end":
                if not frozen[v] and memory[v] != 0 and not conflict[v]:
                    labels[v] = memory[v]
            elif phase == "min-window-end":
                if not frozen[v] and memory[v] != 0 and (labels[v] == 0 or memory[v] < labels[v]):
                    labels[v] = memory[v]
            else:
                if not frozen[v] and counts[v]:
                    best = None
                    for z, f in counts[v].items():
                        if best is None or f > counts[v][best] or (f == counts[v][best] and z < best):
                            best = z
                    labels[v] = best
            memory[v] = 0
            conflict[v] = False
            counts[v] = {}
    return {"labels": labels, "frozen": list(frozen), "memory": memory,
            "conflict": conflict, "counts": counts}


def naive_run(snapshots, schedule, labels, frozen, p, seed, multi=False):
    """Drive :func:`naive_protocol_round` through a whole schedule.

    ``snapshots`` yields one (already OR-unioned) snapshot per rule step.
    Returns the label list after every rule step.
    """
    _guard(len(labels))
    state = new_state(labels, frozen)
    plan = [("phase1", schedule.phase1), ("spread", schedule.phase2), ("spread", schedule.phase3)]
    plan += [("min-window" if multi else "window", schedule.window_len)] * schedule.window_count
    plan.append(("majority", schedule.phase5))
    it = iter(snapshots)
    history = []
    for kind, steps in plan:
        for step in range(steps):
            snap = next(it)
            state = naive_protocol_round(state, snap, kind, p, seed)
            if step == steps - 1 and kind != "spread":
                state = naive_protocol_round(state, snap, kind + "-end", p, seed)
            history.append(list(state["labels"]))
    return history


def linkproc_stats(p: float, pair_rounds: int, seed: int = 0):
    """Monte-Carlo frequencies of the orientation procedure on independent pairs.

    Each of ``pair_rounds`` pairs is an edge with probability ``p``; edges
    are oriented by ranks and coins drawn from a plain numpy generator.
    Returns rates with their binomial standard errors.
    """
    import numpy as np

    if not 0 < p <= 1:
        raise ParameterError("p must lie in (0, 1]")
    gen = np.random.default_rng(seed)
    s = math.sqrt(1 - p)
    side = (s - 1 + p) / p
    probs = [side, side, (1 - s) ** 2 / p]
    present = gen.random(pair_rounds) < p
    m = int(present.sum())
    rank_a = gen.integers(0, 2 ** 62, size=m)
    rank_b = gen.integers(0, 2 ** 62, size=m)
    coin_a = gen.choice([1, -1, 0], size=m, p=probs)
    coin_b = gen.choice([1, -1, 0], size=m, p=probs)
    d_a = np.where(rank_a > rank_b, coin_a, np.where(rank_a < rank_b, -coin_b, -1))
    d_b = np.where(rank_b > rank_a, coin_b, np.where(rank_b < rank_a, -coin_a, -1))
    keep_a, keep_b = d_a != -1, d_b != -1

    def rate(hits, total):
        f = hits / total
        return f, math.sqrt(f * (1 - f) / total) if total else 0.0

    coins = np.concatenate([coin_a, coin_b])
    return {
        "direction": rate(int(keep_a.sum()), pair_rounds),
        "joint": rate(int((keep_a & keep_b).sum()), pair_rounds),
        "coin_plus": rate(int((coins == 1).sum()), len(coins)),
        "coin_minus": rate(int((coins == -1).sum()), len(coins)),
        "coin_zero": rate(int((coins == 0).sum()), len(coins)),
        "expected": {
            "direction": 1 - s,
            "joint": (1 - s) ** 2,
            "coin_plus": probs[0],
            "coin_minus": probs[1],
            "coin_zero": probs[2],
        },
    }
