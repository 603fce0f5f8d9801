import math

import numpy as np
import pytest

from dynlpa import oracle
from dynlpa.errors import ParameterError
from dynlpa.graph_models import DynamicGraphProcess, NonHomogeneous, Snapshot, TwoBlock, new_partition
from dynlpa.metrics import is_good_labeling
from dynlpa.protocol import LabelEngine, ProtocolConfig, linkproc_orient, run_protocol
from dynlpa.schedule import experimental_schedule


class TestNaiveSnapshot:
    def test_empty_and_complete(self):
        part = new_partition(20)
        assert len(oracle.naive_snapshot(part, TwoBlock(0, 0), 1, 1)) == 0
        assert len(oracle.naive_snapshot(part, TwoBlock(1, 1), 1, 1)) == 190

    def test_guard(self):
        with pytest.raises(ParameterError):
            oracle.naive_snapshot(new_partition(2002), TwoBlock(0.1, 0.1), 0, 0)

    @pytest.mark.parametrize("model", [TwoBlock(0.1, 0.02), NonHomogeneous(0.02, 0.2, 0.01)])
    def test_matches_pairwise_backend(self, model):
        part = new_partition(90, 3)
        proc = DynamicGraphProcess(part, model, seed=12, method="pairwise")
        for _ in range(3):
            fast = proc.next_snapshot()
            assert oracle.naive_snapshot(part, model, 12, fast.t).edges == fast.edges

    @pytest.mark.parametrize("model", [TwoBlock(0.08, 0.02), NonHomogeneous(0.02, 0.2, 0.01)])
    def test_distribution_matches_skip_sampler(self, model):
        # n=200, 1e4 snapshots, two-sample z per pair
        part = new_partition(200)
        snaps = 10**4
        codes, probs, naive = oracle.naive_pair_frequencies(part, model, 5, snaps, draw_seed=1)
        proc = DynamicGraphProcess(part, model, seed=5)
        fast = np.zeros(200 * 200, dtype=np.int64)
        for _ in range(snaps):
            np.add.at(fast, proc.next_snapshot().codes, 1)
        fast = fast[codes]
        var = 2 * snaps * probs * (1 - probs)
        z = (fast - naive) / np.sqrt(var)
        # 4 sigma per pair; expected exceedances at 19900 pairs ~ 1.25
        assert np.count_nonzero(np.abs(z) > 4) <= 6
        assert np.abs(z).max() < 5.5
        # pooled check on the mean rate
        assert abs(z.mean()) < 4 / math.sqrt(len(z))


class TestNaiveRound:
    def test_bad_phase(self):
        state = oracle.new_state([0, 1])
        with pytest.raises(ParameterError):
            oracle.naive_protocol_round(state, Snapshot.from_pairs(1, 2, []), "phase9")

    def test_empty_snapshot_spread(self):
        state = oracle.new_state([0, 1, 2, 0])
        out = oracle.naive_protocol_round(state, Snapshot.from_pairs(1, 4, []), "spread")
        assert out["labels"] == [0, 1, 2, 0]

    def test_majority_tie(self):
        state = oracle.new_state([0])
        state["counts"][0] = {1: 3, 2: 3}
        out = oracle.naive_protocol_round(state, Snapshot.from_pairs(1, 1, []), "majority-end")
        assert out["labels"] == [1]

    @pytest.mark.parametrize("phase", ["phase1", "spread", "window", "min-window", "majority"])
    def test_single_round_matches_engine(self, phase):
        n = 50
        gen = np.random.default_rng(4)
        labels = gen.integers(0, 4, size=n)
        pairs = {tuple(sorted(gen.choice(n, 2, replace=False))) for _ in range(150)}
        snap = Snapshot.from_pairs(3, n, pairs)
        state = oracle.naive_protocol_round(oracle.new_state(labels), snap, phase, 0.2, 8)
        end = {"phase1": "phase1-end", "window": "window-end", "min-window": "min-window-end",
               "majority": "majority-end"}.get(phase)
        if end:
            state = oracle.naive_protocol_round(state, snap, end, 0.2, 8)
        engine = LabelEngine(labels)
        if phase in ("phase1", "spread"):
            src, dst = np.concatenate([snap.u, snap.v]), np.concatenate([snap.v, snap.u])
        else:
            src, dst = linkproc_orient(snap, 0.2, 8, 3)
        method = {"phase1": "phase1", "spread": "spread", "window": "window",
                  "min-window": "min_window", "majority": "majority"}[phase]
        getattr(engine, f"{method}_step")(src, dst)
        finalize = {"phase1": "phase1_finalize", "window": "window_finalize",
                    "min-window": "min_window_finalize", "majority": "majority_decide"}.get(phase)
        if finalize:
            getattr(engine, finalize)()
        assert engine.labels.tolist() == state["labels"]

    def test_linkproc_matches(self):
        gen = np.random.default_rng(2)
        n = 60
        pairs = {tuple(sorted(gen.choice(n, 2, replace=False))) for _ in range(300)}
        snap = Snapshot.from_pairs(9, n, pairs)
        src, dst = linkproc_orient(snap, 0.3, 4, 9)
        assert set(zip(dst.tolist(), src.tolist())) == oracle.naive_linkproc(snap, 0.3, 4, 9)


class TestLinkProcStats:
    def test_p_one(self):
        stats = oracle.linkproc_stats(1.0, 10_000)
        assert stats["direction"][0] == 1.0
        assert stats["joint"][0] == 1.0

    def test_bad_p(self):
        with pytest.raises(ParameterError):
            oracle.linkproc_stats(0.0, 10)


def _naive_trials(n, trials, c):
    """Success fraction of the straight-line rules on independently seeded graphs."""
    sched = experimental_schedule(n, c)
    part = new_partition(n)
    model = TwoBlock(5 / n, 1 / n ** 2)
    gen = np.random.default_rng(12345)
    wins = 0
    for trial in range(trials):
        proc = DynamicGraphProcess(part, model, seed=10**6 + trial)
        labels = [0] * n
        labels[int(gen.integers(0, n // 2))] = 1
        labels[n // 2 + int(gen.integers(0, n // 2))] = 2
        frozen = [z > 0 for z in labels]
        snaps = (proc.next_snapshot() for _ in range(sched.rule_steps))
        history = oracle.naive_run(snaps, sched, labels, frozen, 5 / n, seed=trial)
        wins += is_good_labeling(history[-1], part)
    return wins / trials


def test_success_fraction_vs_oracle():
    n, trials, c = 1000, 100, 0.5
    sched = experimental_schedule(n, c)
    fast = 0
    for trial in range(trials):
        proc = DynamicGraphProcess(new_partition(n), TwoBlock(5 / n, 1 / n ** 2), seed=trial)
        fast += run_protocol(proc, ProtocolConfig(sched, seed=trial)).success
    assert abs(fast / trials - _naive_trials(n, trials, c)) <= 0.05
