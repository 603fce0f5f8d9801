"""Per-node rule examples, and agreement of the bulk engine with the per-node rules."""

import numpy as np
from hypothesis import given, settings, strategies as st

from dynlpa import extensions, rules
from dynlpa.protocol import LabelEngine
from dynlpa.rules import NodeState


def run(step, state, rounds, finalize=None):
    for visible in rounds:
        state = step(state, visible)
    return finalize(state) if finalize else state


class TestPhase1:
    def test_single_label(self):
        s = run(rules.phase1_step, NodeState(), [[1], [], [1, 1]], rules.phase1_finalize)
        assert s.label == 1

    def test_two_labels(self):
        s = run(rules.phase1_step, NodeState(), [[1], [2]], rules.phase1_finalize)
        assert s.label == 0

    def test_nothing(self):
        assert run(rules.phase1_step, NodeState(), [[], []], rules.phase1_finalize).label == 0


class TestPhase23:
    def test_unique(self):
        assert rules.phase23_step(NodeState(), [1, 1]).label == 1

    def test_mixed(self):
        assert rules.phase23_step(NodeState(), [1, 2]).label == 0

    def test_empty(self):
        assert rules.phase23_step(NodeState(), []).label == 0

    def test_labeled_unchanged(self):
        assert rules.phase23_step(NodeState(label=2), [1]).label == 2


class TestPhase4:
    def test_overrides_prior(self):
        s = run(rules.phase4_window_step, NodeState(label=1), [[2], [2, 2], [2]], rules.phase4_window_finalize)
        assert s.label == 2

    def test_conflict_keeps_prior(self):
        rounds = [[1], [], [], [], [2]]
        s = run(rules.phase4_window_step, NodeState(label=1), rounds, rules.phase4_window_finalize)
        assert s.label == 1
        assert s.window_seen == 0 and not s.window_conflict

    def test_empty_window(self):
        s = run(rules.phase4_window_step, NodeState(label=2), [[], []], rules.phase4_window_finalize)
        assert s.label == 2


class TestPhase5:
    def test_majority(self):
        s = rules.phase5_decide(rules.phase5_accumulate(NodeState(), [1] * 10 + [2] * 3))
        assert s.label == 1

    def test_no_observations(self):
        assert rules.phase5_decide(NodeState(label=2)).label == 2
        assert rules.phase5_decide(NodeState()).label == 0

    def test_tie_smallest(self):
        s = rules.phase5_decide(rules.phase5_accumulate(NodeState(), [2, 1] * 4))
        assert s.label == 1

    @given(st.lists(st.lists(st.integers(1, 4), max_size=5), max_size=6), st.randoms())
    def test_order_invariant(self, rounds, rnd):
        a = run(rules.phase5_accumulate, NodeState(), rounds, rules.phase5_decide)
        shuffled = list(rounds)
        rnd.shuffle(shuffled)
        b = run(rules.phase5_accumulate, NodeState(), shuffled, rules.phase5_decide)
        assert a.label == b.label


class TestMinLabel:
    def test_min(self):
        s = run(extensions.min_label_window_step, NodeState(label=5), [[7], [3]], extensions.min_label_window_finalize)
        assert s.label == 3

    def test_nothing(self):
        s = run(extensions.min_label_window_step, NodeState(label=5), [[]], extensions.min_label_window_finalize)
        assert s.label == 5

    def test_global_min(self):
        s = run(extensions.min_label_window_step, NodeState(label=1), [[4, 9]], extensions.min_label_window_finalize)
        assert s.label == 1

    def test_idempotent(self):
        s = run(extensions.min_label_window_step, NodeState(label=5), [[2]], extensions.min_label_window_finalize)
        assert extensions.min_label_window_finalize(s) == s


# bulk engine vs per-node rules on random observation streams

N = 12
_rounds = st.lists(
    st.lists(st.tuples(st.integers(0, N - 1), st.integers(0, N - 1)), max_size=30),
    min_size=1, max_size=6,
)
_labels = st.lists(st.integers(0, 4), min_size=N, max_size=N)


def _visible(labels, arcs):
    out = [[] for _ in range(N)]
    for src, dst in arcs:
        if labels[src]:
            out[dst].append(labels[src])
    return out


def _arrays(arcs):
    src = np.array([a for a, _ in arcs], dtype=np.int64)
    dst = np.array([b for _, b in arcs], dtype=np.int64)
    return src, dst


def _compare(labels, rounds, engine_step, engine_end, node_step, node_end, sync_labels=False):
    engine = LabelEngine(labels)
    states = [NodeState(label=z) for z in labels]
    for arcs in rounds:
        current = [s.label for s in states] if sync_labels else labels
        vis = _visible(current, arcs)
        getattr(engine, engine_step)(*_arrays(arcs))
        states = [node_step(s, v) for s, v in zip(states, vis)]
    if engine_end:
        getattr(engine, engine_end)()
        states = [node_end(s) for s in states]
    assert engine.labels.tolist() == [s.label for s in states]


@settings(max_examples=150, deadline=None)
@given(_labels, _rounds)
def test_engine_phase1(labels, rounds):
    _compare(labels, rounds, "phase1_step", "phase1_finalize", rules.phase1_step, rules.phase1_finalize)


@settings(max_examples=150, deadline=None)
@given(_labels, _rounds)
def test_engine_spread(labels, rounds):
    _compare(labels, rounds, "spread_step", None, rules.phase23_step, None, sync_labels=True)


@settings(max_examples=150, deadline=None)
@given(_labels, _rounds)
def test_engine_window(labels, rounds):
    _compare(labels, rounds, "window_step", "window_finalize", rules.phase4_window_step, rules.phase4_window_finalize)


@settings(max_examples=150, deadline=None)
@given(_labels, _rounds)
def test_engine_min_window(labels, rounds):
    _compare(labels, rounds, "min_window_step", "min_window_finalize",
             extensions.min_label_window_step, extensions.min_label_window_finalize)


@settings(max_examples=150, deadline=None)
@given(_labels, _rounds)
def test_engine_majority(labels, rounds):
    _compare(labels, rounds, "majority_step", "majority_decide", rules.phase5_accumulate, rules.phase5_decide)


def test_engine_frozen_nodes_keep_label():
    engine = LabelEngine([1, 0, 2], frozen=[True, False, True])
    src, dst = np.array([2, 2, 0]), np.array([0, 1, 2])
    engine.window_step(src, dst)
    engine.window_finalize()
    assert engine.labels.tolist() == [1, 2, 2]
