"""Per-node labeling rules.

These are the reference, one-node-at-a-time forms of the phase rules. The
simulation engine in :mod:`dynlpa.protocol` applies the same rules to all
nodes at once with numpy; tests check the two agree.

``visible`` is always the multiset (any iterable) of labels a node sees from
its labeled neighbours in one round. ``0`` never appears in it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

__all__ = [
    "NodeState",
    "phase1_step",
    "phase1_finalize",
    "phase23_step",
    "phase4_window_step",
    "phase4_window_finalize",
    "phase5_accumulate",
    "phase5_decide",
]


@dataclass(frozen=True)
class NodeState:
    label: int = 0
    phase1_seen: frozenset = frozenset()
    window_seen: int = 0
    window_conflict: bool = False
    majority_counts: Mapping[int, int] = field(default_factory=dict)
    degree_sum: int = 0


def _distinct(visible: Iterable[int]) -> set[int]:
    return {int(z) for z in visible}


def phase1_step(state: NodeState, visible) -> NodeState:
    seen = _distinct(visible)
    if not seen:
        return state
    return replace(state, phase1_seen=state.phase1_seen | frozenset(seen))


def phase1_finalize(state: NodeState) -> NodeState:
    """Take the label iff exactly one distinct label was seen during the whole phase."""
    if state.label == 0 and len(state.phase1_seen) == 1:
        (z,) = state.phase1_seen
        state = replace(state, label=z)
    return replace(state, phase1_seen=frozenset())


def phase23_step(state: NodeState, visible) -> NodeState:
    if state.label != 0:
        return state
    seen = _distinct(visible)
    if len(seen) == 1:
        return replace(state, label=seen.pop())
    return state


def phase4_window_step(state: NodeState, visible) -> NodeState:
    seen = _distinct(visible)
    if not seen or state.window_conflict:
        return state
    if len(seen) > 1:
        return replace(state, window_conflict=True)
    (z,) = seen
    if state.window_seen == 0:
        return replace(state, window_seen=z)
    if state.window_seen != z:
        return replace(state, window_conflict=True)
    return state


def phase4_window_finalize(state: NodeState) -> NodeState:
    label = state.label
    if state.window_seen != 0 and not state.window_conflict:
        label = state.window_seen
    return replace(state, label=label, window_seen=0, window_conflict=False)


def phase5_accumulate(state: NodeState, visible) -> NodeState:
    counts = dict(state.majority_counts)
    for z in visible:
        counts[int(z)] = counts.get(int(z), 0) + 1
    return replace(state, majority_counts=counts)


def phase5_decide(state: NodeState) -> NodeState:
    """Largest accumulated count wins; ties go to the smallest label.

    With no observations the prior label (or none) is kept.
    """
    counts = state.majority_counts
    label = state.label
    if counts:
        label = min(counts, key=lambda z: (-counts[z], z))
    return replace(state, label=label, majority_counts={})
