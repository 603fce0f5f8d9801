"""Protocol variants beyond two fixed sources on a Bernoulli graph.

* random source election with labels drawn from ``[n^2]`` and the
  minimal-label window rule that lets one label win per community,
* degree estimation for nodes that do not know ``p``,
* stretched schedules for very sparse graphs (rule steps on OR-unions of
  ``delta`` snapshots) and for edge-Markovian graphs (idle rounds between
  rule steps while the edge chains mix).
"""

from __future__ import annotations

import logging
import math
from dataclasses import replace

import numpy as np

from . import rng
from .errors import ParameterError
from .graph_models import Markovian, mixing_time_bound
from .metrics import is_good_labeling
from .rules import NodeState
from .schedule import PhaseSchedule

__all__ = [
    "elect_sources",
    "min_label_window_step",
    "min_label_window_finalize",
    "estimate_degree",
    "sparse_schedule",
    "meg_schedule",
    "good_labeling_r",
]

log = logging.getLogger(__name__)

good_labeling_r = is_good_labeling


def source_probability(n: int, d: float) -> float:
    prob = d * math.log(n) / n
    if prob > 1.0:
        log.warning("source probability d*ln(n)/n = %.3f > 1 at n=%d; clamped to 1", prob, n)
        prob = 1.0
    return prob


def elect_sources(n: int, d: float, seed: int) -> np.ndarray:
    """Each node becomes a source with probability ``d ln n / n`` and draws a label from ``1..n^2``.

    Returns a length-``n`` label array with 0 for non-sources. Duplicate
    labels are possible (probability ``1/n^2`` per pair of sources).
    """
    if d <= 0:
        raise ParameterError(f"source density d must be positive, got {d}")
    prob = source_probability(n, d)
    nodes = np.arange(n, dtype=np.int64)
    is_source = rng.hash_uniform(rng.derive_key(seed, rng.SOURCES), nodes) < prob
    draws = rng.hash_bits(rng.derive_key(seed, rng.SOURCE_LABELS), nodes)
    labels = (draws % np.uint64(n * n)).astype(np.int64) + 1
    return np.where(is_source, labels, 0)


def min_label_window_step(state: NodeState, visible) -> NodeState:
    seen = [int(z) for z in visible]
    if not seen:
        return state
    best = min(seen)
    if state.window_seen == 0 or best < state.window_seen:
        return replace(state, window_seen=best)
    return state


def min_label_window_finalize(state: NodeState) -> NodeState:
    """Adopt the minimum of the own label (if any) and every label seen in the window."""
    label = state.label
    if state.window_seen != 0 and (label == 0 or state.window_seen < label):
        label = state.window_seen
    return replace(state, label=label, window_seen=0, window_conflict=False)


def estimate_degree(degree_sum, rounds: int, n: int):
    """Unbiased estimate of ``d`` from the summed degrees over ``rounds`` rounds of G(n, d/n).

    Works elementwise when ``degree_sum`` is an array.
    """
    if rounds <= 0:
        raise ParameterError("degree estimation needs at least one round")
    return np.asarray(degree_sum, dtype=np.float64) / (rounds * (1.0 - 1.0 / n))


def estimation_rounds(n: int, c: float) -> int:
    return max(1, math.ceil(c * math.log(n)))


def sparse_schedule(base: PhaseSchedule, p: float, n: int) -> PhaseSchedule:
    """Apply rules only every ``delta = ceil(1/(pn))`` rounds, on the OR-union of those rounds."""
    if p <= 0:
        raise ParameterError("sparse schedule needs p > 0")
    if p * n >= 1:
        return base
    delta = math.ceil(round(1.0 / (p * n), 9))
    return base.with_stride(delta=base.delta * delta)


def meg_schedule(base: PhaseSchedule, model, n: int, multiplier: float = 1.0) -> PhaseSchedule:
    """Insert ``mixing_time_bound`` idle rounds after every rule step."""
    if not isinstance(model, Markovian):
        raise ParameterError("meg_schedule needs a Markovian edge model")
    if multiplier == 0:
        return base
    return base.with_stride(gap=base.gap + mixing_time_bound(model, n, multiplier))
