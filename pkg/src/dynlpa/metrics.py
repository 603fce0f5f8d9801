"""Ground-truth evaluation of labelings.

Labels are positive integers; ``0`` means unlabeled.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph_models import PlantedPartition

__all__ = [
    "label_counts",
    "is_good_labeling",
    "Trajectory",
    "convergence_round",
]


def label_counts(labels, partition: PlantedPartition, reference_labels: Sequence[int]):
    """Return ``(k, h)``: per community, nodes holding its own reference label
    and nodes holding any other community's reference label."""
    labels = np.asarray(labels)
    refs = np.asarray(reference_labels, dtype=np.int64)
    if len(refs) != partition.r:
        raise ValueError(f"need {partition.r} reference labels, got {len(refs)}")
    if len(set(refs.tolist())) != len(refs):
        raise ValueError("reference labels must be pairwise distinct")
    k = np.zeros(partition.r, dtype=np.int64)
    h = np.zeros(partition.r, dtype=np.int64)
    for c in range(partition.r):
        block = labels[partition.starts[c]: partition.starts[c] + partition.sizes[c]]
        k[c] = np.count_nonzero(block == refs[c])
        h[c] = np.count_nonzero(np.isin(block, np.delete(refs, c)))
    return k, h


def is_good_labeling(labels, partition: PlantedPartition) -> bool:
    """Every node labeled, one label per community, distinct across communities."""
    labels = np.asarray(labels)
    seen = []
    for c in range(partition.r):
        block = labels[partition.starts[c]: partition.starts[c] + partition.sizes[c]]
        first = block[0]
        if first <= 0 or not np.all(block == first):
            return False
        seen.append(int(first))
    return len(set(seen)) == len(seen)


@dataclass
class Trajectory:
    """Per-rule-step snapshot of the (k_i, h_i) state plus the good-labeling flag."""

    reference_labels: tuple[int, ...]
    rounds: list[int] = field(default_factory=list)
    k: list[np.ndarray] = field(default_factory=list)
    h: list[np.ndarray] = field(default_factory=list)
    good: list[bool] = field(default_factory=list)

    def record(self, round_idx, labels, partition):
        k, h = label_counts(labels, partition, self.reference_labels)
        self.rounds.append(int(round_idx))
        self.k.append(k)
        self.h.append(h)
        self.good.append(is_good_labeling(labels, partition))

    def at(self, round_idx):
        """(k, h) recorded at ``round_idx``."""
        i = self.rounds.index(round_idx)
        return self.k[i], self.h[i]

    def write_csv(self, path):
        r = len(self.reference_labels)
        header = ["round"] + [f"k{i + 1}" for i in range(r)] + [f"h{i + 1}" for i in range(r)]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, k, h in zip(self.rounds, self.k, self.h):
                writer.writerow([t, *k.tolist(), *h.tolist()])


def convergence_round(rounds: Sequence[int], good: Sequence[bool]):
    """First recorded round from which the labeling stays good to the end, else None.

    >>> convergence_round([28, 30, 33, 34, 36], [False, True, False, True, True])
    34
    """
    if not good or not good[-1]:
        return None
    i = len(good) - 1
    while i > 0 and good[i - 1]:
        i -= 1
    return rounds[i]
