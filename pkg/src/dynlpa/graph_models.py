"""Dynamic planted-partition graph processes.

Nodes ``0..n-1`` are split into ``r`` contiguous communities. Each round a
:class:`DynamicGraphProcess` emits a :class:`Snapshot` of undirected edges
drawn from one of three edge models:

* :class:`TwoBlock` - every intra-community pair independently present with
  probability ``p``, every cross pair with ``q``.
* :class:`NonHomogeneous` - intra pair ``e`` present with its own fixed
  probability ``p_e`` drawn uniformly from ``[p_low, p_high]`` once, before
  round 0; cross pairs with ``q``.
* :class:`Markovian` - every pair follows a two-state birth/death chain.

Sampling costs O(expected edges) per round: present pairs are located by
geometric skips over a linear index of each community block (a triangle)
and each pair of blocks (a rectangle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng
from .errors import ParameterError

__all__ = [
    "PlantedPartition",
    "TwoBlock",
    "NonHomogeneous",
    "Markovian",
    "Snapshot",
    "DynamicGraphProcess",
    "new_partition",
    "or_union",
    "stationary_edge_prob",
    "mixing_time_bound",
    "nominal_probs",
]


@dataclass(frozen=True)
class PlantedPartition:
    """Ground-truth assignment of nodes to ``r`` contiguous communities."""

    n: int
    r: int
    sizes: tuple[int, ...]

    @property
    def starts(self) -> tuple[int, ...]:
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    @property
    def community_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.r, dtype=np.int64), self.sizes)

    def members(self, c: int) -> range:
        start = self.starts[c]
        return range(start, start + self.sizes[c])


def new_partition(n: int, r: int = 2) -> PlantedPartition:
    """Split ``n`` nodes into ``r`` contiguous blocks whose sizes differ by at most one.

    >>> new_partition(5, 2).sizes
    (3, 2)
    """
    if r < 2:
        raise ParameterError(f"need at least 2 communities, got r={r}")
    if n < 2 * r:
        raise ParameterError(f"r={r} communities on n={n} nodes would leave singletons")
    base, extra = divmod(n, r)
    sizes = tuple(base + 1 if c < extra else base for c in range(r))
    return PlantedPartition(n=n, r=r, sizes=sizes)


# -- edge models ------------------------------------------------------------


def _check_prob(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ParameterError(f"{name}={value} is not a probability")


@dataclass(frozen=True)
class TwoBlock:
    p: float
    q: float

    def __post_init__(self):
        _check_prob("p", self.p)
        _check_prob("q", self.q)
        if self.q > self.p:
            raise ParameterError(f"cross probability q={self.q} exceeds p={self.p}")


@dataclass(frozen=True)
class NonHomogeneous:
    p_low: float
    p_high: float
    q: float

    def __post_init__(self):
        _check_prob("p_low", self.p_low)
        _check_prob("p_high", self.p_high)
        _check_prob("q", self.q)
        if self.p_low > self.p_high:
            raise ParameterError(f"empty range [{self.p_low}, {self.p_high}]")


@dataclass(frozen=True)
class Markovian:
    p_up: float
    p_down: float
    q_up: float
    q_down: float
    initial: str = "stationary"

    def __post_init__(self):
        for name in ("p_up", "p_down", "q_up", "q_down"):
            _check_prob(name, getattr(self, name))
        if self.initial not in ("stationary", "empty"):
            raise ParameterError(f"unknown initial-edge-set policy {self.initial!r}")
        if self.initial == "stationary":
            if self.p_up + self.p_down == 0 or self.q_up + self.q_down == 0:
                raise ParameterError("stationary start needs up + down > 0 for both chains")


def stationary_edge_prob(up: float, down: float) -> float:
    """Stationary probability that a birth/death edge chain is in the 'present' state."""
    if up + down <= 0:
        raise ParameterError("up and down rates are both zero; chain has no stationary law")
    return up / (up + down)


def mixing_time_bound(model, n: int, multiplier: float = 1.0) -> int:
    """``ceil(multiplier * max(1/(p_up+p_down), 1/(q_up+q_down), ln n))``."""
    if not isinstance(model, Markovian):
        raise ParameterError("mixing time is only defined for the Markovian edge model")
    if multiplier < 0:
        raise ParameterError(f"multiplier must be non-negative, got {multiplier}")
    terms = [math.log(n)]
    for up, down in ((model.p_up, model.p_down), (model.q_up, model.q_down)):
        terms.append(math.inf if up + down == 0 else 1.0 / (up + down))
    bound = multiplier * max(terms)
    if math.isinf(bound):
        raise ParameterError("a chain with up + down = 0 never mixes")
    # tolerate float noise such as 10.000000000000002
    return int(math.ceil(round(bound, 9)))


def nominal_probs(model) -> tuple[float, float]:
    """Per-round (intra, cross) edge probability a node should assume."""
    if isinstance(model, TwoBlock):
        return model.p, model.q
    if isinstance(model, NonHomogeneous):
        return (model.p_low + model.p_high) / 2, model.q
    if isinstance(model, Markovian):
        p = model.p_up / (model.p_up + model.p_down) if model.p_up + model.p_down else 0.0
        q = model.q_up / (model.q_up + model.q_down) if model.q_up + model.q_down else 0.0
        return p, q
    raise ParameterError(f"unknown edge model {model!r}")


# -- snapshots ----------------------------------------------------------------


@dataclass
class Snapshot:
    """Undirected edge set of one round, stored as parallel arrays with ``u < v``.

    Edges are kept sorted by ``u * n + v``.
    """

    t: int
    n: int
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def from_codes(cls, t, n, codes):
        codes = np.asarray(codes, dtype=np.int64)
        return cls(t=t, n=n, u=codes // n, v=codes % n)

    @classmethod
    def from_pairs(cls, t, n, pairs):
        codes = set()
        for a, b in pairs:
            if a == b:
                raise ParameterError(f"self-loop ({a}, {b})")
            if not (0 <= a < n and 0 <= b < n):
                raise ParameterError(f"pair ({a}, {b}) outside 0..{n - 1}")
            a, b = min(a, b), max(a, b)
            codes.add(a * n + b)
        return cls.from_codes(t, n, np.array(sorted(codes), dtype=np.int64))

    @property
    def codes(self) -> np.ndarray:
        return self.u * self.n + self.v

    @property
    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    def __len__(self):
        return len(self.u)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.u, minlength=self.n) + np.bincount(self.v, minlength=self.n)


def or_union(snapshots: Sequence[Snapshot]) -> Snapshot:
    """Union of the edge sets; ``t`` is taken from the last snapshot."""
    if len(snapshots) == 0:
        raise ParameterError("or_union needs at least one snapshot")
    n = snapshots[0].n
    if any(s.n != n for s in snapshots):
        raise ParameterError("snapshots disagree on n")
    if len(snapshots) == 1:
        s = snapshots[0]
        return Snapshot(t=s.t, n=n, u=s.u.copy(), v=s.v.copy())
    codes = np.unique(np.concatenate([s.codes for s in snapshots]))
    return Snapshot.from_codes(snapshots[-1].t, n, codes)


# -- pair indexing --------------------------------------------------------------


@dataclass(frozen=True)
class _Region:
    """One block of the pair space: a triangle (a == b) or a rectangle (a < b)."""

    a: int
    b: int
    a_start: int
    a_size: int
    b_start: int
    b_size: int

    @property
    def intra(self) -> bool:
        return self.a == self.b

    @property
    def total(self) -> int:
        if self.intra:
            return self.a_size * (self.a_size - 1) // 2
        return self.a_size * self.b_size

    def decode(self, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map linear pair indices to node pairs ``(u, v)`` with ``u < v``."""
        k = np.asarray(k, dtype=np.int64)
        if self.intra:
            # row-major over the lower triangle: pair (i, j), i < j, index j(j-1)/2 + i
            j = ((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
            j -= (j * (j - 1) // 2 > k)
            j += ((j + 1) * j // 2 <= k)
            i = k - j * (j - 1) // 2
            return self.a_start + i, self.a_start + j
        i, j = np.divmod(k, self.b_size)
        return self.a_start + i, self.b_start + j

    def encode(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        i = np.asarray(u, dtype=np.int64) - self.a_start
        j = np.asarray(v, dtype=np.int64) - self.b_start
        if self.intra:
            return j * (j - 1) // 2 + i
        return i * self.b_size + j


def regions_of(partition: PlantedPartition) -> list[_Region]:
    """Intra blocks first (community order), then cross blocks ``(a, b)``, ``a < b``."""
    starts, sizes = partition.starts, partition.sizes
    out = [_Region(c, c, starts[c], sizes[c], starts[c], sizes[c]) for c in range(partition.r)]
    for a in range(partition.r):
        for b in range(a + 1, partition.r):
            out.append(_Region(a, b, starts[a], sizes[a], starts[b], sizes[b]))
    return out


def region_table(partition: PlantedPartition) -> np.ndarray:
    """``table[a, b]`` is the index in :func:`regions_of` of the block holding pairs (a, b)."""
    r = partition.r
    table = np.empty((r, r), dtype=np.int64)
    idx = r
    for c in range(r):
        table[c, c] = c
    for a in range(r):
        for b in range(a + 1, r):
            table[a, b] = table[b, a] = idx
            idx += 1
    return table


def skip_sample(gen: np.random.Generator, total: int, p: float) -> np.ndarray:
    """Sorted indices in ``[0, total)``, each kept independently with probability ``p``.

    Uses geometric gaps between successes, so the cost tracks ``total * p``.
    """
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    mean = total * p
    batch = int(mean + 6.0 * math.sqrt(mean) + 16)
    parts = []
    pos = -1
    while True:
        idx = pos + np.cumsum(gen.geometric(p, size=batch))
        if idx[-1] >= total:
            parts.append(idx[idx < total])
            break
        parts.append(idx)
        pos = int(idx[-1])
        batch = max(16, batch // 4)
    return np.concatenate(parts)


# -- the process ------------------------------------------------------------------


@dataclass
class DynamicGraphProcess:
    """Stateful per-round snapshot generator.

    ``method="skip"`` (default) uses geometric skip sampling for the
    Bernoulli models. ``method="pairwise"`` draws one addressed uniform per
    pair and is meant for small ``n`` where it can be checked pair by pair.
    The Markovian model always uses the sparse birth/death sampler.
    """

    partition: PlantedPartition
    model: object
    seed: int = 0
    method: str = "skip"
    t: int = 0
    _alive: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.method not in ("skip", "pairwise"):
            raise ParameterError(f"unknown sampling method {self.method!r}")
        if not isinstance(self.model, (TwoBlock, NonHomogeneous, Markovian)):
            raise ParameterError(f"unknown edge model {self.model!r}")
        self._regions = regions_of(self.partition)
        self._table = region_table(self.partition)
        self._community = self.partition.community_of
        if isinstance(self.model, Markovian):
            self._alive = self._initial_edges()

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def alive(self) -> np.ndarray:
        """Current Markovian edge set as sorted pair codes (read-only view)."""
        if self._alive is None:
            raise ParameterError("only the Markovian model keeps an alive set")
        return self._alive

    def region_probs(self, intra: float, cross: float) -> list[float]:
        return [intra if reg.intra else cross for reg in self._regions]

    def pair_probability(self, u, v) -> np.ndarray:
        """Per-pair intra probability ``p_e`` of the non-homogeneous model (pairs in one block)."""
        m = self.model
        codes = np.asarray(u, dtype=np.int64) * self.n + np.asarray(v, dtype=np.int64)
        frac = rng.hash_uniform(rng.derive_key(self.seed, rng.PAIR_PROB), codes)
        return m.p_low + (m.p_high - m.p_low) * frac

    # ---- Bernoulli variants

    def _bernoulli_codes(self, t: int) -> np.ndarray:
        m = self.model
        if isinstance(m, TwoBlock):
            probs = self.region_probs(m.p, m.q)
        else:
            probs = self.region_probs(m.p_high, m.q)
        chunks = []
        for idx, (reg, prob) in enumerate(zip(self._regions, probs)):
            if self.method == "pairwise":
                k = np.arange(reg.total, dtype=np.int64)
                draws = rng.hash_uniform(rng.derive_key(self.seed, t, rng.PAIRWISE, idx), k)
                if isinstance(m, NonHomogeneous) and reg.intra:
                    u, v = reg.decode(k)
                    k = k[draws < self.pair_probability(u, v)]
                else:
                    k = k[draws < prob]
            else:
                k = skip_sample(rng.generator(self.seed, t, rng.EDGES, idx), reg.total, prob)
                if isinstance(m, NonHomogeneous) and reg.intra and len(k) and m.p_high > 0:
                    u, v = reg.decode(k)
                    accept = self.pair_probability(u, v) / m.p_high
                    coin = rng.hash_uniform(rng.derive_key(self.seed, t, rng.THINNING, idx), k)
                    k = k[coin < accept]
            u, v = reg.decode(k)
            chunks.append(u * self.n + v)
        codes = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
        codes.sort()
        return codes

    # ---- Markovian variant

    def _initial_edges(self) -> np.ndarray:
        m = self.model
        if m.initial == "empty":
            return np.empty(0, dtype=np.int64)
        p0 = stationary_edge_prob(m.p_up, m.p_down)
        q0 = stationary_edge_prob(m.q_up, m.q_down)
        chunks = []
        for idx, (reg, prob) in enumerate(zip(self._regions, self.region_probs(p0, q0))):
            k = skip_sample(rng.generator(self.seed, 0, rng.MEG_INIT, idx), reg.total, prob)
            u, v = reg.decode(k)
            chunks.append(u * self.n + v)
        codes = np.concatenate(chunks)
        codes.sort()
        return codes

    def _region_ids(self, codes: np.ndarray) -> np.ndarray:
        u, v = codes // self.n, codes % self.n
        return self._table[self._community[u], self._community[v]]

    def _markov_step(self, t: int) -> np.ndarray:
        m = self.model
        alive = self._alive
        n = self.n
        reg_ids = self._region_ids(alive)
        down = np.where(reg_ids < self.partition.r, m.p_down, m.q_down)
        survive = rng.generator(self.seed, t, rng.MEG_DEATH).random(len(alive)) >= down
        kept = alive[survive]

        counts = np.bincount(reg_ids, minlength=len(self._regions))
        births = []
        gen = rng.generator(self.seed, t, rng.MEG_BIRTH)
        for idx, (reg, up) in enumerate(zip(self._regions, self.region_probs(m.p_up, m.q_up))):
            absent = reg.total - int(counts[idx])
            if absent <= 0 or up <= 0.0:
                continue
            want = int(gen.binomial(absent, up))
            if want == 0:
                continue
            taken = np.empty(0, dtype=np.int64)
            if want > absent // 2:
                # dense regime: complement is small, enumerate directly
                occupied = reg.encode(*np.divmod(alive[reg_ids == idx], n))
                free = np.setdiff1d(np.arange(reg.total, dtype=np.int64), occupied)
                taken = gen.choice(free, size=want, replace=False)
            else:
                occupied = np.sort(reg.encode(*np.divmod(alive[reg_ids == idx], n)))
                while len(taken) < want:
                    need = want - len(taken)
                    cand = gen.integers(0, reg.total, size=need + need // 4 + 8)
                    cand = cand[~np.isin(cand, occupied, assume_unique=False)]
                    cand = np.setdiff1d(np.unique(cand), taken)
                    # keep draw order independent of sort: take a random subset if overshooting
                    if len(cand) > need:
                        cand = gen.choice(cand, size=need, replace=False)
                    taken = np.concatenate([taken, cand])
            u, v = reg.decode(np.asarray(taken, dtype=np.int64))
            births.append(u * n + v)
        new = np.concatenate([kept] + births) if births else kept
        new.sort()
        return new

    # ---- public

    def next_snapshot(self) -> Snapshot:
        """Advance one round and return its edge set."""
        self.t += 1
        if isinstance(self.model, Markovian):
            self._alive = self._markov_step(self.t)
            codes = self._alive
        else:
            codes = self._bernoulli_codes(self.t)
        return Snapshot.from_codes(self.t, self.n, codes)

    def advance(self, rounds: int) -> None:
        """Advance ``rounds`` rounds without materialising snapshots."""
        for _ in range(rounds):
            self.t += 1
            if isinstance(self.model, Markovian):
                self._alive = self._markov_step(self.t)
