"""Counter-based randomness.

Every random draw in the simulator is addressed by a tuple such as
``(trial seed, round, purpose, pair index)`` rather than taken from a shared
sequential stream, so results do not depend on evaluation order.

Two primitives are provided:

* :func:`hash_bits` / :func:`hash_uniform` evaluate a SplitMix64-style mixer
  on ``key ^ counter`` for whole arrays of counters. These are used where a
  draw must be reproducible per pair (link orientation, per-pair edge
  probabilities, the pairwise snapshot backend).
* :func:`generator` returns a numpy ``Philox`` generator keyed by an address,
  used for bulk draws (geometric skips, binomials) that belong to one
  ``(round, purpose)`` slot.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / (1 << 53)

# Purposes: distinct draw families never share an address.
EDGES = 1
PAIRWISE = 2
PAIR_PROB = 3
THINNING = 4
MEG_INIT = 5
MEG_DEATH = 6
MEG_BIRTH = 7
LINK_RANK = 8
LINK_COIN = 9
SOURCES = 10
SOURCE_LABELS = 11
SOURCE_PICK = 12
GRAPH = 13
TRIAL = 14


def mix64(x: int) -> int:
    """Scalar SplitMix64 finalizer on a Python int."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_key(*parts: int) -> int:
    """Fold integer address components into one 64-bit key."""
    key = 0x6A09E667F3BCC908
    for part in parts:
        key = mix64(key ^ (int(part) & MASK64))
    return key


def hash_bits(key: int, counters) -> np.ndarray:
    """64 mixed bits for each counter under ``key`` (vectorised)."""
    x = np.asarray(counters).astype(np.uint64, copy=False) ^ np.uint64(key & MASK64)
    with np.errstate(over="ignore"):
        x = x + _GOLDEN
        x = (x ^ (x >> _S30)) * _M1
        x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


def hash_uniform(key: int, counters) -> np.ndarray:
    """Uniform floats in [0, 1) with 53-bit resolution."""
    return (hash_bits(key, counters) >> _S11).astype(np.float64) * _INV53


def scalar_uniform(key: int, counter: int) -> float:
    """Pure-Python twin of :func:`hash_uniform` for a single counter."""
    return (mix64((counter & MASK64) ^ (key & MASK64)) >> 11) * _INV53


def generator(*parts: int) -> np.random.Generator:
    """A Philox generator whose key is the hashed address ``parts``."""
    k = derive_key(*parts)
    return np.random.Generator(np.random.Philox(key=np.array([k, mix64(k)], dtype=np.uint64)))
