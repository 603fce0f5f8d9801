"""Phase schedules.

A schedule counts *rule steps*. Each rule step observes ``delta`` consecutive
snapshots (merged by OR-union when ``delta > 1``) and is followed by ``gap``
idle rounds, so one step costs ``delta + gap`` rounds. Round 0 is the
initialisation step in which sources are set up; protocol rounds are
numbered from 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ParameterError

__all__ = ["PhaseSchedule", "experimental_schedule", "theoretical_schedule", "TheoryConstants"]


@dataclass(frozen=True)
class PhaseSchedule:
    phase1: int
    phase2: int
    phase3: int
    window_len: int
    window_count: int
    phase5: int
    delta: int = 1
    gap: int = 0

    def __post_init__(self):
        for name in ("phase1", "phase2", "phase3", "window_len", "window_count", "phase5", "delta"):
            if getattr(self, name) < 1:
                raise ParameterError(f"schedule field {name} must be >= 1, got {getattr(self, name)}")
        if self.gap < 0:
            raise ParameterError(f"gap must be >= 0, got {self.gap}")

    @property
    def phase_steps(self) -> tuple[int, int, int, int, int]:
        return (self.phase1, self.phase2, self.phase3,
                self.window_len * self.window_count, self.phase5)

    @property
    def stride(self) -> int:
        """Rounds consumed by one rule step."""
        return self.delta + self.gap

    @property
    def taus(self) -> tuple[int, ...]:
        """Absolute round index at which each of the five phases ends."""
        out, acc = [], 0
        for steps in self.phase_steps:
            acc += steps * self.stride
            out.append(acc)
        return tuple(out)

    @property
    def rule_steps(self) -> int:
        return sum(self.phase_steps)

    @property
    def total_rounds(self) -> int:
        """Time steps 0..tau5 inclusive."""
        return self.taus[-1] + 1

    def with_stride(self, delta=None, gap=None) -> "PhaseSchedule":
        return replace(self, delta=self.delta if delta is None else delta,
                       gap=self.gap if gap is None else gap)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def experimental_schedule(n: int, c, window_count: int = 1, log_base: float = 2.0) -> PhaseSchedule:
    """Every phase lasts ``round(c * log n)`` steps.

    ``c`` is one constant or five (phases 1, 2, 3, one phase-4 window, 5).
    Phase 4 has ``window_count`` windows. With the defaults (one window,
    base-2 log) the total for n=20000 is 36, 46 and 66 for c = 0.5, 0.6, 0.9.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    consts = (c,) * 5 if isinstance(c, (int, float)) else tuple(c)
    if len(consts) != 5:
        raise ParameterError(f"need one or five phase constants, got {len(consts)}")
    for value in consts:
        if value <= 0:
            raise ParameterError(f"phase constant c must be positive, got {value}")
    lengths = [max(1, _round_half_up(value * math.log(n, log_base))) for value in consts]
    p1, p2, p3, window, p5 = lengths
    return PhaseSchedule(p1, p2, p3, window, window_count, p5)


@dataclass(frozen=True)
class TheoryConstants:
    """Constants of the asymptotic phase-length formulas.

    The defaults are chosen so that every phase has positive length at
    n=20000, p=5/n; the formulas are asymptotic and several combinations are
    invalid at desk-scale ``n``.
    """

    c1: float = 1.0
    d1: float = 32.0
    a: float = 0.2
    phi: float = 0.005
    gamma: float = 1.0
    c4: float = 1.0
    c5: float = 1.0
    polylog_exp: float = 3.0


def theoretical_schedule(n: int, p: float, constants: TheoryConstants = TheoryConstants()) -> PhaseSchedule:
    """Phase lengths from the asymptotic analysis (natural logs, rounded up).

    Raises :class:`ParameterError` naming the constant whose value makes a
    formula operand invalid.
    """
    k = constants
    for name in ("c1", "d1", "a", "phi", "gamma", "c4", "c5", "polylog_exp"):
        if getattr(k, name) <= 0:
            raise ParameterError(f"constant {name} must be positive, got {getattr(k, name)}")
    if not (0 < k.a < 1):
        raise ParameterError(f"constant a must lie in (0, 1), got {k.a}")
    if n < 3 or not (0 < p <= 1):
        raise ParameterError(f"need n >= 3 and p in (0, 1], got n={n}, p={p}")
    ln = math.log(n)
    growth = math.log(1 + n * p / 2)

    k_low = (k.d1 / 16) * p * n * ln
    F = 2 * max(math.sqrt(ln / k_low), ln ** k.polylog_exp / n ** (1 - k.a))
    if F >= 1:
        raise ParameterError(f"F(n,k) = {F:.3g} >= 1; increase d1 or decrease a")
    slow = math.log((1 + n * p / 2) * (1 - F))
    if slow <= 0:
        raise ParameterError("(1 + np/2)(1 - F) <= 1; increase d1 or decrease a")

    tau1 = k.c1 * ln
    first = math.log(n ** k.a / (k.phi * ln ** 3)) / growth
    if first <= 0:
        raise ParameterError(f"n^a / (phi log^3 n) <= 1; decrease phi or increase a")
    second = math.log(ln ** 3 / k_low) / slow
    tau2 = first + second + tau1
    if tau2 <= tau1:
        raise ParameterError("phase 2 has non-positive length; decrease d1")
    third = math.log(n ** (1 - k.a) / (k.gamma * ln ** 3)) / growth
    if third <= 0:
        raise ParameterError("n^(1-a) / (gamma log^3 n) <= 1; decrease gamma or a")
    tau3 = third + tau2

    t1 = math.ceil(tau1)
    t2 = max(math.ceil(tau2), t1 + 1)
    t3 = max(math.ceil(tau3), t2 + 1)
    window = math.ceil(k.c4 * ln)
    phase5 = math.ceil(k.c5 * ln)
    return PhaseSchedule(t1, t2 - t1, t3 - t2, window, 3, phase5)
