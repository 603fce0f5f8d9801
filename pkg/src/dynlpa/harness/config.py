"""Experiment configuration, table presets and config-file loading."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from ..errors import ParameterError
from ..extensions import estimation_rounds, meg_schedule, sparse_schedule
from ..graph_models import Markovian, NonHomogeneous, TwoBlock, new_partition
from ..schedule import PhaseSchedule, experimental_schedule
from .expr import UniformRange, parse_prob_expr

__all__ = [
    "ExperimentConfig",
    "Built",
    "build",
    "table_presets",
    "load_config_file",
    "MULTI_SOURCE_C",
]

TABLE_SIZES = (20000, 40000, 80000, 160000, 320000, 640000, 1280000, 2560000)

# shorter phase-4 windows limit cross-community spread of small labels;
# a longer majority phase absorbs what leaks through
MULTI_SOURCE_C = (0.5, 0.5, 0.5, 0.2, 1.0)

# Reported (percentage, total steps) per (table, n, q column).
REPORTED_RESULTS = {
    "table1": {
        20000: ((99, 66), (100, 46), (100, 36)),
        40000: ((99, 71), (100, 46), (100, 41)),
        80000: ((100, 76), (100, 51), (100, 41)),
        160000: ((100, 81), (100, 51), (100, 46)),
        320000: ((100, 86), (100, 56), (99, 46)),
        640000: ((100, 91), (100, 61), (100, 51)),
        1280000: ((100, 91), (100, 61), (100, 51)),
        2560000: ((100, 96), (100, 66), (100, 56)),
    },
    "table2": {
        20000: ((100, 46), (100, 46), (100, 36)),
        40000: ((98, 71), (99, 46), (100, 41)),
        80000: ((100, 76), (100, 51), (100, 41)),
        160000: ((100, 81), (100, 51), (100, 46)),
        320000: ((100, 86), (100, 56), (100, 46)),
        640000: ((100, 91), (100, 61), (100, 51)),
        1280000: ((100, 91), (100, 61), (100, 51)),
    },
    "table3": {
        20000: ((99, 76), (100, 31), (100, 31)),
        40000: ((99, 81), (100, 31), (100, 31)),
        80000: ((98, 86), (100, 31), (100, 31)),
        160000: ((100, 91), (100, 36), (100, 36)),
        320000: ((100, 96), (100, 36), (100, 36)),
        640000: ((100, 101), (100, 41), (100, 41)),
        1280000: ((100, 106), (100, 41), (100, 41)),
    },
}

_TABLE_SETUP = {
    "table1": ("5/n", (("n^(-3/2)", 0.9), ("n^(-5/3)", 0.6), ("n^-2", 0.5))),
    "table2": ("uniform(1/n, 9/n)", (("n^(-3/2)", 1.0), ("n^(-5/3)", 0.4), ("n^-2", 0.4))),
    "table3": ("uniform(0, log n / n)", (("n^(-3/2)", 1.0), ("n^(-5/3)", 0.4), ("n^-2", 0.4))),
}


@dataclass
class ExperimentConfig:
    n: int = 20000
    p: str = "5/n"
    q: str = "n^-2"
    c: float | tuple = 0.5
    trials: int = 100
    seed: int = 0
    variant: str = "two-source"
    model: str = "bernoulli"
    p_unknown: bool = False
    sparse: bool = False
    windows: int | None = None
    source_density: float = 2.0
    estimate_c: float = 30.0
    p_down: float = 0.3
    q_down: float = 0.3
    meg_init: str = "stationary"
    mixing_multiplier: float = 1.0
    out: str | None = None
    trajectories: bool = False
    workers: int | None = None
    reported: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.n < 4:
            raise ParameterError(f"n must be >= 4, got {self.n}")
        if self.variant not in ("two-source", "multi-source"):
            raise ParameterError(f"unknown variant {self.variant!r}")
        if self.model not in ("bernoulli", "meg"):
            raise ParameterError(f"unknown model {self.model!r}")

    @property
    def c_label(self) -> str:
        if isinstance(self.c, (int, float)):
            return f"{self.c:g}"
        return "/".join(f"{x:g}" for x in self.c)

    @property
    def variant_label(self) -> str:
        parts = [self.variant]
        if self.p_unknown:
            parts.append("p-unknown")
        if self.sparse:
            parts.append("sparse")
        return "+".join(parts)


@dataclass
class Built:
    partition: object
    model: object
    schedule: PhaseSchedule
    model_label: str
    nominal_p: float

    def total_rounds(self, config: ExperimentConfig) -> int:
        extra = estimation_rounds(config.n, config.estimate_c) if config.p_unknown else 0
        return self.schedule.total_rounds + extra


def build(config: ExperimentConfig) -> Built:
    """Resolve expressions into a partition, edge model and schedule."""
    n = config.n
    p = parse_prob_expr(config.p, n)
    q = parse_prob_expr(config.q, n)
    if isinstance(q, UniformRange):
        raise ParameterError("cross probability q must be a single value, not uniform(...)")
    if config.model == "meg":
        if isinstance(p, UniformRange):
            raise ParameterError("the Markovian model takes a single birth rate p")
        model = Markovian(p, config.p_down, q, config.q_down, config.meg_init)
        nominal = p / (p + config.p_down) if p + config.p_down else 0.0
        label = "meg"
    elif isinstance(p, UniformRange):
        model = NonHomogeneous(p.low, p.high, q)
        nominal = (p.low + p.high) / 2
        label = "nonhomogeneous"
    else:
        model = TwoBlock(p, q)
        nominal = p
        label = "bernoulli"
    windows = config.windows or (4 if config.variant == "multi-source" else 1)
    schedule = experimental_schedule(n, config.c, window_count=windows)
    if config.sparse:
        schedule = sparse_schedule(schedule, nominal, n)
    if config.model == "meg":
        schedule = meg_schedule(schedule, model, n, config.mixing_multiplier)
    return Built(new_partition(n, 2), model, schedule, label, nominal)


def table_presets(name: str, max_n: int | None = None, **overrides) -> list[ExperimentConfig]:
    """The (n, q, c) grid of one of the reference tables, n-major."""
    if name not in _TABLE_SETUP:
        raise ParameterError(f"unknown table {name!r}; expected one of {sorted(_TABLE_SETUP)}")
    p_expr, columns = _TABLE_SETUP[name]
    out = []
    for n, reported in REPORTED_RESULTS[name].items():
        if max_n is not None and n > max_n:
            continue
        for (q_expr, c), ref in zip(columns, reported):
            cfg = ExperimentConfig(n=n, p=p_expr, q=q_expr, c=c, reported=ref)
            out.append(replace(cfg, **overrides) if overrides else cfg)
    return out


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def coerce(key: str, value: str):
    """Convert a config-file/CLI string to the type of ExperimentConfig.<key>."""
    names = {f.name for f in fields(ExperimentConfig)} - {"reported"}
    if key not in names:
        raise ParameterError(f"unknown config key {key!r}")
    if key in ("n", "trials", "seed", "windows", "workers"):
        try:
            return int(float(value)) if key != "seed" else int(value)
        except ValueError:
            raise ParameterError(f"{key} expects an integer, got {value!r}") from None
    if key in ("p_unknown", "sparse", "trajectories"):
        if value.strip().lower() not in _BOOL:
            raise ParameterError(f"{key} expects a boolean, got {value!r}")
        return _BOOL[value.strip().lower()]
    if key == "c":
        parts = [x for x in value.replace("/", ",").split(",") if x.strip()]
        try:
            vals = tuple(float(x) for x in parts)
        except ValueError:
            raise ParameterError(f"c expects a number or five numbers, got {value!r}") from None
        if len(vals) == 1:
            return vals[0]
        if len(vals) != 5:
            raise ParameterError(f"c expects one or five values, got {len(vals)}")
        return vals
    if key in ("source_density", "estimate_c", "p_down", "q_down", "mixing_multiplier"):
        try:
            return float(value)
        except ValueError:
            raise ParameterError(f"{key} expects a number, got {value!r}") from None
    return value.strip()


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            values[key] = coerce(key, value)
    return values


def default_c_grid(step: float = 0.1, c_max: float = 2.0):
    count = int(math.floor(c_max / step + 1e-9))
    return [round(step * i, 10) for i in range(1, count + 1)]
