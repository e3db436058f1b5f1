"""Bipartite profit-maximization objective.

Sources (marketing channels) run repeated trials; the i-th trial of source
``s`` independently activates each adjacent target with probability
``probs[i-1]``.  For a strategy ``m`` (trials per source) the expected number
of activated targets minus the linear trial cost is the profit ``f(m)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import (
    BoundsError,
    ConfigError,
    LatticePoint,
    Objective,
    RngStream,
    as_point,
    in_box,
    marginal,
)


class InstanceError(ValueError):
    """An instance or strategy document violates the schema or an invariant."""


@dataclass(frozen=True)
class Source:
    name: str
    capacity: int
    probs: tuple[float, ...]
    unit_cost: float

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not isinstance(self.capacity, int) or isinstance(self.capacity, bool) or self.capacity < 1:
            raise InstanceError(f"source {self.name}: capacity must be a positive integer")
        if len(self.probs) != self.capacity:
            raise InstanceError(
                f"source {self.name}: probs length {len(self.probs)} != capacity {self.capacity}"
            )
        for i, p in enumerate(self.probs, start=1):
            if not 0.0 <= p <= 1.0:
                raise InstanceError(f"source {self.name}: prob {p} at i={i} outside [0, 1]")
            if i > 1 and p > self.probs[i - 2]:
                raise InstanceError(f"source {self.name}: probs not non-increasing at i={i}")
        if not (math.isfinite(self.unit_cost) and self.unit_cost >= 0):
            raise InstanceError(f"source {self.name}: unit_cost must be a non-negative real")


@dataclass(frozen=True)
class BipartiteInstance:
    sources: tuple[Source, ...]
    targets: tuple[str, ...]
    # adjacency[t] = sorted source indices adjacent to target t
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "targets", tuple(self.targets))
        adj = tuple(tuple(sorted(set(int(s) for s in row))) for row in self.adjacency)
        object.__setattr__(self, "adjacency", adj)
        if len(adj) != len(self.targets):
            raise InstanceError("adjacency needs one row per target")
        for t, row in zip(self.targets, adj):
            for s in row:
                if not 0 <= s < len(self.sources):
                    raise InstanceError(f"target {t}: adjacency references unknown source {s}")
        for kind, names in (("source", [s.name for s in self.sources]), ("target", self.targets)):
            if len(set(names)) != len(names):
                raise InstanceError(f"duplicate {kind} names")

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def capacities(self) -> tuple[int, ...]:
        return tuple(s.capacity for s in self.sources)

    def neighbors(self, s: int) -> tuple[int, ...]:
        return tuple(t for t, row in enumerate(self.adjacency) if s in row)

    @property
    def n_edges(self) -> int:
        return sum(len(row) for row in self.adjacency)


def _check_strategy(inst: BipartiteInstance, m: Sequence[int]) -> LatticePoint:
    m = as_point(m)
    if not in_box(m, inst.capacities):
        raise BoundsError(f"strategy {m} outside [0, {inst.capacities}]")
    return m


def activation_probability(inst: BipartiteInstance, m: Sequence[int], t: int) -> float:
    """Probability that target ``t`` is activated by at least one trial."""
    m = _check_strategy(inst, m)
    if not 0 <= t < len(inst.targets):
        raise IndexError(f"target index {t} outside [0, {len(inst.targets)})")
    miss = 1.0
    for s in inst.adjacency[t]:
        for p in inst.sources[s].probs[: m[s]]:
            miss *= 1.0 - p
    return 1.0 - miss


def influence_spread(inst: BipartiteInstance, m: Sequence[int]) -> float:
    m = _check_strategy(inst, m)
    return sum(activation_probability(inst, m, t) for t in range(len(inst.targets)))


def marketing_cost(inst: BipartiteInstance, m: Sequence[int]) -> float:
    m = _check_strategy(inst, m)
    return sum(k * s.unit_cost for k, s in zip(m, inst.sources))


def profit(inst: BipartiteInstance, m: Sequence[int]) -> float:
    """Expected spread minus marketing cost, straight from the closed form."""
    return influence_spread(inst, m) - marketing_cost(inst, m)


class ProfitOracle(Objective):
    """Profit objective with precomputed miss-probability prefix products.

    ``prefix[s][k]`` is the probability that the first ``k`` trials of source
    ``s`` all miss a given neighbor.
    """

    fused = True

    def __init__(self, instance: BipartiteInstance, *, with_cost: bool = True):
        self.instance = instance
        self.bound = instance.capacities
        self.with_cost = with_cost
        self.prefix: list[list[float]] = []
        for src in instance.sources:
            acc = [1.0]
            for p in src.probs:
                acc.append(acc[-1] * (1.0 - p))
            self.prefix.append(acc)
        self.costs = [s.unit_cost if with_cost else 0.0 for s in instance.sources]
        self.targets_of = [instance.neighbors(s) for s in range(instance.n_sources)]
        self.adjacency = instance.adjacency

    def evaluate(self, m):
        prefix = self.prefix
        spread = 0.0
        for row in self.adjacency:
            miss = 1.0
            for s in row:
                miss *= prefix[s][m[s]]
            spread += 1.0 - miss
        cost = 0.0
        for k, c in zip(m, self.costs):
            cost += k * c
        return spread - cost

    def marginal(self, e, k, base):
        # Division-free: the miss product of t without e, times the change in
        # e's own miss probability.  Valid for either sign of k and for
        # probabilities equal to one.
        if k == 0:
            return 0.0
        prefix = self.prefix
        pe = prefix[e]
        drop = pe[base[e]] - pe[base[e] + k]
        gain = 0.0
        if drop != 0.0:
            for t in self.targets_of[e]:
                q = 1.0
                for s in self.adjacency[t]:
                    if s != e:
                        q *= prefix[s][base[s]]
                gain += q
            gain *= drop
        return gain - k * self.costs[e]

    def evaluate_box(self) -> np.ndarray:
        """Objective on every point of the box, indexed ``values[m]``."""
        n = len(self.bound)
        shape = tuple(c + 1 for c in self.bound)
        tables = [np.asarray(p) for p in self.prefix]

        def along(s, arr):
            view = [1] * n
            view[s] = shape[s]
            return arr.reshape(view)

        total = np.zeros(shape)
        for row in self.adjacency:
            miss = np.ones(shape)
            for s in row:
                miss = miss * along(s, tables[s])
            total += 1.0 - miss
        for s in range(n):
            total -= along(s, np.arange(shape[s]) * self.costs[s])
        return total


def profit_marginal(oracle: ProfitOracle, e: int, k: int, base: Sequence[int]) -> float:
    return marginal(oracle, e, k, base)


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    std_error: float
    trials: int


def monte_carlo_spread(
    inst: BipartiteInstance,
    m: Sequence[int],
    trials: int,
    rng: RngStream,
    *,
    chunk_draws: int = 1 << 22,
) -> SpreadEstimate:
    """Simulate every individual trial draw and count activated targets."""
    m = _check_strategy(inst, m)
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    gen = rng.generator
    counts = np.zeros(trials)
    for row in inst.adjacency:
        probs = np.array(
            [p for s in row for p in inst.sources[s].probs[: m[s]]], dtype=float
        )
        if probs.size == 0:
            continue
        step = max(1, chunk_draws // probs.size)
        for lo in range(0, trials, step):
            hi = min(trials, lo + step)
            draws = gen.random((hi - lo, probs.size))
            counts[lo:hi] += (draws < probs).any(axis=1)
    mean = float(counts.mean())
    std_error = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return SpreadEstimate(mean, std_error, trials)


@dataclass(frozen=True)
class GeneratorParams:
    n_sources: int = 3
    n_targets: int = 5
    edge_prob: float = 0.5
    cap_range: tuple[int, int] = (1, 6)
    p1_range: tuple[float, float] = (0.1, 0.6)
    decay_range: tuple[float, float] = (0.5, 1.0)
    cost_fraction_range: tuple[float, float] = (0.2, 0.6)

    def validate(self) -> None:
        if self.n_sources < 0 or self.n_targets < 0:
            raise ConfigError("n_sources and n_targets must be >= 0")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ConfigError(f"edge_prob {self.edge_prob} outside [0, 1]")
        checks = {
            "cap_range": (self.cap_range, 1, math.inf),
            "p1_range": (self.p1_range, 0.0, 1.0),
            "decay_range": (self.decay_range, 0.0, 1.0),
            "cost_fraction_range": (self.cost_fraction_range, 0.0, math.inf),
        }
        for name, ((lo, hi), floor, ceil) in checks.items():
            if lo > hi:
                raise ConfigError(f"{name} is empty: ({lo}, {hi})")
            if lo < floor or hi > ceil:
                raise ConfigError(f"{name} ({lo}, {hi}) outside [{floor}, {ceil}]")
        if self.decay_range[0] <= 0.0:
            raise ConfigError("decay_range must lie in (0, 1]")
        if any(int(c) != c for c in self.cap_range):
            raise ConfigError("cap_range must be integers")


def _names(prefix: str, count: int) -> list[str]:
    width = len(str(max(count - 1, 0)))
    return [f"{prefix}{i:0{width}d}" for i in range(count)]


def generate_instance(params: GeneratorParams, rng: RngStream) -> BipartiteInstance:
    """Random instance whose probabilities decay geometrically per source.

    Unit costs are ``cost_fraction * p1 * degree`` so the first trial is
    always profitable for a connected source while later ones may not be.
    """
    params.validate()
    gen = rng.generator
    ns, nt = params.n_sources, params.n_targets
    caps = [int(c) for c in gen.integers(params.cap_range[0], params.cap_range[1] + 1, size=ns)]
    p1 = gen.uniform(*params.p1_range, size=ns)
    decay = gen.uniform(*params.decay_range, size=ns)
    cost_fraction = gen.uniform(*params.cost_fraction_range, size=ns)
    edges = gen.random((ns, nt)) < params.edge_prob

    sources = []
    for s, name in enumerate(_names("s", ns)):
        probs = [float(p1[s])]
        for _ in range(caps[s] - 1):
            probs.append(probs[-1] * float(decay[s]))
        degree = int(edges[s].sum())
        cost = float(cost_fraction[s]) * float(p1[s]) * degree
        sources.append(Source(name, caps[s], tuple(probs), cost))
    adjacency = [tuple(int(s) for s in np.flatnonzero(edges[:, t])) for t in range(nt)]
    return BipartiteInstance(tuple(sources), tuple(_names("t", nt)), tuple(adjacency))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InstanceError(msg)


def parse_instance(text: str) -> BipartiteInstance:
    """Parse the JSON instance document; sources get indices sorted by name."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "top level must be an object")
    for key in ("sources", "targets", "edges"):
        _require(key in doc, f"missing field '{key}'")
        _require(isinstance(doc[key], list), f"field '{key}' must be an array")

    raw_sources = []
    for i, entry in enumerate(doc["sources"]):
        _require(isinstance(entry, dict), f"sources[{i}] must be an object")
        for key in ("name", "capacity", "probs", "unit_cost"):
            _require(key in entry, f"sources[{i}]: missing field '{key}'")
        name = entry["name"]
        _require(isinstance(name, str), f"sources[{i}]: name must be a string")
        cap = entry["capacity"]
        _require(
            isinstance(cap, int) and not isinstance(cap, bool),
            f"source {name}: capacity must be an integer",
        )
        probs = entry["probs"]
        _require(
            isinstance(probs, list) and all(_is_number(p) for p in probs),
            f"source {name}: probs must be an array of numbers",
        )
        _require(_is_number(entry["unit_cost"]), f"source {name}: unit_cost must be a number")
        raw_sources.append(Source(name, cap, tuple(probs), float(entry["unit_cost"])))
    raw_sources.sort(key=lambda s: s.name)

    targets = doc["targets"]
    _require(all(isinstance(t, str) for t in targets), "targets must be strings")
    s_index = {s.name: i for i, s in enumerate(raw_sources)}
    t_index = {t: i for i, t in enumerate(targets)}
    _require(len(t_index) == len(targets), "duplicate target names")
    adjacency: list[set[int]] = [set() for _ in targets]
    for i, edge in enumerate(doc["edges"]):
        _require(
            isinstance(edge, list) and len(edge) == 2,
            f"edges[{i}] must be a [source_name, target_name] pair",
        )
        s_name, t_name = edge
        _require(s_name in s_index, f"edges[{i}]: unknown source '{s_name}'")
        _require(t_name in t_index, f"edges[{i}]: unknown target '{t_name}'")
        s, t = s_index[s_name], t_index[t_name]
        _require(s not in adjacency[t], f"edges[{i}]: duplicate edge {s_name}-{t_name}")
        adjacency[t].add(s)
    return BipartiteInstance(
        tuple(raw_sources), tuple(targets), tuple(tuple(sorted(a)) for a in adjacency)
    )


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def serialize_instance(inst: BipartiteInstance) -> str:
    doc = {
        "sources": [
            {"name": s.name, "capacity": s.capacity, "probs": list(s.probs), "unit_cost": s.unit_cost}
            for s in inst.sources
        ],
        "targets": list(inst.targets),
        "edges": [
            [inst.sources[s].name, t_name]
            for s in range(inst.n_sources)
            for t_name, row in zip(inst.targets, inst.adjacency)
            if s in row
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def strategy_levels(inst: BipartiteInstance, m: Sequence[int]) -> dict[str, int]:
    return {s.name: int(k) for s, k in zip(inst.sources, m)}


def serialize_strategy(inst: BipartiteInstance, m: Sequence[int]) -> str:
    m = _check_strategy(inst, m)
    return json.dumps({"levels": strategy_levels(inst, m)}, indent=2) + "\n"


def parse_strategy(text: str, inst: BipartiteInstance) -> LatticePoint:
    """Read ``{"levels": {name: int}}``; omitted sources default to 0."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict) and isinstance(doc.get("levels"), dict), "missing object 'levels'")
    index = {s.name: i for i, s in enumerate(inst.sources)}
    m = [0] * inst.n_sources
    for name, level in doc["levels"].items():
        _require(name in index, f"levels: unknown source '{name}'")
        _require(isinstance(level, int) and not isinstance(level, bool), f"levels[{name}] must be an integer")
        cap = inst.sources[index[name]].capacity
        _require(0 <= level <= cap, f"levels[{name}]={level} outside [0, {cap}]")
        m[index[name]] = level
    return tuple(m)
