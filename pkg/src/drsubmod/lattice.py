"""Integer-lattice primitives and the objective-oracle contract.

Lattice points and bound vectors are plain tuples of ints.  Every solver and
verifier reaches the objective through :func:`marginal` (or
``oracle.evaluate``) on an :class:`Objective`; :class:`CountingOracle` wraps
one to audit how many evaluations a run performed.
"""

from __future__ import annotations

import zlib
from typing import Callable, Sequence

import numpy as np

LatticePoint = tuple[int, ...]
BoundVector = tuple[int, ...]

U64_MAX = 2**64 - 1


class DimensionError(ValueError):
    pass


class BoundsError(ValueError):
    pass


class ConfigError(ValueError):
    pass


def as_point(x: Sequence[int]) -> LatticePoint:
    pt = tuple(int(v) for v in x)
    if any(v < 0 for v in pt):
        raise BoundsError(f"lattice point has a negative level: {pt}")
    return pt


def as_bound(caps: Sequence[int]) -> BoundVector:
    b = tuple(int(c) for c in caps)
    if any(c < 1 for c in b):
        raise BoundsError(f"bound vector needs caps >= 1, got {b}")
    return b


def _check_dims(x: Sequence[int], y: Sequence[int]) -> None:
    if len(x) != len(y):
        raise DimensionError(f"length mismatch: {len(x)} vs {len(y)}")


def join(x: Sequence[int], y: Sequence[int]) -> LatticePoint:
    """Coordinate-wise maximum."""
    _check_dims(x, y)
    return tuple(max(a, b) for a, b in zip(x, y))


def meet(x: Sequence[int], y: Sequence[int]) -> LatticePoint:
    """Coordinate-wise minimum."""
    _check_dims(x, y)
    return tuple(min(a, b) for a, b in zip(x, y))


def leq(x: Sequence[int], y: Sequence[int]) -> bool:
    _check_dims(x, y)
    return all(a <= b for a, b in zip(x, y))


def in_box(x: Sequence[int], bound: Sequence[int]) -> bool:
    return len(x) == len(bound) and all(0 <= a <= b for a, b in zip(x, bound))


def add_units(
    x: Sequence[int], e: int, k: int, bound: Sequence[int] | None = None
) -> LatticePoint:
    """Return ``x + k * chi_e`` without touching ``x``."""
    if not 0 <= e < len(x):
        raise DimensionError(f"coordinate {e} outside [0, {len(x)})")
    level = x[e] + k
    if level < 0 or (bound is not None and level > bound[e]):
        hi = "inf" if bound is None else bound[e]
        raise BoundsError(f"coordinate {e}: level {level} outside [0, {hi}]")
    out = list(x)
    out[e] = level
    return tuple(out)


def box_size(bound: Sequence[int]) -> int:
    size = 1
    for c in bound:
        size *= c + 1
    return size


class Objective:
    """Evaluation oracle over the box ``[0, bound]``.

    Subclasses implement :meth:`evaluate`.  Those with a cheaper incremental
    path override :meth:`marginal` and set ``fused = True``.
    """

    fused = False

    def __init__(self, bound: Sequence[int]):
        self.bound = as_bound(bound)

    @property
    def n(self) -> int:
        return len(self.bound)

    def evaluate(self, x: Sequence[int]) -> float:
        raise NotImplementedError

    def marginal(self, e: int, k: int, base: Sequence[int]) -> float:
        return self.evaluate(add_units(base, e, k)) - self.evaluate(base)


class FunctionObjective(Objective):
    """Adapter turning a plain callable on tuples into an :class:`Objective`."""

    def __init__(self, fn: Callable[[LatticePoint], float], bound: Sequence[int]):
        super().__init__(bound)
        self.fn = fn

    def evaluate(self, x):
        return float(self.fn(tuple(x)))


class CountingOracle(Objective):
    """Counts every evaluation that passes through it.

    A fused marginal from the wrapped oracle counts once in
    ``fused_marginals``; the audit charges it as two raw evaluations
    (``raw_equivalent``) so totals compare with a black-box oracle.
    """

    def __init__(self, inner: Objective):
        self.inner = inner
        self.bound = inner.bound
        self.raw_eval_count = 0
        self.fused_marginals = 0

    @property
    def fused(self):
        return self.inner.fused

    @property
    def raw_equivalent(self) -> int:
        return self.raw_eval_count + 2 * self.fused_marginals

    def evaluate(self, x):
        self.raw_eval_count += 1
        return self.inner.evaluate(x)

    def marginal(self, e, k, base):
        if self.inner.fused:
            self.fused_marginals += 1
            return self.inner.marginal(e, k, base)
        return self.evaluate(add_units(base, e, k)) - self.evaluate(base)


def marginal(oracle: Objective, e: int, k: int, base: Sequence[int]) -> float:
    """``f(base + k*chi_e) - f(base)``, box-checked on both endpoints."""
    bound = oracle.bound
    if len(base) != len(bound):
        raise DimensionError(f"point of length {len(base)} for an {len(bound)}-dim box")
    if not in_box(base, bound):
        raise BoundsError(f"base {tuple(base)} outside box {bound}")
    add_units(base, e, k, bound)
    return oracle.marginal(e, k, base)


def _stream_key(name) -> int:
    if isinstance(name, (int, np.integer)):
        return int(name)
    return zlib.crc32(str(name).encode())


class RngStream:
    """Seeded random stream; named children are independent sub-streams.

    ``RngStream(7, "solver", 3)`` always yields the same sequence, and differs
    from ``RngStream(7, "solver", 4)`` or ``RngStream(7, "generator")``.
    """

    def __init__(self, seed: int, *names):
        seed = int(seed)
        if not 0 <= seed <= U64_MAX:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self.names = names
        ss = np.random.SeedSequence(seed, spawn_key=tuple(_stream_key(n) for n in names))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, *names) -> "RngStream":
        return RngStream(self.seed, *self.names, *names)

    def random(self) -> float:
        return float(self.generator.random())

    def __repr__(self):
        return f"RngStream(seed={self.seed}, names={self.names!r})"


def as_rng(rng: RngStream | int | None) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    return RngStream(0 if rng is None else rng)
