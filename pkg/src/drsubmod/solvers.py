"""Double greedy solvers for DR-submodular maximization over ``[0, B]``.

:func:`bsdg_solve` halves the gap between the lower and upper solution on
every iteration and clamps the meeting point with per-coordinate caps found
by binary search, so each coordinate costs O(log B) oracle calls.
:func:`unit_double_greedy` is the one-unit-per-step baseline (O(B) calls per
coordinate) and :func:`exhaustive_opt` enumerates the box.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import (
    BoundVector,
    CountingOracle,
    LatticePoint,
    Objective,
    RngStream,
    as_bound,
    as_rng,
    box_size,
    marginal,
)

DR_TOL = 1e-9
EXHAUSTIVE_LIMIT = 10**7


class DRViolationError(RuntimeError):
    """The oracle produced evidence that it is not DR-submodular."""


class InvariantViolation(AssertionError):
    pass


class ResourceGuardError(RuntimeError):
    pass


@dataclass(frozen=True)
class CoordinateTrace:
    coordinate: int
    iterations: int
    u_cap: int | None
    v_cap: int | None
    clamp_applied: str  # "none" | "u" | "v"
    queries: int
    min_alpha_beta: float | None = None

    def as_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "iterations": self.iterations,
            "u_cap": self.u_cap,
            "v_cap": self.v_cap,
            "clamp_applied": self.clamp_applied,
            "queries": self.queries,
            "min_alpha_beta": self.min_alpha_beta,
        }


@dataclass(frozen=True)
class SolveResult:
    solution: LatticePoint
    value: float
    raw_queries: int
    per_coordinate_trace: tuple[CoordinateTrace, ...]
    seed: int
    algorithm: str = "bsdg"
    bound: BoundVector = field(default=())

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "solution": list(self.solution),
            "value": self.value,
            "raw_queries": self.raw_queries,
            "seed": self.seed,
            "trace": [t.as_dict() for t in self.per_coordinate_trace],
        }


def find_cap_u(oracle: Objective, x: Sequence[int], e: int, bound: Sequence[int] | None = None) -> int:
    """Smallest ``b`` in ``[0, B-1]`` with ``f(chi_e | x + b chi_e) < 0``, else ``B``.

    Equivalently the number of leading non-negative unit gains when raising
    coordinate ``e`` from ``x(e)``.  Assumes those gains are non-increasing.
    """
    bound = oracle.bound if bound is None else bound
    lo, hi = 0, bound[e] - x[e]
    base = list(x)
    while lo < hi:
        mid = (lo + hi) // 2
        base[e] = x[e] + mid
        if marginal(oracle, e, 1, base) < 0:
            hi = mid
        else:
            lo = mid + 1
    return x[e] + lo


def find_cap_v(oracle: Objective, y: Sequence[int], e: int, bound: Sequence[int] | None = None) -> int:
    """``y(e) - b`` for the smallest ``b`` with ``f(-chi_e | y - b chi_e) < 0``, else 0."""
    lo, hi = 0, y[e]
    base = list(y)
    while lo < hi:
        mid = (lo + hi) // 2
        base[e] = y[e] - mid
        if marginal(oracle, e, -1, base) < 0:
            hi = mid
        else:
            lo = mid + 1
    return y[e] - lo


def _check_sandwich(x, y, bound, e):
    for j in range(len(bound)):
        if not 0 <= x[j] <= y[j] <= bound[j]:
            raise InvariantViolation(f"sandwich broken at coordinate {j}: x={x}, y={y}")
        if j < e and x[j] != y[j]:
            raise InvariantViolation(f"coordinate {j} unsettled while processing {e}")


def _double_greedy(oracle, bound, rng, *, halving, caps, check_invariants, name):
    bound = as_bound(oracle.bound if bound is None else bound)
    rng = as_rng(rng)
    counter = CountingOracle(oracle)
    n = len(bound)
    x = [0] * n
    y = list(bound)
    trace = []
    for e in range(n):
        start = counter.raw_equivalent
        u = v = None
        if caps:
            u = find_cap_u(counter, x, e, bound)
            v = find_cap_v(counter, y, e, bound)
            if u < v:
                raise DRViolationError(f"coordinate {e}: cap u={u} below cap v={v}")
        iterations = 0
        min_ab = None
        while x[e] < y[e]:
            step = max((y[e] - x[e]) // 2, 1) if halving else 1
            alpha = marginal(counter, e, step, x)
            beta = marginal(counter, e, -step, y)
            ab = alpha + beta
            if ab < -DR_TOL:
                raise DRViolationError(
                    f"coordinate {e}: alpha + beta = {ab} < 0 at x={tuple(x)}, y={tuple(y)}"
                )
            min_ab = ab if min_ab is None else min(min_ab, ab)
            if beta <= 0:
                x[e] += step
            elif alpha <= 0:
                y[e] -= step
            elif rng.random() < alpha / ab:
                x[e] += step
            else:
                y[e] -= step
            iterations += 1
            if check_invariants:
                _check_sandwich(x, y, bound, e)
        clamp = "none"
        if caps:
            if x[e] >= u:
                x[e] = y[e] = u
                clamp = "u"
            if y[e] <= v and clamp == "none":
                x[e] = y[e] = v
                clamp = "v"
            if check_invariants:
                _check_sandwich(x, y, bound, e + 1)
        trace.append(
            CoordinateTrace(e, iterations, u, v, clamp, counter.raw_equivalent - start, min_ab)
        )
    solution = tuple(x)
    value = counter.evaluate(solution)
    return SolveResult(
        solution, value, counter.raw_equivalent, tuple(trace), rng.seed, name, bound
    )


def bsdg_solve(
    oracle: Objective,
    bound: Sequence[int] | None = None,
    rng: RngStream | int | None = None,
    *,
    check_invariants: bool = True,
) -> SolveResult:
    """Binary-search double greedy.

    For each coordinate in index order: find caps ``u`` (from below) and
    ``v`` (from above), close the gap ``y(e) - x(e)`` by half per iteration
    using the randomized double greedy rule, then clamp the meeting point to
    ``u`` if it lies at or above ``u``, otherwise to ``v`` if at or below ``v``.

    Raises :class:`DRViolationError` when the oracle exhibits
    ``alpha + beta < -1e-9`` or ``u < v``, which cannot happen for a
    DR-submodular objective.
    """
    return _double_greedy(
        oracle, bound, rng, halving=True, caps=True, check_invariants=check_invariants, name="bsdg"
    )


def unit_double_greedy(
    oracle: Objective,
    bound: Sequence[int] | None = None,
    rng: RngStream | int | None = None,
    *,
    check_invariants: bool = True,
) -> SolveResult:
    """Randomized double greedy with unit steps and no caps."""
    return _double_greedy(
        oracle, bound, rng, halving=False, caps=False, check_invariants=check_invariants, name="unit"
    )


def exhaustive_opt(oracle: Objective, bound: Sequence[int] | None = None) -> tuple[LatticePoint, float]:
    """Maximizer over the whole box; ties go to the lexicographically smallest point."""
    bound = as_bound(oracle.bound if bound is None else bound)
    size = box_size(bound)
    if size > EXHAUSTIVE_LIMIT:
        raise ResourceGuardError(
            f"box has {size} points, above the exhaustive limit of {EXHAUSTIVE_LIMIT}"
        )
    if hasattr(oracle, "evaluate_box") and tuple(oracle.bound) == bound:
        # Vectorized screen, then exact scalar comparison among near-ties so
        # the answer matches the point-by-point definition.
        values = oracle.evaluate_box()
        top = values.max()
        near = np.argwhere(values >= top - 1e-9 * max(1.0, abs(top)))
        candidates = sorted(tuple(int(v) for v in idx) for idx in near)
    else:
        candidates = itertools.product(*(range(c + 1) for c in bound))
    best, best_val = None, None
    for pt in candidates:
        val = oracle.evaluate(pt)
        if best_val is None or val > best_val:
            best, best_val = tuple(pt), val
    return best, best_val
