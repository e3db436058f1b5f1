"""Executable structural checks and the empirical benchmark harness."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .lattice import Objective, RngStream, as_bound, box_size
from .profit import GeneratorParams, ProfitOracle, generate_instance
from .solvers import (
    ResourceGuardError,
    SolveResult,
    bsdg_solve,
    exhaustive_opt,
    unit_double_greedy,
)

log = logging.getLogger(__name__)

DR_TOL = 1e-9
MARGINAL_TOL = 1e-12
MONOTONE_TOL = 1e-12
BOX_LIMIT = 10**6
PAIR_LIMIT = 10**6
SAMPLES = 10**5

CSV_COLUMNS = (
    "instance_id", "n", "max_B", "opt", "mean_bsdg", "min_bsdg", "mean_unit",
    "ratio_bsdg", "ratio_unit", "queries_bsdg", "queries_unit", "negativity_seen", "flag",
)


@dataclass(frozen=True)
class Violation:
    x: tuple[int, ...]
    y: tuple[int, ...]
    lhs: float
    rhs: float
    coordinate: int | None = None

    @property
    def excess(self) -> float:
        return self.rhs - self.lhs


def box_values(oracle: Objective, bound: Sequence[int] | None = None) -> np.ndarray:
    """Objective on the full box as an ndarray indexed by lattice point."""
    bound = as_bound(oracle.bound if bound is None else bound)
    if hasattr(oracle, "evaluate_box") and tuple(oracle.bound) == bound:
        return np.asarray(oracle.evaluate_box(), dtype=float)
    shape = tuple(c + 1 for c in bound)
    values = np.empty(shape)
    for idx in np.ndindex(*shape):
        values[idx] = oracle.evaluate(idx)
    return values


def _upset_max(a: np.ndarray) -> np.ndarray:
    # out[x] = max of a[y] over y >= x componentwise
    for ax in range(a.ndim):
        a = np.flip(np.maximum.accumulate(np.flip(a, ax), axis=ax), ax)
    return a


def _sample_comparable(gen, bound, count, e_fixed=None):
    n = len(bound)
    hi = np.asarray(bound)
    x = np.floor(gen.random((count, n)) * (hi + 1)).astype(int)
    y = x + np.floor(gen.random((count, n)) * (hi - x + 1)).astype(int)
    if e_fixed is None:
        e = gen.integers(0, n, size=count)
    else:
        e = np.full(count, e_fixed)
    return x, y, e


def check_dr(
    oracle: Objective,
    bound: Sequence[int] | None = None,
    tol: float = DR_TOL,
    *,
    seed: int = 0,
    samples: int = SAMPLES,
    box_limit: int = BOX_LIMIT,
) -> list[Violation]:
    """Find pairs ``x <= y`` and coordinates ``e`` breaking diminishing returns.

    Exhaustive when the box has at most ``box_limit`` points: the unit gain
    along ``e`` is compared against its maximum over the whole up-set of each
    ``x``, so every comparable pair is covered.  One violation (the worst
    ``y``) is reported per ``(x, e)``.  Larger boxes fall back to ``samples``
    seeded random comparable pairs.
    """
    bound = as_bound(oracle.bound if bound is None else bound)
    n = len(bound)
    out = []
    if box_size(bound) <= box_limit:
        values = box_values(oracle, bound)
        for e in range(n):
            gain = np.diff(values, axis=e)
            best_above = _upset_max(gain)
            bad = np.argwhere(gain < best_above - tol)
            for idx in bad:
                x = tuple(int(v) for v in idx)
                sub = gain[tuple(slice(v, None) for v in x)]
                off = np.unravel_index(int(np.argmax(sub)), sub.shape)
                y = tuple(a + int(b) for a, b in zip(x, off))
                out.append(Violation(x, y, float(gain[x]), float(gain[y]), e))
        return out

    gen = RngStream(seed, "check_dr").generator
    shrunk = tuple(c - 1 for c in bound)
    for e in range(n):
        per_e = samples // n + (1 if e < samples % n else 0)
        x, y, _ = _sample_comparable(gen, bound, per_e)
        x[:, e] = np.minimum(x[:, e], shrunk[e])
        y[:, e] = np.minimum(np.maximum(y[:, e], x[:, e]), shrunk[e])
        for xi, yi in zip(x, y):
            xi, yi = tuple(int(v) for v in xi), tuple(int(v) for v in yi)
            lhs = oracle.marginal(e, 1, xi)
            rhs = oracle.marginal(e, 1, yi)
            if lhs < rhs - tol:
                out.append(Violation(xi, yi, lhs, rhs, e))
    return out


def check_lattice_submodular(
    oracle: Objective,
    bound: Sequence[int] | None = None,
    tol: float = DR_TOL,
    *,
    seed: int = 0,
    samples: int = SAMPLES,
    pair_limit: int = PAIR_LIMIT,
) -> list[Violation]:
    """Pairs with ``f(x) + f(y) < f(x v y) + f(x ^ y) - tol``."""
    bound = as_bound(oracle.bound if bound is None else bound)
    size = box_size(bound)
    shape = tuple(c + 1 for c in bound)
    out = []
    if size * (size - 1) // 2 <= pair_limit:
        flat = box_values(oracle, bound).ravel()
        pts = np.array(list(np.ndindex(*shape)), dtype=int).reshape(size, len(bound))
        for i in range(size):
            others = pts[i + 1 :]
            if len(others) == 0:
                break
            hi = np.ravel_multi_index(np.maximum(pts[i], others).T, shape)
            lo = np.ravel_multi_index(np.minimum(pts[i], others).T, shape)
            lhs = flat[i] + flat[i + 1 :]
            rhs = flat[hi] + flat[lo]
            for j in np.flatnonzero(lhs < rhs - tol):
                out.append(
                    Violation(tuple(int(v) for v in pts[i]), tuple(int(v) for v in others[j]),
                              float(lhs[j]), float(rhs[j]))
                )
        return out

    gen = RngStream(seed, "check_lattice").generator
    hi_b = np.asarray(bound)
    xs = np.floor(gen.random((samples, len(bound))) * (hi_b + 1)).astype(int)
    ys = np.floor(gen.random((samples, len(bound))) * (hi_b + 1)).astype(int)
    for x, y in zip(xs, ys):
        x, y = tuple(int(v) for v in x), tuple(int(v) for v in y)
        j = tuple(max(a, b) for a, b in zip(x, y))
        m = tuple(min(a, b) for a, b in zip(x, y))
        lhs = oracle.evaluate(x) + oracle.evaluate(y)
        rhs = oracle.evaluate(j) + oracle.evaluate(m)
        if lhs < rhs - tol:
            out.append(Violation(x, y, lhs, rhs))
    return out


def check_nonmonotone(
    oracle: Objective,
    bound: Sequence[int] | None = None,
    *,
    seed: int = 0,
    samples: int = SAMPLES,
    box_limit: int = BOX_LIMIT,
) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """A pair ``x <= y`` with ``f(x) > f(y) + 1e-12``, or None.

    Exhaustively, single-unit steps ``y = x + chi_e`` are tried first (lowest
    ``x`` in lexicographic order, then lowest ``e``); failing that, ``x`` is
    the first point worth more than something above it and ``y`` the
    minimizer of ``f`` over its up-set.
    """
    bound = as_bound(oracle.bound if bound is None else bound)
    if box_size(bound) <= box_limit:
        values = box_values(oracle, bound)
        best = None
        for e in range(values.ndim):
            drops = np.argwhere(-np.diff(values, axis=e) > MONOTONE_TOL)
            if len(drops):
                x = tuple(int(v) for v in drops[0])
                if best is None or x < best[0]:
                    best = (x, e)
        if best is not None:
            x, e = best
            return x, tuple(v + (j == e) for j, v in enumerate(x))
        lowest_above = -_upset_max(-values)
        bad = np.argwhere(values > lowest_above + MONOTONE_TOL)
        if len(bad) == 0:
            return None
        x = tuple(int(v) for v in bad[0])
        sub = values[tuple(slice(v, None) for v in x)]
        off = np.unravel_index(int(np.argmin(sub)), sub.shape)
        return x, tuple(a + int(b) for a, b in zip(x, off))

    gen = RngStream(seed, "check_nonmonotone").generator
    xs, ys, _ = _sample_comparable(gen, bound, samples)
    for x, y in zip(xs, ys):
        x, y = tuple(int(v) for v in x), tuple(int(v) for v in y)
        if oracle.evaluate(x) > oracle.evaluate(y) + MONOTONE_TOL:
            return x, y
    return None


def query_budget(bound: Sequence[int]) -> int:
    return sum(coordinate_budget(b) for b in bound) + 2


def coordinate_budget(b: int) -> int:
    # two cap searches of ceil(log2(B+1)) probes plus ceil(log2 B)+1 halving
    # iterations, two marginals each, two raw evaluations per marginal
    return 4 * b.bit_length() + 4 * iteration_limit(b)


def iteration_limit(b: int) -> int:
    return (b - 1).bit_length() + 1


@dataclass(frozen=True)
class QueryAudit:
    passed: bool
    observed: int
    budget: int
    per_coordinate: tuple[dict, ...]


def query_audit(result: SolveResult, bound: Sequence[int] | None = None) -> QueryAudit:
    """Compare a run's raw-equivalent evaluation count with the O(n log B) budget."""
    bound = tuple(result.bound if bound is None else bound)
    rows = []
    for tr in result.per_coordinate_trace:
        b = bound[tr.coordinate]
        rows.append({
            "coordinate": tr.coordinate,
            "B": b,
            "observed": tr.queries,
            "budget": coordinate_budget(b),
            "iterations": tr.iterations,
            "iteration_limit": iteration_limit(b),
        })
    budget = query_budget(bound)
    return QueryAudit(result.raw_queries <= budget, result.raw_queries, budget, tuple(rows))


@dataclass(frozen=True)
class HarnessParams:
    instances: int = 100
    runs_per_instance: int = 200
    seed: int = 0
    max_sources: int = 4
    max_targets: int = 8
    generator: GeneratorParams = field(default_factory=GeneratorParams)
    workers: int = 1


@dataclass(frozen=True)
class HarnessRow:
    instance_id: int
    n: int
    max_B: int
    opt: float | None
    mean_bsdg: float
    min_bsdg: float
    max_bsdg: float
    mean_unit: float
    ratio_bsdg: float | None
    ratio_unit: float | None
    queries_bsdg: int
    queries_unit: int
    negativity_seen: bool
    flag: bool
    skipped: str | None = None
    # runtime invariants across all bsdg runs of this instance
    min_alpha_beta: float | None = None
    audit_failures: int = 0
    iteration_overruns: int = 0

    def csv_fields(self) -> list:
        def num(v):
            return "undefined" if v is None else repr(float(v))

        return [
            self.instance_id, self.n, self.max_B, num(self.opt), num(self.mean_bsdg),
            num(self.min_bsdg), num(self.mean_unit), num(self.ratio_bsdg), num(self.ratio_unit),
            self.queries_bsdg, self.queries_unit, int(self.negativity_seen), int(self.flag),
        ]


def harness_instance(params: HarnessParams, i: int):
    rng = RngStream(params.seed, "instance", i)
    gen = rng.generator
    ns = int(gen.integers(1, params.max_sources + 1))
    nt = int(gen.integers(1, params.max_targets + 1))
    gp = replace(params.generator, n_sources=ns, n_targets=nt)
    return generate_instance(gp, rng.child("generator"))


def _mean_sem(values):
    arr = np.asarray(values, dtype=float)
    sem = arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else 0.0
    return float(arr.mean()), float(sem)


def run_cell(params: HarnessParams, i: int) -> HarnessRow | None:
    inst = harness_instance(params, i)
    oracle = ProfitOracle(inst)
    bound = oracle.bound
    try:
        opt_point, opt = exhaustive_opt(oracle)
    except ResourceGuardError as exc:
        log.warning("instance %d skipped: %s", i, exc)
        return None
    negative = bool(box_values(oracle).min() < 0.0)

    bs_vals, un_vals = [], []
    q_bs = q_un = 0
    min_ab = None
    audit_failures = overruns = 0
    for r in range(params.runs_per_instance):
        res = bsdg_solve(oracle, bound, RngStream(params.seed, "bsdg", i, r))
        bs_vals.append(res.value)
        q_bs = max(q_bs, res.raw_queries)
        if not query_audit(res, bound).passed:
            audit_failures += 1
        for tr in res.per_coordinate_trace:
            if tr.iterations > iteration_limit(bound[tr.coordinate]):
                overruns += 1
            if tr.min_alpha_beta is not None:
                min_ab = tr.min_alpha_beta if min_ab is None else min(min_ab, tr.min_alpha_beta)
        ures = unit_double_greedy(oracle, bound, RngStream(params.seed, "unit", i, r))
        un_vals.append(ures.value)
        q_un = max(q_un, ures.raw_queries)

    mean_bs, sem_bs = _mean_sem(bs_vals)
    mean_un, _ = _mean_sem(un_vals)
    if opt > 0:
        ratio_bs, ratio_un = mean_bs / opt, mean_un / opt
        flag = mean_bs < 0.5 * opt - 3.0 * sem_bs - DR_TOL
    else:
        ratio_bs = ratio_un = None
        flag = min(bs_vals) < -MONOTONE_TOL
    return HarnessRow(
        i, len(bound), max(bound, default=0), opt, mean_bs, min(bs_vals), max(bs_vals), mean_un,
        ratio_bs, ratio_un, q_bs, q_un, negative, bool(flag),
        min_alpha_beta=min_ab, audit_failures=audit_failures, iteration_overruns=overruns,
    )


def _run_cell_star(args):
    return run_cell(*args)


def ratio_harness(params: HarnessParams) -> list[HarnessRow]:
    """OPT vs sample means of both double greedy variants on generated instances.

    Rows come back in instance order whatever ``workers`` is.  ``flag`` marks a
    bsdg sample mean below ``OPT/2`` by more than three standard errors.
    """
    cells = [(params, i) for i in range(params.instances)]
    if params.workers > 1:
        with ProcessPoolExecutor(params.workers) as pool:
            rows = list(pool.map(_run_cell_star, cells))
    else:
        rows = [run_cell(*c) for c in cells]
    return [r for r in rows if r is not None]


def harness_csv(rows: Sequence[HarnessRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


@dataclass(frozen=True)
class ScalingPoint:
    log2_B: int
    B: int
    queries_bsdg: int
    queries_unit: int | None


@dataclass(frozen=True)
class ScalingReport:
    points: tuple[ScalingPoint, ...]
    slope: float
    intercept: float
    max_residual: float
    mean_queries: float

    @property
    def affine_ok(self) -> bool:
        return self.max_residual < 0.1 * self.mean_queries

    def table(self) -> str:
        lines = ["# log2_B B queries_bsdg queries_unit"]
        for p in self.points:
            unit = "nan" if p.queries_unit is None else str(p.queries_unit)
            lines.append(f"{p.log2_B} {p.B} {p.queries_bsdg} {unit}")
        lines.append(
            f"# fit: queries_bsdg = {self.slope!r} * log2_B + {self.intercept!r}; "
            f"max_residual={self.max_residual!r} mean={self.mean_queries!r}"
        )
        return "\n".join(lines) + "\n"


def query_scaling(
    exponents: Sequence[int] = range(4, 15),
    *,
    n_sources: int = 8,
    n_targets: int = 8,
    seed: int = 0,
    include_unit: bool = True,
) -> ScalingReport:
    """Raw-equivalent queries of one bsdg (and unit) run per ``B = 2**k``.

    The family keeps sources, probabilities and edges fixed and only changes
    the common capacity, so the query count isolates the dependence on B.
    """
    points = []
    for k in exponents:
        b = 2**k
        gp = GeneratorParams(n_sources=n_sources, n_targets=n_targets, cap_range=(b, b))
        inst = generate_instance(gp, RngStream(seed, "sweep"))
        oracle = ProfitOracle(inst)
        res = bsdg_solve(oracle, rng=RngStream(seed, "sweep-bsdg", k))
        unit = None
        if include_unit:
            unit = unit_double_greedy(oracle, rng=RngStream(seed, "sweep-unit", k)).raw_queries
        points.append(ScalingPoint(k, b, res.raw_queries, unit))
    xs = np.array([p.log2_B for p in points], dtype=float)
    ys = np.array([p.queries_bsdg for p in points], dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = np.abs(ys - (slope * xs + intercept))
    return ScalingReport(
        tuple(points), float(slope), float(intercept), float(resid.max()), float(ys.mean())
    )
