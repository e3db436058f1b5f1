"""Command line: ``drsubmod {gen,solve,verify,bench}``.

Exit codes: 0 success, 1 verification failure, 2 input/config error,
3 resource guard.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .lattice import ConfigError, RngStream, U64_MAX, box_size
from .profit import (
    GeneratorParams,
    InstanceError,
    ProfitOracle,
    generate_instance,
    influence_spread,
    monte_carlo_spread,
    parse_instance,
    parse_strategy,
    serialize_instance,
    strategy_levels,
)
from .solvers import ResourceGuardError, bsdg_solve, exhaustive_opt, unit_double_greedy
from .verification import (
    HarnessParams,
    check_dr,
    check_lattice_submodular,
    check_nonmonotone,
    harness_csv,
    query_audit,
    query_scaling,
    ratio_harness,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load_instance(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    return parse_instance(text)


def cmd_gen(args) -> int:
    params = GeneratorParams(
        n_sources=args.sources,
        n_targets=args.targets,
        edge_prob=args.edge_prob,
        cap_range=(args.cap_min, args.cap_max),
        p1_range=(args.p1_min, args.p1_max),
        decay_range=(args.decay_min, args.decay_max),
        cost_fraction_range=(args.cost_min, args.cost_max),
    )
    inst = generate_instance(params, RngStream(args.seed, "generator"))
    _write(args.output, serialize_instance(inst))
    out = sys.stderr if args.output in (None, "-") else sys.stdout
    print(
        f"n_sources={inst.n_sources} n_targets={len(inst.targets)} "
        f"edges={inst.n_edges} max_capacity={max(inst.capacities, default=0)}",
        file=out,
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    oracle = ProfitOracle(inst)
    rng = RngStream(args.seed, "solver", 0)
    if args.alg == "bsdg":
        res = bsdg_solve(oracle, rng=rng)
        solution, value, queries = res.solution, res.value, res.raw_queries
        trace = [t.as_dict() for t in res.per_coordinate_trace]
        audit = query_audit(res)
        extra = {"query_budget": audit.budget, "audit_passed": audit.passed}
    elif args.alg == "unit":
        res = unit_double_greedy(oracle, rng=rng)
        solution, value, queries = res.solution, res.value, res.raw_queries
        trace = [t.as_dict() for t in res.per_coordinate_trace]
        extra = {}
    else:
        solution, value = exhaustive_opt(oracle)
        queries, trace, extra = box_size(oracle.bound), [], {}
    doc = {
        "algorithm": args.alg,
        "levels": strategy_levels(inst, solution),
        "value": value,
        "raw_queries": queries,
        "seed": args.seed,
        "trace": trace,
        **extra,
    }
    if args.output is not None:
        _write(args.output, _dump(doc))
    print(f"value={value!r} queries={queries} seed={args.seed}")
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    oracle = ProfitOracle(inst)
    if args.strategy is not None:
        m = parse_strategy(Path(args.strategy).read_text(), inst)
    else:
        m = tuple((c + 1) // 2 for c in inst.capacities)

    dr = check_dr(oracle, tol=args.tol, seed=args.seed)
    lattice = check_lattice_submodular(oracle, tol=args.tol, seed=args.seed)
    witness = check_nonmonotone(oracle, seed=args.seed)
    closed = influence_spread(inst, m)
    est = monte_carlo_spread(inst, m, args.mc_trials, RngStream(args.seed, "monte_carlo"))
    mc_ok = abs(est.mean - closed) <= 3.0 * est.std_error or est.mean == closed

    def show(v):
        return {"x": list(v.x), "y": list(v.y), "lhs": v.lhs, "rhs": v.rhs, "coordinate": v.coordinate}

    report = {
        "dr_violations": [show(v) for v in dr[: args.max_report]],
        "dr_violation_count": len(dr),
        "lattice_violations": [show(v) for v in lattice[: args.max_report]],
        "lattice_violation_count": len(lattice),
        "nonmonotone_witness": None if witness is None else [list(witness[0]), list(witness[1])],
        "monte_carlo": {
            "levels": strategy_levels(inst, m),
            "closed_form": closed,
            "mean": est.mean,
            "std_error": est.std_error,
            "trials": est.trials,
            "within_3se": mc_ok,
        },
    }
    passed = not dr and not lattice and mc_ok
    report["passed"] = passed
    if args.output is not None:
        _write(args.output, _dump(report))

    print(f"dr: {'pass' if not dr else f'FAIL ({len(dr)} violations)'}")
    for v in dr[: args.max_report]:
        print(f"  e={v.coordinate} x={v.x} y={v.y} gain_x={v.lhs!r} gain_y={v.rhs!r}")
    print(f"lattice_submodular: {'pass' if not lattice else f'FAIL ({len(lattice)} violations)'}")
    for v in lattice[: args.max_report]:
        print(f"  x={v.x} y={v.y} f(x)+f(y)={v.lhs!r} f(join)+f(meet)={v.rhs!r}")
    if witness is None:
        print("nonmonotone: no witness (monotone on this box)")
    else:
        print(f"nonmonotone: witness x={witness[0]} y={witness[1]}")
    print(
        f"monte_carlo: {'pass' if mc_ok else 'FAIL'} closed_form={closed!r} "
        f"mean={est.mean!r} std_error={est.std_error!r} trials={est.trials}"
    )
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_bench(args) -> int:
    gen = replace(GeneratorParams(), edge_prob=args.edge_prob, cap_range=(args.cap_min, args.cap_max))
    gen.validate()
    params = HarnessParams(
        instances=args.instances,
        runs_per_instance=args.runs,
        seed=args.seed,
        max_sources=args.sources,
        max_targets=args.targets,
        generator=gen,
        workers=args.workers,
    )
    if params.runs_per_instance < 1 or params.instances < 0:
        raise ConfigError("--runs must be >= 1 and --instances >= 0")
    rows = ratio_harness(params)
    _write(args.output, harness_csv(rows))
    flags = sum(r.flag for r in rows)
    print(
        f"instances={len(rows)} skipped={params.instances - len(rows)} flags={flags}",
        file=sys.stderr if args.output in (None, "-") else sys.stdout,
    )
    if args.sweep_max_exp >= args.sweep_min_exp:
        report = query_scaling(
            range(args.sweep_min_exp, args.sweep_max_exp + 1),
            seed=args.seed,
            include_unit=not args.no_unit_sweep,
        )
        sweep_path = args.sweep_output
        if sweep_path is None and args.output not in (None, "-"):
            sweep_path = str(Path(args.output).with_suffix(".sweep.dat"))
        _write(sweep_path, report.table())
        print(
            f"sweep: slope={report.slope:.3f} max_residual={report.max_residual:.3f} "
            f"mean={report.mean_queries:.3f} affine_ok={report.affine_ok}",
            file=sys.stderr if sweep_path in (None, "-") else sys.stdout,
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drsubmod",
        description="Profit maximization on integer lattices: generate, solve, verify, benchmark.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random bipartite instance")
    g.add_argument("--sources", type=int, default=3)
    g.add_argument("--targets", type=int, default=5)
    g.add_argument("--edge-prob", type=float, default=0.5)
    g.add_argument("--cap-min", type=int, default=1)
    g.add_argument("--cap-max", type=int, default=6)
    g.add_argument("--p1-min", type=float, default=0.1)
    g.add_argument("--p1-max", type=float, default=0.6)
    g.add_argument("--decay-min", type=float, default=0.5)
    g.add_argument("--decay-max", type=float, default=1.0)
    g.add_argument("--cost-min", type=float, default=0.2)
    g.add_argument("--cost-max", type=float, default=0.6)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="maximize profit on an instance file")
    s.add_argument("instance")
    s.add_argument("--alg", choices=("bsdg", "unit", "exhaustive"), default="bsdg")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check DR-submodularity and the spread formula")
    v.add_argument("instance")
    v.add_argument("--strategy", help="strategy file for the Monte-Carlo check")
    v.add_argument("--mc-trials", type=int, default=20000)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--max-report", type=int, default=20)
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="approximation-ratio harness and query sweep")
    b.add_argument("--instances", type=int, default=100)
    b.add_argument("--runs", type=int, default=200)
    b.add_argument("--sources", type=int, default=4, help="max sources per instance")
    b.add_argument("--targets", type=int, default=8, help="max targets per instance")
    b.add_argument("--edge-prob", type=float, default=0.5)
    b.add_argument("--cap-min", type=int, default=1)
    b.add_argument("--cap-max", type=int, default=6)
    b.add_argument("--sweep-min-exp", type=int, default=4)
    b.add_argument("--sweep-max-exp", type=int, default=14)
    b.add_argument("--no-unit-sweep", action="store_true")
    b.add_argument("--sweep-output")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InstanceError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
