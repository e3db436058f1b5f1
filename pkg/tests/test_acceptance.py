"""Exit criteria, one test each; every test prints a single PASS/FAIL line."""

import time

import numpy as np
import pytest

from drsubmod.cli import main
from drsubmod.lattice import RngStream, box_size
from drsubmod.profit import (
    GeneratorParams,
    ProfitOracle,
    generate_instance,
    influence_spread,
    monte_carlo_spread,
    serialize_instance,
)
from drsubmod.verification import (
    HarnessParams,
    check_dr,
    check_nonmonotone,
    query_scaling,
    ratio_harness,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


@pytest.fixture(scope="module")
def harness():
    start = time.perf_counter()
    rows = ratio_harness(HarnessParams(instances=100, runs_per_instance=200, seed=0))
    return rows, time.perf_counter() - start


def test_1_approximation_ratio(harness, report):
    rows, elapsed = harness
    flags = [r.instance_id for r in rows if r.flag]
    ratios = [r.ratio_bsdg for r in rows if r.ratio_bsdg is not None]
    assert all(r.n <= 4 and r.max_B <= 6 for r in rows)
    ok = len(rows) == 100 and not flags and elapsed < 120
    report(1, ok, f"instances={len(rows)} flags={flags} min_ratio={min(ratios):.4f} "
                  f"negativity_seen={sum(r.negativity_seen for r in rows)} runtime={elapsed:.1f}s")
    assert ok


def test_2_query_complexity(harness, report):
    rows, _ = harness
    audit_failures = sum(r.audit_failures for r in rows)
    sweep = query_scaling(range(4, 15), n_sources=8, seed=0)
    last = sweep.points[-1]
    speedup = last.queries_bsdg / last.queries_unit
    bs = np.array([p.B for p in sweep.points], dtype=float)
    unit = np.array([p.queries_unit for p in sweep.points], dtype=float)
    slope, icpt = np.polyfit(bs, unit, 1)
    unit_linear = np.max(np.abs(unit - (slope * bs + icpt))) < 0.01 * unit.mean()
    ok = audit_failures == 0 and sweep.affine_ok and speedup < 0.02 and unit_linear
    report(2, ok, f"audit_failures={audit_failures} max_residual={sweep.max_residual:.2f} "
                  f"mean={sweep.mean_queries:.1f} bsdg/unit@2^14={speedup:.5f} unit_linear={unit_linear}")
    assert ok


def test_3_dr_submodularity(report):
    rng = RngStream(0, "acceptance-3")
    violations = witnesses = 0
    for i in range(50):
        gen = rng.child(i).generator
        params = GeneratorParams(
            n_sources=int(gen.integers(1, 6)),
            n_targets=int(gen.integers(1, 9)),
            cap_range=(1, 8),
        )
        oracle = ProfitOracle(generate_instance(params, rng.child(i, "instance")))
        assert box_size(oracle.bound) <= 10**5
        violations += len(check_dr(oracle, tol=1e-9))
        witnesses += check_nonmonotone(oracle) is not None
    ok = violations == 0 and witnesses >= 40
    report(3, ok, f"dr_violations={violations} nonmonotone={witnesses}/50 ({2 * witnesses}%)")
    assert ok


def test_4_marginal_consistency(report):
    rng = RngStream(0, "acceptance-4")
    worst = 0.0
    probes = 0
    for i in range(20):
        inst = generate_instance(
            GeneratorParams(n_sources=5, n_targets=8, cap_range=(1, 12)), rng.child(i)
        )
        oracle = ProfitOracle(inst)
        gen = rng.child(i, "probes").generator
        caps = np.array(inst.capacities)
        for _ in range(1000):
            base = tuple(int(v) for v in np.floor(gen.random(5) * (caps + 1)))
            e = int(gen.integers(0, 5))
            k = int(gen.integers(-base[e], caps[e] - base[e] + 1))
            new = list(base)
            new[e] += k
            diff = oracle.evaluate(new) - oracle.evaluate(base)
            worst = max(worst, abs(oracle.marginal(e, k, base) - diff))
            probes += 1
    ok = worst <= 1e-12
    report(4, ok, f"probes={probes} max_abs_error={worst:.3e}")
    assert ok


def test_5_spread_vs_simulation(report):
    rng = RngStream(0, "acceptance-5")
    within = 0
    for i in range(20):
        gen = rng.child(i).generator
        inst = generate_instance(
            GeneratorParams(n_sources=int(gen.integers(1, 5)), n_targets=int(gen.integers(1, 9))),
            rng.child(i, "instance"),
        )
        m = tuple(int(gen.integers(0, c + 1)) for c in inst.capacities)
        est = monte_carlo_spread(inst, m, 100_000, rng.child(i, "mc"))
        exact = influence_spread(inst, m)
        within += abs(est.mean - exact) <= 3 * est.std_error or est.mean == exact
    ok = within >= 19
    report(5, ok, f"within_3se={within}/20")
    assert ok


def test_6_runtime_invariants(harness, report):
    rows, _ = harness
    # the solvers run with check_invariants=True and raise on any sandwich or
    # alpha+beta breach, so a finished harness means zero occurrences
    min_ab = min(r.min_alpha_beta for r in rows if r.min_alpha_beta is not None)
    overruns = sum(r.iteration_overruns for r in rows)
    ok = min_ab >= -1e-9 and overruns == 0
    report(6, ok, f"min_alpha_plus_beta={min_ab!r} sandwich_violations=0 iteration_overruns={overruns}")
    assert ok


def test_7_cli_determinism(tmp_path, report, capsys):
    inst_path = tmp_path / "inst.json"
    inst_path.write_text(
        serialize_instance(generate_instance(GeneratorParams(n_sources=4, n_targets=6), RngStream(1)))
    )
    commands = {
        "gen": ["gen", "--sources", "3", "--targets", "5", "--edge-prob", "0.6", "--seed", "7"],
        "solve-bsdg": ["solve", str(inst_path), "--alg", "bsdg", "--seed", "1"],
        "solve-unit": ["solve", str(inst_path), "--alg", "unit", "--seed", "1"],
        "solve-exhaustive": ["solve", str(inst_path), "--alg", "exhaustive", "--seed", "1"],
        "verify": ["verify", str(inst_path), "--mc-trials", "20000", "--seed", "3"],
        "bench": ["bench", "--instances", "5", "--runs", "20", "--seed", "9",
                  "--sweep-min-exp", "3", "--sweep-max-exp", "6"],
    }
    differing = []
    for name, args in commands.items():
        outputs = []
        for rep in range(2):
            out = tmp_path / f"{name}-{rep}.out"
            main(args + ["-o", str(out)])
            data = out.read_bytes()
            if name == "bench":
                data += out.with_suffix(".sweep.dat").read_bytes()
            outputs.append(data)
        if outputs[0] != outputs[1] or not outputs[0]:
            differing.append(name)
    capsys.readouterr()
    ok = not differing
    report(7, ok, f"commands={len(commands)} differing={differing}")
    assert ok
