import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drsubmod.lattice import (
    BoundsError,
    ConfigError,
    CountingOracle,
    DimensionError,
    FunctionObjective,
    RngStream,
    add_units,
    join,
    leq,
    marginal,
    meet,
)
from drsubmod.profit import ProfitOracle

from conftest import make_instance_a

points = st.integers(1, 5).flatmap(
    lambda n: st.tuples(*[st.tuples(*[st.integers(0, 9)] * n)] * 3)
)


def test_join_meet_examples():
    assert join((2, 1, 0), (1, 3, 0)) == (2, 3, 0)
    assert meet((2, 1, 0), (1, 3, 0)) == (1, 1, 0)
    assert join((0, 0, 0), (4, 2, 7)) == (4, 2, 7)
    assert meet((5, 5, 5), (4, 2, 5)) == (4, 2, 5)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        join((1, 2), (1,))
    with pytest.raises(DimensionError):
        meet((1,), (1, 2))


@given(points)
def test_join_meet_laws(xyz):
    x, y, z = xyz
    assert join(x, x) == x and meet(x, x) == x
    assert join(x, y) == join(y, x) and meet(x, y) == meet(y, x)
    assert join(join(x, y), z) == join(x, join(y, z))
    assert meet(meet(x, y), z) == meet(x, meet(y, z))
    assert leq(meet(x, y), x) and leq(x, join(x, y))


def test_add_units():
    assert add_units((0, 0), 0, 3) == (3, 0)
    assert add_units((2, 5), 1, 0) == (2, 5)
    assert add_units((3, 0), 0, -3) == (0, 0)
    x = [1, 1]
    add_units(x, 0, 1)
    assert x == [1, 1]
    with pytest.raises(BoundsError):
        add_units((0, 0), 0, -1)
    with pytest.raises(BoundsError):
        add_units((2, 0), 0, 2, bound=(3, 3))


def test_marginal_instance_a():
    oracle = ProfitOracle(make_instance_a())
    assert marginal(oracle, 0, 0, (1,)) == 0.0
    assert marginal(oracle, 0, 1, (0,)) == pytest.approx(0.4, abs=1e-15)
    assert marginal(oracle, 0, -1, (3,)) == pytest.approx(0.053125, abs=1e-15)
    with pytest.raises(BoundsError):
        marginal(oracle, 0, 2, (2,))


def test_counting_oracle_black_box():
    calls = []

    def f(x):
        calls.append(x)
        return float(sum(x))

    counter = CountingOracle(FunctionObjective(f, (3, 3)))
    assert marginal(counter, 1, 2, (0, 0)) == 2.0
    counter.evaluate((1, 1))
    assert counter.raw_eval_count == len(calls) == 3
    assert counter.raw_equivalent == 3


def test_counting_oracle_fused_charged_double():
    counter = CountingOracle(ProfitOracle(make_instance_a()))
    marginal(counter, 0, 1, (0,))
    assert counter.raw_eval_count == 0
    assert counter.fused_marginals == 1
    assert counter.raw_equivalent == 2


def test_rng_stream_reproducible_and_independent():
    a = [RngStream(5, "solver", 1).random() for _ in range(3)]
    b = [RngStream(5, "solver", 1).random() for _ in range(3)]
    assert a == b
    assert RngStream(5, "solver", 1).random() != RngStream(5, "solver", 2).random()
    assert RngStream(5).child("x").random() == RngStream(5, "x").random()
    with pytest.raises(ConfigError):
        RngStream(-1)
    with pytest.raises(ConfigError):
        RngStream(2**64)
    assert np.isfinite(RngStream(2**64 - 1).random())
