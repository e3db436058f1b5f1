import itertools

import pytest

from drsubmod.lattice import FunctionObjective
from drsubmod.profit import BipartiteInstance, Source


def make_instance_a(unit_cost=0.1):
    return BipartiteInstance(
        (Source("s1", 3, (0.5, 0.25, 0.125), unit_cost),), ("t1",), ((0,),)
    )


def make_figure1():
    # s1 -> u1, u3; s2 -> u1, u2, u4; s3 -> u5; capacities 10, 20, 15
    def decaying(p1, ratio, cap):
        probs = [p1]
        for _ in range(cap - 1):
            probs.append(probs[-1] * ratio)
        return tuple(probs)

    sources = (
        Source("s1", 10, decaying(0.4, 0.8, 10), 0.05),
        Source("s2", 20, decaying(0.3, 0.9, 20), 0.04),
        Source("s3", 15, decaying(0.5, 0.7, 15), 0.06),
    )
    targets = ("u1", "u2", "u3", "u4", "u5")
    adjacency = ((0, 1), (1,), (0,), (1,), (2,))
    return BipartiteInstance(sources, targets, adjacency)


def cut_objective():
    values = {(0, 0): 0.0, (1, 0): 1.0, (0, 1): 1.0, (1, 1): 0.0}
    return FunctionObjective(lambda x: values[x], (1, 1))


def box_points(bound):
    return list(itertools.product(*(range(c + 1) for c in bound)))


@pytest.fixture
def instance_a():
    return make_instance_a()


@pytest.fixture
def figure1():
    return make_figure1()
