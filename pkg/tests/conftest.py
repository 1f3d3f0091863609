import numpy as np
import pytest

from qedge.instance import ProblemInstance


def toy1_instance() -> ProblemInstance:
    """Two areas, two ENs; small enough to verify every number by hand."""
    inst = ProblemInstance(
        m=2,
        n=2,
        demand=np.array([3.0, 5.0]),
        capacity=np.array([4.0, 10.0]),
        placement_cost=np.array([0.3, 0.5]),
        budget=0.7,
        delay_penalty=0.01,
        unmet_penalty=np.array([1.0, 1.0]),
        delay=np.array([[1.0, 4.0], [2.0, 1.0]]),
    )
    inst.validate()
    return inst


@pytest.fixture
def toy1() -> ProblemInstance:
    return toy1_instance()


def random_small_instance(rng: np.random.Generator, m=None, n=None,
                          integer=False) -> ProblemInstance:
    """Random instance small enough for the brute-force oracles."""
    m = int(rng.integers(1, 7)) if m is None else m
    n = int(rng.integers(1, 4)) if n is None else n
    if integer:
        demand = rng.integers(0, 7, size=m).astype(float)
        capacity = rng.choice([2.0, 4.0, 8.0], size=n)
    else:
        demand = rng.uniform(0.0, 8.0, size=m)
        capacity = rng.uniform(1.0, 10.0, size=n)
    inst = ProblemInstance(
        m=m,
        n=n,
        demand=demand,
        capacity=capacity,
        placement_cost=rng.uniform(0.1, 0.6, size=n),
        budget=float(rng.uniform(0.5, 2.0)),
        delay_penalty=1e-4,
        unmet_penalty=np.full(m, 1.0),
        delay=rng.uniform(2.0, 15.0, size=(m, n)),
    )
    inst.validate()
    return inst
