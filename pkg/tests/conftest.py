import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from assg.problems import Dataset, Loss, Objective, Regularizer, generate_synthetic

settings.register_profile("default", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# the hinge + l1 instance used throughout: unique minimizer, theta = 1 with a
# moderate error-bound constant
HINGE_SPEC = {"family": "separable_classification", "n": 10, "d": 3, "margin": 1.0,
              "regularizer": {"kind": "l1", "lam": 0.3}}
HINGE_SEED = 16


@pytest.fixture(scope="session")
def abs_obj():
    return generate_synthetic({"family": "one_dim", "kind": "abs"}, 0)


@pytest.fixture(scope="session")
def square_obj():
    return generate_synthetic({"family": "one_dim", "kind": "square"}, 0)


@pytest.fixture(scope="session")
def huber_obj():
    return generate_synthetic({"family": "one_dim", "kind": "huber", "delta": 1.0}, 0)


@pytest.fixture(scope="session")
def hinge_obj():
    return generate_synthetic(HINGE_SPEC, HINGE_SEED)


@pytest.fixture(scope="session")
def hinge_composite(hinge_obj):
    return hinge_obj.replace(mode="composite")


@pytest.fixture(scope="session")
def box_obj():
    """Absolute-loss regression in 2-D restricted to a box."""
    from assg.geometry import Box
    rng = np.random.default_rng(3)
    X = rng.standard_normal((8, 2))
    y = X @ np.array([2.0, -1.5])
    return Objective(Dataset(X, y), Loss.absolute(), Regularizer.none(),
                     domain=Box([-1.0, -1.0], [1.0, 1.0]))


@pytest.fixture(scope="session")
def shifted_abs_composite():
    """f(w) = |w - 1| sampled from x in {0.5, 1.5}, R = 0.5|w|, composite."""
    data = Dataset([[0.5], [1.5]], [0.5, 1.5])
    return Objective(data, Loss.absolute(), Regularizer.l1(0.5), mode="composite")


@pytest.fixture(scope="session")
def hinge_reference(hinge_obj):
    from assg.oracle import reference_optimum
    return reference_optimum(hinge_obj)
