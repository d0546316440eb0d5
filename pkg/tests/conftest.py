import numpy as np
import pytest

from parafrac import build_operator, get_problem
from parafrac.problems import ProblemSpec


@pytest.fixture(scope="session")
def paper42():
    return get_problem("paper42")


@pytest.fixture(scope="session")
def linear_heat():
    return get_problem("linear-heat")


@pytest.fixture(scope="session")
def op8():
    return build_operator(8, 0.0, 1.0)


@pytest.fixture(scope="session")
def op16():
    return build_operator(16, 0.0, 1.0)


def make_problem(diffusion, source, initial, alpha=0.5, t_final=1.0):
    """Custom problem on [0, 1] without coercivity probing."""
    return ProblemSpec(0.0, 1.0, t_final, alpha, diffusion, source, initial)


def zero_coefficient(x, t, u):
    return 0.0


def constant_initial_factory(c):
    def initial(x):
        arr = np.asarray(x, dtype=float)
        out = np.full_like(arr, c)
        # zero at the endpoints so the Dirichlet compatibility check passes
        return np.where((arr == 0.0) | (arr == 1.0), 0.0, out)

    return initial
