import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dimerlab.optimizers import cobyla, nelder_mead

METHODS = [nelder_mead, cobyla]


def quadratic(x):
    return (x[0] - 1) ** 2 + (x[1] - 2) ** 2


def rosenbrock(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


class Counting:
    def __init__(self, f):
        self.f, self.calls = f, 0

    def __call__(self, x):
        self.calls += 1
        return self.f(x)


def test_nelder_mead_quadratic():
    r = nelder_mead(quadratic, [0.0, 0.0])
    assert np.abs(r.x - [1, 2]).max() <= 1e-6
    assert r.converged


def test_nelder_mead_rosenbrock():
    r = nelder_mead(rosenbrock, [-1.2, 1.0], max_evals=5000)
    assert np.abs(r.x - 1).max() <= 1e-4
    assert r.n_evals <= 5000


def test_cobyla_quadratic():
    r = cobyla(quadratic, [0.0, 0.0])
    assert np.abs(r.x - [1, 2]).max() <= 1e-5
    assert r.converged


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("budget", [3, 10, 57])
def test_budget_is_respected_and_counted(method, budget):
    f = Counting(rosenbrock)
    r = method(f, [-1.2, 1.0], max_evals=budget)
    assert r.n_evals == f.calls <= budget
    assert len(r.history) == r.n_evals


@pytest.mark.parametrize("method", METHODS)
def test_best_so_far_history_is_monotone(method):
    r = method(rosenbrock, [-1.2, 1.0], max_evals=400)
    assert all(b <= a for a, b in zip(r.history, r.history[1:]))
    assert r.fun == r.history[-1] == rosenbrock(r.x)


@pytest.mark.parametrize("method", METHODS)
def test_deterministic_trajectory(method):
    a = method(rosenbrock, [-1.2, 1.0], max_evals=300)
    b = method(rosenbrock, [-1.2, 1.0], max_evals=300)
    assert a.history == b.history
    assert np.array_equal(a.x, b.x)


@pytest.mark.parametrize("method", METHODS)
def test_budget_exhaustion_is_not_an_error(method):
    r = method(rosenbrock, [-1.2, 1.0], max_evals=20)
    assert not r.converged
    assert "budget" in r.message


@pytest.mark.parametrize("method", METHODS)
def test_invalid_start(method):
    with pytest.raises(ValueError):
        method(quadratic, [np.nan, 0.0])
    with pytest.raises(ValueError):
        method(quadratic, [0.0, 0.0], max_evals=2)


def test_cobyla_radius_validation():
    with pytest.raises(ValueError):
        cobyla(quadratic, [0, 0], rho_begin=1e-3, rho_end=1e-2)


def test_non_finite_values_are_survivable():
    def f(x):
        return np.inf if x[0] > 3 else quadratic(x)

    for method in METHODS:
        r = method(f, [2.9, 0.0], max_evals=2000)
        assert np.abs(r.x - [1, 2]).max() <= 1e-4


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.5, 2.0))
def test_convex_quadratics_are_solved(a, b, scale):
    def f(x):
        return scale * (x[0] - a) ** 2 + (x[1] - b) ** 2 / scale

    for method in METHODS:
        r = method(f, [0.0, 0.0], max_evals=5000)
        assert np.abs(r.x - [a, b]).max() <= 1e-5
        assert r.n_evals <= 5000


def test_cobyla_higher_dimension():
    target = np.arange(6) / 5.0
    r = cobyla(lambda x: float(np.sum((x - target) ** 2)), np.zeros(6))
    assert np.abs(r.x - target).max() <= 1e-5
