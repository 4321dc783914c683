import numpy as np
import pytest
from hypothesis import given

from helpers import random_alpha, random_instance, seeds
from hullsvc.data_io import TrainingSet
from hullsvc.kernel import KernelParams, build_gram
from hullsvc.oracle import fd_gradient
from hullsvc.solver_core import (
    class_sums,
    componentwise_kkt_violation,
    gradient,
    init_alpha,
    is_feasible,
    kkt_report,
    make_state,
    objective,
    violating_pair,
)


def _pack(d, g=1.0, c=1.0):
    return build_gram(d, KernelParams(g, c))


def test_init_alpha_uniform():
    d = TrainingSet(np.arange(10.0).reshape(5, 2), [1, 1, -1, -1, -1])
    st = init_alpha(d, _pack(d))
    np.testing.assert_allclose(st.alpha, [0.5, 0.5, 1 / 3, 1 / 3, 1 / 3])
    assert is_feasible(st, d)
    assert class_sums(st, d) == pytest.approx((1.0, 1.0))


def test_objective_two_point_value():
    # two identical points: 0.5 * (1 + 1/C) * 2 - 1 = 1/C
    d = TrainingSet([[0.0], [0.0]], [1, -1])
    for c in (0.5, 1.0, 4.0):
        assert objective(np.ones(2), _pack(d, c=c)) == pytest.approx(1.0 / c, abs=1e-15)


@given(seeds)
def test_gradient_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    d = random_instance(rng, int(rng.integers(2, 9)))
    pack = _pack(d, float(rng.choice([0.1, 1.0, 10.0])))
    a = random_alpha(d, rng)
    fd = fd_gradient(lambda v: objective(v, pack), a, h=1e-5)
    an = gradient(a, pack)
    assert np.linalg.norm(fd - an) <= 1e-7 * max(np.linalg.norm(an), 1e-12)


@given(seeds)
def test_objective_nonnegative(seed):
    rng = np.random.default_rng(seed)
    d = random_instance(rng, 6)
    a = random_alpha(d, rng)
    assert objective(a, _pack(d)) > 0


def test_kkt_uniform_symmetric_instance():
    # mirror-symmetric instance: the uniform point is optimal
    d = TrainingSet([[0.0, 1.0], [0.0, -1.0], [2.0, 1.0], [2.0, -1.0]], [1, 1, -1, -1])
    st = init_alpha(d, _pack(d))
    rep = kkt_report(st, d, 1e-12)
    assert rep.satisfied and rep.max_violation <= 1e-12
    assert rep.mu_plus is not None and rep.mu_minus is not None
    assert componentwise_kkt_violation(st, d) <= 1e-12


def test_kkt_mu_undefined_when_class_pinned():
    d = TrainingSet([[0.0], [1.0], [3.0]], [1, 1, -1])
    st = make_state(np.array([1.0, 0.0, 1.0]), _pack(d))
    rep = kkt_report(st, d, 1e-6)
    assert rep.mu_plus is None and rep.mu_minus is None


def test_violating_pair_direction_and_error():
    d = TrainingSet([[0.0], [5.0], [1.0], [9.0]], [1, 1, -1, -1])
    st = init_alpha(d, _pack(d, 0.1))
    i, j, sign = violating_pair(st, d)
    g = -st.grad
    assert d.y[i] == d.y[j] == sign
    assert g[i] > g[j]
    sym = TrainingSet([[0.0, 1.0], [0.0, -1.0], [2.0, 1.0], [2.0, -1.0]], [1, 1, -1, -1])
    with pytest.raises(RuntimeError):
        violating_pair(init_alpha(sym, _pack(sym)), sym)


def test_is_feasible_rejects():
    d = TrainingSet([[0.0], [1.0], [3.0]], [1, 1, -1])
    assert not is_feasible([0.6, 0.6, 1.0], d)
    assert not is_feasible([1.1, -0.1, 1.0], d)
    assert is_feasible([0.3, 0.7, 1.0], d)
