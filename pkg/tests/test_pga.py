import numpy as np
import pytest
from hypothesis import given

from helpers import random_alpha, random_instance, seeds
from hullsvc.data_io import TrainingSet
from hullsvc.kernel import KernelParams, build_gram
from hullsvc.oracle import explicit_projection, grid_qp
from hullsvc.pga import (
    DirectionInfo,
    direction,
    line_search,
    pga_pair_step,
    pga_solve,
    release,
    step_bounds,
)
from hullsvc.smo import smo_solve
from hullsvc.solver_core import (
    at_lower,
    at_upper,
    componentwise_kkt_violation,
    free_mask,
    is_feasible,
    kkt_report,
    make_state,
    objective,
)

FOUR = TrainingSet([[0, 0], [1, 0.2], [3, 1], [2.5, 2]], [1, 1, -1, -1])
SIX = TrainingSet([[0, 0], [0.3, 0.1], [2, 2], [3, 3], [3.2, 2.9], [0.5, 0.4]], [1, 1, 1, -1, -1, -1])
BOUND = TrainingSet([[0, 0], [0.2, 0], [-5, -5], [1, 0], [1.2, 0.1], [6, 6]], [1, 1, 1, -1, -1, -1])


def _pack(d, g=1.0, c=1.0):
    return build_gram(d, KernelParams(g, c))


# frozen PGA solutions at eps1 = 1e-10
FROZEN_FOUR = {
    0.1: (0.9493340499329438, [0.39057666956516846, 0.6094233304346868,
                               0.5155580420496155, 0.48444195794976475]),
    1.0: (1.156515036786682, None),
    10.0: (1.0000085397840452, [0.5, 0.5, 0.5, 0.5]),
}


@pytest.mark.parametrize("gamma", sorted(FROZEN_FOUR))
def test_frozen_four_point(gamma):
    st = pga_solve(FOUR, _pack(FOUR, gamma), eps1=1e-10)
    obj, alpha = FROZEN_FOUR[gamma]
    assert st.converged
    assert st.obj == pytest.approx(obj, abs=1e-10)
    if alpha is not None:
        np.testing.assert_allclose(st.alpha, alpha, atol=1e-9)


@pytest.mark.parametrize("gamma", sorted(FROZEN_FOUR))
def test_four_point_within_grid_tolerance(gamma):
    pack = _pack(FOUR, gamma)
    st = pga_solve(FOUR, pack, eps1=1e-10)
    res = grid_qp(FOUR, pack, step=1e-3)
    # the grid minimum can only sit above the true one, by at most L * step^2
    assert st.obj <= res.obj_hat + 1e-12
    assert res.obj_hat - st.obj <= res.lipschitz * res.grid_step**2


def test_frozen_bound_active():
    st = pga_solve(BOUND, _pack(BOUND, 0.5, 100.0), eps1=1e-10)
    assert st.obj == pytest.approx(0.22157843582561834, abs=1e-12)
    np.testing.assert_allclose(
        st.alpha, [0.0, 0.7806154100450217, 0.2193845899549783,
                   0.7806154100625887, 0.0, 0.2193845899374113], atol=1e-8)
    assert at_lower(st.alpha[[0, 4]]).all()


def test_frozen_six_point_interior():
    st = pga_solve(SIX, _pack(SIX), eps1=1e-10)
    assert st.obj == pytest.approx(0.5792834486199694, abs=1e-12)
    st = pga_solve(SIX, _pack(SIX, 0.5), eps1=1e-10)
    assert st.obj == pytest.approx(0.5074467880636816, abs=1e-12)


@given(seeds)
def test_direction_matches_explicit_projection(seed):
    rng = np.random.default_rng(seed)
    d = random_instance(rng, int(rng.integers(4, 12)))
    pack = _pack(d, float(rng.choice([0.1, 1.0, 10.0])))
    a = random_alpha(d, rng, p_zero=0.3)
    st = make_state(a, pack)
    info = direction(st, d)
    # a class with no interior component makes the dense system singular
    if not all((free_mask(a) & (d.y == s)).any() for s in (1, -1)):
        return
    dd, mu, act = explicit_projection(a, d, st.grad)
    np.testing.assert_allclose(info.d, dd, atol=1e-10)
    np.testing.assert_allclose(info.mu[act], mu[:-2], atol=1e-10)
    assert info.mu_plus == pytest.approx(mu[-2], abs=1e-10)
    assert info.mu_minus == pytest.approx(mu[-1], abs=1e-10)


@given(seeds)
def test_direction_sums_to_zero_per_class(seed):
    rng = np.random.default_rng(seed)
    d = random_instance(rng, int(rng.integers(2, 15)))
    st = make_state(random_alpha(d, rng, p_one=0.2), _pack(d))
    info = direction(st, d)
    for idx in (d.pos_idx, d.neg_idx):
        assert abs(info.d[idx].sum()) <= 1e-12
    assert np.all(info.d[~info.free] == 0)


def test_release_matches_projection_without_that_row():
    rng = np.random.default_rng(1)
    d = TrainingSet(rng.normal(size=(7, 2)), [1, 1, 1, 1, -1, -1, -1])
    pack = _pack(d)
    a = np.array([0.0, 0.5, 0.5, 0.0, 0.3, 0.7, 0.0])
    st = make_state(a, pack)
    info = direction(st, d)
    j = int(np.nanargmin(info.mu))
    assert info.mu[j] < 0
    rel = release(st, info, d)
    assert rel.released == j and rel.free[j]
    active = [i for i in np.flatnonzero(at_lower(a) | at_upper(a)) if i != j]
    dd, mu, _ = explicit_projection(a, d, st.grad, active=active)
    np.testing.assert_allclose(rel.d, dd, atol=1e-12)
    assert rel.mu_plus == pytest.approx(mu[-2], abs=1e-12)


def test_release_from_upper_bound():
    # one positive sample pinned at 1 while the other sits far closer to the negatives
    d = TrainingSet([[0.0], [1.8], [2.0], [2.2]], [1, 1, -1, -1])
    pack = _pack(d, 1.0, 100.0)
    st = make_state(np.array([1.0, 0.0, 0.5, 0.5]), pack)
    info = direction(st, d)
    assert info.mu_plus is not None  # pair fallback freed both components
    out = pga_solve(d, pack, eps1=1e-10, alpha0=st.alpha)
    assert out.converged and out.alpha[0] < 1.0


def test_release_requires_negative_multiplier():
    d = TrainingSet([[0.0, 1.0], [0.0, -1.0], [2.0, 1.0], [2.0, -1.0]], [1, 1, -1, -1])
    st = make_state(np.full(4, 0.5), _pack(d))
    with pytest.raises(RuntimeError):
        release(st, direction(st, d), d)


def _info(d, free):
    free = np.asarray(free, dtype=bool)
    return DirectionInfo(np.asarray(d, dtype=float), free, np.full(len(free), np.nan), 0.0, 0.0)


@pytest.mark.parametrize("a, d, eta, idx", [
    ([0.5, 0.5], [-1.0, 1.0], 0.5, 0),
    ([0.2, 0.7], [-0.1, 0.1], 2.0, 0),
    ([0.9, 0.1], [0.5, -0.5], 0.2, 0),
    ([0.3, 0.7], [0.0, 0.0], np.inf, None),
])
def test_step_bounds_examples(a, d, eta, idx):
    st = make_state(np.array(a, dtype=float))
    got, j = step_bounds(st, _info(d, [True, True]))
    assert got == pytest.approx(eta) and j == idx


def test_step_bounds_ignores_fixed_components():
    st = make_state(np.array([0.0, 0.5, 0.5]))
    got, j = step_bounds(st, _info([-1.0, -0.1, 0.1], [False, True, True]))
    assert got == pytest.approx(5.0) and j == 1


def test_line_search_is_the_minimum_along_d():
    rng = np.random.default_rng(7)
    d = random_instance(rng, 8, n_pos=4)
    pack = _pack(d, 0.5)
    st = make_state(random_alpha(d, rng, p_zero=0.0), pack)
    info = direction(st, d)
    step = line_search(st, info, pack, eta_max=np.inf)
    f = lambda t: objective(st.alpha + t * info.d, pack)
    sweep = np.linspace(0, 2 * step.eta_bar, 1000)
    vals = [f(t) for t in sweep]
    assert f(step.eta_star) <= min(vals) + 1e-14
    assert step.eta_bar == pytest.approx(-(info.d @ st.grad) / (info.d @ step.Qd), rel=1e-10)


def test_line_search_bounded_sweep():
    rng = np.random.default_rng(9)
    for _ in range(10):
        d = random_instance(rng, 8, n_pos=4)
        pack = _pack(d, 2.0)
        st = make_state(random_alpha(d, rng, p_zero=0.2), pack)
        info = direction(st, d)
        eta_max, j = step_bounds(st, info)
        step = line_search(st, info, pack, eta_max, j)
        g = lambda t: objective(st.alpha + t * info.d, pack)
        best = g(step.eta_star)
        assert all(best <= g(t) + 1e-14 for t in np.linspace(0, eta_max, 1000))


def test_line_search_clamps_to_eta_max():
    rng = np.random.default_rng(8)
    d = random_instance(rng, 6, n_pos=3)
    pack = _pack(d)
    st = make_state(random_alpha(d, rng, p_zero=0.0), pack)
    info = direction(st, d)
    step = line_search(st, info, pack, eta_max=1e-9, binding=2)
    assert step.eta_star == 1e-9 and step.binding == 2


@given(seeds)
def test_pga_descends_and_stays_feasible(seed):
    rng = np.random.default_rng(seed)
    d = random_instance(rng, int(rng.integers(4, 25)), dim=3)
    pack = _pack(d, float(rng.choice([0.1, 1.0, 10.0])), float(rng.choice([1.0, 100.0])))
    # small gamma with large C is ill-conditioned; steepest descent needs thousands of steps
    st = pga_solve(d, pack, eps1=1e-8, max_epochs=50000)
    assert st.converged
    assert is_feasible(st, d)
    h = np.array(st.history)
    assert np.all(np.diff(h) <= 1e-12 * np.maximum(1.0, np.abs(h[:-1])))
    assert kkt_report(st, d, 1e-8).satisfied
    assert componentwise_kkt_violation(st, d) <= 10 * 1e-8


@given(seeds)
def test_pga_agrees_with_smo(seed):
    rng = np.random.default_rng(seed)
    d = random_instance(rng, int(rng.integers(4, 20)))
    pack = _pack(d, float(rng.choice([0.1, 1.0])))
    a = pga_solve(d, pack, eps1=1e-9)
    b = smo_solve(d, pack, eps1=1e-9, max_epochs=20000)
    assert abs(a.obj - b.obj) <= 1e-8


def test_warm_start_from_feasible_point():
    pack = _pack(SIX)
    st = pga_solve(SIX, pack, eps1=1e-10, alpha0=np.array([1, 0, 0, 0, 0, 1.0]))
    assert st.converged and st.obj == pytest.approx(0.5792834486199694, abs=1e-12)


def test_epoch_cap_is_not_an_error():
    rng = np.random.default_rng(0)
    d = random_instance(rng, 30, n_pos=15)
    st = pga_solve(d, _pack(d), eps1=1e-12, max_epochs=1)
    assert st.iterations == 1 and not st.converged


def test_pair_step_rejects_mixed_pair():
    with pytest.raises(ValueError):
        pga_pair_step(make_state(np.full(4, 0.5), _pack(FOUR)), FOUR, _pack(FOUR), 0, 2)
