import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lsts_sparse import penalty as pen
from oracles import soft_threshold, wtv_objective, wtv_prox_bvls

vec = arrays(np.float64, st.integers(2, 8), elements=st.floats(-50, 50))


@given(vec, st.floats(0, 10))
def test_soft_threshold_oracle(v, tau):
    assert np.array_equal(pen.prox_lasso(v, tau), soft_threshold(v, tau))


def test_soft_threshold_boundary_is_zero():
    assert pen.prox_lasso(np.array([1.5, -1.5]), 1.5).tolist() == [0.0, 0.0]


@given(st.integers(0, 10_000), st.floats(0, 5))
def test_lasso_firmly_nonexpansive(seed, tau):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=6) * 3, rng.normal(size=6) * 3
    pu, pv = pen.prox_lasso(u, tau), pen.prox_lasso(v, tau)
    assert np.sum((pu - pv) ** 2) <= np.dot(pu - pv, u - v) + 1e-12
    assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-12


@given(vec, st.floats(0, 10))
def test_lasso_sign_consistency(v, tau):
    out = pen.prox_lasso(v, tau)
    assert np.all(out * v >= 0) and np.all(np.abs(out) <= np.abs(v))


def _wtv_case(seed, d):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=d) * rng.uniform(0.1, 5)
    w = np.concatenate([[0.0], rng.uniform(0, 2, d - 1)])
    return v, w, rng.uniform(0.01, 2)


@given(st.integers(0, 10**6), st.integers(2, 12))
@settings(max_examples=300)
def test_wtv_prox_matches_dual_oracle(seed, d):
    v, w, s = _wtv_case(seed, d)
    assert np.allclose(pen.prox_wtv_row(v, w, s), wtv_prox_bvls(v, w, s), atol=1e-9)


@given(st.integers(0, 10**6), st.integers(2, 8), st.floats(-20, 20))
def test_wtv_shift_equivariance(seed, d, c):
    v, w, s = _wtv_case(seed, d)
    assert np.allclose(pen.prox_wtv_row(v + c, w, s), pen.prox_wtv_row(v, w, s) + c,
                       atol=1e-10)


@given(st.integers(0, 10**6), st.integers(2, 8))
def test_wtv_mean_preserved(seed, d):
    v, w, s = _wtv_case(seed, d)
    assert abs(pen.prox_wtv_row(v, w, s).mean() - v.mean()) <= 1e-10 * max(1, abs(v).max())


@given(st.integers(0, 10**6), st.integers(2, 8))
def test_wtv_kkt(seed, d):
    """v - x = D^T u with |u_k| <= s w_{k+1}, and u_k = s w_{k+1} sgn(dx_k) on jumps."""
    v, w, s = _wtv_case(seed, d)
    x = pen.prox_wtv_row(v, w, s)
    u = np.cumsum(x - v)[:-1]  # (v - x)_1 = -u_1, ..., so u_k = sum_{i<=k} (x_i - v_i)
    bound = s * w[1:]
    assert np.all(np.abs(u) <= bound + 1e-9)
    jumps = np.abs(np.diff(x)) > 1e-9
    assert np.allclose(u[jumps], bound[jumps] * np.sign(np.diff(x))[jumps], atol=1e-9)


@given(st.integers(0, 10**6), st.integers(2, 8))
def test_wtv_prox_beats_heuristic(seed, d):
    v, w, s = _wtv_case(seed, d)
    exact = wtv_objective(pen.prox_wtv_row(v, w, s), v, w, s)
    approx = wtv_objective(pen.wtv_shrinkage_heuristic(v, w, s), v, w, s)
    assert exact <= approx + 1e-10


def test_wtv_known_value():
    assert np.allclose(pen.prox_wtv_row(np.array([0.0, 2.0]), np.array([0.0, 1.0]), 0.5),
                       [0.5, 1.5])


def test_rows_match_single_row():
    rng = np.random.default_rng(0)
    V, w = rng.normal(size=(7, 5)), np.array([0, 1, 0.5, 2, 0.1])
    rows = np.stack([pen.prox_wtv_row(r, w, 0.3) for r in V])
    assert np.array_equal(pen.prox_wtv_rows(V, w, 0.3), rows)


def test_spec_validation():
    with pytest.raises(ValueError):
        pen.WeightedTV(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        pen.WeightedTV(np.array([0.0, -1.0]))
    with pytest.raises(ValueError):
        pen.Lasso(-1.0)


def test_values():
    th = np.array([[1.0, -2.0, 2.0]])
    assert pen.value(pen.Lasso(0.5), th) == pytest.approx(2.5)
    assert pen.value(pen.WeightedTV(np.array([0.0, 1.0, 0.5])), th) == pytest.approx(5.0)


def _sw(kind="lasso", d=50, T=1000, **kw):
    return pen.LambdaScheduleInput(pen.Regime.SUB_WEIBULL, kind, d, T, **kw)


def test_subweibull_schedule_value():
    lam = pen.lambda_schedule(_sw()).lam
    assert lam == pytest.approx(np.sqrt((2 * np.log(50) + np.log(1000)) / 1000 ** (1 / 3)))


@given(st.integers(2, 5000), st.integers(1, 200))
def test_subweibull_schedule_decreasing(T, d):
    assume(T > 2)
    a = pen.base_rate(_sw(d=d, T=T))
    b = pen.base_rate(_sw(d=d, T=T + 1))
    assert b < a


def test_wtv_weights():
    spec = pen.lambda_schedule(_sw("wtv", d=4, T=100))
    lam = pen.base_rate(_sw(d=4, T=100))
    assert np.allclose(spec.weights, [0, 3 * lam, 2 * lam, lam])


def test_regvarying_schedule():
    inp = pen.LambdaScheduleInput(pen.Regime.REGULARLY_VARYING, "lasso", 50, 1000,
                                  xi=0.01, vartheta=0.02)
    assert pen.base_rate(inp) == pytest.approx(2 * 2001 / 1000 ** 1.01)


@pytest.mark.parametrize("kw", [dict(c=1.0), dict(xi=0.5)])
def test_schedule_range_errors(kw):
    with pytest.raises(ValueError):
        pen.base_rate(_sw(**kw))


def test_regvarying_range_errors():
    with pytest.raises(ValueError):
        pen.base_rate(pen.LambdaScheduleInput(pen.Regime.REGULARLY_VARYING, "lasso", 5, 100,
                                              xi=0.3, vartheta=0.2))
    with pytest.raises(ValueError):
        pen.base_rate(pen.LambdaScheduleInput(pen.Regime.REGULARLY_VARYING, "lasso", 5, 100,
                                              xi=0.01, vartheta=0.2, eta1=3, eta2=3))
