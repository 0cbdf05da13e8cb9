import warnings

import numpy as np
import pytest

from lsts_sparse import design
from lsts_sparse import penalty as pen
from lsts_sparse import solver as S
from lsts_sparse.kernels import BandwidthPolicy, bandwidth


def _problem(seed, T=24, d=4):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((T, d))
    h = bandwidth(BandwidthPolicy(), T)
    op = design.build(X, h, h)
    Y = rng.standard_normal(T)
    g0 = np.abs(2 / T * design.rmatvec(op, Y)).max()
    return op, Y, g0


def _specs(g0, d):
    return [pen.Lasso(0.3 * g0), pen.WeightedTV(np.r_[0.0, np.full(d - 1, 0.3 * g0)])]


@pytest.mark.parametrize("seed", range(4))
def test_ista_monotone_and_fixed_point(seed):
    op, Y, g0 = _problem(seed)
    for spec in _specs(g0, op.d):
        res = S.solve(op, Y, spec, S.SolveOptions(algorithm="ista", max_iter=100_000))
        assert res.converged
        assert np.all(np.diff(res.objective_trace) <= 1e-12)
        th = res.theta_hat
        fixed = pen.prox(spec, th - res.step * S.gradient(op, Y, th), res.step)
        assert np.max(np.abs(fixed - th)) <= 1e-6 * res.step * 10


@pytest.mark.parametrize("seed", range(4))
def test_ista_fista_same_objective(seed):
    op, Y, g0 = _problem(seed, T=30, d=3)
    for spec in _specs(g0, op.d):
        a = S.solve(op, Y, spec, S.SolveOptions(algorithm="ista", max_iter=100_000))
        b = S.solve(op, Y, spec, S.SolveOptions(algorithm="fista"))
        assert abs(S.objective(op, Y, a.theta_hat, spec) - S.objective(op, Y, b.theta_hat, spec)) <= 1e-6


def test_zero_is_optimal_for_large_lambda():
    op, Y, g0 = _problem(7)
    res = S.solve(op, Y, pen.Lasso(1.01 * g0))
    assert res.iters == 0 and res.converged and not res.theta_hat.any()


def test_max_iter_returns_best_unconverged():
    op, Y, g0 = _problem(8)
    res = S.solve(op, Y, pen.Lasso(0.01 * g0), S.SolveOptions(algorithm="ista", max_iter=3))
    assert not res.converged and res.iters == 3
    assert S.objective(op, Y, res.theta_hat, pen.Lasso(0.01 * g0)) == pytest.approx(
        res.objective_trace.min())


def test_zero_operator():
    op = design.build(np.zeros((6, 2)), 0.5, 1.0)
    op.band[:] = 0.0
    res = S.solve(op, np.ones(6), pen.Lasso(0.1))
    assert res.converged and not res.theta_hat.any()


def test_shape_check():
    op, Y, _ = _problem(0)
    with pytest.raises(ValueError):
        S.solve(op, Y[:-1], pen.Lasso(0.1))


@pytest.mark.parametrize("backend", design.BACKENDS)
def test_predict_matches_matvec_on_training_points(backend):
    rng = np.random.default_rng(3)
    T, d = 40, 3
    X = rng.standard_normal((T, d))
    op = design.build(X, 0.2, 0.7, backend=backend)
    th = rng.standard_normal((T, d))
    fitted = design.matvec(op, th)
    u = np.arange(1, T + 1) / T
    pred = S.predict(th, X, 0.2, 0.7, u, X, backend=backend)
    assert np.allclose(pred, fitted, rtol=1e-12, atol=1e-12)
    assert S.predict(th, X, 0.2, 0.7, u[5], X[5], backend=backend) == pytest.approx(fitted[5])


def test_heuristic_prox_option_runs():
    op, Y, g0 = _problem(2)
    spec = _specs(g0, op.d)[1]
    res = S.solve(op, Y, spec, S.SolveOptions(exact_prox=False, max_iter=200))
    assert np.isfinite(res.objective_trace).all()
