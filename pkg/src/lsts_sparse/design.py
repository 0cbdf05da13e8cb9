"""Band-stored kernel design operator K of shape (T, T*d).

Entry (t, b, j) is K1((t - b) / (T h1)) * K2((X_t^j - X_b^j) / h2). The time
kernel vanishes for |t - b| > h1*T, so row t only touches block-columns
b in [t - w, t + w] with w = floor(h1*T). Storage is ``band[t, k, j]`` with
b = t + k - w; slots falling outside 0..T-1 hold zeros.

The ``tv-linear`` backend replaces the space kernel by the covariate itself,
K1((t - b) / (T h1)) * X_t^j, giving a time-smoothed varying-coefficient
linear model on the same band.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .kernels import k1, k2

__all__ = ["DesignOperator", "build", "matvec", "rmatvec", "lipschitz", "dense",
           "predict_points", "ConvergenceWarning", "BACKENDS"]

BACKENDS = ("kernel", "tv-linear")


class ConvergenceWarning(UserWarning):
    pass


def half_width(h1: float, T: int) -> int:
    return int(math.floor(h1 * T))


@dataclass(frozen=True)
class DesignOperator:
    T: int
    d: int
    h1: float
    h2: float
    w: int
    band: np.ndarray  # (T, 2w+1, d)
    X: np.ndarray
    backend: str = "kernel"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.T, self.T * self.d)

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.band))

    def matvec(self, theta):
        return matvec(self, theta)

    def rmatvec(self, r):
        return rmatvec(self, r)


def build(X: np.ndarray, h1: float, h2: float, backend: str = "kernel") -> DesignOperator:
    if not (h1 > 0 and h2 > 0):
        raise ValueError("bandwidths must be positive")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    X = np.ascontiguousarray(X, dtype=float)
    T, d = X.shape
    w = min(half_width(h1, T), T - 1)
    band = np.zeros((T, 2 * w + 1, d))
    t = np.arange(T)
    for k in range(2 * w + 1):
        off = k - w
        b = t + off
        ok = (b >= 0) & (b < T)
        tk = k1(-off / (T * h1))  # K1((t - b)/(T h1)), even
        if tk == 0.0:
            continue
        if backend == "kernel":
            band[ok, k, :] = tk * k2((X[ok] - X[b[ok]]) / h2)
        else:
            band[ok, k, :] = tk * X[ok]
    return DesignOperator(T=T, d=d, h1=float(h1), h2=float(h2), w=w, band=band, X=X,
                          backend=backend)


@numba.njit(cache=True)
def _matvec(band, theta, w):
    T, K, d = band.shape
    out = np.zeros(T)
    for t in range(T):
        acc = 0.0
        k_lo = max(0, w - t)
        k_hi = min(K, T - t + w)
        for k in range(k_lo, k_hi):
            b = t + k - w
            for j in range(d):
                acc += band[t, k, j] * theta[b, j]
        out[t] = acc
    return out


@numba.njit(cache=True)
def _rmatvec(band, r, w):
    T, K, d = band.shape
    out = np.zeros((T, d))
    for t in range(T):
        rt = r[t]
        k_lo = max(0, w - t)
        k_hi = min(K, T - t + w)
        for k in range(k_lo, k_hi):
            b = t + k - w
            for j in range(d):
                out[b, j] += band[t, k, j] * rt
    return out


def matvec(op: DesignOperator, theta) -> np.ndarray:
    """K @ theta; ``theta`` may be flat (T*d,) or shaped (T, d)."""
    theta = np.asarray(theta, dtype=float)
    if theta.size != op.T * op.d:
        raise ValueError(f"theta has {theta.size} entries, expected {op.T * op.d}")
    return _matvec(op.band, np.ascontiguousarray(theta.reshape(op.T, op.d)), op.w)


def rmatvec(op: DesignOperator, r) -> np.ndarray:
    """K^T @ r, returned with shape (T, d) (row-major blocks)."""
    r = np.asarray(r, dtype=float)
    if r.shape != (op.T,):
        raise ValueError(f"r has shape {r.shape}, expected ({op.T},)")
    return _rmatvec(op.band, np.ascontiguousarray(r), op.w)


def dense(op: DesignOperator) -> np.ndarray:
    """Materialize K as a (T, T*d) array; small problems only."""
    T, d, w = op.T, op.d, op.w
    K = np.zeros((T, T * d))
    for t in range(T):
        for k in range(2 * w + 1):
            b = t + k - w
            if 0 <= b < T:
                K[t, b * d:(b + 1) * d] = op.band[t, k]
    return K


def lipschitz(op: DesignOperator, tol: float = 1e-8, max_iter: int = 1000,
              seed: int = 0) -> float:
    """Estimate L = (2/T) * sigma_max(K)^2 by power iteration on K^T K.

    Stops once successive Rayleigh quotients agree to ``tol`` relatively. On
    hitting ``max_iter`` the best estimate is returned with a
    :class:`ConvergenceWarning`.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if not np.any(op.band):
        return 0.0
    v = np.random.default_rng(seed).standard_normal((op.T, op.d))
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        Kv = matvec(op, v)
        rq = float(Kv @ Kv)
        g = rmatvec(op, Kv)
        nrm = np.linalg.norm(g)
        if nrm == 0.0:
            break
        v = g / nrm
        if prev > 0 and abs(rq - prev) <= tol * rq:
            prev = rq
            break
        prev = rq
    else:
        warnings.warn(f"power iteration stopped after {max_iter} iterations",
                      ConvergenceWarning, stacklevel=2)
    # one more Rayleigh quotient at the final vector
    Kv = matvec(op, v)
    rq = max(prev, float(Kv @ Kv))
    return 2.0 / op.T * rq


@numba.njit(cache=True)
def _predict_kernel(theta, Xtr, h1, h2, U, Xq):
    T, d = Xtr.shape
    n = U.shape[0]
    out = np.zeros(n)
    quarter_pi = math.pi / 4.0
    for i in range(n):
        u = U[i]
        r_lo = max(1, int(math.ceil((u - h1) * T)))
        r_hi = min(T, int(math.floor((u + h1) * T)))
        acc = 0.0
        for r in range(r_lo, r_hi + 1):
            v = (u - r / T) / h1
            if abs(v) > 1.0:
                continue
            kt = quarter_pi * math.cos(math.pi * v / 2.0)
            s = 0.0
            for j in range(d):
                z = (Xq[i, j] - Xtr[r - 1, j]) / h2
                if abs(z) <= 1.0:
                    s += theta[r - 1, j] * 0.5 * (1.0 + math.cos(math.pi * z))
            acc += kt * s
        out[i] = acc
    return out


@numba.njit(cache=True)
def _predict_linear(theta, T, h1, U, Xq):
    d = theta.shape[1]
    n = U.shape[0]
    out = np.zeros(n)
    quarter_pi = math.pi / 4.0
    for i in range(n):
        u = U[i]
        r_lo = max(1, int(math.ceil((u - h1) * T)))
        r_hi = min(T, int(math.floor((u + h1) * T)))
        acc = 0.0
        for r in range(r_lo, r_hi + 1):
            v = (u - r / T) / h1
            if abs(v) > 1.0:
                continue
            kt = quarter_pi * math.cos(math.pi * v / 2.0)
            s = 0.0
            for j in range(d):
                s += theta[r - 1, j] * Xq[i, j]
            acc += kt * s
        out[i] = acc
    return out


def predict_points(theta, train_X, h1, h2, U, Xq, backend: str = "kernel") -> np.ndarray:
    """m_theta(u_i, x_i) for arrays of rescaled times ``U`` (n,) and points ``Xq`` (n, d)."""
    theta = np.ascontiguousarray(theta, dtype=float)
    train_X = np.ascontiguousarray(train_X, dtype=float)
    T, d = train_X.shape
    theta = theta.reshape(T, d)
    U = np.ascontiguousarray(np.atleast_1d(U), dtype=float)
    Xq = np.ascontiguousarray(np.atleast_2d(Xq), dtype=float)
    if Xq.shape != (U.shape[0], d):
        raise ValueError("query points do not match the training dimension")
    if backend == "kernel":
        return _predict_kernel(theta, train_X, float(h1), float(h2), U, Xq)
    if backend == "tv-linear":
        return _predict_linear(theta, T, float(h1), U, Xq)
    raise ValueError(f"unknown backend {backend!r}")
