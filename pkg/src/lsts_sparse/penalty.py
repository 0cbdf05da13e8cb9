"""Lasso and weighted total-variation penalties, their proximal maps and the
theory-driven regularization schedules.

The weighted TV penalty on a row x is sum_{j>=2} w_j |x_j - x_{j-1}|; the
first weight is carried for indexing convenience and is always zero.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numba
import numpy as np

__all__ = [
    "Lasso",
    "WeightedTV",
    "PenaltySpec",
    "Regime",
    "LambdaScheduleInput",
    "value",
    "prox",
    "prox_lasso",
    "prox_wtv_row",
    "prox_wtv_rows",
    "wtv_shrinkage_heuristic",
    "lambda_schedule",
    "base_rate",
]


@dataclass(frozen=True)
class Lasso:
    lam: float
    kind = "lasso"

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class WeightedTV:
    weights: np.ndarray
    kind = "wtv"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-D array")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if w[0] != 0:
            raise ValueError("the first weight must be 0 (first coordinate is unpenalized)")
        object.__setattr__(self, "weights", w)


PenaltySpec = Union[Lasso, WeightedTV]


def value(spec: PenaltySpec, theta) -> float:
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if isinstance(spec, Lasso):
        return float(spec.lam * np.abs(theta).sum())
    if theta.shape[1] != spec.weights.size:
        raise ValueError(f"theta rows have {theta.shape[1]} entries, weights {spec.weights.size}")
    return float((np.abs(np.diff(theta, axis=1)) * spec.weights[1:]).sum())


def prox_lasso(v, tau: float):
    """Soft-thresholding; entries with |v_i| <= tau map to exactly 0."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


@numba.njit(cache=True)
def _taut_string(v, lam, out):
    """Exact argmin_x 0.5||x - v||^2 + sum_k lam[k] |x[k+1] - x[k]|.

    ``lam`` has length n-1. Works on the cumulative sum r of v: the solution's
    cumulative sum is the shortest path from (0, 0) to (n, r[n]) inside the
    tube |F_k - r_k| <= lam[k-1]. The path is traced knot by knot, keeping the
    cone of feasible slopes from the last knot.
    """
    n = v.shape[0]
    if n == 1:
        out[0] = v[0]
        return
    r = np.empty(n + 1)
    r[0] = 0.0
    for k in range(n):
        r[k + 1] = r[k] + v[k]
    lo = np.empty(n + 1)
    hi = np.empty(n + 1)
    lo[0] = 0.0
    hi[0] = 0.0
    for k in range(1, n):
        lo[k] = r[k] - lam[k - 1]
        hi[k] = r[k] + lam[k - 1]
    lo[n] = r[n]
    hi[n] = r[n]

    i0 = 0
    f0 = 0.0
    while i0 < n:
        umin = np.inf
        lmax = -np.inf
        ku = i0 + 1
        kl = i0 + 1
        k = i0 + 1
        knot = -1
        slope = 0.0
        fnext = 0.0
        while k <= n:
            su = (hi[k] - f0) / (k - i0)
            sl = (lo[k] - f0) / (k - i0)
            if sl > umin:
                # lower wall crosses the upper cone edge: bend down at ku
                knot = ku
                slope = umin
                fnext = hi[ku]
                break
            if su < lmax:
                knot = kl
                slope = lmax
                fnext = lo[kl]
                break
            if su <= umin:
                umin = su
                ku = k
            if sl >= lmax:
                lmax = sl
                kl = k
            k += 1
        if knot < 0:
            # reached the end inside the cone; the endpoint is pinned
            knot = n
            slope = (r[n] - f0) / (n - i0)
            fnext = r[n]
        for q in range(i0, knot):
            out[q] = slope
        i0 = knot
        f0 = fnext


@numba.njit(cache=True)
def _prox_rows(V, lam, out):
    for i in range(V.shape[0]):
        _taut_string(V[i], lam, out[i])


def prox_wtv_row(v, w, step: float):
    """Exact prox of ``step * sum_{j>=2} w_j |x_j - x_{j-1}|`` at ``v``."""
    v = np.ascontiguousarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.shape != v.shape:
        raise ValueError("weights and v must have the same length")
    if np.any(w < 0) or step < 0:
        raise ValueError("weights and step must be non-negative")
    out = np.empty_like(v)
    _taut_string(v, np.ascontiguousarray(step * w[1:]), out)
    return out


def prox_wtv_rows(V, w, step: float):
    """Row-wise exact weighted-TV prox of a (T, d) array."""
    V = np.ascontiguousarray(V, dtype=float)
    out = np.empty_like(V)
    _prox_rows(V, np.ascontiguousarray(step * np.asarray(w, dtype=float)[1:]), out)
    return out


def wtv_shrinkage_heuristic(v, w, step: float):
    """One pass of difference shrinkage, rebuilt from the first entry.

    Soft-thresholds each consecutive difference by ``step * w_j`` and
    re-accumulates. Cheap, but not the prox; kept for comparison.
    """
    v = np.asarray(v, dtype=float)
    diffs = np.diff(v, axis=-1)
    shrunk = np.sign(diffs) * np.maximum(np.abs(diffs) - step * np.asarray(w)[1:], 0.0)
    first = v[..., :1]
    return np.concatenate([first, first + np.cumsum(shrunk, axis=-1)], axis=-1)


def prox(spec: PenaltySpec, V, step: float, exact: bool = True):
    """prox_{step * Omega}(V) for a (T, d) array."""
    if isinstance(spec, Lasso):
        return prox_lasso(V, step * spec.lam)
    if exact:
        return prox_wtv_rows(V, spec.weights, step)
    return wtv_shrinkage_heuristic(V, spec.weights, step)


class Regime(str, enum.Enum):
    SUB_WEIBULL = "subweibull"
    REGULARLY_VARYING = "regvarying"


@dataclass(frozen=True)
class LambdaScheduleInput:
    regime: Regime
    penalty_kind: str  # "lasso" or "wtv"
    d: int
    T: int
    xi: float = 1.0 / 3.0
    c: float = 2.0
    vartheta: Optional[float] = None
    c_kl: float = 1.0
    eta1: Optional[float] = None
    eta2: Optional[float] = None


def _check_schedule(inp: LambdaScheduleInput):
    if inp.penalty_kind not in ("lasso", "wtv"):
        raise ValueError(f"unknown penalty kind {inp.penalty_kind!r}")
    if not inp.c > 1:
        raise ValueError(f"c must be > 1, got {inp.c}")
    if inp.d < 1 or inp.T < 1:
        raise ValueError("d and T must be positive")
    regime = Regime(inp.regime)
    if regime is Regime.SUB_WEIBULL:
        if not 0 < inp.xi < 0.5:
            raise ValueError(f"sub-Weibull schedule needs 0 < xi < 1/2, got xi={inp.xi}")
        return
    if inp.vartheta is None:
        raise ValueError("regularly varying schedule needs vartheta")
    if not 0 < inp.xi < inp.vartheta:
        raise ValueError(
            f"regularly varying schedule needs 0 < xi < vartheta, got xi={inp.xi}, "
            f"vartheta={inp.vartheta}")
    if inp.eta1 is not None and inp.eta2 is not None:
        e1, e2 = inp.eta1, inp.eta2
        upper = ((e1 - 1) * (e2 - 1) - 2 * e1) / (1 + (2 * e1 - 1) * e2)
        if not inp.vartheta < upper:
            raise ValueError(
                f"vartheta={inp.vartheta} violates vartheta < ((eta1-1)(eta2-1)-2 eta1)"
                f"/(1+(2 eta1-1) eta2) = {upper:.6g}")


def base_rate(inp: LambdaScheduleInput) -> float:
    """The scalar Lasso level; the WTV weights are multiples of it."""
    _check_schedule(inp)
    T, d = float(inp.T), float(inp.d)
    if Regime(inp.regime) is Regime.SUB_WEIBULL:
        return math.sqrt((inp.c * math.log(d) + math.log(T)) / T ** (1.0 - 2.0 * inp.xi))
    return 2.0 * inp.c_kl * (2.0 * T + 1.0) / T ** (1.0 + inp.vartheta - inp.xi)


def lambda_schedule(inp: LambdaScheduleInput) -> PenaltySpec:
    lam = base_rate(inp)
    if inp.penalty_kind == "lasso":
        return Lasso(lam)
    j = np.arange(1, inp.d + 1)
    weights = (inp.d - j + 1) * lam
    weights[0] = 0.0
    return WeightedTV(weights)
