"""Tail bounds for kernel-weighted sums of heavy-tailed noise, and a Monte
Carlo estimator of the same tail probability.

The statistic is

    S = (1/T) |sum_t K1((t - r)/(T h)) K2((X_t^j - X_r^j)/h) eps_t|

and each evaluator returns the raw right-hand side of a probability bound on
P[S >= gamma]. Use :func:`clip` for the [0, 1] version. Constants C1, C2 and
C_{K,L} are not determined by theory and enter as user inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .dgp import draw_covariate_model, gen_covariates
from .kernels import KERNEL_BOUND, KernelId, k1, k2
from .noise import NoiseSpec, ParetoSpec, SubWeibullSpec, sample_noise, split

__all__ = ["BoundParams", "BoundRangeError", "bound_subweibull", "bound_regvarying",
           "bound_pareto", "clip", "mc_tail", "MCResult", "DEFAULT_CK",
           "subweibull_terms", "regvarying_terms", "pareto_terms", "bound_grid",
           "BOUND_CSV_COLUMNS", "kernel_weighted_stat"]

DEFAULT_CK = KERNEL_BOUND[KernelId.K1] * KERNEL_BOUND[KernelId.K2]


class BoundRangeError(ValueError):
    """Parameters fall outside the range in which a bound is stated."""


@dataclass(frozen=True)
class BoundParams:
    T: int
    h: float
    gamma: float
    phi: float = 1.0
    eta1: float = 2.0
    eta2: float = 2.0
    c_eps: float = 1.0
    c_k: float = DEFAULT_CK
    c_kl: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    d1: Optional[float] = None
    vartheta: Optional[float] = None
    u: float = 1.0
    slowly_varying: Optional[Callable[[float], float]] = None

    def with_gamma(self, gamma: float) -> "BoundParams":
        return replace(self, gamma=gamma)


def clip(value: float) -> float:
    return min(1.0, max(0.0, value))


def _exp(x):
    # exp of a possibly huge negative argument, without overflow warnings
    return math.exp(x) if x > -745.0 else 0.0


def _subweibull_checks(p: BoundParams) -> float:
    if not p.T > 4:
        raise BoundRangeError(f"need T > 4, got T={p.T}")
    eta = 1.0 / (1.0 / p.eta1 + 1.0 / p.eta2)
    if not eta < 1:
        raise BoundRangeError(f"need eta = (1/eta1 + 1/eta2)^-1 < 1, got {eta:.6g}")
    floor = 2.0 * p.c_k * math.sqrt(math.log(p.T) / p.T)
    if not p.gamma > floor:
        raise BoundRangeError(f"need gamma > 2 C_K sqrt(log T / T) = {floor:.6g}, got {p.gamma}")
    return eta


def subweibull_terms(p: BoundParams) -> list[float]:
    eta = _subweibull_checks(p)
    T, h, g = float(p.T), p.h, p.gamma
    a = 4.0 * p.c_k * p.c_eps
    b = 4.0 * p.c_kl * (2.0 * T + 1.0) * p.c_eps
    return [
        _exp(-((T * math.log(T) / p.c_eps) ** p.eta2)),
        T * _exp(-((g * T) ** eta) / (a ** eta * p.c1)),
        _exp(-(g ** 2) * T / (a ** 2 * p.c2)),
        T * _exp(-((g * T ** 2 * h) ** eta) / (b ** eta * p.c1)),
        _exp(-((g * h) ** 2) * T ** 3 / (b ** 2 * p.c2)),
    ]


def bound_subweibull(p: BoundParams) -> float:
    """Raw five-term bound for locally stationary sub-Weibull noise."""
    return float(sum(subweibull_terms(p)))


def _rv_checks(p: BoundParams):
    if p.vartheta is None or p.d1 is None:
        raise BoundRangeError("regularly varying bounds need vartheta and d1")
    e1, e2, th = p.eta1, p.eta2, p.vartheta
    if not e1 > 1:
        raise BoundRangeError(f"need eta1 > 1, got {e1}")
    if not p.phi > 0:
        raise BoundRangeError(f"need phi > 0, got {p.phi}")
    upper = (e1 - 1) * (e2 - 1) / (1 + (2 * e1 - 1) * e2)
    if not 0 < th < upper:
        raise BoundRangeError(
            f"need 0 < vartheta < (eta1-1)(eta2-1)/(1+(2 eta1-1) eta2) = {upper:.6g}, got {th}")
    lo = th / ((1 - th) * (e2 - 1)) + 1 / e1
    hi = (1 - 2 * th) / (2 * (1 - th)) + 1 / (2 * e1)
    if not lo < p.d1 < hi:
        raise BoundRangeError(f"need {lo:.6g} < d1 < {hi:.6g}, got d1={p.d1}")
    floor = 2.0 * p.c_kl * (2 * p.T + 1) / (p.T ** (1 + th) * p.h)
    if not p.gamma > floor:
        raise BoundRangeError(
            f"need gamma > 2 C_KL (2T+1) / (T^(1+vartheta) h) = {floor:.6g}, got {p.gamma}")


def regvarying_terms(p: BoundParams) -> list[float]:
    _rv_checks(p)
    L = p.slowly_varying
    if L is None:
        raise BoundRangeError("regularly varying bound needs a slowly varying function")
    T, h, g = float(p.T), p.h, p.gamma
    e1, e2, d1 = p.eta1, p.eta2, p.d1
    a = d1 - 1 / e1
    e = a * (1 - e2) - 1
    q = 2 * d1 - 1 / e1
    ck4 = 4 * p.c_k
    B = 4 * p.c_kl * (2 * T + 1)
    TlogT = T * math.log(T)
    return [
        TlogT ** (-e2) * L(TlogT),
        12 * T ** (a * (1 - e2)) * g ** e / (2 ** (1 - e2) * ck4 ** e)
        * L((g * T / ck4) ** a / 2),
        24 * p.c_k * _exp(-p.phi * g * T / ck4) / g,
        2 * _exp(-1.0 / (9 * T ** (q - 1) * (g / ck4) ** (q - 2))),
        12 * T ** (2 * a * (1 - e2) - 1) * (g * h) ** e / (2 ** (1 - e2) * B ** e)
        * L((g * T ** 2 * h) ** a / (2 * B ** a)),
        24 * p.c_kl * (2 * T + 1) * _exp(-p.phi * g * T ** 2 * h / B) / (g * T * h),
        2 * _exp(-(B ** (q - 2)) / (9 * T ** (2 * q - 3) * (g * h) ** (q - 2))),
    ]


def bound_regvarying(p: BoundParams) -> float:
    """Raw seven-term bound for locally stationary regularly varying noise.

    The middle terms are the stationary sum bound applied at levels
    gamma/(4 C_K) and gamma T h / (4 C_KL (2T+1)).
    """
    return float(sum(regvarying_terms(p)))


def pareto_terms(p: BoundParams) -> list[float]:
    if p.eta1 != 4 or p.eta2 != 4:
        raise BoundRangeError("the Pareto bound is stated for eta1 = eta2 = 4")
    if p.vartheta is None or not 0 < p.vartheta < 9 / 29:
        raise BoundRangeError(f"need 0 < vartheta < 9/29, got {p.vartheta}")
    _rv_checks(p)
    T, h, g, d1, u4 = float(p.T), p.h, p.gamma, p.d1, p.u ** 4
    ck4 = 4 * p.c_k
    B = 4 * p.c_kl * (2 * T + 1)
    return [
        (T * math.log(T)) ** (-4) * u4,
        96 * ck4 ** (3 * d1 + 0.25) / (T ** (3 * d1 - 0.75) * g ** (3 * d1 + 0.25)) * u4,
        24 * p.c_k * _exp(-p.phi * g * T / ck4) / g,
        2 * _exp(-(T ** (1.25 - 2 * d1)) * (g / ck4) ** (2.25 - 2 * d1) / 9),
        96 * B ** (3 * d1 + 0.25) / (T ** (6 * d1 - 0.5) * (g * h) ** (3 * d1 + 0.25)) * u4,
        24 * p.c_kl * (2 * T + 1) * _exp(-p.phi * g * T ** 2 * h / B) / (g * T * h),
        2 * _exp(-(T ** (3.5 - 4 * d1)) * (g * h) ** (2.25 - 2 * d1) / (9 * B ** (2.25 - 2 * d1))),
    ]


def bound_pareto(p: BoundParams) -> float:
    """Raw seven-term bound for Pareto noise with tail index 4 and L = u^4."""
    return float(sum(pareto_terms(p)))


@dataclass(frozen=True)
class MCResult:
    frequency: float
    stderr: float
    n_reps: int


def kernel_weighted_stat(X_j, eps, r_index: int, h: float) -> float:
    """(1/T)|sum_t K1((t-r)/(T h)) K2((X_t^j - X_r^j)/h) eps_t| with 1-based ``r_index``."""
    T = X_j.shape[0]
    t = np.arange(1, T + 1)
    w = k1((t - r_index) / (T * h)) * k2((X_j - X_j[r_index - 1]) / h)
    return abs(float(w @ eps)) / T


def mc_tail(T: int, h: float, r_index: int, j_index: int, noise: NoiseSpec, gamma: float,
            n_reps: int, rng: np.random.Generator, d: int = 5, m_order: int = 2,
            rho: float = 0.95, noise_cap: Optional[float] = None) -> MCResult:
    """Empirical P[S >= gamma] over ``n_reps`` independent dataset draws.

    ``r_index`` and ``j_index`` are 1-based. ``noise_cap`` clips the noise to
    [-cap, cap], which bounds S by C_K * cap.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    if not (1 <= r_index <= T and 1 <= j_index <= d):
        raise ValueError("r_index/j_index out of range")
    hits = 0
    for _ in range(n_reps):
        model = draw_covariate_model(d, T, rng, m_order=m_order, rho=rho)
        X, _ = gen_covariates(model, rng)
        eps = sample_noise(noise, rng, T)
        if noise_cap is not None:
            eps = np.clip(eps, -noise_cap, noise_cap)
        if kernel_weighted_stat(X[:, j_index - 1], eps, r_index, h) >= gamma:
            hits += 1
    freq = hits / n_reps
    return MCResult(freq, math.sqrt(freq * (1 - freq) / n_reps), n_reps)


BOUND_CSV_COLUMNS = ["family", "T", "h", "gamma", "eta1", "eta2", "phi", "c_k", "c_kl",
                     "d1", "vartheta", "raw_bound", "clipped_bound", "mc_frequency",
                     "mc_stderr"]


def bound_grid(family: str, params: BoundParams, gammas, n_reps: int = 0, seed: int = 0,
               r_index: Optional[int] = None, j_index: int = 1, d: int = 5):
    """Evaluate a bound over ``gammas`` and, when ``n_reps > 0``, the matching
    Monte Carlo frequency. Yields dicts keyed by :data:`BOUND_CSV_COLUMNS`.

    The noise for the Monte Carlo side is sub-Weibull(eta2, c_eps) for
    ``family="subweibull"`` and Pareto(4, u) for ``family="pareto"``.
    """
    if family == "subweibull":
        evaluate, noise = bound_subweibull, SubWeibullSpec(params.eta2, params.c_eps)
    elif family == "pareto":
        evaluate, noise = bound_pareto, ParetoSpec(4.0, params.u)
    else:
        raise ValueError(f"unknown family {family!r}")
    r = r_index if r_index is not None else (params.T + 1) // 2
    for i, g in enumerate(gammas):
        p = params.with_gamma(float(g))
        raw = evaluate(p)
        freq = se = float("nan")
        if n_reps > 0:
            mc = mc_tail(p.T, p.h, r, j_index, noise, p.gamma, n_reps, split(seed, i), d=d)
            freq, se = mc.frequency, mc.stderr
        yield {"family": family, "T": p.T, "h": p.h, "gamma": p.gamma, "eta1": p.eta1,
               "eta2": p.eta2, "phi": p.phi, "c_k": p.c_k, "c_kl": p.c_kl, "d1": p.d1,
               "vartheta": p.vartheta, "raw_bound": raw, "clipped_bound": clip(raw),
               "mc_frequency": freq, "mc_stderr": se}
