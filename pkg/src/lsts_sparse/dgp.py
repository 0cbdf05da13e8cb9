"""Simulated locally stationary regression data.

Covariates follow an m-dependent, time-varying moving average

    X_t = m(t/T) + sum_{r=0}^{m} a_r(t/T) * Z_{t-r}

with componentwise sinusoidal ``m`` and ``a_r`` and i.i.d. standard normal
innovations. The response is linear in the covariates with a piecewise-linear
coefficient cycle on two contiguous feature blocks.

Time is 1-based in formulas; arrays are 0-based, so row ``i`` holds ``t = i + 1``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .noise import NoiseSpec, sample_noise

__all__ = [
    "CovariateModelSpec",
    "CoefficientSurface",
    "StationaryCompanion",
    "Dataset",
    "draw_covariate_model",
    "rescale_amplitudes",
    "gen_surface",
    "block_bounds",
    "gen_covariates",
    "gen_dataset",
    "local_stationarity_check",
    "export_csv",
]

RESCALE_GRID = 201
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CovariateModelSpec:
    """Covariate model with its per-replication amplitude and phase draws.

    ``amp``/``psi`` have shape (d,), ``b``/``phi`` have shape (m_order+1, d).
    Use :func:`draw_covariate_model` to build one.
    """

    d: int
    T: int
    m_order: int
    rho: float
    amp: np.ndarray
    psi: np.ndarray
    b: np.ndarray
    phi: np.ndarray

    def mean_fn(self, u):
        """m(u) with shape ``u.shape + (d,)``."""
        u = np.asarray(u, dtype=float)[..., None]
        return self.amp * np.sin(TWO_PI * u + self.psi)

    def filter_fn(self, u):
        """a_r(u) with shape ``u.shape + (m_order+1, d)``."""
        u = np.asarray(u, dtype=float)[..., None, None]
        return self.b * np.sin(TWO_PI * u + self.phi)

    @property
    def lip_mean(self) -> np.ndarray:
        """Componentwise Lipschitz constants of m on [0, 1]."""
        return TWO_PI * np.abs(self.amp)

    @property
    def lip_filter(self) -> np.ndarray:
        return TWO_PI * np.abs(self.b)

    def with_T(self, T: int) -> "CovariateModelSpec":
        return replace(self, T=int(T))


def rescale_amplitudes(b: np.ndarray, phi: np.ndarray, rho: float,
                       n_grid: int = RESCALE_GRID) -> np.ndarray:
    """Shrink ``b[:, j]`` so that max_u sum_r |b_rj sin(2 pi u + phi_rj)| <= rho.

    The max is taken on an ``n_grid``-point grid of [0, 1]. Columns already
    inside the bound are left untouched, which makes the map idempotent.
    """
    u = np.linspace(0.0, 1.0, n_grid)[:, None, None]
    s = np.abs(b * np.sin(TWO_PI * u + phi)).sum(axis=1).max(axis=0)
    factor = np.ones_like(s)
    over = s > rho * (1.0 + 1e-12)
    factor[over] = rho / s[over]
    return b * factor


def draw_covariate_model(d: int, T: int, rng: np.random.Generator, m_order: int = 2,
                         rho: float = 0.95, amp_range=(0.3, 0.8),
                         b_range=(0.0, 0.9)) -> CovariateModelSpec:
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if m_order < 0:
        raise ValueError("m_order must be >= 0")
    amp = rng.uniform(*amp_range, size=d)
    psi = rng.uniform(0.0, TWO_PI, size=d)
    b = rng.uniform(*b_range, size=(m_order + 1, d))
    phi = rng.uniform(0.0, TWO_PI, size=(m_order + 1, d))
    b = rescale_amplitudes(b, phi, rho)
    return CovariateModelSpec(d=d, T=T, m_order=m_order, rho=rho,
                              amp=amp, psi=psi, b=b, phi=phi)


@dataclass(frozen=True)
class CoefficientSurface:
    """True coefficients m*_t(j), shape (T, d), with block ends s1 < s2."""

    values: np.ndarray
    s1: int
    s2: int

    @property
    def pattern(self) -> np.ndarray:
        return self.values[:, 0]


def block_bounds(d: int) -> tuple[int, int]:
    s1 = max(3, int(math.floor(0.2 * d)))
    s2 = max(s1 + 2, int(math.floor(0.4 * d)))
    return s1, s2


def gen_surface(d: int, T: int) -> CoefficientSurface:
    if d < 5:
        raise ValueError(f"d={d} is too small to host both active blocks (need d >= 5)")
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    half = T // 2
    t = np.arange(1, T + 1, dtype=float)
    p = np.where(
        t <= half,
        0.6 - 0.8 / (T / 2.0) * (t - 1),
        -0.2 + 0.8 / (T - half) * (t - half - 1),
    )
    s1, s2 = block_bounds(d)
    values = np.zeros((T, d))
    values[:, :s1] = p[:, None]
    values[:, s1:s2] = 0.7 * p[:, None]
    return CoefficientSurface(values=values, s1=s1, s2=s2)


@dataclass(frozen=True)
class StationaryCompanion:
    """X_t(u) = m(u) + sum_r a_r(u) Z_{t-r}, sharing innovations with X_{t,T}.

    ``Z`` has shape (T + m_order, d); row ``k`` holds ``Z_{k - m_order + 1}``.
    """

    model: CovariateModelSpec
    Z: np.ndarray

    def innovations(self, t: int) -> np.ndarray:
        """(Z_t, Z_{t-1}, ..., Z_{t-m}) stacked, shape (m_order+1, d)."""
        m = self.model.m_order
        k = t + m - 1
        return self.Z[k - np.arange(m + 1)]

    def at(self, u: float, t: int) -> np.ndarray:
        if not 1 <= t <= self.model.T:
            raise IndexError(f"t={t} outside 1..{self.model.T}")
        return self.model.mean_fn(u) + (self.model.filter_fn(u) * self.innovations(t)).sum(axis=0)


def gen_covariates(model: CovariateModelSpec, rng: np.random.Generator):
    """Return ``(X, companion)`` with X of shape (T, d)."""
    T, d, m = model.T, model.d, model.m_order
    Z = rng.standard_normal((T + m, d))
    u = np.arange(1, T + 1) / T
    A = model.filter_fn(u)  # (T, m+1, d)
    X = model.mean_fn(u).copy()
    for r in range(m + 1):
        # Z_{t-r} for t = 1..T sits at rows m - r .. m - r + T - 1
        X += A[:, r, :] * Z[m - r:m - r + T]
    return X, StationaryCompanion(model=model, Z=Z)


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    eps: np.ndarray
    surface: CoefficientSurface
    spec: CovariateModelSpec
    noise: Optional[NoiseSpec]
    companion: Optional[StationaryCompanion] = field(default=None, repr=False)

    @property
    def signal(self) -> np.ndarray:
        return np.einsum("tj,tj->t", self.surface.values, self.X)


def gen_dataset(model: CovariateModelSpec, surface: CoefficientSurface,
                noise: Optional[NoiseSpec], rng: np.random.Generator,
                noise_rng: Optional[np.random.Generator] = None) -> Dataset:
    """Draw covariates and noise and assemble Y_t = sum_j m*_t(j) X_t(j) + eps_t.

    ``noise=None`` means noiseless. Noise is drawn from ``noise_rng`` when
    given, otherwise from ``rng`` after the covariates.
    """
    if surface.values.shape != (model.T, model.d):
        raise ValueError(
            f"surface shape {surface.values.shape} does not match (T, d)=({model.T}, {model.d})")
    X, companion = gen_covariates(model, rng)
    if noise is None:
        eps = np.zeros(model.T)
    else:
        eps = sample_noise(noise, noise_rng if noise_rng is not None else rng, model.T)
    Y = np.einsum("tj,tj->t", surface.values, X) + eps
    return Dataset(X=X, Y=Y, eps=eps, surface=surface, spec=model, noise=noise,
                   companion=companion)


def local_stationarity_check(model: CovariateModelSpec, companion: StationaryCompanion,
                             X: np.ndarray, u: float, t: int, norm_order=2):
    """Both sides of ||X_{t,T} - X_t(u)|| <= (|t/T - u| + 1/T) U_{t,T}(u).

    U uses the analytic Lipschitz constants (2 pi times amplitude) of the
    sinusoidal coefficient functions, combined componentwise before taking the
    norm so the inequality holds for any monotone norm.
    """
    if companion.model is not model:
        raise ValueError("companion was built from a different covariate model")
    if X.shape != (model.T, model.d):
        raise ValueError("X does not match the covariate model")
    T = model.T
    lhs = float(np.linalg.norm(X[t - 1] - companion.at(u, t), ord=norm_order))
    zabs = np.abs(companion.innovations(t))
    envelope = model.lip_mean + (model.lip_filter * zabs).sum(axis=0)
    U = float(np.linalg.norm(envelope, ord=norm_order))
    bound = (abs(t / T - u) + 1.0 / T) * U
    return lhs, bound


def export_csv(ds: Dataset, path) -> Path:
    """Write columns t, X_1..X_d, Y, eps."""
    path = Path(path)
    d = ds.X.shape[1]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"X_{j + 1}" for j in range(d)] + ["Y", "eps"])
        for i in range(ds.X.shape[0]):
            w.writerow([i + 1] + [repr(float(v)) for v in ds.X[i]]
                       + [repr(float(ds.Y[i])), repr(float(ds.eps[i]))])
    return path
