"""Compactly supported trigonometric kernels and the bandwidth rule.

Support is closed, ``|v| <= 1``; both kernels vanish at the boundary so the
choice of ``<`` vs ``<=`` does not change any value.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["KernelId", "BandwidthPolicy", "k1", "k2", "scaled", "bandwidth",
           "KERNEL_BOUND", "KERNEL_LIPSCHITZ"]


class KernelId(str, enum.Enum):
    K1 = "K1"
    K2 = "K2"


def _ret(out):
    return float(out) if np.ndim(out) == 0 else out


def k1(v):
    """(pi/4) cos(pi v / 2) on [-1, 1], zero elsewhere."""
    v = np.asarray(v, dtype=float)
    return _ret(np.where(np.abs(v) <= 1.0, (math.pi / 4) * np.cos(math.pi * v / 2), 0.0))


def k2(v):
    """(1 + cos(pi v)) / 2 on [-1, 1], zero elsewhere."""
    v = np.asarray(v, dtype=float)
    return _ret(np.where(np.abs(v) <= 1.0, 0.5 * (1.0 + np.cos(math.pi * v)), 0.0))


_BASE = {KernelId.K1: k1, KernelId.K2: k2}

# sup |K| and Lipschitz constants of the base kernels
KERNEL_BOUND = {KernelId.K1: math.pi / 4, KernelId.K2: 1.0}
KERNEL_LIPSCHITZ = {KernelId.K1: math.pi ** 2 / 8, KernelId.K2: math.pi / 2}


def scaled(kernel: KernelId, h: float, v):
    """K_h(v) = K(v / h)."""
    if not h > 0:
        raise ValueError(f"bandwidth must be > 0, got {h}")
    return _BASE[KernelId(kernel)](np.asarray(v, dtype=float) / h)


@dataclass(frozen=True)
class BandwidthPolicy:
    """h = c_band * T ** (-xi)."""

    c_band: float = 0.6
    xi: float = 1.0 / 3.0

    def __post_init__(self):
        if not self.c_band > 0:
            raise ValueError(f"c_band must be > 0, got {self.c_band}")
        if not 0 < self.xi < 1:
            raise ValueError(f"xi must lie in (0, 1), got {self.xi}")


def bandwidth(policy: BandwidthPolicy, T: int) -> float:
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    return policy.c_band * float(T) ** (-policy.xi)
