import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsts_sparse.kernels import (KERNEL_BOUND, KERNEL_LIPSCHITZ, BandwidthPolicy, KernelId,
                                 bandwidth, k1, k2, scaled)

GRID = np.linspace(-1.2, 1.2, 100_001)


@given(st.floats(-3, 3))
def test_symmetric(v):
    assert k1(v) == k1(-v)
    assert k2(v) == k2(-v)


@given(st.floats(1.0, 100.0, exclude_min=True))
def test_compact_support(v):
    assert k1(v) == 0.0 and k2(-v) == 0.0


@pytest.mark.parametrize("kid,fn", [(KernelId.K1, k1), (KernelId.K2, k2)])
def test_bounds_and_lipschitz(kid, fn):
    vals = fn(GRID)
    assert vals.min() >= 0.0
    assert vals.max() <= KERNEL_BOUND[kid] + 1e-15
    slope = np.max(np.abs(np.diff(vals)) / np.diff(GRID))
    assert slope <= KERNEL_LIPSCHITZ[kid] + 1e-6


def test_closed_forms():
    assert k1(0.0) == pytest.approx(math.pi / 4)
    assert k2(0.5) == pytest.approx(0.5)
    assert k1(1.0) == pytest.approx(0.0, abs=1e-16)


def test_scaled():
    assert scaled(KernelId.K2, 0.5, 0.25) == pytest.approx(k2(0.5))
    with pytest.raises(ValueError):
        scaled(KernelId.K1, 0.0, 0.1)


def test_bandwidth_rule():
    assert bandwidth(BandwidthPolicy(), 1000) == pytest.approx(0.06)
    with pytest.raises(ValueError):
        BandwidthPolicy(xi=1.0)
