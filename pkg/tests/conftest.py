"""Shared test helpers.

`shape_param_oracle` is an independent reference for the cable scale
constant: pure bisection on f(a) = a sinh(s/a) - l/2, no code shared
with the package solver. Expected values frozen in the tests were
produced by this oracle.
"""

import math

import numpy as np
import pytest

from catsim.geom3 import rot_from_rotvec


def shape_param_oracle(s, length, tol=1e-14):
    # f is decreasing in a: a -> 0 gives +inf, a -> inf gives s - l/2 < 0.
    lo, hi = 1e-9, 1.0
    while hi * math.sinh(s / hi) - 0.5 * length > 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.sinh(s / mid) - 0.5 * length > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def random_rotation(rng, max_angle=math.pi):
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    return rot_from_rotvec(axis * rng.uniform(0.0, max_angle))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
