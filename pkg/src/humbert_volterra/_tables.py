"""Gauss-Jacobi rules and cached kernel row tables on [0, 1].

Every operator here is evaluated after the substitution ``t = x r``.  The
first kernel argument ``-(x - t)^2 / (4 x t) = -(1 - r)^2 / (4 r)`` then
depends on ``r`` only, so for a fixed rule the Gauss rows of each kernel are
computed once and reused for every target point.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .special import RowExpansion


@lru_cache(maxsize=64)
def jacobi_rule(n, left, right):
    """Nodes and weights for ``int_0^1 r^left (1 - r)^right f(r) dr``."""
    # scipy divides 0/0 in an unused branch when left + right = -1
    with np.errstate(invalid="ignore", divide="ignore"):
        x, w = roots_jacobi(int(n), float(right), float(left))
    r = 0.5 * (1.0 + x)
    w = w * 0.5 ** (1.0 + left + right)
    r.setflags(write=False)
    w.setflags(write=False)
    return r, w


def scaled_u(r):
    """First kernel argument on the scaled interval."""
    return -((1.0 - r) ** 2) / (4.0 * r)


def y_bucket(y):
    """Round a bound on |y| up to a power of two so tables can be shared."""
    y = abs(float(y))
    if y == 0.0:
        return 0.0
    return 2.0 ** math.ceil(math.log2(y))


@lru_cache(maxsize=256)
def _expansion(b, c, e, num, den, n, left, right, y_bound, ctrl):
    r, _ = jacobi_rule(n, left, right)
    return RowExpansion(b, c, e, scaled_u(r), y_bound, num=num, den=den, ctrl=ctrl)


def expansion(b, c, e, rule, y_bound, ctrl, num=None, den=None):
    """Cached :class:`RowExpansion` at the nodes of ``rule = (n, left, right)``."""
    n, left, right = rule
    return _expansion(
        float(b), float(c), float(e),
        None if num is None else float(num),
        None if den is None else float(den),
        int(n), float(left), float(right), y_bucket(y_bound), ctrl,
    )
