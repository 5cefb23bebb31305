"""Cubic Hermite shape functions and Gauss-Legendre rules."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss(n: int):
    """Gauss-Legendre points and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def hermite(t, h):
    """Cubic Hermite basis on an interval of length ``h`` at local
    coordinates ``t`` in [0, 1].

    Returns ``(N, dN, d2N)``, each of shape ``(..., 4, len(t))`` with basis
    order (value at 0, slope at 0, value at 1, slope at 1). Derivatives are
    with respect to the physical coordinate. ``h`` may be an array, which
    adds leading axes.
    """
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)[..., None, None]
    t2, t3 = t * t, t * t * t
    one = np.ones_like(t)
    N = np.stack([1 - 3 * t2 + 2 * t3, t - 2 * t2 + t3, 3 * t2 - 2 * t3, t3 - t2])
    dN = np.stack([-6 * t + 6 * t2, 1 - 4 * t + 3 * t2, 6 * t - 6 * t2, 3 * t2 - 2 * t])
    d2N = np.stack([-6 + 12 * t, -4 + 6 * t, 6 - 12 * t, 6 * t - 2 * one])
    # slope functions carry one power of h; each derivative divides by h
    scale = np.array([1.0, 0.0, 1.0, 0.0])[:, None] + np.array([0.0, 1.0, 0.0, 1.0])[:, None] * h
    return N * scale, dN * scale / h, d2N * scale / (h * h)
