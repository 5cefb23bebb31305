"""Independent reference computations used by the tests.

Nothing here calls the package's element or solver code: every value is
derived from closed forms, symbolic integration or a different numerical
route (brentq instead of bisection, dense LAPACK instead of Lanczos).
"""
from __future__ import annotations

import functools
import math

import numpy as np
import sympy as sp
from scipy.optimize import brentq

X, Y = sp.symbols("x y", real=True)


def beam_root_brentq(j: int) -> float:
    """j-th positive root of cos k cosh k = 1 by Brent's method."""
    c = (j + 0.5) * math.pi
    return brentq(lambda k: math.cos(k) * math.cosh(k) - 1.0, c - 1.0, c + 1.0, xtol=1e-15, rtol=1e-15)


def beam_theta(j: int, sigma: float = 0.0) -> float:
    return 1.0 + (1.0 - sigma ** 2) * beam_root_brentq(j) ** 4


def hermite_beam_stiffness(h: float) -> np.ndarray:
    """Classical cubic Hermite beam bending matrix, int N_i'' N_j'', DOFs (w0, w0', w1, w1')."""
    return np.array([[12, 6 * h, -12, 6 * h],
                     [6 * h, 4 * h * h, -6 * h, 2 * h * h],
                     [-12, -6 * h, 12, -6 * h],
                     [6 * h, 2 * h * h, -6 * h, 4 * h * h]], dtype=float) / h ** 3


def hermite_beam_mass(h: float) -> np.ndarray:
    """Consistent mass of the cubic Hermite beam, int N_i N_j."""
    return h / 420.0 * np.array([[156, 22 * h, 54, -13 * h],
                                 [22 * h, 4 * h * h, 13 * h, -3 * h * h],
                                 [54, 13 * h, 156, -22 * h],
                                 [-13 * h, -3 * h * h, -22 * h, 4 * h * h]], dtype=float)


def _hermite_1d_sym(t, h):
    return [1 - 3 * t ** 2 + 2 * t ** 3, h * (t - 2 * t ** 2 + t ** 3),
            3 * t ** 2 - 2 * t ** 3, h * (-t ** 2 + t ** 3)]


@functools.lru_cache(maxsize=None)
def bfs_basis_sym(hx: float, hy: float):
    """The 16 BFS shape functions on [0, hx] x [0, hy] as sympy expressions,
    corners (0,0), (1,0), (1,1), (0,1), each with (u, u_x, u_y, u_xy)."""
    hx, hy = sp.nsimplify(hx), sp.nsimplify(hy)
    fx = _hermite_1d_sym(X / hx, hx)
    fy = _hermite_1d_sym(Y / hy, hy)
    out = []
    for ax, ay in ((0, 0), (1, 0), (1, 1), (0, 1)):
        out += [fx[2 * ax] * fy[2 * ay], fx[2 * ax + 1] * fy[2 * ay],
                fx[2 * ax] * fy[2 * ay + 1], fx[2 * ax + 1] * fy[2 * ay + 1]]
    return out


def plate_element_sym(hx: float, hy: float, sigma, tau) -> np.ndarray:
    """Exact plate element matrix by symbolic integration."""
    N = bfs_basis_sym(hx, hy)
    s, t = sp.nsimplify(sigma), sp.nsimplify(tau)
    hxs, hys = sp.nsimplify(hx), sp.nsimplify(hy)
    K = np.zeros((16, 16))
    d = [(sp.diff(n, X, 2), sp.diff(n, X, Y), sp.diff(n, Y, 2), sp.diff(n, X), sp.diff(n, Y), n) for n in N]
    for i in range(16):
        for j in range(i, 16):
            a, b = d[i], d[j]
            integrand = ((1 - s) * (a[0] * b[0] + 2 * a[1] * b[1] + a[2] * b[2])
                         + s * (a[0] + a[2]) * (b[0] + b[2])
                         + t * (a[3] * b[3] + a[4] * b[4]) + a[5] * b[5])
            K[i, j] = K[j, i] = float(_integrate_poly(integrand, hxs, hys))
    return K


def _integrate_poly(expr, hx, hy):
    """Exact integral of a polynomial in x, y over [0, hx] x [0, hy]."""
    total = sp.Integer(0)
    for (a, b), c in sp.Poly(sp.expand(expr), X, Y).terms():
        total += c * hx ** (a + 1) * hy ** (b + 1) / ((a + 1) * (b + 1))
    return total


def mapped_derivatives_sym(N, g_expr, xi, eta):
    """Derivatives of u(x, Y) = N(x, Y / g(x)) with respect to x and Y at
    the reference point (xi, eta), i.e. at Y = g(xi) * eta.

    Returns (u, u_x, u_Y, u_xx, u_xY, u_YY) as floats.
    """
    Ys = sp.Symbol("Y", real=True)
    u = N.subs(Y, Ys / g_expr)
    g0 = g_expr.subs(X, xi)
    at = {X: xi, Ys: g0 * eta}
    ders = [u, sp.diff(u, X), sp.diff(u, Ys), sp.diff(u, X, 2), sp.diff(u, X, Ys), sp.diff(u, Ys, 2)]
    return [float(sp.N(e.subs(at), 30)) for e in ders]


def dense_generalized_eigvals(K: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Eigenvalues of K x = lam M x by scipy's generalized LAPACK driver."""
    from scipy.linalg import eigh
    return eigh(K, M, eigvals_only=True)

