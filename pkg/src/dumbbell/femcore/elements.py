"""Element kernels: Bogner-Fox-Schmit bicubic rectangles and cubic Hermite
intervals.

BFS local DOF order: corners (0,0), (1,0), (1,1), (0,1) of the element,
and at each corner (u, u_x, u_y, u_xy).
"""
from __future__ import annotations

import numpy as np

from ..errors import IncompatibleMesh, NonPositiveWeight, SingularElement
from .forms import ChannelEpsForm, Limit1DForm, Mass, PlateForm, WeightedMass
from .hermite import gauss, hermite

_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
IX = np.array([i for ax, _ in _CORNERS for i in (2 * ax, 2 * ax + 1, 2 * ax, 2 * ax + 1)])
IY = np.array([i for _, ay in _CORNERS for i in (2 * ay, 2 * ay, 2 * ay + 1, 2 * ay + 1)])

QUAD_CONSTANT = 4
QUAD_WEIGHTED = 6
QUAD_1D = 6


def default_order(kind) -> int:
    profile = getattr(kind, "profile", None)
    if profile is None or profile.is_constant:
        return QUAD_CONSTANT
    return QUAD_WEIGHTED


def bfs_basis(hx, hy, nq: int):
    """Derivatives of the 16 BFS functions at the tensor Gauss points.

    Returns a dict keyed by derivative order ``(p, r)`` with arrays of shape
    ``(E, 16, nq * nq)``; quadrature index is ``i * nq + j`` for x-point i and
    y-point j.
    """
    t, _ = gauss(nq)
    X = hermite(t, hx)
    Y = hermite(t, hy)
    E = np.shape(np.atleast_1d(hx))[0]
    out = {}
    for p in range(3):
        for r in range(3 - p):
            Xp = np.broadcast_to(X[p], (E, 4, nq))[:, IX, :]
            Yr = np.broadcast_to(Y[r], (E, 4, nq))[:, IY, :]
            out[p, r] = (Xp[:, :, :, None] * Yr[:, :, None, :]).reshape(E, 16, nq * nq)
    return out


def _quad_points(origin, size, nq):
    t, w = gauss(nq)
    x = origin[:, 0, None] + size[:, 0, None] * t[None, :]
    y = origin[:, 1, None] + size[:, 1, None] * t[None, :]
    X = np.repeat(x, nq, axis=1)
    Y = np.tile(y, (1, nq))
    W = np.outer(w, w).ravel()[None, :] * (size[:, 0] * size[:, 1])[:, None]
    return X, Y, W


def _profile_at(profile, x):
    g, g1, g2 = profile.derivatives(x)
    if np.any(g <= 0.0):
        raise SingularElement("non-positive mapping Jacobian: g <= 0 at a quadrature point")
    return g, g1, g2


def form_terms(origin, size, kind, nq: int | None = None):
    """Quadrature data of ``kind`` on a batch of rectangles.

    Returns ``(terms, W)``: ``terms`` is a list of ``(op, c)`` with ``op`` of
    shape ``(E, 16, nq * nq)`` holding a derivative combination of the basis
    at the quadrature points and ``c`` its coefficient; the form is
    ``sum_terms c * sum_q W (op . x)(op . y)``.
    """
    origin = np.atleast_2d(np.asarray(origin, dtype=float))
    size = np.atleast_2d(np.asarray(size, dtype=float))
    if np.any(size <= 0):
        raise IncompatibleMesh("element sizes must be positive")
    nq = nq or default_order(kind)
    B = bfs_basis(size[:, 0], size[:, 1], nq)
    X, Y, W = _quad_points(origin, size, nq)

    if isinstance(kind, Mass):
        return [(B[0, 0], 1.0)], W
    if isinstance(kind, WeightedMass):
        g = _profile_at(kind.profile, X)[0]
        return [(B[0, 0], 1.0)], W * g

    if isinstance(kind, PlateForm):
        eps = 1.0
        u, ux, uy = B[0, 0], B[1, 0], B[0, 1]
        uxx, uxy, uyy = B[2, 0], B[1, 1], B[0, 2]
    elif isinstance(kind, ChannelEpsForm):
        eps = kind.epsilon
        g, g1, g2 = _profile_at(kind.profile, X)
        a = (g1 / g)[:, None, :]
        eta = Y[:, None, :]
        gi = (1.0 / g)[:, None, :]
        Ux, Uy = B[1, 0], B[0, 1]
        u = B[0, 0]
        ux = Ux - eta * a * Uy
        uy = Uy * gi
        uxx = (B[2, 0] - 2.0 * eta * a * B[1, 1] + (eta * a) ** 2 * B[0, 2]
               + eta * (2.0 * a * a - g2[:, None, :] * gi) * Uy)
        uxy = (B[1, 1] - a * Uy - eta * a * B[0, 2]) * gi
        uyy = B[0, 2] * gi * gi
        W = W * g
    else:
        raise IncompatibleMesh(f"form {type(kind).__name__} is not a 2D form")

    s, t = kind.params.sigma, kind.params.tau
    e2 = 1.0 / eps ** 2
    lap = uxx + e2 * uyy
    terms = [(uxx, 1.0 - s), (uxy, 2.0 * (1.0 - s) * e2), (uyy, (1.0 - s) * e2 * e2),
             (lap, s), (ux, t), (uy, t * e2), (u, 1.0)]
    return [(op, c) for op, c in terms if c != 0.0], W


def element_matrices(origin, size, kind, nq: int | None = None) -> np.ndarray:
    """Element matrices of ``kind`` for a batch of rectangles, ``(E, 16, 16)``."""
    terms, W = form_terms(origin, size, kind, nq)
    K = np.zeros((len(W), 16, 16))
    for op, c in terms:
        K += np.einsum("eiq,ejq,eq->eij", op, op, W * c)
    return K


def element_energies(origin, size, kind, coeffs, nq: int | None = None) -> np.ndarray:
    """Per-element ``x_e^T K_e x_e`` for coefficient blocks ``coeffs`` of shape
    ``(E, 16, m)``, evaluated at the quadrature points. Returns ``(m,)``.

    Derivatives are formed before squaring, so the cancellation that limits
    ``x^T K x`` on fine meshes does not occur.
    """
    terms, W = form_terms(origin, size, kind, nq)
    total = np.zeros(coeffs.shape[2])
    for op, c in terms:
        vals = np.einsum("eiq,eim->eqm", op, coeffs)
        total += c * np.einsum("eq,eqm->m", W, vals * vals)
    return total


def bfs_element_matrices(hx: float, hy: float, kind, coeff_samples=None, origin=(0.0, 0.0),
                         nq: int | None = None) -> np.ndarray:
    """16 x 16 element matrix of ``kind`` on ``[x0, x0 + hx] x [y0, y0 + hy]``.

    ``coeff_samples`` is accepted for interface compatibility; profile data is
    always evaluated analytically at the quadrature points.
    """
    return element_matrices([origin], [[hx, hy]], kind, nq)[0]


def _hermite1d_terms(x0, h, kind, g_samples=None, nq: int = QUAD_1D):
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), x0.shape)
    t, w = gauss(nq)
    N, dN, d2N = hermite(t, h)
    if g_samples is None:
        g = kind.profile.value(x0[:, None] + h[:, None] * t[None, :])
    else:
        g = np.broadcast_to(np.asarray(g_samples, dtype=float), (len(x0), nq))
    if np.any(g <= 0.0):
        raise NonPositiveWeight("g must be positive at every quadrature point")
    W = w[None, :] * h[:, None] * g
    if isinstance(kind, WeightedMass):
        return [(N, 1.0)], W
    if not isinstance(kind, Limit1DForm):
        raise IncompatibleMesh(f"form {type(kind).__name__} is not a 1D form")
    s, tau = kind.params.sigma, kind.params.tau
    terms = [(N, 1.0), (d2N, 1.0 - s * s), (dN, tau)]
    return [(op, c) for op, c in terms if c != 0.0], W


def hermite1d_matrices(x0, h, kind, g_samples=None, nq: int = QUAD_1D) -> np.ndarray:
    """Batch of 4 x 4 cubic Hermite element matrices, ``(E, 4, 4)``."""
    terms, W = _hermite1d_terms(x0, h, kind, g_samples, nq)
    K = np.zeros((len(W), 4, 4))
    for op, c in terms:
        K += c * np.einsum("eiq,ejq,eq->eij", op, op, W)
    return K


def hermite1d_energies(x0, h, kind, coeffs, nq: int = QUAD_1D) -> np.ndarray:
    """1D counterpart of :func:`element_energies`; ``coeffs`` is ``(E, 4, m)``."""
    terms, W = _hermite1d_terms(x0, h, kind, None, nq)
    total = np.zeros(coeffs.shape[2])
    for op, c in terms:
        vals = np.einsum("eiq,eim->eqm", op, coeffs)
        total += c * np.einsum("eq,eqm->m", W, vals * vals)
    return total


def hermite1d_element(h: float, kind, g_samples=None, x0: float = 0.0, nq: int = QUAD_1D) -> np.ndarray:
    """4 x 4 element matrix on ``[x0, x0 + h]``; DOF order (h(x0), h'(x0), h(x1), h'(x1))."""
    if not h > 0:
        raise IncompatibleMesh("element length must be positive")
    return hermite1d_matrices([x0], h, kind, g_samples, nq)[0]
