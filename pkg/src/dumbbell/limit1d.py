"""The one-dimensional clamped limit problem and the clamped-beam oracle.

The weak problem is: find h in H^2_0(0, 1) and theta with

    (1 - s^2) int h'' psi'' g + t int h' psi' g + int h psi g = theta int h psi g

for all psi, where s is the Poisson-type coefficient, t the tension and g
the channel profile. With g constant and t = 0 the eigenvalues are
``1 + (1 - s^2) k_j^4`` with ``cos k_j cosh k_j = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters
from .eigensolve import DEFAULT_TOL, Spectrum, solve_smallest
from .femcore.assembly import DofMap, apply_clamped_constraints, assemble, rayleigh_quotients
from .femcore.forms import Limit1DForm, WeightedMass
from .femcore.transfer import HermiteFunction1D
from .geometry import MaterialParams, ProfileSpec
from .meshgen import IntervalMesh, build_interval_mesh

MIN_ELEMS = 4
BISECTION_TOL = 1e-12
RATIO_MODES = 5


@dataclass(frozen=True)
class LimitProblem:
    profile: ProfileSpec
    params: MaterialParams
    n_elems: int = 256

    def __post_init__(self):
        if int(self.n_elems) != self.n_elems or self.n_elems < MIN_ELEMS:
            raise InvalidParameters(f"n_elems must be an integer >= {MIN_ELEMS}, got {self.n_elems}")

    def mesh(self) -> IntervalMesh:
        return build_interval_mesh(int(self.n_elems))


def _fix_interior_sign(X: np.ndarray) -> np.ndarray:
    # value DOFs sit at even positions of the reduced vector (both DOFs of
    # each end are eliminated, so interior nodes keep the (h, h') pairing)
    X = np.array(X, copy=True)
    vals = X[0::2]
    for j in range(X.shape[1]):
        nz = np.flatnonzero(np.abs(vals[:, j]) > 1e-12 * np.abs(vals[:, j]).max())
        if len(nz) and vals[nz[0], j] < 0:
            X[:, j] *= -1.0
    return X


def assemble_limit(problem: LimitProblem, mesh: IntervalMesh | None = None):
    """Reduced stiffness and g-weighted mass of the clamped limit problem."""
    mesh = mesh if mesh is not None else problem.mesh()
    dofmap = apply_clamped_constraints(mesh, DofMap.for_mesh(mesh))
    K = assemble(mesh, dofmap, Limit1DForm(problem.params, problem.profile))
    M = assemble(mesh, dofmap, WeightedMass(problem.profile))
    return mesh, dofmap, K, M


def solve_limit(problem: LimitProblem, k: int, tol: float = DEFAULT_TOL,
                mesh: IntervalMesh | None = None, **solver_kw) -> Spectrum:
    """The ``k`` smallest eigenpairs of the clamped weighted 1D problem.

    Eigenvectors are normalized in the g-weighted mass and signed so the
    first non-negligible interior value is positive. ``mesh`` replaces the
    uniform mesh of ``problem``, e.g. to match the stations of a 2D grid.
    """
    mesh, dofmap, K, M = assemble_limit(problem, mesh)
    meta = {"domain": "limit1d", "sigma": problem.params.sigma, "tau": problem.params.tau,
            "profile": problem.profile.to_dict(), "n_elems": mesh.n_elems}
    form, mass = Limit1DForm(problem.params, problem.profile), WeightedMass(problem.profile)
    spec = solve_smallest(K, M, k, tol=tol, meta=meta,
                          rayleigh=lambda X: rayleigh_quotients(mesh, dofmap, form, mass, X),
                          **solver_kw)
    spec.meta.update(mesh=mesh, dofmap=dofmap)
    return Spectrum(spec.eigenvalues, _fix_interior_sign(spec.eigenvectors), spec.meta)


def limit_functions(spectrum: Spectrum):
    """Eigenvectors of :func:`solve_limit` as piecewise Hermite functions."""
    mesh, dofmap = spectrum.meta["mesh"], spectrum.meta["dofmap"]
    return [HermiteFunction1D.from_dofs(mesh.nodes, dofmap.expand(spectrum.eigenvectors[:, j]))
            for j in range(len(spectrum))]


def beam_roots(n: int) -> np.ndarray:
    """First ``n`` positive roots of ``cos k cosh k = 1``.

    Bisection on ``cos k - 1 / cosh k`` (same roots, no overflow) in the
    brackets ``((j + 1/2) pi - 1, (j + 1/2) pi + 1)``, j = 1..n.
    """
    if n < 1:
        raise InvalidParameters("need n >= 1")

    def f(k):
        return math.cos(k) - 1.0 / math.cosh(k)

    roots = []
    for j in range(1, n + 1):
        a, b = (j + 0.5) * math.pi - 1.0, (j + 0.5) * math.pi + 1.0
        fa = f(a)
        while b - a > BISECTION_TOL:
            c = 0.5 * (a + b)
            fc = f(c)
            if fc == 0.0:
                a = b = c
                break
            if (fa < 0) == (fc < 0):
                a, fa = c, fc
            else:
                b = c
        roots.append(0.5 * (a + b))
    return np.array(roots)


def beam_eigenvalues(n: int, sigma: float = 0.0) -> np.ndarray:
    """Closed-form limit eigenvalues ``1 + (1 - sigma^2) k_j^4`` for g constant, no tension."""
    return 1.0 + (1.0 - sigma * sigma) * beam_roots(n) ** 4


def sigma_distortion_ratio(sigma: float, tau: float, profile: ProfileSpec,
                           n_elems: int = 256, modes: int = RATIO_MODES) -> np.ndarray:
    """``(theta_j(sigma) - 1) / (theta_j(0) - 1)`` for the first ``modes`` eigenvalues."""
    bent = solve_limit(LimitProblem(profile, MaterialParams(sigma, tau), n_elems), modes)
    flat = solve_limit(LimitProblem(profile, MaterialParams(0.0, tau), n_elems), modes)
    return (bent.eigenvalues - 1.0) / (flat.eigenvalues - 1.0)
