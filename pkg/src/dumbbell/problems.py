"""Discrete eigenproblems on the dumbbell, its pieces and the reference channel.

Every builder returns a :class:`DiscreteProblem`, which bundles mesh, DOF map,
forms and assembled matrices. Solving reports eigenvalues as quadrature
Rayleigh quotients of the computed eigenvectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .eigensolve import DEFAULT_TOL, Spectrum, solve_smallest
from .femcore.assembly import (ALL_BOUNDARY, CHANNEL_ENDS, DofMap, SparseSym,
                               apply_clamped_constraints, assemble, rayleigh_quotients)
from .femcore.forms import ChannelEpsForm, Mass, PlateForm, WeightedMass
from .geometry import DumbbellSpec, MaterialParams, ProfileSpec
from .meshgen import (DEFAULT_ASPECT_CAP, QuadMesh, Region, build_channel_reference_mesh,
                      build_dumbbell_mesh, submesh)


@dataclass(frozen=True)
class Discretization:
    """Mesh controls shared by all solves of one experiment.

    ``channel_rows`` fixes the number of element rows across the dumbbell
    channel (the box grid then grades towards it); ``None`` derives it from
    ``h_target``. ``nx``, ``ny`` and ``x_grading`` describe the reference
    channel mesh, ``n_elems_1d`` the limit problem mesh.
    """

    h_target: float = 0.05
    channel_rows: Optional[int] = 2
    growth: float = 1.3
    junction_grading: Optional[float] = None
    aspect_cap: float = DEFAULT_ASPECT_CAP
    nx: int = 64
    ny: int = 4
    x_grading: Optional[float] = None
    n_elems_1d: int = 256

    def dumbbell_mesh(self, spec: DumbbellSpec, include_channel: bool = True) -> QuadMesh:
        return build_dumbbell_mesh(spec, self.h_target, channel_rows=self.channel_rows,
                                   growth=self.growth, junction_grading=self.junction_grading,
                                   aspect_cap=self.aspect_cap, include_channel=include_channel)


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    mesh: object
    dofmap: DofMap
    form: object
    mass: object
    K: SparseSym
    M: SparseSym
    meta: dict = field(default_factory=dict)

    @property
    def n_dofs(self) -> int:
        return self.K.n

    def solve(self, k: int, tol: float = DEFAULT_TOL, **solver_kw) -> Spectrum:
        k = min(k, self.n_dofs - 1)
        return solve_smallest(
            self.K, self.M, k, tol=tol, meta=dict(self.meta),
            rayleigh=lambda X: rayleigh_quotients(self.mesh, self.dofmap, self.form, self.mass, X),
            **solver_kw)


def _build(mesh, params: MaterialParams, clamp: Optional[str], meta: dict) -> DiscreteProblem:
    dofmap = DofMap.for_mesh(mesh)
    if clamp is not None:
        dofmap = apply_clamped_constraints(mesh, dofmap, clamp)
    form, mass = PlateForm(params), Mass()
    return DiscreteProblem(mesh, dofmap, form, mass, assemble(mesh, dofmap, form),
                           assemble(mesh, dofmap, mass), meta)


def dumbbell_problem(spec: DumbbellSpec, params: MaterialParams,
                     disc: Discretization = Discretization(), dirichlet: bool = False,
                     mesh: Optional[QuadMesh] = None) -> DiscreteProblem:
    """Free (or, with ``dirichlet``, fully clamped) plate on the dumbbell."""
    mesh = mesh if mesh is not None else disc.dumbbell_mesh(spec)
    meta = {"domain": "dumbbell", "epsilon": spec.epsilon, "sigma": params.sigma,
            "tau": params.tau, "dirichlet": dirichlet, "h_target": disc.h_target,
            "channel_rows": disc.channel_rows}
    return _build(mesh, params, ALL_BOUNDARY if dirichlet else None, meta)


def box_problems(mesh: QuadMesh, params: MaterialParams, dirichlet: bool = False):
    """Plate problems on the two boxes cut out of a dumbbell mesh.

    Returns ``[(problem, parent_node), ...]`` for the left and right box;
    ``parent_node`` maps submesh nodes to ``mesh`` nodes. Reusing the
    dumbbell grid makes discretization errors largely cancel when the box
    spectra are compared with the dumbbell spectrum.
    """
    out = []
    for region in (Region.OMEGA_LEFT, Region.OMEGA_RIGHT):
        sub, parent = submesh(mesh, [region])
        meta = {"domain": "box", "region": region.name, "dirichlet": dirichlet,
                "sigma": params.sigma, "tau": params.tau}
        out.append((_build(sub, params, ALL_BOUNDARY if dirichlet else None, meta), parent))
    return out


def strip_problem(mesh: QuadMesh, params: MaterialParams):
    """The physical channel of a dumbbell mesh, clamped at x = 0 and x = 1.

    Returns ``(problem, parent_node)``.
    """
    sub, parent = submesh(mesh, [Region.CHANNEL], clamp_channel_ends=True)
    meta = {"domain": "strip", "sigma": params.sigma, "tau": params.tau}
    return _build(sub, params, CHANNEL_ENDS, meta), parent


def channel_problem(params: MaterialParams, profile: ProfileSpec, epsilon: float,
                    disc: Discretization = Discretization()) -> DiscreteProblem:
    """The channel pulled back to the mapped unit square, clamped at both ends.

    Eigenvalues equal those of the plate problem on the thin channel of
    height ``epsilon * g(x)``; the mass is weighted by ``g``.
    """
    mesh = build_channel_reference_mesh(disc.nx, disc.ny, profile, x_grading=disc.x_grading)
    dofmap = apply_clamped_constraints(mesh, DofMap.for_mesh(mesh), CHANNEL_ENDS)
    form, mass = ChannelEpsForm(params, epsilon, profile), WeightedMass(profile)
    meta = {"domain": "channel", "epsilon": epsilon, "sigma": params.sigma, "tau": params.tau,
            "nx": disc.nx, "ny": disc.ny}
    return DiscreteProblem(mesh, dofmap, form, mass, assemble(mesh, dofmap, form),
                           assemble(mesh, dofmap, mass), meta)


def transfer_nodes(x_parent: np.ndarray, parent_dofmap: DofMap, child_dofmap: DofMap,
                   parent_node: np.ndarray) -> np.ndarray:
    """Restrict free-DOF columns on a parent mesh to a submesh."""
    nodal = parent_dofmap.expand(x_parent).reshape(parent_dofmap.n_nodes, parent_dofmap.dofs_per_node, -1)
    sub = nodal[parent_node].reshape(len(parent_node) * child_dofmap.dofs_per_node, -1)
    out = sub[child_dofmap.free]
    return out[:, 0] if np.ndim(x_parent) == 1 else out


def embed_nodes(x_child: np.ndarray, child_dofmap: DofMap, parent_dofmap: DofMap,
                parent_node: np.ndarray) -> np.ndarray:
    """Scatter free-DOF columns of a submesh into a parent mesh (zero elsewhere)."""
    x_child = np.asarray(x_child)
    cols = x_child.reshape(len(x_child), -1)
    nodal = child_dofmap.expand(cols).reshape(child_dofmap.n_nodes, child_dofmap.dofs_per_node, -1)
    full = np.zeros((parent_dofmap.n_nodes, parent_dofmap.dofs_per_node, cols.shape[1]))
    full[parent_node] = nodal
    out = full.reshape(parent_dofmap.n_dofs, -1)[parent_dofmap.free]
    return out[:, 0] if x_child.ndim == 1 else out
