"""Global assembly over structured meshes with constraint elimination."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.io
import scipy.sparse as sp

from ..errors import IncompatibleMesh, NoTaggedNodes
from ..meshgen import IntervalMesh, NodeTag
from .elements import element_energies, element_matrices, hermite1d_energies, hermite1d_matrices
from .forms import ChannelEpsForm, Limit1DForm, Mass, PlateForm, WeightedMass

_CHUNK = 2048

CHANNEL_ENDS = "channel_ends"
ALL_BOUNDARY = "all_boundary"


@dataclass(frozen=True, eq=False)
class DofMap:
    """Node-major DOF numbering with a mask of constrained DOFs.

    2D: (u, u_x, u_y, u_xy) per node. 1D: (u, u') per node.
    """

    n_nodes: int
    dofs_per_node: int
    constrained: np.ndarray

    @classmethod
    def for_mesh(cls, mesh) -> "DofMap":
        if isinstance(mesh, IntervalMesh):
            n, d = len(mesh.nodes), 2
        else:
            n, d = mesh.n_nodes, 4
        return cls(n, d, np.zeros(n * d, dtype=bool))

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.dofs_per_node

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.constrained)

    @property
    def n_free(self) -> int:
        return int(np.count_nonzero(~self.constrained))

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Scatter a free-DOF vector (or columns) into all DOFs."""
        x = np.asarray(x)
        out = np.zeros((self.n_dofs,) + x.shape[1:], dtype=x.dtype)
        out[self.free] = x
        return out

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[self.free]

    def node_values(self, x: np.ndarray) -> np.ndarray:
        """Free-DOF vector reshaped to ``(n_nodes, dofs_per_node)``."""
        return self.expand(x).reshape(self.n_nodes, self.dofs_per_node)


@dataclass(frozen=True, eq=False)
class SparseSym:
    """Symmetric matrix stored as its upper triangle in CSR form."""

    upper: sp.csr_matrix
    symmetric: bool = True
    _full: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.upper.shape[0]

    @property
    def full(self) -> sp.csr_matrix:
        if not self._full:
            U = self.upper
            self._full.append((U + U.T - sp.diags(U.diagonal())).tocsr())
        return self._full[0]

    def __matmul__(self, x):
        return self.full @ x

    def quad(self, x, y=None) -> float:
        return float(np.dot(x, self.full @ (x if y is None else y)))

    def toarray(self) -> np.ndarray:
        return self.full.toarray()

    def dump_matrix_market(self, path) -> None:
        scipy.io.mmwrite(str(path), self.full.tocoo(), symmetry="symmetric")

    @classmethod
    def from_matrix(cls, A) -> "SparseSym":
        return cls(sp.triu(sp.csr_matrix(A)).tocsr())


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """Free-DOF vector together with its mesh and DOF map."""

    values: np.ndarray
    mesh: object
    dofmap: DofMap
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != self.dofmap.n_free:
            raise IncompatibleMesh("field length does not match the free DOF count")

    def node_values(self) -> np.ndarray:
        return self.dofmap.node_values(self.values)


def apply_clamped_constraints(mesh, dofmap: DofMap, where: str = CHANNEL_ENDS) -> DofMap:
    """Constrain every DOF of the clamped nodes.

    ``CHANNEL_ENDS`` uses nodes tagged clamped; ``ALL_BOUNDARY`` every
    non-interior node. On axis-aligned edges u = du/dn = 0 forces value,
    both first derivatives and the mixed derivative to vanish.
    """
    if isinstance(mesh, IntervalMesh):
        nodes = np.flatnonzero(mesh.clamped) if where == CHANNEL_ENDS else np.array([0, len(mesh.nodes) - 1])
    elif where == CHANNEL_ENDS:
        nodes = np.flatnonzero(mesh.boundary_tags == NodeTag.CLAMPED)
    elif where == ALL_BOUNDARY:
        nodes = np.flatnonzero(mesh.boundary_tags != NodeTag.INTERIOR)
    else:
        raise ValueError(f"unknown constraint location {where!r}")
    if len(nodes) == 0:
        raise NoTaggedNodes(f"no nodes to clamp for {where!r}")
    mask = dofmap.constrained.copy()
    d = dofmap.dofs_per_node
    mask[(nodes[:, None] * d + np.arange(d)[None, :]).ravel()] = True
    return DofMap(dofmap.n_nodes, d, mask)


def _check_compat(mesh, kind):
    if isinstance(kind, Limit1DForm) or (isinstance(kind, WeightedMass) and isinstance(mesh, IntervalMesh)):
        if not isinstance(mesh, IntervalMesh):
            raise IncompatibleMesh("1D forms need an interval mesh")
        return
    if isinstance(mesh, IntervalMesh):
        raise IncompatibleMesh(f"{type(kind).__name__} needs a 2D mesh")
    if isinstance(kind, (ChannelEpsForm, WeightedMass)) and mesh.kind != "channel":
        raise IncompatibleMesh("the pulled-back channel forms need the channel reference mesh")
    if isinstance(kind, ChannelEpsForm) and (mesh.nodes.min() < 0.0 or mesh.nodes.max() > 1.0):
        raise IncompatibleMesh("the channel reference mesh must lie in the unit square")


def _reduce(rows, cols, vals, n, dofmap: DofMap) -> SparseSym:
    keep = rows <= cols
    A = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()
    A.sum_duplicates()
    free = dofmap.free
    if len(free) < n:
        A = A[free][:, free]
    A = sp.csr_matrix(A)
    A.sort_indices()
    return SparseSym(A)


def assemble(mesh, dofmap: DofMap, kind, elem_mask: Optional[np.ndarray] = None,
             nq: Optional[int] = None) -> SparseSym:
    """Assemble ``kind`` over ``mesh`` and eliminate constrained DOFs.

    ``elem_mask`` restricts the sum to a subset of elements (used for
    region-wise mass). Entry values do not depend on any ordering beyond the
    fixed element order of the mesh.
    """
    _check_compat(mesh, kind)
    if isinstance(mesh, IntervalMesh):
        return _assemble_1d(mesh, dofmap, kind, nq)
    elems = mesh.elems
    origin = mesh.nodes[elems[:, 0]]
    size = mesh.elem_size
    if elem_mask is not None:
        elems, origin, size = elems[elem_mask], origin[elem_mask], size[elem_mask]
    dofs = (elems[:, :, None] * 4 + np.arange(4)[None, None, :]).reshape(-1, 16)

    position_free = isinstance(kind, (PlateForm, Mass))
    if position_free and len(size):
        usize, inv = np.unique(size, axis=0, return_inverse=True)
        Ku = element_matrices(np.zeros_like(usize), usize, kind, nq)
        Ke = Ku[inv.ravel()]
    else:
        Ke = np.empty((len(size), 16, 16))
        for s in range(0, len(size), _CHUNK):
            Ke[s:s + _CHUNK] = element_matrices(origin[s:s + _CHUNK], size[s:s + _CHUNK], kind, nq)
    rows = np.repeat(dofs, 16, axis=1).ravel()
    cols = np.tile(dofs, (1, 16)).ravel()
    return _reduce(rows, cols, Ke.ravel(), dofmap.n_dofs, dofmap)


def _assemble_1d(mesh: IntervalMesh, dofmap: DofMap, kind, nq=None) -> SparseSym:
    x0 = mesh.nodes[:-1]
    Ke = hermite1d_matrices(x0, mesh.h, kind, nq=nq or 6)
    e = np.arange(mesh.n_elems)
    dofs = np.stack([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3], 1)
    rows = np.repeat(dofs, 4, axis=1).ravel()
    cols = np.tile(dofs, (1, 4)).ravel()
    return _reduce(rows, cols, Ke.ravel(), dofmap.n_dofs, dofmap)


def energy(mesh, dofmap: DofMap, kind, X, nq: Optional[int] = None) -> np.ndarray:
    """``x^T A x`` for each column of ``X`` without forming ``A``.

    The form is evaluated from derivative values at the quadrature points,
    which keeps full relative accuracy on fine meshes where the assembled
    quadratic form loses digits to cancellation.
    """
    _check_compat(mesh, kind)
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    full = dofmap.expand(X[:, None] if single else X)
    d = dofmap.dofs_per_node
    nodal = full.reshape(dofmap.n_nodes, d, -1)
    if isinstance(mesh, IntervalMesh):
        coeffs = np.concatenate([nodal[:-1], nodal[1:]], axis=1)
        out = hermite1d_energies(mesh.nodes[:-1], mesh.h, kind, coeffs, nq=nq or 6)
    else:
        out = np.zeros(full.shape[1])
        for s in range(0, mesh.n_elems, _CHUNK):
            el = mesh.elems[s:s + _CHUNK]
            coeffs = nodal[el].reshape(len(el), 16, -1)
            out += element_energies(mesh.nodes[el[:, 0]], mesh.elem_size[s:s + _CHUNK], kind, coeffs, nq)
    return out[0] if single else out


def rayleigh_quotients(mesh, dofmap: DofMap, stiffness, mass, X) -> np.ndarray:
    """Quadrature-evaluated Rayleigh quotients ``a(x, x) / m(x, x)`` per column."""
    return energy(mesh, dofmap, stiffness, X) / energy(mesh, dofmap, mass, X)


def constant_vector(dofmap: DofMap, c: float = 1.0) -> np.ndarray:
    """Free-DOF vector of the constant function ``c`` (value DOFs only)."""
    full = np.zeros(dofmap.n_dofs)
    full[::dofmap.dofs_per_node] = c
    return dofmap.restrict(full)
