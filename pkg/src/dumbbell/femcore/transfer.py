"""Vertical averaging of channel fields and the y-independent extension."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import IncompatibleMesh, StationMismatch
from .assembly import DiscreteField, DofMap
from .hermite import hermite

_STATION_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class HermiteFunction1D:
    """Piecewise cubic Hermite function given by values and slopes at stations."""

    stations: np.ndarray
    values: np.ndarray
    slopes: np.ndarray

    def __call__(self, x, derivative: int = 0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.clip(np.searchsorted(self.stations, x, side="right") - 1, 0, len(self.stations) - 2)
        h = self.stations[k + 1] - self.stations[k]
        t = (x - self.stations[k]) / h
        out = np.empty_like(x)
        for i in range(len(x)):
            B = hermite([t[i]], h[i])[derivative][:, 0]
            c = np.array([self.values[k[i]], self.slopes[k[i]],
                          self.values[k[i] + 1], self.slopes[k[i] + 1]])
            out[i] = B @ c
        return out

    @classmethod
    def from_dofs(cls, stations, dof_vector) -> "HermiteFunction1D":
        d = np.asarray(dof_vector).reshape(-1, 2)
        return cls(np.asarray(stations, float), d[:, 0].copy(), d[:, 1].copy())

    def dofs(self) -> np.ndarray:
        return np.stack([self.values, self.slopes], 1).ravel()


def _columns(mesh):
    """Node indices per x-column, each sorted by y."""
    if mesh.node_ij is None:
        raise IncompatibleMesh("mesh carries no grid structure")
    cols = {}
    order = np.lexsort((mesh.node_ij[:, 1], mesh.node_ij[:, 0]))
    for n in order:
        cols.setdefault(int(mesh.node_ij[n, 0]), []).append(n)
    return cols


def average_M(field: DiscreteField) -> HermiteFunction1D:
    """Average over the channel cross-section at every node column.

    On the mapped unit square the average of ``h`` over ``(0, g(x))`` is the
    integral over ``eta`` in (0, 1), computed exactly from the Hermite data in
    eta. Slopes come from the same integral of ``u_x`` data, so the result is
    the exact average as a cubic Hermite function of x.
    """
    mesh = field.mesh
    if getattr(mesh, "kind", None) != "channel":
        raise IncompatibleMesh("averaging needs a field on the channel reference mesh")
    nv = field.node_values()
    cols = _columns(mesh)
    keys = sorted(cols)
    stations = mesh.xs[keys]
    vals = np.empty(len(keys))
    slopes = np.empty(len(keys))
    for k, key in enumerate(keys):
        idx = np.array(cols[key])
        y = mesh.nodes[idx, 1]
        if y[0] != 0.0 or y[-1] != 1.0:
            raise IncompatibleMesh("channel column does not span the full height")
        h = np.diff(y)
        # int of a cubic Hermite: h (u0 + u1) / 2 + h^2 (s0 - s1) / 12
        for out, a, b in ((vals, 0, 2), (slopes, 1, 3)):
            u, s = nv[idx, a], nv[idx, b]
            out[k] = np.sum(h * (u[:-1] + u[1:]) / 2 + h * h * (s[:-1] - s[1:]) / 12)
    return HermiteFunction1D(stations, vals, slopes)


def extend_E(v: HermiteFunction1D, mesh, dofmap: DofMap | None = None,
             scale: float = 1.0, node_mask=None) -> DiscreteField:
    """The y-independent field ``u(x, y) = scale * v(x)``.

    Nodes outside ``node_mask`` (default: all) get zero. The x-coordinate of
    every masked node must be a station of ``v``.
    """
    dofmap = dofmap or DofMap.for_mesh(mesh)
    mask = np.ones(mesh.n_nodes, dtype=bool) if node_mask is None else np.asarray(node_mask)
    x = mesh.nodes[mask, 0]
    k = np.clip(np.searchsorted(v.stations, x), 1, len(v.stations) - 1)
    k = np.where(np.abs(v.stations[k - 1] - x) < np.abs(v.stations[k] - x), k - 1, k)
    if np.any(np.abs(v.stations[k] - x) > _STATION_TOL):
        raise StationMismatch("mesh node x-coordinates are not stations of the 1D function")
    full = np.zeros((mesh.n_nodes, 4))
    full[mask, 0] = scale * v.values[k]
    full[mask, 1] = scale * v.slopes[k]
    return DiscreteField(dofmap.restrict(full.ravel()), mesh, dofmap, {"extended": True})
