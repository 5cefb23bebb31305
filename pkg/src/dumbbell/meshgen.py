"""Structured axis-aligned meshes for the dumbbell, the reference channel and
the unit interval.

All 2D meshes are subsets of a tensor grid, so elements sharing an edge
share node indices and the bicubic Hermite space is C1-conforming.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np

from .errors import EmptyChannelResolution, MeshError, UnsupportedProfile
from .geometry import DumbbellSpec, ProfileSpec

DEFAULT_ASPECT_CAP = 50.0


class NodeTag(IntEnum):
    INTERIOR = 0
    FREE = 1
    CLAMPED = 2


class Region(IntEnum):
    OMEGA_LEFT = 0
    OMEGA_RIGHT = 1
    CHANNEL = 2


@dataclass(frozen=True, eq=False)
class QuadMesh:
    """Conforming mesh of axis-aligned rectangles.

    ``elems`` lists corner nodes counterclockwise starting at the lower
    left corner. ``kind`` is ``"dumbbell"``, ``"channel"`` (the mapped
    reference square), ``"strip"`` (a physical channel cut out of a
    dumbbell) or ``"box"``.
    """

    nodes: np.ndarray          # (N, 2)
    elems: np.ndarray          # (E, 4) int
    elem_size: np.ndarray      # (E, 2) = (hx, hy)
    boundary_tags: np.ndarray  # (N,) NodeTag values
    region_tags: np.ndarray    # (E,) Region values
    kind: str = "dumbbell"
    xs: Optional[np.ndarray] = None
    ys: Optional[np.ndarray] = None
    node_ij: Optional[np.ndarray] = None  # (N, 2) grid indices of nodes
    cell_ij: Optional[np.ndarray] = None  # (E, 2) grid indices of elements

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elems(self) -> int:
        return len(self.elems)

    def area(self) -> float:
        return float(np.sum(self.elem_size[:, 0] * self.elem_size[:, 1]))

    def region_area(self, region: Region) -> float:
        sel = self.region_tags == region
        return float(np.sum(self.elem_size[sel, 0] * self.elem_size[sel, 1]))

    def elem_origin(self) -> np.ndarray:
        return self.nodes[self.elems[:, 0]]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "nodes": self.nodes.tolist(),
            "elems": self.elems.tolist(),
            "boundary_tags": [NodeTag(t).name for t in self.boundary_tags],
            "region_tags": [Region(t).name for t in self.region_tags],
        }

    def dump_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)


@dataclass(frozen=True, eq=False)
class IntervalMesh:
    nodes: np.ndarray          # (n + 1,)
    clamped: np.ndarray        # (n + 1,) bool

    @property
    def n_elems(self) -> int:
        return len(self.nodes) - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)


def graded_points(a: float, b: float, h0: float, hmax: float, growth: float = 1.3) -> np.ndarray:
    """Points from ``a`` to ``b`` whose step starts at ``h0`` and grows
    geometrically up to ``hmax``. ``a`` may exceed ``b``."""
    sign = 1.0 if b >= a else -1.0
    length = abs(b - a)
    if length == 0.0:
        return np.array([a])
    steps = []
    h, total = h0, 0.0
    while h < hmax and total + h < length:
        steps.append(h)
        total += h
        h *= growth
    rest = length - total
    n_rest = max(1, math.ceil(rest / hmax - 1e-9))
    if steps and rest < 0.5 * steps[-1]:
        # merge a sliver into the last graded step
        steps[-1] += rest
        n_rest = 0
    steps.extend([rest / n_rest] * n_rest)
    pts = a + sign * np.concatenate([[0.0], np.cumsum(steps)])
    pts[-1] = b
    return pts


def _uniform(a: float, b: float, h: float) -> np.ndarray:
    n = max(1, math.ceil((b - a) / h - 1e-9))
    return np.linspace(a, b, n + 1)


def _tensor_mesh(xs, ys, keep, region, kind, clamp_fn=None, aspect_cap=None) -> QuadMesh:
    """Mesh made of the kept cells of the tensor grid ``xs x ys``."""
    nx, ny = len(xs) - 1, len(ys) - 1
    ci, cj = np.nonzero(keep)              # cell indices (i along x, j along y)
    order = np.lexsort((ci, cj))           # row-major: y outer, x inner
    ci, cj = ci[order], cj[order]
    gid = np.full((nx + 1, ny + 1), -1, dtype=np.int64)
    corners = np.stack([
        np.stack([ci, cj], 1), np.stack([ci + 1, cj], 1),
        np.stack([ci + 1, cj + 1], 1), np.stack([ci, cj + 1], 1)], 1)
    used = np.zeros((nx + 1, ny + 1), dtype=bool)
    used[corners[..., 0].ravel(), corners[..., 1].ravel()] = True
    ui, uj = np.nonzero(used)
    o = np.lexsort((ui, uj))
    ui, uj = ui[o], uj[o]
    gid[ui, uj] = np.arange(len(ui))
    nodes = np.stack([xs[ui], ys[uj]], axis=1)
    elems = gid[corners[..., 0], corners[..., 1]]
    hx = xs[ci + 1] - xs[ci]
    hy = ys[cj + 1] - ys[cj]
    if np.any(hx <= 0) or np.any(hy <= 0):
        raise MeshError("degenerate element")
    if aspect_cap is not None:
        aspect = np.maximum(hx / hy, hy / hx)
        if aspect.max() > aspect_cap:
            raise MeshError(f"element aspect ratio {aspect.max():.1f} exceeds cap {aspect_cap}")

    # a node is interior iff all four surrounding grid cells are kept
    padded = np.zeros((nx + 2, ny + 2), dtype=bool)
    padded[1:-1, 1:-1] = keep
    full = (padded[ui, uj] & padded[ui + 1, uj] & padded[ui, uj + 1] & padded[ui + 1, uj + 1])
    tags = np.where(full, NodeTag.INTERIOR, NodeTag.FREE).astype(np.int8)
    if clamp_fn is not None:
        tags[(~full) & clamp_fn(nodes)] = NodeTag.CLAMPED
    return QuadMesh(nodes=nodes, elems=elems, elem_size=np.stack([hx, hy], 1),
                    boundary_tags=tags, region_tags=region[ci, cj].astype(np.int8),
                    kind=kind, xs=np.asarray(xs), ys=np.asarray(ys),
                    node_ij=np.stack([ui, uj], 1), cell_ij=np.stack([ci, cj], 1))


def submesh(mesh: QuadMesh, regions, clamp_channel_ends: bool = False):
    """Mesh made of the elements of ``mesh`` whose region is in ``regions``.

    Returns ``(sub, parent_node)`` where ``parent_node[i]`` is the index in
    ``mesh`` of node ``i`` of ``sub``. Boundary tags are recomputed for the
    sub-domain; with ``clamp_channel_ends`` its nodes on x = 0 and x = 1 are
    tagged clamped.
    """
    regions = [int(r) for r in np.atleast_1d(regions)]
    sel = np.isin(mesh.region_tags, regions)
    nx, ny = len(mesh.xs) - 1, len(mesh.ys) - 1
    keep = np.zeros((nx, ny), dtype=bool)
    keep[mesh.cell_ij[sel, 0], mesh.cell_ij[sel, 1]] = True
    region = np.zeros((nx, ny), dtype=np.int8)
    region[mesh.cell_ij[:, 0], mesh.cell_ij[:, 1]] = mesh.region_tags
    def clamp_ends(nodes):
        return (nodes[:, 0] == 0.0) | (nodes[:, 0] == 1.0)
    # a physical channel piece is a "strip": unlike the reference mesh it
    # carries no pull-back map and must not be averaged as one
    kind = "strip" if regions == [int(Region.CHANNEL)] else "box"
    sub = _tensor_mesh(mesh.xs, mesh.ys, keep, region, kind,
                       clamp_fn=clamp_ends if clamp_channel_ends else None)
    gid = np.full((nx + 1, ny + 1), -1, dtype=np.int64)
    gid[mesh.node_ij[:, 0], mesh.node_ij[:, 1]] = np.arange(mesh.n_nodes)
    return sub, gid[sub.node_ij[:, 0], sub.node_ij[:, 1]]


def build_dumbbell_mesh(spec: DumbbellSpec, h_target: float, channel_rows: Optional[int] = None,
                        growth: float = 1.3, junction_grading: Optional[float] = None,
                        aspect_cap: float = DEFAULT_ASPECT_CAP, include_channel: bool = True) -> QuadMesh:
    """Conforming mesh of the dumbbell with a constant-profile channel.

    The lines ``y = 0`` and ``y = eps * g0`` are grid lines. Without
    ``channel_rows`` the channel gets ``round(eps * g0 / h_target)`` rows;
    with it, the channel rows are fixed and the box grid grades from the
    channel row height up to ``h_target``. ``junction_grading`` (a growth
    factor > 1) refines the x-grid geometrically towards the junctions.
    ``include_channel=False`` returns the two boxes alone on the same grid.
    """
    if not spec.profile.is_constant:
        raise UnsupportedProfile("full dumbbell meshes need a constant channel profile")
    if not h_target > 0:
        raise MeshError("h_target must be positive")
    H = spec.epsilon * float(spec.profile.value(0.0))
    if channel_rows is None:
        rows = int(round(H / h_target))
    else:
        rows = int(channel_rows)
    if rows < 2:
        raise EmptyChannelResolution(
            f"channel of height {H:g} gets {rows} element rows at h_target={h_target:g}; need >= 2")
    hc = H / rows
    l, r = spec.left_length, spec.right_length

    y_ch = np.linspace(0.0, H, rows + 1)
    if channel_rows is None:
        y_up = _uniform(H, 1.0, h_target)
        y_dn = _uniform(-1.0, 0.0, h_target)
    else:
        y_up = graded_points(H, 1.0, hc, h_target, growth)
        y_dn = graded_points(0.0, -1.0, hc, h_target, growth)[::-1]
    ys = np.concatenate([y_dn[:-1], y_ch, y_up[1:]])

    if junction_grading:
        h0 = min(hc, h_target)
        xl = graded_points(0.0, -l, h0, h_target, junction_grading)[::-1]
        half = graded_points(0.0, 0.5, h0, h_target, junction_grading)
        xc = np.concatenate([half, 1.0 - half[-2::-1]])
        xr = graded_points(1.0, 1.0 + r, h0, h_target, junction_grading)
    else:
        xl = _uniform(-l, 0.0, h_target)
        xc = _uniform(0.0, 1.0, h_target)
        xr = _uniform(1.0, 1.0 + r, h_target)
    xs = np.concatenate([xl[:-1], xc, xr[1:]])

    xm = 0.5 * (xs[1:] + xs[:-1])[:, None]
    ym = 0.5 * (ys[1:] + ys[:-1])[None, :]
    in_left = (xm < 0.0) & np.ones_like(ym, dtype=bool)
    in_right = (xm > 1.0) & np.ones_like(ym, dtype=bool)
    in_chan = (xm > 0.0) & (xm < 1.0) & (ym > 0.0) & (ym < H)
    keep = in_left | in_right | (in_chan if include_channel else False)
    region = np.where(in_left, Region.OMEGA_LEFT, np.where(in_right, Region.OMEGA_RIGHT, Region.CHANNEL))
    return _tensor_mesh(xs, ys, keep, region, "dumbbell" if include_channel else "box",
                        aspect_cap=aspect_cap)


def build_box_mesh(length_x: float, length_y: float, h_target: float, origin=(0.0, 0.0),
                   region: Region = Region.OMEGA_LEFT) -> QuadMesh:
    """Uniform mesh of a single rectangle."""
    xs = origin[0] + _uniform(0.0, length_x, h_target)
    ys = origin[1] + _uniform(0.0, length_y, h_target)
    return build_rectangle_mesh(xs, ys, region)


def build_rectangle_mesh(xs, ys, region: Region = Region.OMEGA_LEFT) -> QuadMesh:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    keep = np.ones((len(xs) - 1, len(ys) - 1), dtype=bool)
    reg = np.full(keep.shape, int(region))
    return _tensor_mesh(xs, ys, keep, reg, "box")


def build_channel_reference_mesh(nx: int, ny: int, profile: Optional[ProfileSpec] = None,
                                 x_grading: Optional[float] = None) -> QuadMesh:
    """Tensor mesh of the mapped unit square; the ends x = 0, 1 are clamped.

    The profile does not change the node layout: the map ``(x, y) -> (x, g(x) y)``
    is applied during assembly. ``x_grading`` (> 1) refines towards both ends,
    starting from a step of ``1 / (4 nx)``.
    """
    if nx < 2 or ny < 2:
        raise MeshError("channel reference mesh needs nx, ny >= 2")
    if x_grading:
        half = graded_points(0.0, 0.5, 0.25 / nx, 1.0 / nx, x_grading)
        xs = np.concatenate([half, 1.0 - half[-2::-1]])
    else:
        xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    keep = np.ones((len(xs) - 1, ny), dtype=bool)
    region = np.full(keep.shape, int(Region.CHANNEL))

    def ends(nodes):
        return (nodes[:, 0] == 0.0) | (nodes[:, 0] == 1.0)

    return _tensor_mesh(xs, ys, keep, region, "channel", clamp_fn=ends)


def build_interval_mesh(n: int) -> IntervalMesh:
    """``n`` uniform elements on [0, 1] with both endpoints clamped."""
    if n < 2:
        raise MeshError("interval mesh needs n >= 2")
    nodes = np.linspace(0.0, 1.0, n + 1)
    clamped = np.zeros(n + 1, dtype=bool)
    clamped[[0, -1]] = True
    return IntervalMesh(nodes=nodes, clamped=clamped)


def interval_mesh_from_nodes(nodes) -> IntervalMesh:
    """Interval mesh on given increasing stations; both ends clamped."""
    nodes = np.asarray(nodes, dtype=float)
    if len(nodes) < 3 or np.any(np.diff(nodes) <= 0):
        raise MeshError("need at least 3 strictly increasing stations")
    clamped = np.zeros(len(nodes), dtype=bool)
    clamped[[0, -1]] = True
    return IntervalMesh(nodes=nodes, clamped=clamped)
