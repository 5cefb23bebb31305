"""Merged spectra, decomposition matching, dividers, localization and
projection deficiency."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import InsufficientEigenpairs, MissingTags, NonOrthonormalBasis, UnsortedInput
from ..eigensolve import CLUSTER_RTOL, Spectrum
from ..femcore.assembly import DiscreteField, assemble
from ..femcore.forms import Mass
from ..meshgen import Region

OMEGA = "omega"
CHANNEL = "channel"
GRAM_TOL = 1e-8


@dataclass(frozen=True)
class ModeTag:
    """Origin of a merged entry: ``source`` is ``"omega"`` or ``"channel"``,
    ``index`` the 1-based position in that source's own list."""

    source: str
    index: int

    def __str__(self) -> str:
        return f"{self.source}:{self.index}"


@dataclass(frozen=True, eq=False)
class MergedSpectrum:
    values: np.ndarray
    tags: tuple

    def __len__(self) -> int:
        return len(self.values)

    @property
    def sources(self) -> np.ndarray:
        return np.array([t.source for t in self.tags])

    def head(self, n: int) -> "MergedSpectrum":
        return MergedSpectrum(self.values[:n], self.tags[:n])

    def count_below(self, x: float) -> int:
        return int(np.searchsorted(self.values, x, side="right"))

    def first_index(self, source: str) -> Optional[int]:
        """1-based position of the first entry from ``source``."""
        for n, t in enumerate(self.tags, start=1):
            if t.source == source:
                return n
        return None


def as_values(spectrum) -> np.ndarray:
    vals = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else spectrum
    return np.asarray(vals, dtype=float).ravel()


def _check_sorted(vals: np.ndarray, name: str) -> None:
    if np.any(np.diff(vals) < 0):
        raise UnsortedInput(f"{name} values are not in ascending order")


def union_spectrum(*parts) -> np.ndarray:
    """Ascending union with multiplicity; the spectrum of a disjoint union of domains."""
    vals = [as_values(p) for p in parts]
    for i, v in enumerate(vals):
        _check_sorted(v, f"part {i}")
    return np.sort(np.concatenate(vals) if vals else np.empty(0), kind="stable")


def merge(omega, theta) -> MergedSpectrum:
    """Ascending merge of the fixed-domain and channel eigenvalues.

    The merge is stable with the fixed-domain list first, so at exact ties the
    fixed-domain entries come before the channel entries.
    """
    om, th = as_values(omega), as_values(theta)
    _check_sorted(om, "omega")
    _check_sorted(th, "channel")
    vals = np.concatenate([om, th])
    tags = [ModeTag(OMEGA, k + 1) for k in range(len(om))] + \
           [ModeTag(CHANNEL, l + 1) for l in range(len(th))]
    order = np.argsort(vals, kind="stable")
    return MergedSpectrum(vals[order], tuple(tags[i] for i in order))


def find_divider(merged, gap_rel: float):
    """Points that split the merged spectrum at a relative gap.

    For consecutive entries ``a < b`` with ``(b - a) / a >= gap_rel`` the
    midpoint ``x`` is reported with ``N(x)``, the number of entries ``<= x``.
    """
    vals = merged.values if isinstance(merged, MergedSpectrum) else as_values(merged)
    out = []
    for i in range(len(vals) - 1):
        a, b = vals[i], vals[i + 1]
        if b > a and (b - a) >= gap_rel * abs(a):
            x = 0.5 * (a + b)
            out.append((float(x), int(np.searchsorted(vals, x, side="right"))))
    return out


@dataclass(frozen=True)
class DecompositionRow:
    n: int
    dumbbell: float
    merged: float
    deviation: float
    tag: ModeTag
    mass_omega: Optional[float] = None
    mass_channel: Optional[float] = None


@dataclass(frozen=True, eq=False)
class DecompositionReport:
    rows: tuple
    max_deviation: float
    assignment_distance: float
    dividers: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def deviations(self) -> np.ndarray:
        return np.array([r.deviation for r in self.rows])

    def localization_failures(self, threshold: float):
        """Rows whose mass in the region of their matched source is below ``threshold``."""
        bad = []
        for r in self.rows:
            if r.mass_omega is None:
                continue
            own = r.mass_channel if r.tag.source == CHANNEL else r.mass_omega
            if own < threshold:
                bad.append(r)
        return bad

    def to_dict(self) -> dict:
        return {
            "rows": [{"n": r.n, "dumbbell": r.dumbbell, "merged": r.merged,
                      "deviation": r.deviation, "tag": str(r.tag),
                      "mass_omega": r.mass_omega, "mass_channel": r.mass_channel}
                     for r in self.rows],
            "max_deviation": self.max_deviation,
            "assignment_distance": self.assignment_distance,
            "dividers": [{"x": x, "N": n} for x, n in self.dividers],
            "meta": self.meta,
        }


def _relative(a, b):
    return np.abs(a - b) / np.abs(b)


def decompose(dumbbell, omega, theta_eps, N: int, localization=None,
              gap_rel: float = 0.1) -> DecompositionReport:
    """Compare the dumbbell eigenvalues with the merged list for n <= N.

    ``omega`` is the fixed-domain spectrum, or a list of per-box spectra that
    are united first. ``localization`` optionally holds ``(N, 2)`` mass
    fractions ``(omega, channel)`` of the dumbbell eigenvectors.
    """
    if isinstance(omega, (list, tuple)):
        omega = union_spectrum(*omega)
    d = as_values(dumbbell)
    merged = merge(omega, theta_eps)
    if N < 1 or len(d) < N or len(merged) < N:
        raise InsufficientEigenpairs(
            f"need N={N} eigenvalues, have {len(d)} (dumbbell) and {len(merged)} (merged)")
    _check_sorted(d, "dumbbell")
    m = merged.values[:N]
    dev = _relative(d[:N], m)
    cost = _relative(d[:N, None], m[None, :])
    r, c = linear_sum_assignment(cost)
    loc = None if localization is None else np.asarray(localization, dtype=float)
    rows = tuple(
        DecompositionRow(n + 1, float(d[n]), float(m[n]), float(dev[n]), merged.tags[n],
                         None if loc is None else float(loc[n, 0]),
                         None if loc is None else float(loc[n, 1]))
        for n in range(N))
    return DecompositionReport(rows, float(dev.max()), float(cost[r, c].max()),
                               tuple(find_divider(merged.head(N), gap_rel)))


def region_mass_matrices(mesh, dofmap):
    """Mass matrices restricted to the fixed domain and to the channel."""
    if getattr(mesh, "region_tags", None) is None or len(mesh.region_tags) != mesh.n_elems:
        raise MissingTags("mesh has no region tags")
    in_channel = mesh.region_tags == Region.CHANNEL
    return (assemble(mesh, dofmap, Mass(), elem_mask=~in_channel),
            assemble(mesh, dofmap, Mass(), elem_mask=in_channel))


def localize_columns(X, mesh, dofmap, mats=None) -> np.ndarray:
    """``(m, 2)`` mass fractions (fixed domain, channel) of the columns of ``X``."""
    Mo, Mc = mats or region_mass_matrices(mesh, dofmap)
    X = np.asarray(X, dtype=float).reshape(dofmap.n_free, -1)
    mo = np.einsum("ij,ij->j", X, Mo @ X)
    mc = np.einsum("ij,ij->j", X, Mc @ X)
    total = mo + mc
    return np.stack([mo / total, mc / total], axis=1)


def localize(eigvec: DiscreteField, mesh=None):
    """L2 mass fractions ``(omega, channel)`` of a field; they sum to one."""
    mesh = mesh if mesh is not None else eigvec.mesh
    fo, fc = localize_columns(eigvec.values, mesh, eigvec.dofmap)[0]
    return float(fo), float(fc)


def _vec(v):
    return np.asarray(v.values if isinstance(v, DiscreteField) else v, dtype=float)


def projection_deficiency(target, basis: Sequence, M) -> float:
    """``||t - sum_i (t, b_i)_M b_i||_M`` for an M-orthonormal ``basis``."""
    t = _vec(target)
    B = np.column_stack([_vec(b) for b in basis]) if len(basis) else np.zeros((len(t), 0))
    MB = M @ B
    gram = B.T @ MB
    if B.shape[1] and np.abs(gram - np.eye(B.shape[1])).max() > GRAM_TOL:
        raise NonOrthonormalBasis(
            f"basis Gram matrix deviates from identity by {np.abs(gram - np.eye(B.shape[1])).max():.2e}")
    r = t - B @ (MB.T @ t)
    return float(np.sqrt(max(r @ (M @ r), 0.0)))


def clusters(values, rtol: float = CLUSTER_RTOL):
    """Index groups of consecutive values equal to relative ``rtol``."""
    return Spectrum(as_values(values), np.zeros((0, len(as_values(values))))).clusters(rtol)
