"""Epsilon sweeps: channel against limit, dumbbell against merged list,
clamped dumbbell against clamped boxes, plus localization and projection
diagnostics."""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..eigensolve import DEFAULT_TOL, LANCZOS_SEED
from ..errors import InsufficientEigenpairs
from ..femcore.assembly import DofMap, SparseSym, assemble
from ..femcore.forms import Mass
from ..femcore.transfer import extend_E
from ..geometry import DumbbellSpec, MaterialParams, ProfileSpec
from ..limit1d import LimitProblem, limit_functions, solve_limit
from ..meshgen import Region, interval_mesh_from_nodes, submesh
from ..problems import (Discretization, box_problems, channel_problem, dumbbell_problem,
                        strip_problem, transfer_nodes)
from .bookkeeping import (CHANNEL, OMEGA, decompose, find_divider,
                          localize_columns, merge, projection_deficiency, union_spectrum)

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.4, 0.2, 0.1, 0.05, 0.025)
PARTS = ("channel", "decomposition", "dirichlet", "projection", "localization")


@dataclass(frozen=True)
class Thresholds:
    """Pass levels used by reports; engineering defaults, not derived values."""

    deviation: float = 0.05
    deviation_epsilon: float = 0.05
    localization: float = 0.85
    localization_epsilon: float = 0.025
    channel_error: float = 0.05
    gap_rel: float = 0.1


@dataclass(frozen=True)
class SweepConfig:
    left_length: float = 1.0
    right_length: float = 1.0
    profile: ProfileSpec = field(default_factory=ProfileSpec.constant)
    params: MaterialParams = field(default_factory=lambda: MaterialParams(0.3, 0.0))
    disc: Discretization = field(default_factory=Discretization)
    epsilons: tuple = DEFAULT_EPSILONS
    channel_modes: int = 3
    decomposition_modes: int = 10
    dirichlet_modes: int = 5
    localization_modes: Optional[int] = None
    thresholds: Thresholds = field(default_factory=Thresholds)
    tol: float = DEFAULT_TOL
    max_iters: int = 400
    seed: int = LANCZOS_SEED
    parts: tuple = PARTS

    def solver_kw(self) -> dict:
        return {"tol": self.tol, "max_iters": self.max_iters, "seed": self.seed}

    def spec(self, epsilon: float) -> DumbbellSpec:
        return DumbbellSpec(self.left_length, self.right_length, self.profile, epsilon)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    index: int
    value: float
    reference: float
    rel_error: float
    tag: str


CSV_COLUMNS = ("epsilon", "index", "value", "reference", "rel_error", "tag")


def fmt(x) -> str:
    """Scientific notation with 17 significant digits."""
    return f"{float(x):.16e}"


@dataclass(frozen=True, eq=False)
class ConvergenceTable:
    rows: tuple
    reports: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def select(self, tag: str, index: Optional[int] = None):
        rows = [r for r in self.rows if r.tag == tag and (index is None or r.index == index)]
        return sorted(rows, key=lambda r: (-r.epsilon, r.index))

    def epsilons(self, tag: str):
        return sorted({r.epsilon for r in self.rows if r.tag == tag}, reverse=True)

    def errors(self, tag: str, index: int) -> np.ndarray:
        """Absolute errors ``|value - reference|`` ordered by decreasing epsilon."""
        return np.array([abs(r.value - r.reference) for r in self.select(tag, index)])

    def max_rel_error(self, tag: str, epsilon: float, max_index: Optional[int] = None) -> float:
        vals = [r.rel_error for r in self.rows if r.tag == tag and r.epsilon == epsilon
                and (max_index is None or r.index <= max_index)]
        return float(max(vals)) if vals else math.nan

    def max_rel_errors(self, tag: str, max_index: Optional[int] = None) -> np.ndarray:
        return np.array([self.max_rel_error(tag, e, max_index) for e in self.epsilons(tag)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in sorted(self.rows, key=lambda r: (r.tag, -r.epsilon, r.index)):
            w.writerow([fmt(r.epsilon), r.index, fmt(r.value), fmt(r.reference),
                        fmt(r.rel_error), r.tag])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in sorted(self.rows, key=lambda r: (r.tag, -r.epsilon, r.index))],
                "reports": self.reports, "meta": self.meta}


def strictly_decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(len(v) >= 2 and np.all(np.diff(v) < 0))


# ---------------------------------------------------------------- channel part

def limit_spectrum(cfg: SweepConfig, k: int):
    problem = LimitProblem(cfg.profile, cfg.params, cfg.disc.n_elems_1d)
    return solve_limit(problem, k, **cfg.solver_kw())


def channel_rows(cfg: SweepConfig, epsilon: float, theta_limit: np.ndarray):
    k = len(theta_limit)
    spec = channel_problem(cfg.params, cfg.profile, epsilon, cfg.disc).solve(k, **cfg.solver_kw())
    return [SweepRow(epsilon, l + 1, float(spec.eigenvalues[l]), float(theta_limit[l]),
                     abs(spec.eigenvalues[l] - theta_limit[l]) / theta_limit[l], "channel")
            for l in range(k)]


# --------------------------------------------------------------- dumbbell part

def _box_modes(boxes, k, solver_kw):
    """Solve both boxes; return the united values and ``(box, column)`` per entry."""
    spectra = [prob.solve(k, **solver_kw) for prob, _ in boxes]
    vals = np.concatenate([s.eigenvalues for s in spectra])
    owner = [(b, j) for b, s in enumerate(spectra) for j in range(len(s))]
    order = np.argsort(vals, kind="stable")
    return spectra, vals[order], [owner[i] for i in order]


def _broken_space(mesh, boxes):
    """Block mass matrix of the pieces (two boxes, channel) and restriction maps."""
    strip, parent = submesh(mesh, [Region.CHANNEL])
    strip_dofmap = DofMap.for_mesh(strip)
    pieces = [(p.mesh, p.dofmap, par) for p, par in boxes] + [(strip, strip_dofmap, parent)]
    blocks = [assemble(m, dm, Mass()).full for m, dm, _ in pieces]
    return pieces, SparseSym(sp.triu(sp.block_diag(blocks, format="csr")).tocsr())


def projection_rows(cfg, epsilon, dp, dumb, boxes, box_spectra, owner, merged, N):
    """Deficiency of each dumbbell mode n <= N against the comparison basis:
    box modes extended by zero and rescaled limit modes extended in y."""
    pieces, Mb = _broken_space(dp.mesh, boxes)
    sizes = [dm.n_free for _, dm, _ in pieces]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    n_channel = sum(1 for t in merged.tags[:N] if t.source == CHANNEL)
    strip, strip_dm, _ = pieces[-1]
    lim_fns = []
    if n_channel:
        stations = np.unique(strip.nodes[:, 0])
        lim = solve_limit(LimitProblem(cfg.profile, cfg.params), n_channel, **cfg.solver_kw(),
                          mesh=interval_mesh_from_nodes(stations))
        lim_fns = limit_functions(lim)
    basis = []
    for t in merged.tags[:N]:
        v = np.zeros(offs[-1])
        if t.source == OMEGA:
            b, j = owner[t.index - 1]
            v[offs[b]:offs[b + 1]] = box_spectra[b].eigenvectors[:, j]
        else:
            f = extend_E(lim_fns[t.index - 1], strip, strip_dm, scale=epsilon ** -0.5)
            v[offs[2]:offs[3]] = f.values
        basis.append(v)
    rows = []
    for n in range(N):
        phi = np.concatenate([transfer_nodes(dumb.eigenvectors[:, n], dp.dofmap, dm, par)
                              for _, dm, par in pieces])
        d = projection_deficiency(phi, basis, Mb)
        rows.append(SweepRow(epsilon, n + 1, d, 0.0, d, "projection"))
    return rows


def dumbbell_point(cfg: SweepConfig, epsilon: float, with_projection: bool = True,
                   localization: bool = False):
    """Decomposition (and optional diagnostics) at one epsilon.

    Returns ``(rows, report_dict)``.
    """
    th = cfg.thresholds
    spec = cfg.spec(epsilon)
    dp = dumbbell_problem(spec, cfg.params, cfg.disc)
    boxes = box_problems(dp.mesh, cfg.params)
    strip, _ = strip_problem(dp.mesh, cfg.params)
    N = cfg.decomposition_modes
    theta = strip.solve(cfg.channel_modes, **cfg.solver_kw())
    k_box = N
    box_spectra, omega_vals, owner = _box_modes(boxes, k_box, cfg.solver_kw())
    merged = merge(omega_vals, theta)
    n_loc = N
    if localization:
        first = merged.first_index(CHANNEL)
        n_loc = max(N, cfg.localization_modes or (first or N))
        if n_loc > len(omega_vals):
            box_spectra, omega_vals, owner = _box_modes(boxes, n_loc, cfg.solver_kw())
            merged = merge(omega_vals, theta)
    dumb = dp.solve(n_loc, **cfg.solver_kw())
    loc = localize_columns(dumb.eigenvectors, dp.mesh, dp.dofmap)
    report = decompose(dumb, omega_vals, theta.eigenvalues, n_loc, localization=loc,
                       gap_rel=th.gap_rel)
    rows = [SweepRow(epsilon, r.n, r.dumbbell, r.merged, r.deviation, "decomposition")
            for r in report.rows[:N]]
    if localization:
        for r in report.rows:
            own = r.mass_channel if r.tag.source == CHANNEL else r.mass_omega
            rows.append(SweepRow(epsilon, r.n, own, 1.0, 1.0 - own, "localization"))
    if with_projection:
        divs = [n for _, n in find_divider(merged.head(N + 1), th.gap_rel) if n <= N]
        n_proj = max(divs) if divs else N
        rows += projection_rows(cfg, epsilon, dp, dumb, boxes, box_spectra, owner, merged, n_proj)
    info = report.to_dict()
    info["meta"] = {"epsilon": epsilon, "n_dofs": dp.n_dofs, "tags": [str(t) for t in merged.tags[:n_loc]]}
    return rows, info


def dirichlet_point(cfg: SweepConfig, epsilon: float):
    """Clamped dumbbell against the clamped boxes on the same grid."""
    k = cfg.dirichlet_modes
    dp = dumbbell_problem(cfg.spec(epsilon), cfg.params, cfg.disc, dirichlet=True)
    boxes = box_problems(dp.mesh, cfg.params, dirichlet=True)
    ref = union_spectrum(*[p.solve(k, **cfg.solver_kw()) for p, _ in boxes])
    vals = dp.solve(k, **cfg.solver_kw()).eigenvalues
    if len(ref) < k:
        raise InsufficientEigenpairs("not enough clamped box eigenvalues")
    return [SweepRow(epsilon, n + 1, float(vals[n]), float(ref[n]),
                     abs(vals[n] - ref[n]) / ref[n], "dirichlet") for n in range(k)]


# --------------------------------------------------------------------- driver

def _task(args):
    cfg, kind, epsilon, extra = args
    if kind == "channel":
        return channel_rows(cfg, epsilon, extra), None
    if kind == "dumbbell":
        with_proj, with_loc, on_grid = extra
        rows, info = dumbbell_point(cfg, epsilon, with_projection=with_proj and on_grid,
                                    localization=with_loc)
        if not on_grid:
            rows = [r for r in rows if r.tag == "localization"]
        return rows, info
    return dirichlet_point(cfg, epsilon), None


def epsilon_sweep(cfg: SweepConfig = SweepConfig(), jobs: int = 1) -> ConvergenceTable:
    """Run the requested parts over ``cfg.epsilons``; points run in parallel
    when ``jobs > 1``. Row order in the result does not depend on ``jobs``."""
    parts = set(cfg.parts)
    tasks = []
    meta = {"epsilons": list(cfg.epsilons)}
    if "channel" in parts:
        theta = limit_spectrum(cfg, cfg.channel_modes).eigenvalues
        meta["limit"] = theta.tolist()
        tasks += [(cfg, "channel", e, theta) for e in cfg.epsilons]
    if parts & {"decomposition", "projection", "localization"}:
        loc_eps = cfg.thresholds.localization_epsilon
        eps_list = list(cfg.epsilons)
        if "localization" in parts and loc_eps not in eps_list:
            eps_list.append(loc_eps)
        tasks += [(cfg, "dumbbell", e, ("projection" in parts,
                                        "localization" in parts and e == loc_eps,
                                        e in cfg.epsilons))
                  for e in eps_list]
    if "dirichlet" in parts:
        tasks += [(cfg, "dirichlet", e, None) for e in cfg.epsilons]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    rows, reports = [], {}
    for (cfg_, kind, e, _), (r, info) in zip(tasks, results):
        rows += r
        if info is not None:
            reports[repr(float(e))] = info
    return ConvergenceTable(tuple(rows), reports, meta)
