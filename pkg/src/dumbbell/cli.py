"""Command-line front end.

Usage: ``dumbbell <command> --config run.json [--out DIR] [--jobs N] ...``

Commands: validate-profile, solve-limit, solve-channel, solve-dumbbell,
decompose, sweep. Every run writes ``manifest.json`` next to its outputs.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigError, DumbbellError
from .geometry import validate_profile
from .limit1d import LimitProblem, solve_limit
from .problems import channel_problem, dumbbell_problem
from .spectra import (decompose, dumbbell_point, epsilon_sweep, localize_columns,
                      strictly_decreasing)
from .spectra.sweep import fmt

logger = logging.getLogger("dumbbell")

SPECTRUM_COLUMNS = ("index", "eigenvalue", "residual", "mass_omega", "mass_channel")
EXIT_OK, EXIT_CHECK_FAILED, EXIT_ERROR = 0, 1, 2


def spectrum_csv(spectrum, fractions) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_COLUMNS)
    res = spectrum.residuals
    for i, lam in enumerate(spectrum.eigenvalues):
        w.writerow([i + 1, fmt(lam), fmt(res[i]), fmt(fractions[i][0]), fmt(fractions[i][1])])
    return buf.getvalue()


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _write_json(out: Path, name: str, obj) -> Path:
    return _write(out, name, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _eps_name(eps: float) -> str:
    return f"spectrum_eps{eps!r}.csv"


# ------------------------------------------------------------------ commands

def cmd_validate_profile(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    rep = validate_profile(cfg.profile)
    report = {"holds": rep.holds, "delta_used": rep.delta_used,
              "violations": [[float(x), float(d)] for x, d in rep.violations],
              "profile": cfg.profile.to_dict()}
    _write_json(out, "report.json", report)
    print(f"(MP) monotonicity {'holds' if rep.holds else 'FAILS'}: "
          f"{len(rep.violations)} violating samples")
    return (EXIT_OK if rep.holds else EXIT_CHECK_FAILED), {"holds": rep.holds}


def cmd_solve_limit(cfg: RunConfig, args, out: Path):
    problem = LimitProblem(cfg.profile, cfg.params, cfg.disc.n_elems_1d)
    spec = solve_limit(problem, cfg.k, **cfg.solver_kw)
    frac = [(0.0, 1.0)] * len(spec)
    _write(out, "spectrum.csv", spectrum_csv(spec, frac))
    return EXIT_OK, {"eigenvalues": spec.eigenvalues.tolist()}


def cmd_solve_channel(cfg: RunConfig, args, out: Path):
    eps_list = list(cfg.sweep.epsilons)
    summary = {}
    for eps in eps_list:
        prob = channel_problem(cfg.params, cfg.profile, eps, cfg.disc)
        spec = prob.solve(cfg.k, **cfg.solver_kw)
        name = "spectrum.csv" if len(eps_list) == 1 else _eps_name(eps)
        _write(out, name, spectrum_csv(spec, [(0.0, 1.0)] * len(spec)))
        if args.dump_matrices:
            stem = name[:-len(".csv")].replace("spectrum", "channel")
            prob.K.dump_matrix_market(out / f"{stem}_K.mtx")
            prob.M.dump_matrix_market(out / f"{stem}_M.mtx")
        if args.dump_mesh:
            prob.mesh.dump_json(out / "channel_mesh.json")
        summary[repr(eps)] = spec.eigenvalues.tolist()
    return EXIT_OK, {"eigenvalues": summary}


def cmd_solve_dumbbell(cfg: RunConfig, args, out: Path):
    prob = dumbbell_problem(cfg.geometry, cfg.params, cfg.disc, dirichlet=args.dirichlet)
    spec = prob.solve(cfg.k, **cfg.solver_kw)
    frac = localize_columns(spec.eigenvectors, prob.mesh, prob.dofmap)
    _write(out, "spectrum.csv", spectrum_csv(spec, frac))
    if args.dump_matrices:
        prob.K.dump_matrix_market(out / "K.mtx")
        prob.M.dump_matrix_market(out / "M.mtx")
    if args.dump_mesh:
        prob.mesh.dump_json(out / "mesh.json")
    return EXIT_OK, {"eigenvalues": spec.eigenvalues.tolist(), "n_dofs": prob.n_dofs,
                     "dirichlet": bool(args.dirichlet)}


def _decomposition_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "dumbbell", "merged", "deviation", "tag", "mass_omega", "mass_channel"))
    for r in report["rows"]:
        w.writerow([r["n"], fmt(r["dumbbell"]), fmt(r["merged"]), fmt(r["deviation"]), r["tag"],
                    "" if r["mass_omega"] is None else fmt(r["mass_omega"]),
                    "" if r["mass_channel"] is None else fmt(r["mass_channel"])])
    return buf.getvalue()


def cmd_decompose(cfg: RunConfig, args, out: Path):
    th = cfg.sweep.thresholds
    if cfg.decompose_input is not None:
        d = cfg.decompose_input
        try:
            omega = d["omega"]
            if omega and isinstance(omega[0], list):
                omega = [np.asarray(o, dtype=float) for o in omega]
            report = decompose(np.asarray(d["dumbbell"], float), omega,
                               np.asarray(d.get("theta", []), float), int(d["N"]),
                               gap_rel=th.gap_rel).to_dict()
        except KeyError as exc:
            raise ConfigError(f"decompose: missing key {exc}") from exc
    else:
        _, report = dumbbell_point(cfg.sweep, cfg.geometry.epsilon, with_projection=False,
                                   localization=True)
    report["within_threshold"] = bool(report["max_deviation"] <= th.deviation)
    _write_json(out, "report.json", report)
    _write(out, "decomposition.csv", _decomposition_csv(report))
    print(f"max relative deviation {report['max_deviation']:.3e} "
          f"(threshold {th.deviation:g})")
    return EXIT_OK, {"max_deviation": report["max_deviation"]}


def sweep_checks(table, cfg: RunConfig) -> dict:
    """Pass/fail summary of the sweep against the configured thresholds."""
    th = cfg.sweep.thresholds
    checks = {}
    if table.select("channel"):
        dec = all(strictly_decreasing(table.errors("channel", l))
                  for l in range(1, cfg.sweep.channel_modes + 1))
        last = min(table.epsilons("channel"))
        checks["channel_decreasing"] = dec
        checks["channel_final_error"] = table.max_rel_error("channel", last, 1)
        checks["channel_final_ok"] = checks["channel_final_error"] <= th.channel_error
    if table.select("decomposition"):
        devs = table.max_rel_errors("decomposition")
        checks["decomposition_decreasing"] = strictly_decreasing(devs)
        checks["decomposition_at_threshold_epsilon"] = table.max_rel_error(
            "decomposition", th.deviation_epsilon)
        checks["decomposition_ok"] = checks["decomposition_at_threshold_epsilon"] <= th.deviation
    if table.select("dirichlet"):
        checks["dirichlet_decreasing"] = all(
            strictly_decreasing(table.errors("dirichlet", n))
            for n in range(1, cfg.sweep.dirichlet_modes + 1))
    if table.select("projection"):
        checks["projection_decreasing"] = strictly_decreasing(table.max_rel_errors("projection"))
    if table.select("localization"):
        worst = min(r.value for r in table.select("localization"))
        checks["localization_worst"] = worst
        checks["localization_ok"] = worst >= th.localization
    return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in checks.items()}


def cmd_sweep(cfg: RunConfig, args, out: Path):
    table = epsilon_sweep(cfg.sweep, jobs=args.jobs)
    _write(out, "sweep.csv", table.to_csv())
    report = table.to_dict()
    report["checks"] = sweep_checks(table, cfg)
    _write_json(out, "report.json", report)
    for k, v in report["checks"].items():
        print(f"{k}: {v}")
    return EXIT_OK, {"checks": report["checks"]}


COMMANDS = {
    "validate-profile": cmd_validate_profile,
    "solve-limit": cmd_solve_limit,
    "solve-channel": cmd_solve_channel,
    "solve-dumbbell": cmd_solve_dumbbell,
    "decompose": cmd_decompose,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dumbbell", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=None, help="output directory (default: output.dir of the config)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="parallel sweep points")
    p.add_argument("--dirichlet", action="store_true", help="clamp the whole dumbbell boundary")
    p.add_argument("--dump-matrices", action="store_true", help="write K and M in Matrix Market format")
    p.add_argument("--dump-mesh", action="store_true", help="write the mesh as JSON")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        out = Path(args.out or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        code, summary = COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except DumbbellError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    manifest = {
        "command": args.command,
        "config": str(args.config),
        "config_sha256": cfg.digest(),
        "versions": {"dumbbell": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "seconds": time.perf_counter() - t0,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "exit_code": code,
        "summary": summary,
    }
    _write_json(out, "manifest.json", manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
