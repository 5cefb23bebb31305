import json

import pytest

from dumbbell.cli import EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK, main
from dumbbell.config import DEFAULTS, build_config
from dumbbell.errors import ConfigError

SMALL_DISC = {"h_target": 0.125, "nx": 16, "ny": 2, "n_elems_1d": 32}


def _run(tmp_path, command, cfg, *flags, name="run"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / name
    code = main([command, "--config", str(path), "--out", str(out), "--jobs", "1", *flags])
    return code, out


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="params.tua"):
        build_config({"params": {"tua": 1.0}})
    with pytest.raises(ConfigError, match="geometry.profile.kindd"):
        build_config({"geometry": {"profile": {"kindd": "constant"}}})
    with pytest.raises(ConfigError, match="decompose.extra"):
        build_config({"decompose": {"extra": 1}})
    with pytest.raises(ConfigError):
        build_config({"solver": {"k": 2.5}})
    with pytest.raises(ConfigError):
        build_config({"params": {"sigma": 1.0}})


def test_defaults_validate():
    cfg = build_config({})
    assert cfg.k == DEFAULTS["solver"]["k"]
    assert cfg.digest() == build_config({}).digest()
    assert cfg.digest() != build_config({"params": {"tau": 1.0}}).digest()


def test_solve_limit_beam(tmp_path):
    cfg = {"params": {"sigma": 0.0, "tau": 0.0}, "solver": {"k": 3}}
    code, out = _run(tmp_path, "solve-limit", cfg)
    assert code == EXIT_OK
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "index,eigenvalue,residual,mass_omega,mass_channel"
    assert float(lines[1].split(",")[1]) == pytest.approx(501.5639, rel=1e-6)
    man = json.loads((out / "manifest.json").read_text())
    assert man["exit_code"] == 0 and len(man["config_sha256"]) == 64
    assert set(man["versions"]) >= {"numpy", "scipy", "python"}


def test_validate_profile_exit_codes(tmp_path):
    bump = {"geometry": {"profile": {"kind": "cosine_bump", "params": [1.0, 0.5]}}}
    code, out = _run(tmp_path, "validate-profile", bump, name="bump")
    assert code == EXIT_CHECK_FAILED
    rep = json.loads((out / "report.json").read_text())
    assert not rep["holds"] and rep["violations"]
    code, _ = _run(tmp_path, "validate-profile", {}, name="flat")
    assert code == EXIT_OK


def test_config_error_exit(tmp_path):
    code, _ = _run(tmp_path, "solve-limit", {"params": {"tua": 0.0}})
    assert code == EXIT_ERROR
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert main(["solve-limit", "--config", str(bad), "--out", str(tmp_path / "x")]) == EXIT_ERROR


def test_decompose_fixture(tmp_path):
    cfg = {"decompose": {"dumbbell": [1.0, 1.0, 3.0, 5.0], "omega": [[1.0, 5.0], [1.0]],
                         "theta": [3.0], "N": 4}}
    code, out = _run(tmp_path, "decompose", cfg)
    assert code == EXIT_OK
    text = (out / "report.json").read_text()
    rep = json.loads(text)
    assert rep["max_deviation"] == 0.0 and rep["within_threshold"]
    assert json.loads(json.dumps(rep)) == rep
    assert (out / "decomposition.csv").read_text().splitlines()[0].startswith("n,dumbbell,merged")


def test_csv_byte_identical_and_dumps(tmp_path):
    cfg = {"geometry": {"epsilon": 0.2}, "discretization": SMALL_DISC, "solver": {"k": 4}}
    c1, o1 = _run(tmp_path, "solve-dumbbell", cfg, "--dump-matrices", "--dump-mesh", name="a")
    c2, o2 = _run(tmp_path, "solve-dumbbell", cfg, name="b")
    assert c1 == c2 == EXIT_OK
    assert (o1 / "spectrum.csv").read_bytes() == (o2 / "spectrum.csv").read_bytes()
    assert (o1 / "K.mtx").exists() and (o1 / "M.mtx").exists()
    mesh = json.loads((o1 / "mesh.json").read_text())
    assert mesh["kind"] == "dumbbell"
    row = (o1 / "spectrum.csv").read_text().splitlines()[1].split(",")
    assert float(row[1]) == pytest.approx(1.0, abs=1e-10)
    assert float(row[3]) + float(row[4]) == pytest.approx(1.0, abs=1e-12)
    code, o3 = _run(tmp_path, "solve-dumbbell", cfg, "--dirichlet", name="c")
    assert code == EXIT_OK and float((o3 / "spectrum.csv").read_text().splitlines()[1].split(",")[1]) > 1.0


def test_solve_channel_per_epsilon(tmp_path):
    cfg = {"discretization": SMALL_DISC, "sweep": {"epsilons": [0.4, 0.2]}, "solver": {"k": 2}}
    code, out = _run(tmp_path, "solve-channel", cfg)
    assert code == EXIT_OK
    assert (out / "spectrum_eps0.4.csv").exists() and (out / "spectrum_eps0.2.csv").exists()


def test_sweep_command(tmp_path):
    cfg = {"discretization": SMALL_DISC,
           "sweep": {"epsilons": [0.4, 0.2], "parts": ["channel"], "channel_modes": 2}}
    code, out = _run(tmp_path, "sweep", cfg)
    assert code == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    assert "channel_decreasing" in rep["checks"]
    assert json.loads(json.dumps(rep)) == rep
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "epsilon,index,value,reference,rel_error,tag" and len(lines) == 1 + 4
