import json
import os

import numpy as np
import pytest

from stringdyn.cli import (
    CSV_HEADER,
    EXIT_CAP,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_PARSE,
    PRESETS,
    main,
    parse_config,
    resolve_scenario,
)

GOOD_CONFIG = """\
[scenario]
name = tiny
model = minimal_model
geometry = square
extent_x = 4
extent_y = 2
boundary = open
charge_from = 1,0
charge_to = 3,1
string_shape = l_shaped

[couplings]
mass = 12
efield = 24
plaq = 0, 1

[time]
t_max = 2
n_points = 21

[output]
prefix = tiny
"""


@pytest.fixture()
def good_config(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(GOOD_CONFIG)
    return str(path)


def test_presets_listing(capsys):
    assert main(["presets"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in (
        "square-L-resonant",
        "square-L-offres",
        "hex-S-resonant",
        "hex-1d-resonant",
        "z2-diag-2ndres",
        "qlm1d-resonant",
    ):
        assert name in out


def test_parse_good_config(good_config):
    scenario = parse_config(good_config)
    assert scenario.model == "minimal_model"
    assert scenario.plaq_values == (0.0, 1.0)
    assert scenario.n_points == 21


def test_validate_good_config(good_config, capsys):
    assert main(["validate", good_config]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "ok"
    assert report["dimensions"]["n_strings"] == 3
    assert report["dimensions"]["manifold_dimension"] == 12


def test_validate_unknown_model(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text(GOOD_CONFIG.replace("model = minimal_model", "model = xy_model"))
    assert main(["validate", str(path)]) == EXIT_PARSE
    err = capsys.readouterr().err
    assert "xy_model" in err and "minimal_model" in err  # lists valid values


def test_validate_negative_points(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text(GOOD_CONFIG.replace("n_points = 21", "n_points = -3"))
    assert main(["validate", str(path)]) == EXIT_PARSE
    assert "n_points" in capsys.readouterr().err


def test_validate_malformed_file(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("[scenario\nmodel =")
    assert main(["validate", str(path)]) == EXIT_PARSE


def test_run_writes_csv_and_metadata(good_config, tmp_path, capsys):
    outdir = tmp_path / "out"
    assert main(["run", good_config, "--outdir", str(outdir)]) == EXIT_OK
    for j in ("0", "1"):
        csv = outdir / f"tiny_J{j}.csv"
        meta = outdir / f"tiny_J{j}.meta.json"
        assert csv.exists() and meta.exists()
        lines = csv.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 22
        md = json.loads(meta.read_text())
        assert md["couplings"]["plaq"] == float(j)
        assert md["dimensions"]["manifold_dimension"] == 12
        assert md["evolution"] == "minimal_model"
        assert "code_version" in md and "wall_time_s" in md
        assert "periodic along y" in md["lattice"]["convention"] or "frozen" in md["lattice"]["convention"]


def test_rerun_byte_identical(good_config, tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["run", good_config, "--outdir", str(out1)]) == EXIT_OK
    assert main(["run", good_config, "--outdir", str(out2)]) == EXIT_OK
    a = (out1 / "tiny_J1.csv").read_bytes()
    b = (out2 / "tiny_J1.csv").read_bytes()
    assert a == b


def test_run_infeasible_lattice(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text(GOOD_CONFIG.replace("extent_x = 4", "extent_x = 9")
                    .replace("charge_to = 3,1", "charge_to = 12,1"))
    assert main(["run", str(path), "--outdir", str(tmp_path / "o")]) == EXIT_INFEASIBLE


def test_run_cap_exceeded(good_config, tmp_path):
    code = main([
        "run", good_config, "--outdir", str(tmp_path / "o"), "--minimal-cap", "4",
    ])
    assert code == EXIT_CAP


def test_sector_cap_exit(tmp_path):
    cfg = GOOD_CONFIG.replace("model = minimal_model", "model = u1_square")
    path = tmp_path / "ed.cfg"
    path.write_text(cfg)
    code = main(["run", str(path), "--outdir", str(tmp_path / "o"), "--sector-cap", "10"])
    assert code == EXIT_CAP


def test_propagator_choice(good_config, tmp_path):
    out_d = tmp_path / "dense"
    out_k = tmp_path / "krylov"
    assert main(["run", good_config, "--outdir", str(out_d), "--propagator", "dense"]) == EXIT_OK
    assert main(["run", good_config, "--outdir", str(out_k), "--propagator", "krylov"]) == EXIT_OK
    a = np.genfromtxt(out_d / "tiny_J1.csv", delimiter=",", names=True)
    b = np.genfromtxt(out_k / "tiny_J1.csv", delimiter=",", names=True)
    for col in a.dtype.names:
        if col in ("norm_error",):
            continue
        assert np.abs(a[col] - b[col]).max() <= 1e-8
    md = json.loads((out_d / "tiny_J1.meta.json").read_text())
    assert md["propagator"] == "dense"


def test_export_manifold(good_config, tmp_path):
    out = tmp_path / "manifold.txt"
    assert main(["export-manifold", good_config, "--out", str(out)]) == EXIT_OK
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 12


def test_export_manifold_needs_minimal(tmp_path):
    cfg = GOOD_CONFIG.replace("model = minimal_model", "model = u1_square")
    path = tmp_path / "ed.cfg"
    path.write_text(cfg)
    out = tmp_path / "m.txt"
    assert main(["export-manifold", str(path), "--out", str(out)]) == EXIT_PARSE


def test_unknown_preset(tmp_path):
    assert main(["run", "--preset", "nope", "--outdir", str(tmp_path)]) == EXIT_PARSE


def test_sector_cache(tmp_path, good_config, monkeypatch):
    cfg = GOOD_CONFIG.replace("model = minimal_model", "model = u1_square")
    path = tmp_path / "ed.cfg"
    path.write_text(cfg)
    cache = tmp_path / "cache"
    monkeypatch.setenv("STRINGDYN_CACHE_DIR", str(cache))
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    assert main(["run", str(path), "--outdir", str(out1)]) == EXIT_OK
    cached = list(cache.glob("sector-*.bin"))
    assert cached
    assert main(["run", str(path), "--outdir", str(out2)]) == EXIT_OK
    a = (out1 / "tiny_J1.csv").read_bytes()
    b = (out2 / "tiny_J1.csv").read_bytes()
    assert a == b


def test_worker_pool_matches_serial(good_config, tmp_path):
    out1 = tmp_path / "serial"
    out2 = tmp_path / "pool"
    assert main(["run", good_config, "--outdir", str(out1)]) == EXIT_OK
    assert main(["run", good_config, "--outdir", str(out2), "--workers", "2"]) == EXIT_OK
    for j in ("0", "1"):
        assert (out1 / f"tiny_J{j}.csv").read_bytes() == (out2 / f"tiny_J{j}.csv").read_bytes()


def test_preset_scenarios_resolve():
    for name, preset in PRESETS.items():
        res = resolve_scenario(preset)
        assert res.dims, name
