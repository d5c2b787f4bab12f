"""Command-line interface: outputs, determinism, exit codes."""

import json

import numpy as np

from meqlab.cli import main
from meqlab.fixtures import instantiate


SMALL_SCAN = [
    "--set", "scan.resolution=[6,8]",
    "--set", "scan.k=[0.0, 8e-5]",
]


def run(args):
    return main(args)


def test_scan_outputs_and_determinism(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert run(["scan-ep", *SMALL_SCAN, "--out", str(out1), "--threads", "2"]) == 0
    assert run(["scan-ep", *SMALL_SCAN, "--out", str(out2), "--threads", "1"]) == 0
    for name in ("scan_LME.csv", "scan_GME.csv", "scan_Redfield.csv"):
        first = (out1 / name).read_bytes()
        second = (out2 / name).read_bytes()
        assert first == second  # byte-identical across runs and thread counts
        header = first.decode().splitlines()[0]
        assert header == "omega,k,kappa,block"
    meta = json.loads((out1 / "scan.meta.json").read_text())
    assert meta["command"] == "scan-ep"
    assert "config" in meta and "version" in meta


def test_scan_single_point(tmp_path):
    assert run([
        "scan-ep", "--out", str(tmp_path),
        "--set", "scan.resolution=[1,1]",
        "--set", "scan.omega=[1.0,1.0]",
        "--set", "scan.k=[2e-5,2e-5]",
        "--set", 'generators=["LME"]',
    ]) == 0
    lines = (tmp_path / "scan_LME.csv").read_text().splitlines()
    assert len(lines) == 2  # header + single row


def test_scan_rejects_negative_resolution(tmp_path):
    code = run(["scan-ep", "--out", str(tmp_path),
                "--set", "scan.resolution=[-3,10]"])
    assert code == 2


def test_unknown_config_key_rejected(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text('{"systm": {"k": 1e-5}}')
    assert run(["ep-line", "--config", str(config)]) == 2


def test_malformed_json_reports_line(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text('{"system": {"k": 1e-5,}}')
    assert run(["ep-line", "--config", str(config)]) == 2
    err = capsys.readouterr().err
    assert "line" in err


def test_epline_prints_both_modes(capsys):
    assert run(["ep-line"]) == 0
    out = capsys.readouterr().out
    assert "k_exceptional_exact = 4.9994950005050012e-05" in out
    assert "k_exceptional_large_cutoff = 4.9995000000000005e-05" in out


def test_transient_columns_and_metadata(tmp_path):
    assert run(["transient", "--out", str(tmp_path),
                "--set", "transient.points=5",
                "--set", "transient.t_max_factor=0.5"]) == 0
    lines = (tmp_path / "transient.csv").read_text().splitlines()
    assert lines[0] == "t,Q_hot_L,Q_hot_G,Q_hot_R,Q_cold_L,Q_cold_G,Q_cold_R"
    assert len(lines) == 6
    meta = json.loads((tmp_path / "transient.meta.json").read_text())
    assert "steady_currents" in meta["extras"]
    assert "time_unit" in meta["extras"]


def test_transient_single_point(tmp_path):
    assert run(["transient", "--out", str(tmp_path),
                "--set", "transient.points=1"]) == 0
    lines = (tmp_path / "transient.csv").read_text().splitlines()
    assert len(lines) == 2


def test_unstable_coupling_exits_3(tmp_path):
    assert run(["transient", "--out", str(tmp_path),
                "--set", "system.k=2.0"]) == 3


def test_steady_sweep(tmp_path):
    assert run(["steady", "--out", str(tmp_path),
                "--set", "steady.points=4",
                "--set", "steady.k_min=1e-6",
                "--set", "steady.k_max=5e-5"]) == 0
    lines = (tmp_path / "steady.csv").read_text().splitlines()
    assert lines[0] == "k,Qh_L,Qc_L,Qh_G,Qc_G,Qh_R,Qc_R"
    assert len(lines) == 5
    for line in lines[1:]:
        values = [float(v) for v in line.split(",")]
        assert abs(values[1] + values[2]) < 1e-10 * max(1e-30, abs(values[1]))
        assert abs(values[5] + values[6]) < 1e-10 * max(1e-30, abs(values[5]))


def test_steady_k_zero_lme_currents_vanish(tmp_path):
    assert run(["steady", "--out", str(tmp_path),
                "--set", "steady.points=1",
                "--set", "steady.k_min=0.0",
                "--set", "steady.k_max=0.0",
                "--set", 'steady.spacing="linear"']) == 0
    line = (tmp_path / "steady.csv").read_text().splitlines()[1]
    values = [float(v) for v in line.split(",")]
    assert abs(values[1]) < 1e-20 and abs(values[2]) < 1e-20


def test_rigidity_output(tmp_path):
    assert run(["rigidity", "--out", str(tmp_path),
                "--set", "rigidity.points=21",
                "--set", 'generators=["LME","GME"]',
                "--set", "rigidity.k_min=2e-5",
                "--set", "rigidity.k_max=8e-5"]) == 0
    lines = (tmp_path / "rigidity.csv").read_text().splitlines()
    assert lines[0] == "k,phi_LME_1,phi_LME_2,phi_LME_3,phi_LME_4," \
                       "phi_GME_1,phi_GME_2,phi_GME_3,phi_GME_4"
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    # minimum LME rigidity dips near the exceptional coupling
    k_at_min = data[np.argmin(data[:, 1:5].min(axis=1)), 0]
    assert abs(k_at_min - 4.9994950005e-05) < (data[1, 0] - data[0, 0])
    assert np.abs(1.0 - data[:, 5:]).max() < 1e-4


def test_matrices_dump_matches_fixture(tmp_path):
    assert run(["matrices", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "matrices_LME.json").read_text())
    block1 = np.array([[float(v) for v in row] for row in payload["block1"]])
    delta_h = -1e-8 * (1e6 / (1.0 + 1e6))
    delta_c = -1e-4 * (1e6 / (1.0 + 1e6))
    expected = instantiate(
        "lme_block1", w=1.0, k=4.999495000505e-05, Dh=delta_h, Dc=delta_c
    )
    assert np.abs(block1 - expected).max() < 1e-12
    assert payload["frame"] == "local-quadratures"


def test_json_format(tmp_path):
    assert run(["steady", "--out", str(tmp_path), "--format", "json",
                "--set", "steady.points=2"]) == 0
    payload = json.loads((tmp_path / "steady.json").read_text())
    assert payload["header"][0] == "k"
    assert len(payload["rows"]) == 2


def test_set_override_roundtrip(tmp_path):
    assert run(["ep-line", "--set", "system.omega_h=2.0",
                "--set", "system.omega_c=2.0"]) == 0


def test_bad_set_path_rejected():
    assert run(["ep-line", "--set", "nope.nope=1"]) == 2


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MEQLAB_THREADS", "2")
    assert run(["scan-ep", *SMALL_SCAN, "--out", str(tmp_path)]) == 0
    monkeypatch.setenv("MEQLAB_THREADS", "zero")
    assert run(["scan-ep", *SMALL_SCAN, "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_code(monkeypatch):
    from meqlab import cli
    from meqlab.errors import NumericalError

    def boom(*args, **kwargs):
        raise NumericalError("synthetic kernel failure")

    monkeypatch.setattr(cli, "scan", boom)
    assert run(["scan-ep", *SMALL_SCAN]) == 4
