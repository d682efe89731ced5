"""Command-line driver: flags, file formats, determinism, exit codes."""

import json

import pytest

from mlmsim.cli import REGION_COLUMNS, SIMULATE_COLUMNS, dispatch, parse_config_header


def _read_csv(path):
    header, rows = None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append(dict(zip(header, line.split(","))))
    return header, rows


def _body(path):
    with open(path, encoding="utf-8") as fh:
        return [ln for ln in fh if not ln.startswith("# mlmsim")]


def test_params_symmetric_json(capsys):
    assert dispatch(["params", "--snr-db", "0", "--sigma-q2", "1",
                     "--mode", "asymptotic"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["alpha_c"] == pytest.approx(0.5)
    assert doc["beta"] ** 2 == pytest.approx(0.5)
    assert doc["mode"] == "asymptotic"


def test_params_out_file(tmp_path):
    out = tmp_path / "params.json"
    assert dispatch(["params", "--power", "4", "--noise", "1", "--sigma-q2", "1",
                     "--mode", "asymptotic", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["beta"] ** 2 == pytest.approx(3.2)


def test_lattice_bench_scalar_loss(tmp_path):
    out = tmp_path / "bench.csv"
    code = dispatch(["lattice-bench", "--lattice", "cubic1", "--pe", "1e-2",
                     "--alpha", "1", "--samples", "1000000", "--seed", "7",
                     "--out", str(out)])
    assert code == 0
    header, rows = _read_csv(out)
    assert rows[0]["lattice"] == "cubic1"
    loss = float(rows[0]["loss_l"])
    assert loss == pytest.approx(2.2116, rel=0.03)
    g_mu = float(rows[0]["g_times_mu"])
    assert g_mu == pytest.approx(loss, rel=0.03)


def test_broadcast_region_contains_reference_row(tmp_path):
    out = tmp_path / "region.csv"
    code = dispatch(["broadcast", "--snr1-db", "3.0103", "--snr2-db", "10",
                     "--grid", "256", "--out", str(out)])
    assert code == 0
    header, rows = _read_csv(out)
    assert header == REGION_COLUMNS
    series = {row["series"] for row in rows}
    assert series == {"mlm", "mlm_no_interference", "separation", "hull", "ideal"}
    mlm = [row for row in rows if row["series"] == "mlm"]
    assert len(mlm) == 256
    best = min(mlm, key=lambda r: abs(float(r["alpha_c"]) - 2.0 / 3.0))
    assert float(best["alpha_c"]) == pytest.approx(2.0 / 3.0, abs=1e-6)
    assert float(best["sdr1"]) == pytest.approx(3.0, abs=1e-6)
    assert float(best["sdr2"]) == pytest.approx(1.0 + 30.0 / 7.0, abs=1e-6)
    ideal = [row for row in rows if row["series"] == "ideal"][0]
    assert float(ideal["sdr2"]) == pytest.approx(11.0, rel=1e-9)


def test_simulate_row_and_trace(tmp_path):
    out = tmp_path / "run.csv"
    trace = tmp_path / "trace.csv"
    code = dispatch([
        "simulate", "--lattice", "e8", "--snr-db", "10", "--sigma-q2", "1",
        "--mode", "finite-k", "--pe", "1e-2", "--loss-samples", "50000",
        "--blocks", "2000", "--seed", "5", "--out", str(out), "--trace", str(trace),
    ])
    assert code == 0
    header, rows = _read_csv(out)
    assert header == SIMULATE_COLUMNS
    row = rows[0]
    assert int(row["blocks"]) == 2000
    assert row["lattice"] == "e8"
    assert float(row["snr_db"]) == pytest.approx(10.0)
    sdr = float(row["sdr"])
    assert float(row["d_total"]) * sdr == pytest.approx(1.0, rel=1e-9)
    assert float(row["lemma_residual_max"]) <= 1e-9
    t_header, t_rows = _read_csv(trace)
    assert t_header == ["block", "sq_error", "failed", "lemma_residual"]
    assert len(t_rows) == 2000


def test_sweep_adds_sdr_opt(tmp_path):
    out = tmp_path / "sweep.csv"
    code = dispatch([
        "sweep", "--lattice", "cubic1", "--snr-db", "3.0103,10", "--sigma-q2", "1",
        "--mode", "asymptotic", "--blocks", "500", "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    header, rows = _read_csv(out)
    assert header[-1] == "sdr_opt"
    assert len(rows) == 2
    assert float(rows[0]["sdr_opt"]) == pytest.approx(3.0, rel=1e-4)
    assert float(rows[1]["sdr_opt"]) == pytest.approx(11.0, rel=1e-9)


def test_output_determinism(tmp_path):
    # identical argv, two runs into the same path: bodies byte-identical
    out = tmp_path / "region.csv"
    args = ["broadcast", "--snr1-db", "3", "--snr2-db", "10", "--grid", "64",
            "--out", str(out)]
    assert dispatch(args) == 0
    first = _body(out)
    assert dispatch(args) == 0
    assert _body(out) == first


def test_simulate_determinism(tmp_path):
    args = ["simulate", "--lattice", "d4", "--snr-db", "10", "--mode", "asymptotic",
            "--blocks", "500", "--seed", "11", "--interference", "gaussian:100"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert dispatch(args + ["--out", str(a)]) == 0
    assert dispatch(args + ["--out", str(b), "--threads", "2"]) == 0
    # bodies differ only in the config echo (threads flag), data rows match
    assert _body(a)[-1] == _body(b)[-1]


def test_config_echo_round_trip(tmp_path):
    out = tmp_path / "r.csv"
    argv = ["broadcast", "--snr1-db", "3.0103", "--snr2-db", "10",
            "--grid", "32", "--out", str(out)]
    assert dispatch(argv) == 0
    config = parse_config_header(str(out))
    assert config["command"] == "broadcast"
    assert config["snr1-db"] == 3.0103
    assert config["snr2-db"] == 10.0
    assert config["grid"] == 32


def test_json_format(tmp_path):
    out = tmp_path / "r.json"
    assert dispatch(["broadcast", "--snr1-db", "3", "--snr2-db", "10",
                     "--grid", "16", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"] == REGION_COLUMNS
    assert doc["config"]["command"] == "broadcast"
    assert len(doc["rows"]) > 16


def test_conflicting_flags_exit_2():
    assert dispatch(["simulate", "--lattice", "e8", "--snr-db", "10",
                     "--noise", "0.1", "--blocks", "10"]) == 2


def test_missing_noise_exit_2():
    assert dispatch(["simulate", "--lattice", "e8", "--blocks", "10"]) == 2


def test_unknown_flag_exit_2(capsys):
    assert dispatch(["simulate", "--lattice", "e8", "--snr-db", "10",
                     "--frobnicate", "1"]) == 2
    capsys.readouterr()


def test_unknown_command_exit_2(capsys):
    assert dispatch(["transmogrify"]) == 2
    capsys.readouterr()


def test_estimation_failure_exit_3(tmp_path):
    code = dispatch(["lattice-bench", "--lattice", "cubic1", "--pe", "1e-7",
                     "--samples", "2000", "--out", str(tmp_path / "x.csv")])
    assert code == 3


def test_invalid_manual_params_exit_2():
    assert dispatch(["params", "--snr-db", "10", "--mode", "manual",
                     "--alpha-c", "2.0", "--alpha-s", "0.5", "--beta", "1.0"]) == 2


def test_unwritable_path_exit_2():
    assert dispatch(["broadcast", "--snr1-db", "3", "--snr2-db", "10",
                     "--grid", "16", "--out", "/nonexistent-dir/x.csv"]) == 2
