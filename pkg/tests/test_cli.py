import json
import os

import numpy as np
import pytest

from isac_jscc import build_binary_isac_channel, build_binary_source, save_channel
from isac_jscc.cli import main

DATA = os.path.join(os.path.dirname(__file__), "..", "data", "binary_q04.json")


@pytest.fixture
def channel_file(tmp_path):
    path = tmp_path / "chan.json"
    save_channel(str(path), build_binary_isac_channel(0.4),
                 build_binary_source(0.4))
    return str(path)


@pytest.fixture
def costly_channel_file(tmp_path):
    # uninformative feedback: no input can sense, D_s_min = q = 0.4
    spec = build_binary_isac_channel(0.4)
    law = np.zeros((2, 2, 2, 2))
    law[:, :, 0, 0] = 0.5
    law[:, :, 1, 0] = 0.5
    from isac_jscc import Alphabet, ChannelSpec
    blind = ChannelSpec(spec.state_alphabet, spec.input_alphabet,
                        spec.output_alphabet, spec.feedback_alphabet,
                        spec.state_prior, law, spec.cost,
                        spec.state_distortion)
    path = tmp_path / "blind.json"
    save_channel(str(path), blind, build_binary_source(0.4))
    return str(path)


def test_validate_ok(channel_file, capsys):
    assert main(["validate", "--channel", channel_file]) == 0
    assert "valid" in capsys.readouterr().out


def test_validate_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"state_prior": [0.5, 0.6]}')
    assert main(["validate", "--channel", str(bad)]) == 1


def test_validate_nonstochastic(tmp_path, capsys):
    path = tmp_path / "chan.json"
    save_channel(str(path), build_binary_isac_channel(0.4))
    doc = json.loads(path.read_text())
    doc["law"][0][0][0][0] = 0.9
    path.write_text(json.dumps(doc))
    assert main(["validate", "--channel", str(path)]) == 1
    assert "NonStochasticRow" in capsys.readouterr().err


def test_capacity_json(channel_file, tmp_path, capsys):
    out = tmp_path / "cap.json"
    code = main(["capacity", "--channel", channel_file, "--ds", "0.16",
                 "--output", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["capacity_bits"] == pytest.approx(0.38838, abs=1e-4)
    assert doc["achieved_d_s"] <= 0.16 + 1e-6


def test_capacity_infeasible_exit_code(costly_channel_file):
    assert main(["capacity", "--channel", costly_channel_file,
                 "--ds", "0.0"]) == 2


def test_sweep_csv(channel_file, tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["sweep", "--channel", channel_file, "--grid", "5",
                 "--output", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "d_s,b,c_bits"
    assert len(lines) == 6


def test_rd_point(channel_file, tmp_path):
    out = tmp_path / "rd.json"
    assert main(["rd", "--channel", channel_file, "--du", "0.11",
                 "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    # H_b(0.4) - H_b(0.11) for a Bernoulli(0.4) source under Hamming loss
    assert doc["rate_bits"] == pytest.approx(0.47103, abs=1e-4)


def test_rd_grid_csv(channel_file, tmp_path):
    out = tmp_path / "rd.csv"
    assert main(["rd", "--channel", channel_file, "--grid", "5",
                 "--output", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "d_u,d_s,r_bits"
    assert all(line.split(",")[1] == "inf" for line in lines[1:])


def test_binary_output(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    assert main(["binary", "--p", "0.4", "--q", "0.4", "--grid", "20",
                 "--output", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("d,c_curve,r_curve\n")
    line = [l for l in text.splitlines() if l.startswith("intersection")][0]
    vals = {kv.split("=")[0]: float(kv.split("=")[1])
            for kv in line.replace("intersection: ", "").split(", ")}
    assert vals["d_s"] == pytest.approx(0.16, abs=1e-6)
    assert vals["d_u"] == pytest.approx(0.24, abs=1e-6)
    assert vals["value"] == pytest.approx(0.38838, abs=1e-4)


def test_simulate_symbolwise_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["simulate", "--mode", "symbolwise", "--p", "0.4", "--q", "0.4",
            "--a", "1.0", "--b", "0.0", "--n", "2000", "--seed", "5"]
    assert main(argv + ["--output", str(out1)]) == 0
    assert main(argv + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    doc = json.loads(out1.read_text())
    assert doc["mode"] == "symbolwise"
    assert "timestamp" not in doc["config"]


def test_simulate_timestamp_opt_in(tmp_path):
    out = tmp_path / "t.json"
    assert main(["simulate", "--mode", "symbolwise", "--n", "500",
                 "--seed", "5", "--timestamp", "--output", str(out)]) == 0
    assert "timestamp" in json.loads(out.read_text())["config"]


def test_simulate_random_coding(tmp_path):
    out = tmp_path / "rc.json"
    assert main(["simulate", "--mode", "random-coding", "--rate", "0.25",
                 "--n", "20", "--trials", "50", "--seed", "1",
                 "--epsilon", "0.45", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert 0.0 <= doc["p_e"] <= 1.0
    assert "trace" not in doc  # excluded unless --trace


def test_simulate_too_large_exit_code():
    assert main(["simulate", "--mode", "random-coding", "--rate", "0.5",
                 "--n", "100", "--trials", "1", "--seed", "1"]) == 4


def test_bundled_sample_channel():
    assert main(["validate", "--channel", DATA]) == 0
