import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import feasible_weights, random_orthogonal
from rankone.cli import main


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


@pytest.fixture
def example1(tmp_path):
    return write(tmp_path, "ex1.json", {"eigenvalues": [5, 4], "weights": [3, 3, 2, 1]})


@pytest.fixture
def example2(tmp_path):
    return write(tmp_path, "ex2.json", {"eigenvalues": [5, 2, 2], "weights": [4, 4, 1]})


def test_feasible_exit_codes(example1, example2, capsys):
    code, out = run(["feasible", example1], capsys)
    assert code == 0 and json.loads(out)["feasible"]
    code, out = run(["feasible", example2], capsys)
    assert code == 2 and json.loads(out)["violating_p"] == 2


def test_decompose_and_verify_round_trip(example1, tmp_path, capsys):
    out_file = tmp_path / "d.json"
    assert main(["decompose", example1, "--out", str(out_file)]) == 0
    data = json.loads(out_file.read_text())
    np.testing.assert_allclose(np.abs(data["vectors"][0]), [0.0, 1.0], atol=1e-12)
    assert data["report"]["reconstruction_error"] <= 1e-12
    code, out = run(["verify", str(out_file)], capsys)
    assert code == 0 and json.loads(out)["reconstruction_error"] <= 1e-12


def test_verify_catches_tampering(example1, tmp_path, capsys):
    out_file = tmp_path / "d.json"
    main(["decompose", example1, "--out", str(out_file)])
    data = json.loads(out_file.read_text())
    data["vectors"][1][1] += 1e-3
    code, out = run(["verify", write(tmp_path, "bad.json", data)], capsys)
    assert code == 3
    assert json.loads(out)["reconstruction_error"] > 1e-6


def test_decompose_infeasible_reports(example2, capsys):
    code, out = run(["decompose", example2], capsys)
    assert code == 2
    assert json.loads(out)["feasibility"]["violating_p"] == 2


@pytest.mark.parametrize(
    "payload",
    [
        {"eigenvalues": [1, 1]},
        {"eigenvalues": [1, 1], "matrix": [[1, 0], [0, 1]], "weights": [1, 1]},
        {"matrix": [[1, 0, 0], [0, 1, 0]], "weights": [1, 1]},
        {"eigenvalues": [1, 1], "weights": [1, -1, 1]},
        [1, 2, 3],
    ],
)
def test_malformed_inputs(payload, tmp_path, capsys):
    assert main(["decompose", write(tmp_path, "bad.json", payload)]) == 1


def test_unparsable_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    assert main(["feasible", str(path)]) == 1


def test_negative_operator(tmp_path):
    assert main(["decompose", write(tmp_path, "neg.json", {"matrix": [[1, 0], [0, -1]], "weights": [0.5, 0.5]})]) == 2


def test_deterministic_output(tmp_path, capsys):
    rng = np.random.default_rng(11)
    q = random_orthogonal(rng, 8)
    b = rng.uniform(0.5, 10, 8)
    c = feasible_weights(rng, b, 20)
    path = write(tmp_path, "p.json", {"matrix": ((q * b) @ q.T).tolist(), "weights": c.tolist()})
    first = run(["decompose", path], capsys)
    second = run(["decompose", path], capsys)
    assert first[0] == 0
    assert first[1] == second[1]


def test_frame_command(tmp_path, capsys):
    path = write(tmp_path, "f.json", {"eigenvalues": [5, 4], "norms": np.sqrt([3, 3, 2, 1]).tolist()})
    code, out = run(["frame", path], capsys)
    data = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(data["frame_operator"], np.diag([5.0, 4.0]), atol=1e-12)
    assert data["bounds"] == [4.0, 5.0]


def test_tight_command(capsys):
    code, out = run(["tight", "-n", "2", "1", "1", "1"], capsys)
    data = json.loads(out)
    assert code == 0 and data["frame_bound"] == 1.5 and data["report"]["tight"]
    assert main(["tight", "-n", "2", "2", "1", "1"]) == 2
    assert main(["tight", "-n", "3", "1", "1"]) == 1


def test_csv_output(example1, capsys):
    code, out = run(["decompose", example1, "--format", "csv"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "weight,x0,x1" and len(lines) == 5
    assert main(["feasible", example1, "--format", "csv"]) == 1


def test_tolerance_option(tmp_path, capsys):
    path = write(tmp_path, "t.json", {"eigenvalues": [2, 1], "weights": [2.000001, 0.999999]})
    assert main(["feasible", path]) == 2
    assert main(["feasible", path, "--tol", "1e-5"]) == 0
    path = write(tmp_path, "t2.json", {"eigenvalues": [2, 1], "weights": [2.000001, 0.999999], "options": {"tol": 1e-5}})
    assert main(["feasible", path]) == 0
    capsys.readouterr()


def test_stream_command(tmp_path, capsys):
    code, out = run(["stream", "const:0.5", "--blocks", "3"], capsys)
    data = json.loads(out)
    assert code == 0
    assert [b["n"] for b in data["blocks"]] == [4, 8, 12]
    assert data["verification"]["passed"] and data["verification"]["max_identity_error"] <= 1e-12
    weights = tmp_path / "w.txt"
    weights.write_text(" ".join(["0.5"] * 40))
    code, out = run(["stream", str(weights), "--blocks", "2"], capsys)
    assert code == 0
    assert main(["stream", "const:1", "--blocks", "1", "--cap", "100"]) == 2
    assert main(["stream", "const:1.5"]) == 1
    assert main(["stream", "nonsense"]) == 1


def test_module_entry_point(example1):
    proc = subprocess.run([sys.executable, "-m", "rankone", "feasible", example1], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["feasible"]
