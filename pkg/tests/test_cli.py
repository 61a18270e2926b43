import json

import numpy as np
import pytest
import scipy.io
import scipy.sparse

from streamopt.cli import main
from streamopt.stream_core import write_graph_file

EDGES = [(0, 0, 3), (0, 1, 1), (1, 0, 2), (1, 1, 4)]


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "g.graph"
    write_graph_file(path, 2, 2, EDGES)
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1])


def test_stats(capsys, graph_file):
    code, rep = _run(capsys, ["stats", graph_file])
    assert code == 0
    assert rep["result"] == {"n": 4, "m": 4, "w_max": 4}
    assert rep["passes"] == 1
    assert rep["certified"] is True
    assert rep["command"] == "stats"


def test_solve_matching_deterministic(capsys, graph_file):
    code1, rep1 = _run(capsys, ["--seed", "7", "solve-matching", graph_file])
    code2, rep2 = _run(capsys, ["--seed", "7", "solve-matching", graph_file])
    assert code1 == code2 == 0
    rep1.pop("wall_time")
    rep2.pop("wall_time")
    assert rep1 == rep2
    assert rep1["result"]["weight"] == 7
    assert rep1["result"]["certified"] is True
    assert rep1["passes"] == rep1["result"]["passes"]


def test_solve_matching_fast_uncertified(capsys, graph_file):
    code, rep = _run(
        capsys, ["--profile", "fast", "--seed", "1", "solve-matching", graph_file]
    )
    assert code == 0
    assert rep["result"]["weight"] == 7
    assert rep["certified"] is False


def test_solve_matching_parallel_trials(capsys, graph_file):
    code, rep = _run(
        capsys,
        ["--profile", "fast", "--trials-parallel", "2", "solve-matching", graph_file],
    )
    assert code == 0
    assert rep["result"]["weight"] == 7


def test_solve_vertex_cover_integral(capsys, tmp_path):
    path = tmp_path / "k11.graph"
    write_graph_file(path, 1, 1, [(0, 0, 1)])
    code, rep = _run(capsys, ["solve-vertex-cover", str(path)])
    assert code == 0
    assert rep["result"]["size"] == 1  # Konig: equals the max matching size


def test_solve_vertex_cover_fractional(capsys, tmp_path):
    path = tmp_path / "k11.graph"
    write_graph_file(path, 1, 1, [(0, 0, 1)])
    dem = tmp_path / "d.txt"
    dem.write_text("d 1 1 2\n")
    code, rep = _run(
        capsys,
        ["--eps", "0.25", "solve-vertex-cover", str(path), "--demands", str(dem)],
    )
    assert code == 0
    assert rep["result"]["size"] <= 2 + 0.25
    assert rep["result"]["size"] >= 2 - 1e-6
    assert rep["certified"] is False


def test_solve_sdd(capsys, tmp_path):
    A = np.array([[3.0, -1.0, 0.0], [-1.0, 2.5, -0.5], [0.0, -0.5, 1.5]])
    mtx = tmp_path / "A.mtx"
    scipy.io.mmwrite(str(mtx), scipy.sparse.coo_matrix(A))
    rhs = tmp_path / "b.vec"
    rhs.write_text("1.0\n-2.0\n0.5\n")
    code, rep = _run(capsys, ["--eps", "1e-6", "solve-sdd", str(mtx), str(rhs)])
    assert code == 0
    assert rep["result"]["residual_Anorm_rel"] <= 1e-6
    x = np.array(rep["result"]["x"])
    np.testing.assert_allclose(A @ x, [1.0, -2.0, 0.5], atol=1e-5)


def test_sparsify_identity(capsys, graph_file):
    code, rep = _run(capsys, ["sparsify", graph_file])
    assert code == 0
    assert rep["result"]["edges_out"] == rep["result"]["edges_in"] == 4
    assert rep["result"]["exact"] is True


def test_selftest(capsys):
    code, rep = _run(capsys, ["selftest"])
    assert code == 0
    assert rep["result"]["failures"] == []


def test_usage_errors(capsys):
    assert main(["stats", "/nonexistent/g.graph"]) == 2
    assert main(["no-such-command"]) == 2


def test_json_flag_suppresses_summary(capsys, graph_file):
    code = main(["--json", "stats", graph_file])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.err.strip() == ""
