import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streamopt.errors import (
    InfeasiblePointError,
    ParameterError,
    StreamIntegrityError,
)
from streamopt.ipm import LPInstance
from streamopt.stream_core import (
    FileGraphStream,
    MemoryGraphStream,
    PassCounter,
    SpaceAuditor,
    slack_stream,
    stream_stats,
    words_for_bits,
    write_graph_file,
)

EDGES = [(0, 0, 3), (0, 1, 1), (1, 0, 2)]


def test_edge_ids_are_position_stable():
    g = MemoryGraphStream(2, 2, EDGES)
    ids = {(rec.u, rec.v): rec.id for rec in g.open_pass()}
    assert ids == {(0, 0): 0, (0, 1): 1, (1, 0): 2}
    assert g.edge_id(1, 1) == 3
    assert g.id_space == 4


def test_memory_stream_validation():
    with pytest.raises(ParameterError):
        MemoryGraphStream(2, 2, [(0, 0, 1), (0, 0, 2)])  # parallel
    with pytest.raises(ParameterError):
        MemoryGraphStream(2, 2, [(2, 0, 1)])  # out of range
    with pytest.raises(ParameterError):
        MemoryGraphStream(2, 2, [(0, 0, -1)])  # negative weight
    with pytest.raises(ParameterError):
        MemoryGraphStream(-1, 2, [])


def test_pass_counting_and_drain():
    g = MemoryGraphStream(2, 2, EDGES)
    assert g.counter.passes == 0
    list(g.open_pass())
    g.drain_pass()
    assert g.counter.passes == 2


def test_stream_stats_one_pass():
    g = MemoryGraphStream(2, 2, EDGES)
    assert stream_stats(g) == (4, 3, 3)
    assert g.counter.passes == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_replay_determinism(seed):
    import random

    r = random.Random(seed)
    edges = [
        (u, v, r.randint(0, 9)) for u in range(3) for v in range(3) if r.random() < 0.6
    ]
    g = MemoryGraphStream(3, 3, edges)
    first = list(g.open_pass())
    second = list(g.open_pass())
    assert first == second
    assert g.counter.passes == 2


def test_file_stream_roundtrip(tmp_path):
    path = tmp_path / "g.graph"
    write_graph_file(path, 2, 2, EDGES)
    g = FileGraphStream(str(path))
    assert (g.n_left, g.n_right, g.m) == (2, 2, 3)
    recs = sorted(g.open_pass())
    mem = sorted(MemoryGraphStream(2, 2, EDGES).open_pass())
    assert recs == mem


def test_file_stream_detects_mutation(tmp_path):
    path = tmp_path / "g.graph"
    write_graph_file(path, 2, 2, EDGES)
    g = FileGraphStream(str(path))
    list(g.open_pass())
    write_graph_file(path, 2, 2, [(0, 0, 7), (0, 1, 1), (1, 0, 2)])
    with pytest.raises(StreamIntegrityError):
        list(g.open_pass())


def test_file_stream_header_and_count_checks(tmp_path):
    bad = tmp_path / "bad.graph"
    bad.write_text("p graph 2 2 1\ne 1 1 1\n")
    with pytest.raises(ParameterError):
        FileGraphStream(str(bad))
    short = tmp_path / "short.graph"
    short.write_text("p bipartite 2 2 2\ne 1 1 1\n")
    with pytest.raises(StreamIntegrityError):
        list(FileGraphStream(str(short)).open_pass())


def test_space_auditor_peak():
    a = SpaceAuditor()
    a.register("x", 10)
    a.register("y", 5)
    assert a.peak_words == 15
    a.release("y")
    assert a.live_words == 10
    assert a.peak_words == 15
    a.release("missing")  # no-op


def test_words_for_bits():
    assert words_for_bits(1) == 1
    assert words_for_bits(64) == 1
    assert words_for_bits(65) == 2


def test_slack_stream_rows_and_values():
    g = MemoryGraphStream(2, 2, EDGES)
    lp = LPInstance(g, lambda rec: rec.w, [1, 1, -1, -1], 5)
    x = [10, 8, -4, -6]
    rows = list(slack_stream(lp, x))
    assert len(rows) == g.m + 2 * g.n
    by_kind = {}
    for kind, key, s in rows:
        by_kind.setdefault(kind, []).append(s)
        assert s > 0
    # edge slacks x_u - x_v - w
    assert sorted(by_kind["e"]) == sorted([10 + 4 - 3, 10 + 6 - 1, 8 + 4 - 2])
    assert sorted(by_kind["v"]) == sorted([10, 8, 4, 6])
    assert sorted(by_kind["box"]) == sorted([lp.box - v for v in (10, 8, 4, 6)])


def test_slack_stream_raises_on_violation():
    g = MemoryGraphStream(2, 2, EDGES)
    lp = LPInstance(g, lambda rec: rec.w, [1, 1, -1, -1], 5)
    with pytest.raises(InfeasiblePointError):
        list(slack_stream(lp, [1, 1, -1, -1]))  # edge slack 1+1-3 < 0
    with pytest.raises(InfeasiblePointError):
        list(slack_stream(lp, [10, 8, -4, lp.box + 1]))
