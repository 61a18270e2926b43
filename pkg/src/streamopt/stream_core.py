"""Semi-streaming plumbing: replayable edge streams, pass counting,
space auditing.

A "pass" is one complete sequential read of the edge stream.  Pass
counts are the complexity measure everything downstream is audited
against, so opening a pass always goes through the stream's counter.
Space auditing is cooperative: modules register live word counts (one
word = 64 bits) and the auditor tracks the peak.
"""

import collections
import math
from typing import Iterator, NamedTuple

from .errors import InfeasiblePointError, ParameterError, StreamIntegrityError


class EdgeRecord(NamedTuple):
    id: int
    u: int  # left vertex, 0-based
    v: int  # right vertex, 0-based
    w: int  # non-negative integer weight


class PassCounter:
    __slots__ = ("passes",)

    def __init__(self):
        self.passes = 0

    def bump(self):
        self.passes += 1


class SpaceAuditor:
    """Tracks cooperative word counts; peak_words only ever grows."""

    def __init__(self):
        self._live = {}
        self.peak_words = 0

    def register(self, name, words):
        self._live[name] = int(words)
        total = sum(self._live.values())
        if total > self.peak_words:
            self.peak_words = total

    def release(self, name):
        self._live.pop(name, None)

    @property
    def live_words(self):
        return sum(self._live.values())


def words_for_bits(bits):
    return max(1, math.ceil(bits / 64))


class GraphStream:
    """Replayable multi-pass source of weighted bipartite edges.

    Edge ids are u * n_right + v (simple graph; parallel edges are
    rejected), so they are stable no matter how a pass is ordered.
    """

    def __init__(self, n_left, n_right, m, counter=None, auditor=None):
        if n_left < 0 or n_right < 0:
            raise ParameterError("negative vertex counts")
        self.n_left = n_left
        self.n_right = n_right
        self.m = m
        self.counter = counter if counter is not None else PassCounter()
        self.auditor = auditor if auditor is not None else SpaceAuditor()

    @property
    def n(self):
        return self.n_left + self.n_right

    @property
    def id_space(self):
        return self.n_left * self.n_right

    def edge_id(self, u, v):
        return u * self.n_right + v

    def _iter_source(self):
        raise NotImplementedError

    def open_pass(self) -> Iterator[EdgeRecord]:
        self.counter.bump()
        return self._iter_source()

    def drain_pass(self):
        """Consume one full pass without touching the records."""
        collections.deque(self.open_pass(), maxlen=0)


class MemoryGraphStream(GraphStream):
    def __init__(self, n_left, n_right, edges, counter=None, auditor=None):
        seen = set()
        records = []
        for u, v, w in edges:
            if not (0 <= u < n_left and 0 <= v < n_right):
                raise ParameterError(f"edge ({u},{v}) outside the bipartition")
            if w < 0:
                raise ParameterError("negative weight")
            key = (u, v)
            if key in seen:
                raise ParameterError(f"parallel edge ({u},{v})")
            seen.add(key)
            records.append(EdgeRecord(u * n_right + v, u, v, int(w)))
        super().__init__(n_left, n_right, len(records), counter, auditor)
        self._records = tuple(records)

    def _iter_source(self):
        return iter(self._records)

    def drain_pass(self):
        # the buffer is immutable; draining is just counting the pass
        self.counter.bump()


class FileGraphStream(GraphStream):
    """File-backed stream re-reading the graph file on every pass.

    A cheap order-independent checksum from the first pass guards
    later passes against a file changing underneath us.
    """

    def __init__(self, path, counter=None, auditor=None):
        self.path = path
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
        if len(header) != 5 or header[0] != "p" or header[1] != "bipartite":
            raise ParameterError(f"bad header in {path}")
        n_left, n_right, m = (int(t) for t in header[2:])
        super().__init__(n_left, n_right, m, counter, auditor)
        self._checksum = None

    def _iter_source(self):
        count = 0
        checksum = 0
        seen_ids = set()
        with open(self.path, "r", encoding="utf-8") as fh:
            fh.readline()
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if parts[0] != "e" or len(parts) != 4:
                    raise StreamIntegrityError(f"bad edge line: {line!r}")
                u, v, w = int(parts[1]) - 1, int(parts[2]) - 1, int(parts[3])
                if not (0 <= u < self.n_left and 0 <= v < self.n_right):
                    raise ParameterError(f"edge ({u + 1},{v + 1}) out of range")
                if w < 0:
                    raise ParameterError("negative weight")
                rid = u * self.n_right + v
                if rid in seen_ids:
                    raise ParameterError(f"parallel edge ({u + 1},{v + 1})")
                seen_ids.add(rid)
                count += 1
                checksum ^= hash((rid, w))
                yield EdgeRecord(rid, u, v, w)
        if count != self.m:
            raise StreamIntegrityError(
                f"pass yielded {count} edges, header promised {self.m}"
            )
        if self._checksum is None:
            self._checksum = checksum
        elif checksum != self._checksum:
            raise StreamIntegrityError("edge multiset changed between passes")


def write_graph_file(path, n_left, n_right, edges):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"p bipartite {n_left} {n_right} {len(edges)}\n")
        for u, v, w in edges:
            fh.write(f"e {u + 1} {v + 1} {w}\n")


def stream_stats(stream):
    """(total vertices, edge count, max weight) in exactly one pass."""
    m = 0
    w_max = 0
    for rec in stream.open_pass():
        m += 1
        if rec.w > w_max:
            w_max = rec.w
    return stream.n, m, w_max


def slack_stream(lp, x):
    """Stream all M = m + 2n row slacks of the cover LP at x.

    Yields ("e", record, s_i) for edge rows (s_i = x_u - x_v - b_i),
    ("v", j, s) for vertex sign rows (s = x_j on the left, -x_j on the
    right), and ("box", j, s) for the cap rows (s = R - |x_j|).
    Consumes one pass; raises on the first non-positive slack rather
    than yielding a wrong value.
    """
    graph = lp.graph
    nl = graph.n_left
    demand = lp.demand
    for rec in graph.open_pass():
        s = x[rec.u] - x[nl + rec.v] - demand(rec)
        if s <= 0:
            raise InfeasiblePointError(("e", rec.id), s)
        yield ("e", rec, s)
    for j in range(graph.n):
        s = x[j] if j < nl else -x[j]
        if s <= 0:
            raise InfeasiblePointError(("v", j), s)
        yield ("v", j, s)
    for j in range(graph.n):
        s = lp.box - (x[j] if j < nl else -x[j])
        if s <= 0:
            raise InfeasiblePointError(("box", j), s)
        yield ("box", j, s)
