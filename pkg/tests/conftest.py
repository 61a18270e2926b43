"""Shared test fixtures and builders."""

import random

import numpy as np
import pytest

from streamopt.oracles import DenseLP
from streamopt.stream_core import MemoryGraphStream


def gen_instance(n_l, p, seed, w_cap=8):
    """Seeded random bipartite instance with n_l = n_r, edge probability
    p, integer weights in [1, w_cap].  One edge weight is pinned to
    w_cap so the weight ceiling is identical across instances."""
    rng = random.Random(f"ens:{n_l}:{p}:{seed}")
    edges = []
    for u in range(n_l):
        for v in range(n_l):
            if rng.random() < p:
                edges.append((u, v, rng.randint(1, w_cap)))
    if not edges:
        edges.append((0, 0, w_cap))
    u0, v0, _ = edges[rng.randrange(len(edges))]
    edges = [(u, v, w_cap if (u, v) == (u0, v0) else w) for u, v, w in edges]
    return edges


# Cell allocation over (n_l, p): every cell represented, skewed toward
# small n_l so the rigorous profile fits its wall-clock budget.
ALLOCATION = (
    [(3, 0.6, s) for s in range(6)]
    + [(3, 0.9, s) for s in range(6)]
    + [(4, 0.3, s) for s in range(4)]
    + [(4, 0.6, s) for s in range(8)]
    + [(4, 0.9, s) for s in range(7)]
    + [(5, 0.3, s) for s in range(5)]
    + [(5, 0.6, s) for s in range(4)]
    + [(5, 0.9, s) for s in range(4)]
    + [(6, 0.3, s) for s in range(3)]
    + [(6, 0.6, s) for s in range(2)]
    + [(6, 0.9, s) for s in range(1)]
)
assert len(ALLOCATION) == 50


def make_stream(n_l, edges):
    return MemoryGraphStream(n_l, n_l, edges)


def dense_twin(graph, demands, c, box):
    """DenseLP mirror of the streamed cover LP: m edge rows, n sign
    rows, n box rows, in the module's row order."""
    n = graph.n
    nl = graph.n_left
    A, b = [], []
    for rec in sorted(graph._records, key=lambda r: r.id):
        row = [0.0] * n
        row[rec.u] = 1.0
        row[nl + rec.v] = -1.0
        A.append(row)
        b.append(float(demands[rec.id]))
    for j in range(n):
        row = [0.0] * n
        row[j] = 1.0 if j < nl else -1.0
        A.append(row)
        b.append(0.0)
    for j in range(n):
        row = [0.0] * n
        row[j] = -1.0 if j < nl else 1.0
        A.append(row)
        b.append(-float(box))
    return DenseLP(A, b, c)


def random_sddm(n, seed, density=0.15, excess_frac=1.0):
    """Connected random SDDM system (edge list, diagonal excess)."""
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((j, i, float(rng.uniform(0.5, 2.0))))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges.append((i, j, float(rng.uniform(0.5, 2.0))))
    D = rng.uniform(0.1, 1.0, n) * excess_frac + 1e-3
    return edges, D


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
