"""float64 hot loops.

Every kernel has a pure-numpy twin; setting STREAMOPT_NO_NUMBA=1 before
import selects the numpy path (useful on boxes without a working numba,
and as the reference the jit path is benchmarked against).
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("STREAMOPT_NO_NUMBA", "0") != "1"

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def _np_edge_slacks(u, v, b, x):
    return x[u] - x[v] - b


def _np_edge_weights(u, v, b, x):
    s = x[u] - x[v] - b
    return 1.0 / (s * s)


def _np_lap_matvec(u, v, w, y, out):
    d = w * (y[u] - y[v])
    np.subtract.at(out, v, d)
    np.add.at(out, u, d)
    return out


def _np_grad_accumulate(u, v, b, x, g):
    inv = 1.0 / (x[u] - x[v] - b)
    np.subtract.at(g, u, inv)
    np.add.at(g, v, inv)
    return g


def _np_resistance_scores(u, v, w, pinv):
    # effective resistance of each edge under the dense pseudoinverse
    r = pinv[u, u] + pinv[v, v] - 2.0 * pinv[u, v]
    return w * r


if USE_NUMBA:

    @njit(cache=True)
    def edge_slacks(u, v, b, x):
        m = u.shape[0]
        s = np.empty(m)
        for i in range(m):
            s[i] = x[u[i]] - x[v[i]] - b[i]
        return s

    @njit(cache=True)
    def edge_weights(u, v, b, x):
        m = u.shape[0]
        w = np.empty(m)
        for i in range(m):
            s = x[u[i]] - x[v[i]] - b[i]
            w[i] = 1.0 / (s * s)
        return w

    @njit(cache=True)
    def lap_matvec(u, v, w, y, out):
        for i in range(u.shape[0]):
            d = w[i] * (y[u[i]] - y[v[i]])
            out[u[i]] += d
            out[v[i]] -= d
        return out

    @njit(cache=True)
    def grad_accumulate(u, v, b, x, g):
        for i in range(u.shape[0]):
            inv = 1.0 / (x[u[i]] - x[v[i]] - b[i])
            g[u[i]] -= inv
            g[v[i]] += inv
        return g

    @njit(cache=True)
    def resistance_scores(u, v, w, pinv):
        m = u.shape[0]
        out = np.empty(m)
        for i in range(m):
            out[i] = w[i] * (pinv[u[i], u[i]] + pinv[v[i], v[i]] - 2.0 * pinv[u[i], v[i]])
        return out

else:
    edge_slacks = _np_edge_slacks
    edge_weights = _np_edge_weights
    lap_matvec = _np_lap_matvec
    grad_accumulate = _np_grad_accumulate
    resistance_scores = _np_resistance_scores
