import numpy as np
import pytest

from streamopt import _kernels


@pytest.fixture
def data(rng):
    m, n = 300, 40
    u = rng.integers(0, n // 2, size=m)
    v = rng.integers(n // 2, n, size=m)
    b = rng.uniform(0.0, 1.0, size=m)
    x = np.concatenate(
        [rng.uniform(2.0, 3.0, n // 2), rng.uniform(-3.0, -2.0, n - n // 2)]
    )
    w = rng.uniform(0.5, 2.0, size=m)
    y = rng.normal(size=n)
    p = rng.normal(size=(n, n))
    return m, n, u, v, b, x, w, y, p @ p.T / n


def test_edge_slacks_twins_agree(data):
    m, n, u, v, b, x, w, y, pinv = data
    a = _kernels.edge_slacks(u, v, b, x)
    r = _kernels._np_edge_slacks(u, v, b, x)
    np.testing.assert_allclose(a, r, rtol=1e-14)
    assert (a > 0).all()


def test_edge_weights_twins_agree(data):
    m, n, u, v, b, x, w, y, pinv = data
    np.testing.assert_allclose(
        _kernels.edge_weights(u, v, b, x), _kernels._np_edge_weights(u, v, b, x),
        rtol=1e-14,
    )


def test_lap_matvec_twins_agree(data):
    m, n, u, v, b, x, w, y, pinv = data
    a = _kernels.lap_matvec(u, v, w, y, np.zeros(n))
    r = _kernels._np_lap_matvec(u, v, w, y, np.zeros(n))
    np.testing.assert_allclose(a, r, rtol=1e-12, atol=1e-12)
    # Laplacian matvec annihilates constants
    ones = _kernels.lap_matvec(u, v, w, np.ones(n), np.zeros(n))
    np.testing.assert_allclose(ones, 0.0, atol=1e-12)


def test_grad_accumulate_twins_agree(data):
    m, n, u, v, b, x, w, y, pinv = data
    a = _kernels.grad_accumulate(u, v, b, x, np.zeros(n))
    r = _kernels._np_grad_accumulate(u, v, b, x, np.zeros(n))
    np.testing.assert_allclose(a, r, rtol=1e-12, atol=1e-12)


def test_resistance_scores_twins_agree(data):
    m, n, u, v, b, x, w, y, pinv = data
    np.testing.assert_allclose(
        _kernels.resistance_scores(u, v, w, pinv),
        _kernels._np_resistance_scores(u, v, w, pinv),
        rtol=1e-12,
    )
