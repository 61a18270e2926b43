"""Classical in-memory reference implementations.

Everything here is test/certification surface: deterministic, pass-free
(no GraphStream is ever touched), and desk-scale only.  The streaming
modules never call into this file.
"""

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from .errors import NoSolutionError, ParameterError


# ---------------------------------------------------------------------------
# exact matchings


def hungarian_mwm(n_left, n_right, edges):
    """Exact maximum-weight matching, (set of edge ids, total weight).

    edges: iterable of (id, u, v, w) with integer w >= 0.  Non-edges
    enter the assignment with zero profit, which is harmless because
    weights are non-negative.
    """
    if max(n_left, n_right, 1) > 64:
        raise ParameterError("oracle capped at 64 vertices per side")
    profit = np.zeros((n_left, n_right))
    by_pos = {}
    for eid, u, v, w in edges:
        profit[u, v] = w
        by_pos[(u, v)] = (eid, w)
    if not by_pos:
        return set(), 0
    rows, cols = linear_sum_assignment(profit, maximize=True)
    chosen = set()
    total = 0
    for u, v in zip(rows, cols):
        if (u, v) in by_pos:
            eid, w = by_pos[(u, v)]
            chosen.add(eid)
            total += w
    return chosen, total


def brute_force_mwm(edges, weight=None):
    """Exact maximum-weight matching by subset recursion (m <= 22).

    weight: optional map id -> weight overriding the stream weights
    (used to maximize under perturbed demands with exact big integers).
    """
    edges = list(edges)
    if len(edges) > 22:
        raise ParameterError("brute force capped at 22 edges")
    if weight is None:
        weight = {eid: w for eid, _, _, w in edges}
    # optimistic suffix sums for pruning
    suffix = [0] * (len(edges) + 1)
    for i in range(len(edges) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + max(0, weight[edges[i][0]])
    best = [0, frozenset()]

    def rec(i, used_l, used_r, acc):
        if i == len(edges) or acc + suffix[i] <= best[0]:
            return
        eid, u, v, _ = edges[i]
        if u not in used_l and v not in used_r:
            stack.append(eid)
            nacc = acc + weight[eid]
            if nacc > best[0]:
                best[0] = nacc
                best[1] = frozenset(stack)
            rec(i + 1, used_l | {u}, used_r | {v}, nacc)
            stack.pop()
        rec(i + 1, used_l, used_r, acc)

    stack = []
    rec(0, frozenset(), frozenset(), 0)
    return set(best[1]), best[0]


def max_cardinality(n_left, n_right, edges):
    """Size of a maximum matching (unit weights)."""
    unit = [(eid, u, v, 1) for eid, u, v, _ in edges]
    _, size = hungarian_mwm(n_left, n_right, unit)
    return size


# ---------------------------------------------------------------------------
# dense linear algebra


def dense_solve(A, b, precision=256):
    """High-precision dense solve; raises NoSolutionError if singular
    and inconsistent."""
    with mpmath.workprec(precision):
        M = mpmath.matrix([[mpmath.mpf(x) for x in row] for row in A])
        rhs = mpmath.matrix([mpmath.mpf(x) for x in b])
        try:
            x = mpmath.lu_solve(M, rhs)
        except ZeroDivisionError as exc:
            raise NoSolutionError("singular system") from exc
        return [float(v) for v in x]


def dense_pinv_solve(A, b):
    """Least-norm solution via the pseudoinverse; raises if b is not in
    the range of A."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x, residuals, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if np.linalg.norm(A @ x - b) > 1e-8 * max(1.0, np.linalg.norm(b)):
        raise NoSolutionError("right-hand side outside the range")
    return x


# ---------------------------------------------------------------------------
# dense LP / central-path reference
#
# A dense LP is the triple (A, b, c): minimize c.x subject to A x >= b.


class DenseLP:
    def __init__(self, A, b, c):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)

    @property
    def rows(self):
        return self.A.shape[0]


def dense_slacks(lp, x):
    return lp.A @ np.asarray(x, dtype=float) - lp.b


def dense_gradient(lp, x, t):
    s = dense_slacks(lp, x)
    if np.any(s <= 0):
        raise ValueError("infeasible point")
    return t * lp.c - lp.A.T @ (1.0 / s)


def dense_hessian(lp, x):
    s = dense_slacks(lp, x)
    return (lp.A / (s * s)[:, None]).T @ lp.A


def phi_dense(lp, x, t):
    """|| grad f_t(x) ||_{H(x)^-1}."""
    g = dense_gradient(lp, x, t)
    H = dense_hessian(lp, x)
    return float(np.sqrt(max(0.0, g @ np.linalg.solve(H, g))))


def psi_dense(lp, x):
    s = dense_slacks(lp, x)
    g = -lp.A.T @ (1.0 / s)
    H = dense_hessian(lp, x)
    return float(np.sqrt(max(0.0, g @ np.linalg.solve(H, g))))


def newton_exact(lp, x, t):
    """One exact Newton step of f_t from x."""
    g = dense_gradient(lp, x, t)
    H = dense_hessian(lp, x)
    return np.asarray(x, dtype=float) - np.linalg.solve(H, g)


def _mp_parts(lp, x, t):
    A = mpmath.matrix([[mpmath.mpf(v) for v in row] for row in lp.A])
    b = mpmath.matrix([mpmath.mpf(v) for v in lp.b])
    c = mpmath.matrix([mpmath.mpf(v) for v in lp.c])
    xx = mpmath.matrix([mpmath.mpf(v) for v in x])
    s = A * xx - b
    if min(s) <= 0:
        raise NoSolutionError("point is not interior")
    M, n = A.rows, A.cols
    g = mpmath.mpf(t) * c - A.T * mpmath.matrix([1 / s[i] for i in range(M)])
    H = mpmath.zeros(n, n)
    for i in range(M):
        wi = 1 / (s[i] * s[i])
        for p in range(n):
            if A[i, p]:
                for q in range(n):
                    if A[i, q]:
                        H[p, q] += wi * A[i, p] * A[i, q]
    return xx, g, H


def phi_precise(lp, x, t, precision=300):
    """|| grad f_t(x) ||_{H(x)^-1} at high precision (float result)."""
    with mpmath.workprec(precision):
        _, g, H = _mp_parts(lp, x, t)
        y = mpmath.lu_solve(H, g)
        acc = sum(g[i] * y[i] for i in range(len(y)))
        return float(mpmath.sqrt(acc)) if acc > 0 else 0.0


def phi_after_newton_precise(lp, x, t, precision=300):
    """(Phi before, Phi after) one exact Newton step of f_t, with the
    step point never rounded to double in between."""
    with mpmath.workprec(precision):
        xx, g, H = _mp_parts(lp, x, t)
        y = mpmath.lu_solve(H, g)
        acc = sum(g[i] * y[i] for i in range(len(y)))
        before = float(mpmath.sqrt(acc)) if acc > 0 else 0.0
        x2 = xx - y
        _, g2, H2 = _mp_parts(lp, [x2[i] for i in range(len(x2))], t)
        y2 = mpmath.lu_solve(H2, g2)
        acc2 = sum(g2[i] * y2[i] for i in range(len(y2)))
        after = float(mpmath.sqrt(acc2)) if acc2 > 0 else 0.0
        return before, after


def lp_optimum(lp):
    """Optimal value of min c.x s.t. A x >= b (variables free)."""
    res = linprog(
        lp.c,
        A_ub=-lp.A,
        b_ub=-lp.b,
        bounds=[(None, None)] * lp.A.shape[1],
        method="highs",
    )
    if not res.success:
        raise NoSolutionError(res.message)
    return res.fun


def central_path_reference(lp, t, x0, precision=300, tol=mpmath.mpf("1e-20")):
    """Minimizer of f_t by damped dense Newton, to gradient norm <= tol.

    Desk instrument for validating potentials and duality gaps; capped
    at 30 rows by its callers.
    """
    with mpmath.workprec(precision):
        A = mpmath.matrix([[mpmath.mpf(x) for x in row] for row in lp.A])
        b = mpmath.matrix([mpmath.mpf(x) for x in lp.b])
        c = mpmath.matrix([mpmath.mpf(x) for x in lp.c])
        tt = mpmath.mpf(t)
        x = mpmath.matrix([mpmath.mpf(v) for v in x0])
        M, n = A.rows, A.cols
        for _ in range(400):
            s = A * x - b
            if min(s) <= 0:
                raise NoSolutionError("reference Newton left the interior")
            g = tt * c - A.T * mpmath.matrix([1 / s[i] for i in range(M)])
            H = mpmath.zeros(n, n)
            for i in range(M):
                wi = 1 / (s[i] * s[i])
                for p in range(n):
                    if A[i, p]:
                        for q in range(n):
                            if A[i, q]:
                                H[p, q] += wi * A[i, p] * A[i, q]
            gnorm = mpmath.norm(g)
            if gnorm <= tol:
                return [float(v) for v in x]
            d = mpmath.lu_solve(H, g)
            lam = mpmath.sqrt(sum(g[i] * d[i] for i in range(n)))
            step = 1 if lam < mpmath.mpf("0.25") else 1 / (1 + lam)
            x = x - step * d
        raise NoSolutionError("reference Newton did not converge")
