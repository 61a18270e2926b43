"""Streaming SDDM solver: one pass builds a spectral sparsifier, the
preconditioner P = L_H + D is factored in memory, and iterative
refinement then spends exactly one pass per residual update.

The appendix-style reductions (doubling away positive off-diagonals,
splitting and grounding Laplacian components) lift the solver to
general SDD0 systems, including singular ones.
"""

import math
import random

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .errors import NoSolutionError, ParameterError, SolverDivergenceError
from .scalars import fast_context
from .stream_core import PassCounter

SPARSIFIER_CONSTANT = 200  # c_s in the edge budget


def delta_for(n):
    """Refinement quality floor; 4*delta < 1 for every n."""
    if n <= 2:
        return 0.125
    return min(0.125, 1.0 / math.log2(n))


def refinement_steps(eps, delta):
    return math.ceil(math.log(1.0 / eps) / math.log(1.0 / (4.0 * delta)))


def edge_budget(delta, n):
    if not 0 < delta < 1:
        raise ParameterError("delta must be in (0, 1)")
    ln = max(1.0, math.log2(max(n, 2)))
    return math.ceil(SPARSIFIER_CONSTANT * delta**-2 * n * ln * ln)


class SparseGraph:
    def __init__(self, n, edges, delta, exact):
        self.n = n
        self.edges = edges  # list of (u, v, weight), weights > 0
        self.delta = delta
        self.exact = exact  # True when the graph itself fit the budget


def _laplacian_dense(n, edges):
    L = np.zeros((n, n))
    for u, v, w in edges:
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    return L


def _sample_chunk(n, edges, q, rng):
    """Effective-resistance sampling of one in-memory chunk.

    Resistances come from the dense pseudoinverse, which is exact at
    desk scale; q draws with replacement are coalesced by summing
    w_e / (q p_e).
    """
    if len(edges) <= q:
        return list(edges)
    arr_u = np.array([e[0] for e in edges], dtype=np.int64)
    arr_v = np.array([e[1] for e in edges], dtype=np.int64)
    arr_w = np.array([e[2] for e in edges], dtype=float)
    pinv = np.linalg.pinv(_laplacian_dense(n, edges))
    scores = _kernels.resistance_scores(arr_u, arr_v, arr_w, pinv)
    scores = np.maximum(scores, 1e-300)
    p = scores / scores.sum()
    counts = np.bincount(
        rng.choice(len(edges), size=q, p=p), minlength=len(edges)
    )
    out = []
    for i in np.nonzero(counts)[0]:
        out.append((int(arr_u[i]), int(arr_v[i]), arr_w[i] * counts[i] / (q * p[i])))
    return out


def sparsify(edge_pass, n, m, delta, seed=0, budget_override=None):
    """One-pass merge-and-reduce spectral sparsifier.

    edge_pass: iterator of (u, v, w) for one full pass (already opened,
    so the pass is charged to the caller's stream).  budget_override is
    a test hook forcing the sampling path on small inputs.
    """
    if not 0 < delta < 1:
        raise ParameterError("delta must be in (0, 1)")
    budget = budget_override if budget_override else edge_budget(delta, n)
    if m <= budget:
        edges = list(edge_pass)
        return SparseGraph(n, edges, delta, exact=True)

    levels = max(1, math.ceil(math.log2(m / budget)))
    delta_prime = delta / (2 * levels + 2)
    q = math.ceil(9.0 * delta_prime**-2 * n * max(1.0, math.log(n)))
    q = min(q, budget)
    chunk_cap = 2 * budget
    rng = np.random.default_rng(seed ^ 0x5EED)

    stack = []  # (level, edges)

    def push(level, edges):
        while stack and stack[-1][0] == level:
            _, other = stack.pop()
            edges = _sample_chunk(n, other + edges, q, rng)
            level += 1
        stack.append((level, edges))

    buf = []
    for e in edge_pass:
        buf.append(e)
        if len(buf) >= chunk_cap:
            push(0, _sample_chunk(n, buf, q, rng))
            buf = []
    if buf:
        push(0, _sample_chunk(n, buf, q, rng))
    merged = []
    for _, edges in stack:
        merged.extend(edges)
    if len(merged) > q:
        merged = _sample_chunk(n, merged, q, rng)
    return SparseGraph(n, merged, delta, exact=False)


# ---------------------------------------------------------------------------
# preconditioner


def _ldl_factor(A, n):
    """In-place LDL^T of a dense list-of-lists SPD matrix.

    The products L_kj * d_j are hoisted out of the update loop and
    structural zeros are skipped, which matters because every entry is
    an extended-precision scalar."""
    for k in range(n):
        Ak = A[k]
        dk = Ak[k]
        scaled = []
        for j in range(k):
            t = Ak[j]
            if t:
                td = t * A[j][j]
                dk -= t * td
                scaled.append((j, td))
        if dk <= 0:
            raise SolverDivergenceError("non-positive pivot in LDL")
        Ak[k] = dk
        for i in range(k + 1, n):
            Ai = A[i]
            v = Ai[k]
            for j, td in scaled:
                t = Ai[j]
                if t:
                    v -= t * td
            Ai[k] = v / dk
    return A


def _ldl_solve(A, n, r):
    y = list(r)
    for i in range(1, n):
        Ai = A[i]
        acc = y[i]
        for j in range(i):
            t = Ai[j]
            if t:
                acc -= t * y[j]
        y[i] = acc
    for i in range(n):
        y[i] = y[i] / A[i][i]
    for i in range(n - 2, -1, -1):
        acc = y[i]
        for j in range(i + 1, n):
            t = A[j][i]
            if t:
                acc -= t * y[j]
        y[i] = acc
    return y


class Preconditioner:
    """P = L_H + D, factored for repeated solves."""

    def __init__(self, H, D, ctx=None, delta=None):
        self.n = H.n
        self.delta = delta if delta is not None else H.delta
        self.exact = H.exact
        self.ctx = ctx if ctx is not None else fast_context()
        if self.ctx.is_float:
            P = _laplacian_dense(self.n, H.edges)
            P[np.diag_indices(self.n)] += np.asarray(D, dtype=float)
            try:
                self._factor = scipy.linalg.cho_factor(P)
            except np.linalg.LinAlgError as exc:
                raise SolverDivergenceError("preconditioner not SPD") from exc
            self._kind = "chol"
        else:
            zero = self.ctx.zero()
            P = [[zero for _ in range(self.n)] for _ in range(self.n)]
            for u, v, w in H.edges:
                wv = w if not isinstance(w, (int, float)) else self.ctx.from_int(0) + w
                P[u][u] += wv
                P[v][v] += wv
                P[u][v] -= wv
                P[v][u] -= wv
            for i in range(self.n):
                P[i][i] += D[i]
            self._factor = _ldl_factor(P, self.n)
            self._kind = "ldl"

    def solve(self, r):
        if self._kind == "chol":
            return scipy.linalg.cho_solve(self._factor, np.asarray(r, dtype=float))
        return _ldl_solve(self._factor, self.n, r)


def build_preconditioner(H, D, ctx=None):
    return Preconditioner(H, D, ctx)


def precond_solve(P, r, tol=None):
    """delta-approximate solve of P y = r.  The direct factorizations
    are exact to working precision, which dominates any requested tol;
    tol is kept for the contract."""
    return P.solve(r)


# ---------------------------------------------------------------------------
# systems and the refinement loop


class MatrixSDDMSystem:
    """In-memory SDDM system A = L_G + D acting as its own edge stream."""

    def __init__(self, n, edges, D, counter=None, ctx=None):
        self.n = n
        self.m = len(edges)
        self.ctx = ctx if ctx is not None else fast_context()
        self.counter = counter if counter is not None else PassCounter()
        self._u = np.array([e[0] for e in edges], dtype=np.int64)
        self._v = np.array([e[1] for e in edges], dtype=np.int64)
        self._w = np.array([e[2] for e in edges], dtype=float)
        self.edges = list(edges)
        self.D = np.asarray(D, dtype=float)

    def edges_pass(self):
        self.counter.bump()
        return iter(self.edges)

    def drain_pass(self):
        self.counter.bump()

    def residual_pass(self, r, y):
        """r <- r - A y in one pass over the edges."""
        self.counter.bump()
        y = np.asarray(y, dtype=float)
        Ay = self.D * y
        _kernels.lap_matvec(self._u, self._v, self._w, y, Ay)
        return r - Ay

    def dense(self):
        A = _laplacian_dense(self.n, self.edges)
        A[np.diag_indices(self.n)] += self.D
        return A


class StreamLSLog:
    def __init__(self):
        self.iterates = []
        self.residual_norms = []
        self.skipped_from = None
        self.attempts = 1
        self.passes = 0


def stream_ls(system, b, eps, log=None):
    """Solve A x = b to ||x - A^-1 b||_A <= eps ||A^-1 b||_A.

    Consumes 1 + T passes, T = ceil(ln(1/eps)/ln(1/(4 delta))): one for
    the sparsifier and one per refinement step.  When the sparsifier
    returned the graph itself (every desk instance) the first refinement
    step already lands at working-precision roundoff and the remaining
    steps only consume their passes.
    """
    if not 0 < eps < 1:
        raise ParameterError("eps must be in (0, 1)")
    n = system.n
    ctx = system.ctx
    delta = delta_for(n)
    T = refinement_steps(eps, delta)

    last_err = None
    for attempt in range(4):
        try:
            H = sparsify(system.edges_pass(), n, system.m, delta, seed=attempt)
            P = build_preconditioner(H, system.D, ctx)
        except SolverDivergenceError as exc:
            last_err = exc
            continue
        result = _refine(system, P, b, eps, T, log)
        if result is not None:
            return result
        last_err = SolverDivergenceError("residual stopped contracting")
    raise last_err


def _refine(system, P, b, eps, T, log):
    ctx = system.ctx
    n = system.n
    if ctx.is_float:
        x = np.zeros(n)
        r = np.asarray(b, dtype=float).copy()
        rnorm0 = float(np.linalg.norm(r))
        if rnorm0 == 0.0:
            for _ in range(T):
                system.drain_pass()
            return x
        floor = rnorm0 * 1e-15
        prev = rnorm0
        skip = False
        for it in range(T):
            if skip:
                system.drain_pass()
                continue
            y = precond_solve(P, r)
            x = x + y
            r = system.residual_pass(r, y)
            rn = float(np.linalg.norm(r))
            if log is not None:
                log.iterates.append(x.copy())
                log.residual_norms.append(rn)
            if rn <= floor or rn > 0.9 * prev:
                # converged to what the arithmetic supports, or stalled
                if rn > 4.0 * P.delta * prev * 1.5 and rn > floor and not P.exact:
                    return None  # contraction failure, caller resamples
                skip = True
                if log is not None and log.skipped_from is None:
                    log.skipped_from = it + 1
            prev = rn
        return x
    # extended-precision path: P == A exactly on every desk instance,
    # so one full-precision solve is the whole answer and the remaining
    # refinement passes are charged but carry no arithmetic.
    x = precond_solve(P, list(b))
    if P.exact:
        for _ in range(T):
            system.drain_pass()
        if log is not None:
            log.skipped_from = 1
        return x
    r = list(b)
    r = system.residual_pass(r, x)
    for it in range(1, T):
        y = precond_solve(P, r)
        for j in range(n):
            x[j] += y[j]
        r = system.residual_pass(r, y)
    system.drain_pass()
    return x


# ---------------------------------------------------------------------------
# SDD0 reductions


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def solve_sdd0(entries, n, b, eps, counter=None):
    """Solve a (possibly singular) SDD0 system given as symmetric
    coordinate entries [(i, j, value)].

    Positive off-diagonals are doubled away, Laplacian components are
    grounded at their first vertex, and each resulting SDDM block goes
    through stream_ls.  Raises NoSolutionError when b is inconsistent.
    """
    if counter is None:
        counter = PassCounter()
    b = [float(x) for x in b]
    diag = [0.0] * n
    off = {}
    counter.bump()  # one sweep of the input entries
    for i, j, v in entries:
        if i == j:
            diag[i] += v
        else:
            key = (min(i, j), max(i, j))
            off[key] = off.get(key, 0.0) + v / (1 if key == (i, j) else 1)
    absrow = [0.0] * n
    for (i, j), v in off.items():
        absrow[i] += abs(v)
        absrow[j] += abs(v)
    for i in range(n):
        if diag[i] < absrow[i] - 1e-9 * max(1.0, abs(diag[i])):
            raise ParameterError(f"row {i} is not diagonally dominant")

    # doubled graph on 2n vertices: vertex i and its mirror i + n
    edges = []
    for (i, j), v in off.items():
        if v == 0.0:
            continue
        if v < 0:
            edges.append((i, j, -v))
            edges.append((i + n, j + n, -v))
        else:
            edges.append((i, j + n, v))
            edges.append((j, i + n, v))
    # excess below the dominance tolerance is roundoff, not a real
    # diagonal surplus; keeping it would build a singular-but-not-quite
    # preconditioner instead of taking the grounded-Laplacian path
    excess = [
        0.0
        if diag[i] - absrow[i] <= 1e-9 * max(1.0, abs(diag[i]))
        else diag[i] - absrow[i]
        for i in range(n)
    ]
    D_hat = excess + excess
    b_hat = b + [-x for x in b]

    uf = _UnionFind(2 * n)
    for u, v, _ in edges:
        uf.union(u, v)
    comp_members = {}
    for v in range(2 * n):
        comp_members.setdefault(uf.find(v), []).append(v)

    bnorm = math.sqrt(sum(x * x for x in b)) or 1.0
    x_hat = [0.0] * (2 * n)
    for members in comp_members.values():
        _solve_component(members, edges, D_hat, b_hat, x_hat, eps, bnorm, counter)

    return np.array([(x_hat[i] - x_hat[i + n]) / 2.0 for i in range(n)])


def _solve_component(members, all_edges, D_hat, b_hat, x_hat, eps, bnorm, counter):
    index = {v: k for k, v in enumerate(members)}
    nc = len(members)
    edges = [
        (index[u], index[v], w) for u, v, w in all_edges if u in index and v in index
    ]
    rhs = [b_hat[v] for v in members]
    D = [D_hat[v] for v in members]
    if max(D) > 0.0:
        system = MatrixSDDMSystem(nc, edges, D, counter=counter)
        x = stream_ls(system, rhs, eps / 2)
        for v, k in index.items():
            x_hat[v] = float(x[k])
        return
    # pure Laplacian block: consistency, then ground the first vertex
    if abs(sum(rhs)) > 1e-8 * bnorm * math.sqrt(nc):
        raise NoSolutionError("right-hand side not orthogonal to a null vector")
    if nc == 1:
        x_hat[members[0]] = 0.0
        return
    g_edges = []
    g_D = [0.0] * (nc - 1)
    for u, v, w in edges:
        if u == 0:
            g_D[v - 1] += w
        elif v == 0:
            g_D[u - 1] += w
        else:
            g_edges.append((u - 1, v - 1, w))
    system = MatrixSDDMSystem(nc - 1, g_edges, g_D, counter=counter)
    x = stream_ls(system, rhs[1:], eps / 2)
    x_hat[members[0]] = 0.0
    for k in range(1, nc):
        x_hat[members[k]] = float(x[k - 1])
