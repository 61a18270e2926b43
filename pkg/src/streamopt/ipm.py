"""Path-following interior point method over streamed constraint rows.

The LP is min c.x subject to A x >= b where A has m edge rows
(1_u - 1_v, rhs from the demand oracle) followed by 2n vertex rows: a
sign row per vertex (x >= 0 on the left side, -x >= 0 on the right)
and a box row capping |x_j| at R = 2^(L+1).  The box rows keep the
feasible region bounded, so the analytic center exists and every
barrier slack stays below 2^(L+3); without them the phase-1 walk of
the two-phase cover driver drifts to infinity along the all-ones
recession direction.  Gradients are accumulated in one pass, the
Hessian H(x) = L(x) + D(x) is only ever touched through the streaming
SDDM solver, and every iteration spends exactly 3 + T passes
(gradient, diagonal extraction, solve).
"""

import csv
import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from . import _kernels
from .errors import InfeasiblePointError, ParameterError, UnboundedError
from .sdd_solver import delta_for, refinement_steps, stream_ls
from .stream_core import words_for_bits


class LPInstance:
    def __init__(self, graph, demand, c, L):
        self.graph = graph
        self.demand = demand  # callable EdgeRecord -> integer rhs
        self.c = list(c)
        self.L = int(L)
        self.M = graph.m + 2 * graph.n
        self.box = 1 << (self.L + 1)  # per-coordinate cap R
        self._rows = None
        self._arrays = None
        self._slack_cache = None  # (x, 1/s per edge, 1/|x_j|, 1/(R-|x_j|))

    def edge_rows(self):
        """One pass over the edge rows as (u, v, b) with v offset into
        the right block.  The first pass caches topology and demands so
        later passes skip re-deriving b; replays still go through the
        pass counter."""
        g = self.graph
        if self._rows is not None:
            g.counter.bump()
            return self._rows
        nl = g.n_left
        rows = []
        for rec in g.open_pass():
            rows.append((rec.u, nl + rec.v, self.demand(rec)))
        self._rows = rows
        bits = sum(128 + max(abs(b), 1).bit_length() for _, _, b in rows)
        g.auditor.register("lp-rows", words_for_bits(max(bits, 64)))
        return rows

    def drain_pass(self):
        if self._rows is not None:
            self.graph.counter.bump()
        else:
            self.graph.drain_pass()

    def float_arrays(self):
        if self._arrays is None:
            if self._rows is None:
                raise RuntimeError("edge rows not cached yet")
            self._arrays = (
                np.array([r[0] for r in self._rows], dtype=np.int64),
                np.array([r[1] for r in self._rows], dtype=np.int64),
                np.array([float(r[2]) for r in self._rows]),
            )
        return self._arrays


@dataclass
class IPMParams:
    eps_phi: float
    eps_x: float
    eps_t: float
    strict: bool = True  # False = best-effort steps, no centering budget

    def validate(self, M):
        if not self.strict:
            return
        lhs = (
            16.0 * (1.0 + self.eps_t) * self.eps_phi**2
            + 16.0 * self.eps_x
            + math.sqrt(M) * self.eps_t
        )
        if lhs > self.eps_phi:
            raise ParameterError(
                f"step parameters violate the centering budget: {lhs} > {self.eps_phi}"
            )


def make_params(M, eps_phi=0.01, eps_x=1e-4, eps_t=None):
    if eps_t is None:
        eps_t = 1.0 / (400.0 * math.sqrt(M))
    p = IPMParams(eps_phi, eps_x, eps_t)
    p.validate(M)
    return p


@dataclass
class IPMState:
    x: object
    t: object
    direction: str
    iteration: int = 0


# ---------------------------------------------------------------------------
# gradient / Hessian access


def gradient(lp, x, t, ctx):
    """t*c - sum_i a_i / s_i(x), one pass, O(n) words."""
    ctx.activate()
    nl = lp.graph.n_left
    n = lp.graph.n
    if ctx.is_float:
        lp.edge_rows()
        au, av, ab = lp.float_arrays()
        xf = np.asarray(x, dtype=float)
        if lp.graph.m:
            s = _kernels.edge_slacks(au, av, ab, xf)
            if s.min() <= 0.0:
                bad = int(np.argmin(s))
                raise InfeasiblePointError(("e", bad), float(s[bad]))
        g = float(t) * np.asarray(lp.c, dtype=float)
        if lp.graph.m:
            _kernels.grad_accumulate(au, av, ab, xf, g)
        R = float(lp.box)
        for j in range(n):
            xv = xf[j] if j < nl else -xf[j]
            if xv <= 0.0:
                raise InfeasiblePointError(("v", j), xv)
            if xv >= R:
                raise InfeasiblePointError(("box", j), R - xv)
        sgn = np.ones(n)
        sgn[nl:] = -1.0
        g -= 1.0 / xf
        g += sgn / (R - sgn * xf)
        return g
    g = [t * ci for ci in lp.c]
    inv_edge = []
    push = inv_edge.append
    for u, v, b in lp.edge_rows():
        s = x[u] - x[v] - b
        if s <= 0:
            raise InfeasiblePointError(("e", (u, v)), float(s))
        inv = 1 / s
        push(inv)
        g[u] -= inv
        g[v] += inv
    R = lp.box
    inv_x = []
    inv_box = []
    for j in range(n):
        left = j < nl
        xv = x[j] if left else -x[j]
        if xv <= 0:
            raise InfeasiblePointError(("v", j), float(xv))
        bo = R - xv
        if bo <= 0:
            raise InfeasiblePointError(("box", j), float(bo))
        iv = 1 / xv
        ib = 1 / bo
        inv_x.append(iv)
        inv_box.append(ib)
        g[j] += ib - iv if left else iv - ib
    lp._slack_cache = (x, inv_edge, inv_x, inv_box)
    return g


class HessianSystem:
    """H(x) = L(x) + D(x) exposed through the SDDM-solver protocol.

    Edge weights s_i(x)^-2 are re-derived from the stream on every
    pass; only the n-entry diagonal is stored."""

    def __init__(self, lp, x, D, ctx, inv_edge=None):
        self.lp = lp
        self.x = x
        self.D = D
        self.ctx = ctx
        self.n = lp.graph.n
        self.m = lp.graph.m
        self.counter = lp.graph.counter
        self._inv_edge = inv_edge  # 1/s per edge row when already derived

    def edges_pass(self):
        rows = self.lp.edge_rows()
        x = self.x
        if self.ctx.is_float:
            au, av, ab = self.lp.float_arrays()
            w = _kernels.edge_weights(au, av, ab, np.asarray(x, dtype=float))
            return (
                (int(au[i]), int(av[i]), float(w[i])) for i in range(len(rows))
            )
        inv = self._inv_edge
        if inv is not None:
            return [
                (rows[i][0], rows[i][1], inv[i] * inv[i]) for i in range(len(rows))
            ]

        def gen():
            for u, v, b in rows:
                s = x[u] - x[v] - b
                yield (u, v, 1 / (s * s))

        return gen()

    def drain_pass(self):
        self.lp.drain_pass()

    def residual_pass(self, r, y):
        rows = self.lp.edge_rows()
        x = self.x
        if self.ctx.is_float:
            au, av, ab = self.lp.float_arrays()
            yf = np.asarray(y, dtype=float)
            Ay = np.asarray(self.D, dtype=float) * yf
            if self.m:
                w = _kernels.edge_weights(au, av, ab, np.asarray(x, dtype=float))
                _kernels.lap_matvec(au, av, w, yf, Ay)
            return np.asarray(r, dtype=float) - Ay
        Ay = [self.D[j] * y[j] for j in range(self.n)]
        for u, v, b in rows:
            s = x[u] - x[v] - b
            d = (y[u] - y[v]) / (s * s)
            Ay[u] += d
            Ay[v] -= d
        return [r[j] - Ay[j] for j in range(self.n)]


def hessian_view(lp, x, ctx):
    """SDDM view of H(x); extracting the diagonal costs one pass."""
    ctx.activate()
    lp.drain_pass()
    n = lp.graph.n
    nl = lp.graph.n_left
    if ctx.is_float:
        xf = np.asarray(x, dtype=float)
        r = float(lp.box) - np.abs(xf)
        D = 1.0 / (xf * xf) + 1.0 / (r * r)
        return HessianSystem(lp, x, D, ctx)
    cache = lp._slack_cache
    if cache is not None and cache[0] is x:
        _, inv_edge, inv_x, inv_box = cache
        D = [inv_x[j] * inv_x[j] + inv_box[j] * inv_box[j] for j in range(n)]
        return HessianSystem(lp, x, D, ctx, inv_edge=inv_edge)
    R = lp.box
    D = []
    for j in range(n):
        yv = x[j] if j < nl else -x[j]
        bo = R - yv
        D.append(1 / (x[j] * x[j]) + 1 / (bo * bo))
    return HessianSystem(lp, x, D, ctx)


def newton_step(lp, state, params, ctx):
    """Approximate Newton direction -H(x)^-1 grad f_t(x)."""
    g = gradient(lp, state.x, state.t, ctx)
    system = hessian_view(lp, state.x, ctx)
    y = stream_ls(system, g, params.eps_x)
    if ctx.is_float:
        return -np.asarray(y)
    return [-yi for yi in y]


# ---------------------------------------------------------------------------
# the path-following loop


def _ln_ratio(t_final, t_start):
    if isinstance(t_final, float) and isinstance(t_start, float):
        return abs(math.log(t_final) - math.log(t_start))
    return abs(float(gmpy2.log(gmpy2.mpfr(t_final)) - gmpy2.log(gmpy2.mpfr(t_start))))


def newton_shifts(t_start, t_final, eps_t):
    """Number of multiplicative t shifts from t_start to t_final."""
    r = _ln_ratio(t_final, t_start)
    if r == 0.0:
        return 0
    return math.ceil(r / math.log1p(eps_t))


def passes_per_newton(eps_x, n):
    """3 + T: gradient, diagonal extraction, sparsify, T refinements."""
    return 3 + refinement_steps(eps_x, delta_for(n))


def path_follow(
    lp,
    x_start,
    t_start,
    t_final,
    params,
    ctx,
    instrument=None,
    trace_path=None,
    norm_ceiling=None,
    extra_steps=0,
):
    """Walk t multiplicatively from t_start to t_final, one Newton step
    per shift plus one final centering step at t_final (plus any caller
    extras).  Returns the final iterate; x_start is returned untouched
    when t_final == t_start and extra_steps == 0."""
    ctx.activate()
    params.validate(lp.M)
    shifts = newton_shifts(t_start, t_final, params.eps_t)
    if ctx.is_float:
        x = np.asarray(x_start, dtype=float).copy()
        t = float(t_start)
        t_final = float(t_final)
    else:
        x = list(x_start)
        t = gmpy2.mpfr(t_start)
        t_final = gmpy2.mpfr(t_final)
    if shifts == 0 and extra_steps == 0:
        return x
    increase = t_final > t
    state = IPMState(x, t, "increase" if increase else "decrease")
    writer = fh = None
    if trace_path is not None:
        fh = open(trace_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(fh)
        writer.writerow(["k", "t", "passes_cumulative"])
    try:
        total = shifts + 1 + extra_steps
        for k in range(total):
            if k < shifts:
                state.t = state.t * (1 + params.eps_t) if increase else state.t / (
                    1 + params.eps_t
                )
                if (increase and state.t > t_final) or (
                    not increase and state.t < t_final
                ):
                    state.t = t_final
            else:
                state.t = t_final
            delta = newton_step(lp, state, params, ctx)
            if ctx.is_float:
                state.x = state.x + delta
            else:
                state.x = [state.x[j] + delta[j] for j in range(len(delta))]
            state.iteration += 1
            if norm_ceiling is not None:
                peak = max(abs(v) for v in state.x)
                if peak > norm_ceiling:
                    raise UnboundedError(
                        f"iterate norm {float(peak)} exceeded the bit-complexity ceiling"
                    )
            if instrument is not None:
                instrument(state)
            if writer is not None:
                writer.writerow([state.iteration, repr(state.t), lp.graph.counter.passes])
    finally:
        if fh is not None:
            fh.close()
    return state.x


# ---------------------------------------------------------------------------
# diagnostics (never on the critical path)


def potential_phi(lp, x, t, params, ctx):
    """|| grad f_t(x) || in the H(x)^-1 norm, via a high-accuracy solve."""
    g = gradient(lp, x, t, ctx)
    system = hessian_view(lp, x, ctx)
    y = stream_ls(system, g, params.eps_x / 10.0)
    acc = sum(g[j] * y[j] for j in range(lp.graph.n))
    return ctx.to_float(ctx.sqrt(acc)) if acc > 0 else 0.0


def potential_psi(lp, x, params, ctx):
    """Barrier-only potential || g(x) ||_{H(x)^-1}."""
    zero = 0.0 if ctx.is_float else gmpy2.mpfr(0)
    g = gradient(lp, x, zero, ctx)
    system = hessian_view(lp, x, ctx)
    y = stream_ls(system, g, params.eps_x / 10.0)
    acc = sum(g[j] * y[j] for j in range(lp.graph.n))
    return ctx.to_float(ctx.sqrt(acc)) if acc > 0 else 0.0
