"""Two-phase driver for the generalized minimum vertex cover LP

    min c.x   s.t.   x_u - x_v >= b_i per edge,  0 <= x <= R on the
                     left, -R <= x <= 0 on the right,

plus tight-row extraction by exact integer rounding.  The cap
R = 2^(L+1) bounds the region without touching the optimum (every
optimal vertex has coordinates below 2^L), which is what lets phase 1
converge: it walks the path parameter down from 1 toward the analytic
center, starting from the box midpoint 2^L where the objective
manufactured from the barrier gradient makes the start perfectly
centered.  Phase 2 walks up under a randomly perturbed objective whose
optimum is unique, and the final iterate rounds to that optimal vertex
coordinatewise.
"""

import math
import random
from dataclasses import dataclass

import gmpy2

from .errors import ExtractionAmbiguityError, InfeasiblePointError
from .ipm import (
    LPInstance,
    gradient,
    make_params,
    newton_shifts,
    passes_per_newton,
    path_follow,
)
from .scalars import rigorous_context

PHASE1_EXTRA_STEPS = 2  # settle at t1 before the objective switch
ROUNDING_BAR = 1.0 / 3.0


def _clog2(value):
    return max(1, (int(value) - 1)).bit_length() if value > 1 else 0


def bit_complexity(M, c_inf, b_inf):
    """L = ceil(log2 M) + 1 + ceil(log2(1 + max norm)); the middle term
    is the unit column bound of incidence-type rows."""
    mx = max(int(c_inf), int(b_inf), 0)
    return _clog2(M) + 1 + mx.bit_length()


class MVCInstance:
    def __init__(self, graph, demand, c, b_inf):
        self.graph = graph
        self.demand = demand
        self.c = [int(v) for v in c]
        self.b_inf = int(b_inf)
        self.M = graph.m + 2 * graph.n
        self.L = bit_complexity(self.M, max(abs(v) for v in self.c), b_inf)


@dataclass(frozen=True)
class TightSet:
    edge_ids: frozenset
    vertex_rows: frozenset
    edge_records: tuple  # the tight EdgeRecords, sorted by id

    @property
    def edge_count(self):
        return len(self.edge_ids)


@dataclass
class MVCResult:
    tight: TightSet
    x_star: list
    x_final: list
    shifts1: int
    shifts2: int
    passes_used: int
    seed: object


def _t_floor(eps_phi, M, L, ctx):
    if ctx.is_float:
        return eps_phi / (M * ctx.pow2(4 * L + 10))
    return gmpy2.mpfr(eps_phi) / (M * ctx.pow2(4 * L + 10))


def _t_ceiling(n, M, L, ctx):
    """Phase-2 endpoint n*M*2^(3L+10); float runs cap the exponent so
    the terminal slacks (~1/t) stay clear of double-precision noise
    while the duality gap still rounds far inside the 1/3 bar."""
    exp = 3 * L + 10
    if ctx.is_float:
        exp = min(exp, 28)
    return ctx.from_int(n * M) * ctx.pow2(exp)


def perturb_objective(c2, L, n, seed):
    """2^(2L+3) n c2 + r with r uniform per coordinate; exact integers."""
    rng = random.Random(f"perturb:{seed}:{L}:{n}")
    scale = (1 << (2 * L + 3)) * n
    radius = (1 << (L + 1)) * n
    return [scale * int(cj) + rng.randint(-radius, radius) for cj in c2]


def extract_tight(lp, x, ctx):
    """Round x to the nearest integer point and collect the rows it
    makes exactly tight, in one pass with integer arithmetic."""
    graph = lp.graph
    nl = graph.n_left
    x_star = []
    for j, xj in enumerate(x):
        r, dist = ctx.nearest_int(xj)
        if dist >= ROUNDING_BAR:
            raise ExtractionAmbiguityError(j, dist)
        x_star.append(r)
    for j in range(graph.n):
        v = x_star[j] if j < nl else -x_star[j]
        if v < 0:
            raise InfeasiblePointError(("v", j), v)
        if v >= lp.box:  # optimal vertices live strictly inside the cap
            raise InfeasiblePointError(("box", j), lp.box - v)
    edge_ids = set()
    records = []
    for rec in graph.open_pass():
        s = x_star[rec.u] - x_star[nl + rec.v] - lp.demand(rec)
        if s < 0:
            raise InfeasiblePointError(("e", rec.id), s)
        if s == 0:
            edge_ids.add(rec.id)
            records.append(rec)
    vertex_rows = frozenset(j for j in range(graph.n) if x_star[j] == 0)
    records.sort(key=lambda r: r.id)
    return TightSet(frozenset(edge_ids), vertex_rows, tuple(records)), x_star


def mvc_tight_set(instance, seed, params=None, ctx=None, instrument=None):
    """Alg-5 pipeline: center at t=1 for free, descend to t1, switch to
    the perturbed objective, ascend to t2, round, extract."""
    graph = instance.graph
    n = graph.n
    M = instance.M
    L = instance.L
    L3 = 3 * L + _clog2(8 * n)
    if ctx is None:
        ctx = rigorous_context(L)
    if params is None:
        params = make_params(M)
    ctx.activate()
    passes_before = graph.counter.passes

    big = ctx.pow2(L)
    x_init = [big if j < graph.n_left else -big for j in range(n)]
    lp0 = LPInstance(graph, instance.demand, [0] * n, L)
    g0 = gradient(lp0, x_init, ctx.zero(), ctx)  # 1 pass
    c1 = [-gj for gj in g0]
    lp1 = LPInstance(graph, instance.demand, c1, L)
    lp1._rows = lp0._rows

    one = ctx.from_int(1)
    t1 = _t_floor(params.eps_phi, M, L, ctx)
    x = path_follow(
        lp1,
        x_init,
        one,
        t1,
        params,
        ctx,
        instrument=instrument,
        norm_ceiling=ctx.pow2(4 * L + 16),
        extra_steps=PHASE1_EXTRA_STEPS,
    )

    c3 = perturb_objective(instance.c, L, n, seed)
    if ctx.is_float:
        # same direction, unit scale: keeps t2 * ||c3|| inside float64
        scale = float((1 << (2 * L + 3)) * n)
        c3 = [cj / scale for cj in c3]
    lp3 = LPInstance(graph, instance.demand, c3, L3)
    lp3._rows = lp0._rows
    lp3.box = lp1.box  # the constraint set never changes between phases
    t2 = _t_ceiling(n, M, L, ctx)
    x = path_follow(
        lp3,
        x,
        t1,
        t2,
        params,
        ctx,
        instrument=instrument,
        norm_ceiling=ctx.pow2(4 * L3 + 16),
    )

    tight, x_star = extract_tight(lp3, x, ctx)  # 1 pass

    shifts1 = newton_shifts(one, t1, params.eps_t)
    shifts2 = newton_shifts(t1, t2, params.eps_t)
    p_iter = passes_per_newton(params.eps_x, n)
    used = graph.counter.passes - passes_before
    predicted = 2 + (shifts1 + 1 + PHASE1_EXTRA_STEPS + shifts2 + 1) * p_iter
    if used != predicted:
        raise RuntimeError(
            f"pass audit mismatch: used {used}, analytic budget {predicted}"
        )
    return MVCResult(tight, x_star, x, shifts1, shifts2, used, seed)


def predicted_tight_set_passes(instance, params, ctx=None):
    """Analytic pass budget of one mvc_tight_set call, reproducing its
    arithmetic bit for bit."""
    n = instance.graph.n
    M = instance.M
    L = instance.L
    if ctx is None:
        ctx = rigorous_context(L)
    ctx.activate()
    t1 = _t_floor(params.eps_phi, M, L, ctx)
    t2 = _t_ceiling(n, M, L, ctx)
    shifts1 = newton_shifts(ctx.from_int(1), t1, params.eps_t)
    shifts2 = newton_shifts(t1, t2, params.eps_t)
    p_iter = passes_per_newton(params.eps_x, n)
    return 2 + (shifts1 + 1 + PHASE1_EXTRA_STEPS + shifts2 + 1) * p_iter


def solve_fractional_mvc(
    graph, demand, b_inf, delta_gap, params=None, ctx=None, instrument=None
):
    """Feasible cover within additive delta_gap of the LP optimum;
    values are reported non-negative on both sides."""
    n = graph.n
    c = [1 if j < graph.n_left else -1 for j in range(n)]
    instance = MVCInstance(graph, demand, c, b_inf)
    M = instance.M
    L = instance.L
    if ctx is None:
        ctx = rigorous_context(L)
    if params is None:
        params = make_params(M)
    ctx.activate()

    big = ctx.pow2(L)
    x_init = [big if j < graph.n_left else -big for j in range(n)]
    lp0 = LPInstance(graph, demand, [0] * n, L)
    g0 = gradient(lp0, x_init, ctx.zero(), ctx)
    c1 = [-gj for gj in g0]
    lp1 = LPInstance(graph, demand, c1, L)
    lp1._rows = lp0._rows
    t1 = _t_floor(params.eps_phi, M, L, ctx)
    x = path_follow(
        lp1,
        x_init,
        ctx.from_int(1),
        t1,
        params,
        ctx,
        instrument=instrument,
        norm_ceiling=ctx.pow2(4 * L + 16),
        extra_steps=PHASE1_EXTRA_STEPS,
    )

    lp2 = LPInstance(graph, demand, c, L)
    lp2._rows = lp0._rows
    t_final = ctx.from_int(M) * (1 + 2 * params.eps_phi) / delta_gap
    x = path_follow(
        lp2,
        x,
        t1,
        t_final,
        params,
        ctx,
        instrument=instrument,
        norm_ceiling=ctx.pow2(4 * L + 16),
    )
    out = [ctx.to_float(v) for v in x]
    for j in range(graph.n_left, n):
        out[j] = -out[j]
    return out


def solve_integral_mvc(graph, seed=0, params=None, ctx=None, max_attempts=10):
    """Minimum vertex cover of an unweighted bipartite graph (unit
    demands); retries with a fresh perturbation seed if the rounding
    step is ambiguous or the rounded point fails the exact check."""
    n = graph.n
    nl = graph.n_left
    c = [1 if j < nl else -1 for j in range(n)]
    demand = lambda rec: 1
    instance = MVCInstance(graph, demand, c, 1)
    last = None
    for attempt in range(max_attempts):
        try:
            result = mvc_tight_set(instance, f"{seed}:{attempt}", params, ctx)
        except (ExtractionAmbiguityError, InfeasiblePointError) as exc:
            last = exc
            continue
        x_star = result.x_star
        ok = all(x_star[j] >= 0 for j in range(nl)) and all(
            x_star[j] <= 0 for j in range(nl, n)
        )
        if ok:
            for rec in graph.open_pass():
                if x_star[rec.u] - x_star[nl + rec.v] < 1:
                    ok = False
                    break
        if ok:
            cover = [j for j in range(nl) if x_star[j] >= 1]
            cover += [j for j in range(nl, n) if x_star[j] <= -1]
            return cover, result
        last = RuntimeError("rounded point is not a feasible cover")
    raise last
