"""Exact maximum-weight bipartite matching from the streaming pipeline.

Each trial perturbs the cover demands with isolation weights so the
optimal dual matching is unique, solves the cover LP to a rounded
vertex, keeps only the tight edge rows (at most n of them on success),
and solves the tiny residual matching exactly.  A trial certifies
itself when the residual matching value meets the cover value exactly
(weak duality leaves no slack for integral instances), which also ends
the trial loop early.
"""

import math
from dataclasses import dataclass

from .errors import ExtractionAmbiguityError, InfeasiblePointError, ParameterError
from .ipm import IPMParams, passes_per_newton
from .isolation import iso_init, iso_query, max_modulus_digits
from .stream_core import stream_stats, words_for_bits
from .vertex_cover import MVCInstance, mvc_tight_set, predicted_tight_set_passes

# Pass pacing: eps_t is chosen so a trial's pass count tracks the
# sqrt(m) log2^3(n w_max) budget with one shared proportionality
# constant; the value below dominates the centering-budget floor on
# every bipartite instance with n <= 16 (the sparse n=6 corner is the
# extreme case).
PACE = 5000.0
ASSUMPTION_DIVISOR = 66.0  # floor on the sqrt(M) multiplier at eps_phi = 1/32
DRIVER_EPS_PHI = 1.0 / 32.0
DRIVER_EPS_X = 1e-6


def iso_output_bound(N, Z):
    """Worst-case isolation weight over all modulus draws."""
    return max_modulus_digits(N, Z) * (N - 1) * N**5


def minimal_alpha(n, m, N, Z):
    """Smallest exponent keeping the weight classes separated: n^alpha
    must clear both the classical 2 m n^7 bound and n times the real
    output ceiling of the oracle (which can exceed N^7)."""
    need = max(2 * m * n**7, n * iso_output_bound(N, Z))
    alpha = 1
    power = n
    while power <= need:
        power *= n
        alpha += 1
    return alpha


class DemandOracle:
    """b_i = iso_query(i) + n^alpha * w_i, exact integers, cached per
    edge id so replay passes skip the modular exponentiation."""

    def __init__(self, iso, n, alpha, m, N, Z):
        power = n**alpha
        need = max(2 * m * n**7, n * iso_output_bound(N, Z))
        if power <= need:
            raise ParameterError(f"alpha={alpha} too small: need n^alpha > {need}")
        self.iso = iso
        self.alpha = alpha
        self.amplifier = power
        self._cache = {}

    def __call__(self, rec):
        b = self._cache.get(rec.id)
        if b is None:
            b = iso_query(self.iso, rec.id + 1) + self.amplifier * rec.w
            self._cache[rec.id] = b
        return b

    def cache_bound_words(self, m, b_inf):
        return self.iso.state_words() + m * words_for_bits(b_inf.bit_length() + 64)


@dataclass
class Matching:
    edge_ids: tuple
    weight: int
    b_weight: int
    certified: bool
    trials: int
    passes: int
    predicted_passes: int
    first_trial_passes: int
    tight_edge_ids: tuple
    cover_value: int
    alpha: int
    iso_state: str
    seed: object


def driver_params(M, n, m, w_max, L, fast=False):
    """Matching-driver step sizes: eps_phi = 1/32 maximizes the t-step
    budget, and eps_t is paced so passes track the analytic bound.
    fast=True trades the centering guarantee for 16x larger shifts
    (best-effort float runs, never certified)."""
    if fast:
        return IPMParams(
            DRIVER_EPS_PHI, DRIVER_EPS_X, 16.0 / (ASSUMPTION_DIVISOR * math.sqrt(M)),
            strict=False,
        )
    eps_t_floor = 1.0 / (ASSUMPTION_DIVISOR * math.sqrt(M))
    p_iter = passes_per_newton(DRIVER_EPS_X, n)
    ln1 = (4 * L + 10) * math.log(2.0) + math.log(M / DRIVER_EPS_PHI)
    ln2 = (3 * L + 10) * math.log(2.0) + math.log(n * M) + ln1
    range_ln = ln1 + ln2
    target_shifts = (
        PACE * math.sqrt(m) * math.log2(max(n * w_max, 2)) ** 3 / p_iter
    )
    eps_t = min(eps_t_floor, math.expm1(range_ln / target_shifts))
    params = IPMParams(DRIVER_EPS_PHI, DRIVER_EPS_X, eps_t)
    params.validate(M)
    return params


def trial_count(n, p_fail=None):
    if n < 2:
        return 1
    if p_fail is None:
        p_fail = n**-2.0
    return math.ceil(8.0 * (math.log2(n) + math.log2(1.0 / p_fail)))


def restricted_matching(records, weight_of):
    """Exact maximum-weight matching on a small edge set by successive
    maximum-gain augmenting paths.  Every intermediate matching is
    extreme for its cardinality, so no positive alternating cycle
    exists and stopping at gain <= 0 is optimal.  Integer weights;
    returns (sorted edge id tuple, total weight)."""
    records = list(records)
    match_l = {}
    while True:
        match_r = {rec.v: rec for rec in match_l.values()}
        best = {}
        parent = {}
        for rec in records:
            if rec.u not in match_l:
                g = weight_of(rec)
                if rec.v not in best or g > best[rec.v]:
                    best[rec.v] = g
                    parent[rec.v] = (rec, None)
        for _ in range(len(records)):
            improved = False
            for rec in records:
                mrec = match_l.get(rec.u)
                if mrec is None or mrec.v not in best or mrec.id == rec.id:
                    continue
                g = best[mrec.v] - weight_of(mrec) + weight_of(rec)
                if rec.v not in best or g > best[rec.v]:
                    best[rec.v] = g
                    parent[rec.v] = (rec, mrec.v)
                    improved = True
            if not improved:
                break
        end = None
        end_gain = 0
        for v, g in best.items():
            if v not in match_r and g > end_gain:
                end_gain = g
                end = v
        if end is None:
            break
        v = end
        while v is not None:
            rec, prev = parent[v]
            match_l[rec.u] = rec
            v = prev
    chosen = {rec.id: rec for rec in match_l.values()}
    total = sum(weight_of(rec) for rec in chosen.values())
    return tuple(sorted(chosen)), total


def verify_optimality(graph, matching_records, demand, x_star, tau=0.5):
    """Weak-duality certificate: PASS iff the matching's perturbed
    value reaches the cover value within tau, after exact feasibility
    checks on both sides."""
    nl = graph.n_left
    seen_l, seen_r = set(), set()
    for rec in matching_records:
        if rec.u in seen_l or rec.v in seen_r:
            return "INVALID_INPUT"
        seen_l.add(rec.u)
        seen_r.add(rec.v)
    if any(x_star[j] < 0 for j in range(nl)) or any(
        x_star[j] > 0 for j in range(nl, graph.n)
    ):
        return "INVALID_INPUT"
    for rec in graph.open_pass():
        if x_star[rec.u] - x_star[nl + rec.v] < demand(rec):
            return "INVALID_INPUT"
    cover = sum(x_star[:nl]) - sum(x_star[nl:])
    b_val = sum(demand(rec) for rec in matching_records)
    return "PASS" if b_val >= cover - tau else "FAIL"


def max_weight_matching(
    graph, seed=0, alpha=None, params=None, ctx=None, trials=None, instrument=None
):
    counter = graph.counter
    start_passes = counter.passes
    n, m, w_max = stream_stats(graph)  # 1 pass
    nl = graph.n_left
    if m == 0:
        used = counter.passes - start_passes
        return Matching((), 0, 0, True, 0, used, used, 0, (), 0, 0, "", seed)

    fast = ctx is not None and ctx.is_float
    N = graph.id_space
    Z = (n, n)
    if fast:
        # Raw weights as demands keep every magnitude inside float64;
        # the objective perturbation alone isolates an optimal cover
        # vertex, and complementary slackness still puts every
        # maximum-weight matching inside its tight rows.
        alpha = 0
        b_inf = w_max
    else:
        if alpha is None:
            alpha = minimal_alpha(n, m, N, Z)
        b_inf = iso_output_bound(N, Z) + n**alpha * w_max
    c = [1 if j < nl else -1 for j in range(n)]
    probe = MVCInstance(graph, lambda rec: 0, c, b_inf)
    if params is None:
        params = driver_params(probe.M, n, m, w_max, probe.L, fast=fast)
    K = trials if trials is not None else trial_count(n)

    best = None  # (weight, b_weight, ids)
    predicted = 1
    first_trial_passes = 0
    trials_run = 0
    for k in range(K):
        trials_run += 1
        trial_start = counter.passes
        if fast:
            iso = None
            demand = lambda rec: rec.w
        else:
            iso = iso_init(N, Z, f"{seed}:{k}")
            demand = DemandOracle(iso, n, alpha, m, N, Z)
            graph.auditor.register("demand-oracle", demand.cache_bound_words(m, b_inf))
        instance = MVCInstance(graph, demand, c, b_inf)
        try:
            mvc = mvc_tight_set(instance, f"{seed}:{k}", params, ctx, instrument)
        except (ExtractionAmbiguityError, InfeasiblePointError):
            predicted += counter.passes - trial_start
            continue
        finally:
            if iso is not None:
                graph.auditor.release("demand-oracle")
        predicted += predicted_tight_set_passes(instance, params, ctx)
        if first_trial_passes == 0:
            first_trial_passes = counter.passes - trial_start
        tight = mvc.tight
        if tight.edge_count > n and not fast:
            continue
        ids, b_val = restricted_matching(tight.edge_records, demand)
        id_set = set(ids)
        recs = [r for r in tight.edge_records if r.id in id_set]
        w_val = sum(r.w for r in recs)
        if best is None or w_val > best[0]:
            best = (w_val, b_val, ids)
        cover_value = sum(mvc.x_star[:nl]) - sum(mvc.x_star[nl:])
        if b_val >= cover_value:  # weak duality: equality iff optimal
            return Matching(
                ids,
                w_val,
                b_val,
                True,
                trials_run,
                counter.passes - start_passes,
                predicted,
                first_trial_passes,
                tuple(sorted(tight.edge_ids)),
                cover_value,
                alpha,
                iso.to_json() if iso is not None else "",
                seed,
            )
    w_val, b_val, ids = best if best is not None else (0, 0, ())
    return Matching(
        ids,
        w_val,
        b_val,
        False,
        trials_run,
        counter.passes - start_passes,
        predicted,
        first_trial_passes,
        (),
        0,
        alpha,
        "",
        seed,
    )
