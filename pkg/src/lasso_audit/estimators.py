"""Interval estimators for cone-restricted quadratic-form constants.

Three quantities live here, all defined as optima over an l1 cone:

* the compatibility constant (min of s * beta'Sigma beta / ||beta_S||_1^2),
* the restricted eigenvalue (min of beta'Sigma beta / ||beta_nset||_2^2 with
  nset the active-set enlargement by the largest tail magnitudes),
* the restricted regression constant (max of the tail-on-head regression
  ratio |t'Sigma_21 beta_nset| / beta_nset'Sigma_11 beta_nset).

Minima are bracketed from above by feasible points and from below by
certified closed-form routes; maxima the other way around.  The returned
BoundedValue always encloses the true optimum up to the documented
projected-gradient margin.
"""

from __future__ import annotations

import math

import numpy as np

from .constants import (
    DEFAULT_SIGN_CAP,
    block_norm_2q,
    coherence,
    irrepresentable_uniform,
    restricted_orthogonality,
    uniform_eigenvalue,
)
from .core import (
    DEFAULT_SUBSET_CAP,
    SINGULAR_RTOL,
    BoundedValue,
    Certificate,
    ConeSpec,
    GramMatrix,
    SubsetN,
    cone_membership,
    derived_rng,
    enumerate_supersets,
    min_eigen_11,
    inverse_11,
    superset_count,
    top_nset,
)
from .errors import (
    AllSubmatricesSingular,
    CapExceeded,
    InvalidParameter,
    MaxItersExceeded,
    SingularBlock,
    SingularUniformEigenvalue,
)
from .solvers import DEFAULT_CONFIG, SolverConfig, project_l1_ball, projected_gradient_qp

# enumeration budget for bound routes that are optional extras; routes above
# this size are skipped rather than attempted
ROUTE_CAP = 20_000

# relative slack on the tail budget below which the closed-form equality
# solution counts as feasible for the l1-ball constraint
_FAST_FEAS_RTOL = 1e-10

_SEARCH_CHUNK = 8192


def _sign_chunks(k: int, chunk: int):
    """{+1,-1}^k in integer order, emitted as (m, k) blocks; bit i of the
    counter maps position i to -1 when set."""
    total = 2 ** k
    cols = np.arange(k)
    for start in range(0, total, chunk):
        g = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (g[:, None] >> cols[None, :]) & 1
        yield 1.0 - 2.0 * bits


def _comp_indices(p: int, S) -> list:
    inside = set(S)
    return [j for j in range(p) if j not in inside]


def compatibility_constant(gram: GramMatrix, cone: ConeSpec, config: SolverConfig = DEFAULT_CONFIG,
                           sign_cap: int = DEFAULT_SIGN_CAP) -> BoundedValue:
    """phi^2_compat(L, S): min over the plain cone of s * beta'Sigma beta / ||beta_S||_1^2.

    Reduction: with tau ranging over sign vectors on S (first coordinate fixed
    to +1 by symmetry), the constant equals s * min_tau V(tau) where
    V(tau) = min { beta'Sigma beta : tau'beta_S = 1, ||beta_{S^c}||_1 <= L }.
    When Sigma is nonsingular and the unconstrained-tail equality solution
    Sigma^{-1} a / (a'Sigma^{-1} a) already satisfies the tail budget, V(tau)
    is available in closed form; those tau are batched.  The rest fall back to
    projected gradient, which brackets V(tau) from above.  The result is always
    an Interval with a 10 * tol margin below the found value, downgraded to
    Estimate if any projected-gradient run hits its iteration limit.
    """
    cone.validate_p(gram.p)
    p, s, L = gram.p, cone.s, cone.L
    if 2 ** max(s - 1, 0) > sign_cap:
        raise CapExceeded(2 ** (s - 1), sign_cap, what="compatibility sign enumeration")
    S = list(cone.S)
    comp = _comp_indices(p, S)
    vals, vecs = np.linalg.eigh(gram.entries)
    lam_max = max(float(vals[-1]), 0.0)
    nonsingular = float(vals[0]) > SINGULAR_RTOL * max(lam_max, 0.0) and float(vals[0]) > 0.0

    best = math.inf
    best_tau = None
    fast = 0
    hard = []
    if nonsingular:
        inv_cols = (vecs / vals) @ vecs.T[:, S]
        a11 = inv_cols[S, :]
        tail_rows = inv_cols[comp, :] if comp else np.zeros((0, s))
        for T in _sign_chunks(max(s - 1, 0), _SEARCH_CHUNK):
            full = np.concatenate([np.ones((T.shape[0], 1)), T], axis=1)
            denom = np.einsum("ia,ab,ib->i", full, a11, full)
            tail_l1 = np.abs(full @ tail_rows.T).sum(axis=1)
            feasible = tail_l1 <= denom * L * (1.0 + _FAST_FEAS_RTOL) + 1e-300
            fast += int(np.count_nonzero(feasible))
            if np.any(feasible):
                i = int(np.argmax(np.where(feasible, denom, -np.inf)))
                if 1.0 / denom[i] < best:
                    best = 1.0 / float(denom[i])
                    best_tau = tuple(int(v) for v in full[i])
            for row in full[~feasible]:
                hard.append(row.copy())
    else:
        for T in _sign_chunks(max(s - 1, 0), _SEARCH_CHUNK):
            full = np.concatenate([np.ones((T.shape[0], 1)), T], axis=1)
            for row in full:
                hard.append(row.copy())

    lip = 2.0 * max(lam_max, 1e-12)
    diverged = 0
    for tau in hard:
        v, tau_t, converged = _equality_tail_qp(gram, cone, tau, config, lip)
        if not converged:
            diverged += 1
        if v < best:
            best = v
            best_tau = tau_t

    value = s * best
    note = (f"signs={2 ** max(s - 1, 0)}, closed_form={fast}, "
            f"projected_gradient={len(hard)}, argmin_tau={best_tau}")
    if diverged:
        return BoundedValue.estimate_only(value, provenance=note + f", unconverged={diverged}")
    lower = max(0.0, value - 10.0 * config.tol * max(1.0, abs(value)))
    return BoundedValue.interval(value, lower, value, provenance=note)


def _equality_tail_qp(gram: GramMatrix, cone: ConeSpec, tau: np.ndarray, config: SolverConfig,
                      lipschitz: float):
    """V(tau) by projected gradient: the feasible set splits into the affine
    hyperplane tau'beta_S = 1 on S and the l1 ball of radius L off S, so the
    blockwise projection is the exact projection."""
    p, s = gram.p, cone.s
    S = list(cone.S)
    comp = _comp_indices(p, S)
    tau = np.asarray(tau, dtype=float)

    def projection(x):
        y = x.copy()
        head = x[S]
        y[S] = head - tau * ((tau @ head - 1.0) / s)
        if comp:
            y[comp] = project_l1_ball(x[comp], cone.L)
        return y

    x0 = np.zeros(p)
    x0[S] = tau / s
    converged = True
    try:
        x, fx, _ = projected_gradient_qp(gram.entries, np.zeros(p), projection, config,
                                         x0=x0, lipschitz=lipschitz)
    except MaxItersExceeded as exc:
        x, fx, _ = exc.best
        converged = False
    return float(fx), tuple(int(v) for v in tau), converged


def _batch_restricted_ratio(entries: np.ndarray, cone: ConeSpec, B: np.ndarray) -> np.ndarray:
    """beta'Sigma beta / ||beta_nset||_2^2 for each row, nset = top enlargement."""
    S = list(cone.S)
    comp = _comp_indices(entries.shape[0], S)
    qs = np.einsum("ij,ij->i", B @ entries, B)
    nsq = (B[:, S] ** 2).sum(axis=1)
    k = min(cone.N - cone.s, len(comp))
    if k > 0:
        at = np.abs(B[:, comp])
        top = np.partition(at, at.shape[1] - k, axis=1)[:, at.shape[1] - k:]
        nsq = nsq + (top ** 2).sum(axis=1)
    out = np.full(B.shape[0], np.inf)
    ok = nsq > 1e-300
    out[ok] = qs[ok] / nsq[ok]
    return out


def evaluate_restricted_ratio(gram: GramMatrix, cone: ConeSpec, beta, variant: str = "plain", *,
                              atol: float = 0.0) -> float:
    """The restricted-eigenvalue objective at one cone point."""
    beta = np.asarray(beta, dtype=float)
    if not cone_membership(beta, cone, variant=variant, atol=atol):
        raise InvalidParameter("beta is not in the requested cone")
    return float(_batch_restricted_ratio(gram.entries, cone, beta[None, :])[0])


def _sample_cone_points(rng, cone: ConeSpec, p: int, m: int, variant: str) -> np.ndarray:
    """Feasible cone points with unit-norm heads and randomly sparse tails
    scaled to a random fraction of the budget."""
    s = cone.s
    S = list(cone.S)
    comp = _comp_indices(p, S)
    heads = rng.standard_normal((m, s))
    norms = np.linalg.norm(heads, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    heads /= norms
    B = np.zeros((m, p))
    B[:, S] = heads
    if comp and cone.L > 0.0:
        r = len(comp)
        raw = rng.standard_normal((m, r))
        density = rng.random(m) ** 2
        keep = rng.random((m, r)) < np.maximum(density, 1.0 / r)[:, None]
        raw *= keep
        l1 = np.abs(raw).sum(axis=1)
        if variant == "plain":
            budget = cone.L * np.abs(heads).sum(axis=1)
        else:
            budget = math.sqrt(s) * cone.L * np.ones(m)
        frac = rng.random(m) ** 0.25
        scale = np.zeros(m)
        ok = l1 > 0.0
        scale[ok] = frac[ok] * budget[ok] / l1[ok]
        B[:, comp] = raw * scale[:, None]
    return B


def _project_to_cone(beta: np.ndarray, cone: ConeSpec, variant: str) -> np.ndarray:
    """Rescale the tail onto the budget; heads are left untouched."""
    out = beta.copy()
    S = list(cone.S)
    comp = _comp_indices(beta.shape[0], S)
    if not comp:
        return out
    head = out[S]
    if variant == "plain":
        budget = cone.L * float(np.abs(head).sum())
    else:
        budget = math.sqrt(cone.s) * cone.L * float(np.linalg.norm(head))
    tail_l1 = float(np.abs(out[comp]).sum())
    if tail_l1 > budget:
        out[comp] *= 0.0 if budget == 0.0 else budget / tail_l1
    return out


def _refine_ratio(entries: np.ndarray, cone: ConeSpec, variant: str, beta: np.ndarray,
                  iters: int = 40) -> np.ndarray:
    """Descend the ratio with the enlargement frozen per step, reprojecting
    onto the cone; every accepted iterate stays feasible."""
    p = entries.shape[0]
    S = list(cone.S)
    beta = beta.copy()
    f = float(_batch_restricted_ratio(entries, cone, beta[None, :])[0])
    for _ in range(iters):
        nset = top_nset(beta, cone)
        mask = np.zeros(p)
        mask[list(nset.members)] = 1.0
        d = float(np.sum((beta * mask) ** 2))
        if d <= 1e-300:
            break
        grad = 2.0 * (entries @ beta - f * beta * mask) / d
        gn = float(np.linalg.norm(grad))
        if gn == 0.0:
            break
        eta = 0.2 * float(np.linalg.norm(beta)) / gn
        improved = False
        for _ in range(25):
            cand = _project_to_cone(beta - eta * grad, cone, variant)
            if float(np.abs(cand[S]).sum()) == 0.0:
                eta /= 2.0
                continue
            fc = float(_batch_restricted_ratio(entries, cone, cand[None, :])[0])
            if fc < f - 1e-15 * max(1.0, abs(f)):
                beta, f = cand, fc
                improved = True
                break
            eta /= 2.0
        if not improved:
            break
    return beta


def restricted_eigenvalue(gram: GramMatrix, cone: ConeSpec, variant: str = "plain",
                          config: SolverConfig = DEFAULT_CONFIG,
                          cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """phi^2(L, S, N) (or its adaptive-cone version) as an Interval.

    Upper bound: best feasible cone point found (padded eigenvectors of
    Sigma_11(S), random cone samples, local refinement); every evaluation is a
    true objective value, so the minimum is a valid upper bound.  Lower bound:
    the best certified closed-form route (see certified_lower_phi).
    """
    cone.validate_p(gram.p)
    if variant not in ("plain", "adaptive"):
        raise InvalidParameter(f"unknown cone variant {variant!r}")
    entries = gram.entries
    p, s = gram.p, cone.s
    S = list(cone.S)

    w, V = np.linalg.eigh(entries[np.ix_(S, S)])
    cands = np.zeros((s, p))
    cands[:, S] = V.T
    ratios = _batch_restricted_ratio(entries, cone, cands)
    best_i = int(np.argmin(ratios))
    best_val = float(ratios[best_i])
    best_beta = cands[best_i]

    rng = derived_rng(config.seed, "re-search", gram.fingerprint(), variant,
                      cone.S, cone.L, cone.N)
    remaining = config.samples
    while remaining > 0:
        m = min(_SEARCH_CHUNK, remaining)
        remaining -= m
        B = _sample_cone_points(rng, cone, p, m, variant)
        ratios = _batch_restricted_ratio(entries, cone, B)
        i = int(np.argmin(ratios))
        if float(ratios[i]) < best_val:
            best_val = float(ratios[i])
            best_beta = B[i]

    refined = _refine_ratio(entries, cone, variant, best_beta)
    best_val = min(best_val, float(_batch_restricted_ratio(entries, cone, refined[None, :])[0]))

    low = certified_lower_phi(gram, cone, target="restricted_eigenvalue", variant=variant,
                              config=config, cap=cap)
    lower = min(low.estimate, best_val)
    return BoundedValue.interval(
        best_val, lower, best_val,
        provenance=f"upper: feasible search ({config.samples} samples); lower: {low.provenance}",
    )


def _rr_value_head_only(sig11, sig21, heads, s, variant):
    """Exact inner tail maximization when the enlargement is S itself: the
    numerator is linear in the tail, so the whole budget goes on the
    largest-response coordinate."""
    denom = np.einsum("ia,ab,ib->i", heads, sig11, heads)
    if sig21.shape[0]:
        w = np.max(np.abs(sig21 @ heads.T), axis=0)
    else:
        w = np.zeros(heads.shape[0])
    if variant == "plain":
        budget = np.abs(heads).sum(axis=1)
    else:
        budget = math.sqrt(s) * np.linalg.norm(heads, axis=1)
    scale = float(np.max(np.abs(sig11))) if sig11.size else 1.0
    tiny = SINGULAR_RTOL * max(scale, 1.0)
    out = np.zeros(heads.shape[0])
    ok = denom > tiny
    out[ok] = budget[ok] * w[ok] / denom[ok]
    out[(~ok) & (budget * w > tiny)] = np.inf
    return out


def evaluate_regression_ratio(gram: GramMatrix, cone: ConeSpec, beta, variant: str = "plain", *,
                              atol: float = 0.0) -> float:
    """The restricted-regression objective at one cone point:
    |t' Sigma[nset^c, nset] beta_nset| / beta_nset' Sigma_11(nset) beta_nset
    with nset the top enlargement and t the remaining tail."""
    beta = np.asarray(beta, dtype=float)
    if not cone_membership(beta, cone, variant=variant, atol=atol):
        raise InvalidParameter("beta is not in the requested cone")
    p = gram.p
    nset = top_nset(beta, cone)
    mask = np.zeros(p, dtype=bool)
    mask[list(nset.members)] = True
    head = np.where(mask, beta, 0.0)
    tail = beta - head
    g = gram.entries @ head
    denom = float(head @ g)
    numer = abs(float(tail @ g))
    tiny = SINGULAR_RTOL * max(float(np.max(np.abs(gram.entries))), 1.0)
    if denom <= tiny:
        return math.inf if numer > tiny else 0.0
    return numer / denom


def _batch_regression_ratio(entries: np.ndarray, cone: ConeSpec, B: np.ndarray) -> np.ndarray:
    p = entries.shape[0]
    S = list(cone.S)
    comp = _comp_indices(p, S)
    m = B.shape[0]
    mask = np.zeros((m, p), dtype=bool)
    mask[:, S] = True
    k = min(cone.N - cone.s, len(comp))
    if k > 0:
        at = np.abs(B[:, comp])
        order = np.argpartition(at, at.shape[1] - k, axis=1)[:, at.shape[1] - k:]
        comp_arr = np.array(comp)
        rows = np.repeat(np.arange(m), k)
        mask[rows, comp_arr[order].ravel()] = True
    head = np.where(mask, B, 0.0)
    tailp = B - head
    g = head @ entries
    denom = np.einsum("ij,ij->i", g, head)
    numer = np.abs(np.einsum("ij,ij->i", g, tailp))
    tiny = SINGULAR_RTOL * max(float(np.max(np.abs(entries))), 1.0)
    out = np.zeros(m)
    ok = denom > tiny
    out[ok] = numer[ok] / denom[ok]
    out[(~ok) & (numer > tiny)] = np.inf
    return out


def _rr_search(gram: GramMatrix, cone: ConeSpec, variant: str, config: SolverConfig):
    """Best feasible value of the regression ratio (a certified lower bound
    for the sup).  Always includes the inverse-sign witness heads, which make
    the value at N = s at least the uniform leverage constant."""
    entries = gram.entries
    p, s = gram.p, cone.s
    S = list(cone.S)
    comp = _comp_indices(p, S)
    S_sub = SubsetN(cone.S)
    sig11 = entries[np.ix_(S, S)]
    sig21 = entries[np.ix_(comp, S)] if comp else np.zeros((0, s))

    heads = [np.linalg.eigh(sig11)[1].T]
    try:
        inv = inverse_11(gram, S_sub)
    except SingularBlock:
        inv = None
    rng = derived_rng(config.seed, "rr-search", gram.fingerprint(), variant,
                      cone.S, cone.N)
    if inv is not None:
        signs = []
        if comp:
            m_rows = sig21 @ inv
            signs.append(np.where(m_rows >= 0.0, 1.0, -1.0))
        if 2 ** s <= 4096:
            signs.append(np.concatenate(list(_sign_chunks(s, 4096))))
        else:
            signs.append(np.where(rng.random((4096, s)) < 0.5, 1.0, -1.0))
        for T in signs:
            heads.append(T @ inv.T)
    heads.append(rng.standard_normal((min(max(config.samples, 1), 4096), s)))
    H = np.concatenate(heads, axis=0)
    H = H[np.linalg.norm(H, axis=1) > 0.0]

    scores = _rr_value_head_only(sig11, sig21, H, s, variant)
    if cone.N == cone.s:
        best = float(np.max(scores)) if scores.size else 0.0
        return best, "head candidates with exact tail completion"

    # N > s: the best heads seed spike-and-greedy full vectors, plus random
    # cone points evaluated at their own top enlargement
    best = 0.0
    finite = np.where(np.isfinite(scores))[0]
    order = finite[np.argsort(scores[finite])[::-1][:8]]
    k = min(cone.N - cone.s, len(comp))
    for i in order:
        h = H[i]
        full_budget = (cone.L * float(np.abs(h).sum()) if variant == "plain"
                       else math.sqrt(s) * cone.L * float(np.linalg.norm(h)))
        if full_budget <= 0.0 or k == 0 or not comp:
            continue
        v = np.abs(sig21 @ h) if comp else np.zeros(0)
        low_coords = np.array(comp)[np.argsort(v)[:k]]
        denoms = [len(comp), max(len(comp) - k, 1) + k, 2 * k + 1, k + 1, k]
        for dna in denoms:
            a = full_budget / max(dna, 1)
            beta = np.zeros(p)
            beta[S] = h
            beta[low_coords] = a
            rest = [j for j in comp if j not in set(low_coords)]
            b = full_budget - k * a
            if b < 0.0 or not rest:
                continue
            g = entries[np.ix_(rest, sorted(set(S) | set(low_coords)))] @ \
                beta[sorted(set(S) | set(low_coords))]
            fill_order = np.argsort(-np.abs(g))
            cap_val = a * (1.0 - 1e-9)
            left = b
            for fi in fill_order:
                amt = min(cap_val, left)
                if amt <= 0.0:
                    break
                beta[rest[int(fi)]] = math.copysign(amt, g[int(fi)])
                left -= amt
            val = float(_batch_regression_ratio(entries, cone, beta[None, :])[0])
            if val > best:
                best = val
    remaining = config.samples
    while remaining > 0:
        m = min(_SEARCH_CHUNK, remaining)
        remaining -= m
        B = _sample_cone_points(rng, cone, p, m, variant)
        vals = _batch_regression_ratio(entries, cone, B)
        top = float(np.max(vals)) if vals.size else 0.0
        if top > best:
            best = top
    return best, "spike-and-greedy plus random cone search"


def _rr_upper_routes(gram: GramMatrix, cone: ConeSpec, variant: str, cap: int, sign_cap: int):
    """Certified upper bounds for the regression ratio at L = 1."""
    routes = {}
    p, s = gram.p, cone.s
    S_sub = SubsetN(cone.S)
    lam2_s = min_eigen_11(gram, S_sub)
    maxdiag = float(np.max(np.diag(gram.entries)))
    tiny = SINGULAR_RTOL * max(maxdiag, 1.0)

    try:
        lam2_n = lam2_s if cone.N == s else uniform_eigenvalue(gram, cone, min(cap, ROUTE_CAP)).estimate
        if lam2_n > tiny:
            routes["cauchy_schwarz"] = math.sqrt(s) * math.sqrt(maxdiag) / math.sqrt(lam2_n)
    except CapExceeded:
        pass

    if cone.N == s and lam2_s > tiny:
        routes["column_norm"] = math.sqrt(s) * block_norm_2q(gram, S_sub, math.inf, "exact").estimate / lam2_s
        routes["mutual"] = coherence(gram, cone, "mutual").estimate
        routes["cumulative"] = coherence(gram, cone, "cumulative").estimate

    if cone.N == 2 * s and cone.N <= p:
        try:
            if superset_count(cone, p) + 1 <= min(cap, ROUTE_CAP):
                lam2 = uniform_eigenvalue(gram, cone, min(cap, ROUTE_CAP)).estimate
                if lam2 > tiny:
                    theta = restricted_orthogonality(gram, cone, min(cap, ROUTE_CAP)).estimate
                    routes["weak_rip"] = theta / lam2
                    norms = {math.inf: 0.0, 2.0: 0.0, 1.0: 0.0}
                    row_sum = 0.0
                    nsets = list(enumerate_supersets(cone, p, min(cap, ROUTE_CAP)))
                    for nset in nsets:
                        for q in norms:
                            try:
                                nrm = block_norm_2q(gram, nset, q, "exact", sign_cap).estimate
                            except CapExceeded:
                                nrm = block_norm_2q(gram, nset, q, "column_bound").estimate
                            norms[q] = max(norms[q], nrm)
                        if variant == "plain":
                            outside = list(nset.complement(p))
                            if outside:
                                sums = np.abs(gram.entries[np.ix_(outside, list(nset.members))]).sum(axis=0)
                                row_sum = max(row_sum, float(np.sqrt(np.sum(sums ** 2))))
                    for q, power in ((math.inf, 1.0), (2.0, math.sqrt(s)), (1.0, float(s))):
                        routes[f"chunked_q{'inf' if math.isinf(q) else int(q)}"] = (
                            math.sqrt(s) * norms[q] / (power * lam2)
                        )
                    if variant == "plain":
                        routes["row_sum"] = row_sum / (math.sqrt(s) * lam2)
        except CapExceeded:
            pass

    if not routes:
        return math.inf, "no applicable route"
    best = min(routes, key=routes.get)
    note = f"route={best}; " + ", ".join(f"{k}={v!r}" for k, v in sorted(routes.items()))
    return routes[best], note


def restricted_regression(gram: GramMatrix, cone: ConeSpec, variant: str = "plain",
                          config: SolverConfig = DEFAULT_CONFIG, cap: int = DEFAULT_SUBSET_CAP,
                          sign_cap: int = DEFAULT_SIGN_CAP, search: bool = True) -> BoundedValue:
    """The restricted regression constant as an Interval.

    The constant scales linearly in L (both the budget and the objective
    numerator are linear in the tail), so everything is computed at L = 1 and
    rescaled.  search=False skips the feasible-point search and returns the
    cheap certified upper bound with a trivial lower endpoint.
    """
    cone.validate_p(gram.p)
    if variant not in ("plain", "adaptive"):
        raise InvalidParameter(f"unknown cone variant {variant!r}")
    if cone.L == 0.0:
        return BoundedValue.exact(0.0, provenance="L=0: empty tail budget")
    base = cone.with_(L=1.0)
    upper, up_note = _rr_upper_routes(gram, base, variant, cap, sign_cap)
    lower = 0.0
    low_note = "search skipped"
    if search:
        lower, low_note = _rr_search(gram, base, variant, config)
    lower = min(lower, upper)
    estimate = lower if search else upper
    bv = BoundedValue.interval(estimate, lower, upper,
                               provenance=f"lower: {low_note}; upper: {up_note}")
    return bv.scaled(cone.L)


def certified_lower_phi(gram: GramMatrix, cone: ConeSpec, target: str = "compatibility",
                        variant: str = "plain", config: SolverConfig = DEFAULT_CONFIG,
                        cap: int = DEFAULT_SUBSET_CAP, routes=None) -> BoundedValue:
    """Best certified closed-form lower bound for a cone-restricted minimum.

    target "compatibility" bounds the compatibility constant; target
    "restricted_eigenvalue" bounds phi^2(L, S, N) for the given cone (both
    variants, since the adaptive cone contains the plain one).  Routes:

    * lambda_min: the smallest eigenvalue of Sigma; applies only when Sigma is
      nonsingular.
    * uniform_leverage: (1 - L * leverage(S, s))^2 * Lambda^2(S, s), for the
      compatibility target.
    * regression@N': (1 - L * regression_upper(1, S, N'))^2 * Lambda^2(S, N')
      with N' in {s, N, 2s}, variant-matched; a lower bound for the target at
      N <= N' by monotonicity, and for compatibility at any N'.
    * weak_rip: (1 - L * theta/Lambda^2)^2 * Lambda^2 at N' = 2s, same
      applicability as regression@2s.

    routes, when given, restricts which routes are attempted.  Routes whose
    enumerations exceed the internal budget are skipped silently.  When no
    route applies the result is the trivial lower 0 with certificate Estimate.
    """
    cone.validate_p(gram.p)
    if target not in ("compatibility", "restricted_eigenvalue"):
        raise InvalidParameter(f"unknown target {target!r}")
    p, s, L = gram.p, cone.s, cone.L
    rr_variant = "adaptive" if (target == "restricted_eigenvalue" and variant == "adaptive") else "plain"

    def want(name):
        return routes is None or name in routes

    found = {}
    if want("lambda_min"):
        vals = np.linalg.eigvalsh(gram.entries)
        if float(vals[0]) > SINGULAR_RTOL * max(float(vals[-1]), 0.0) and float(vals[0]) > 0.0:
            found["lambda_min"] = float(vals[0])

    if want("uniform_leverage") and target == "compatibility":
        try:
            irr = irrepresentable_uniform(gram, cone.with_(N=s), cap).estimate
            if L * irr < 1.0:
                found["uniform_leverage"] = (1.0 - L * irr) ** 2 * max(0.0, min_eigen_11(gram, SubsetN(cone.S)))
        except (SingularBlock, AllSubmatricesSingular):
            pass

    for n_prime in sorted({s, cone.N, min(2 * s, p)}):
        name = f"regression@{n_prime}"
        if not want(name):
            continue
        if target == "restricted_eigenvalue" and n_prime < cone.N:
            continue
        try:
            c2 = cone.with_(N=n_prime)
            lam2 = uniform_eigenvalue(gram, c2, min(cap, ROUTE_CAP)).estimate
            if lam2 <= 0.0:
                continue
            ru = restricted_regression(gram, c2.with_(L=1.0), rr_variant, config,
                                       cap=min(cap, ROUTE_CAP), search=False).upper
            if L * ru < 1.0:
                found[name] = (1.0 - L * ru) ** 2 * lam2
        except CapExceeded:
            continue

    if want("weak_rip") and 2 * s <= p and (target == "compatibility" or cone.N <= 2 * s):
        try:
            c2 = cone.with_(N=2 * s)
            lam2 = uniform_eigenvalue(gram, c2, min(cap, ROUTE_CAP)).estimate
            theta = restricted_orthogonality(gram, c2, min(cap, ROUTE_CAP)).estimate
            scale = max(float(np.max(np.diag(gram.entries))), 1.0)
            if lam2 > SINGULAR_RTOL * scale and L * theta / lam2 < 1.0:
                found["weak_rip"] = (1.0 - L * theta / lam2) ** 2 * lam2
        except (CapExceeded, SingularUniformEigenvalue):
            pass

    if not found:
        return BoundedValue(0.0, 0.0, math.inf, Certificate.ESTIMATE, provenance="route=none")
    best = max(found, key=found.get)
    note = f"route={best}; " + ", ".join(f"{k}={v!r}" for k, v in sorted(found.items()))
    return BoundedValue.certified_lower(found[best], provenance=note)
