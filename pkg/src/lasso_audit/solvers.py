"""Reusable optimization engines.

Exact l1-ball projection, projected gradient for convex quadratics over a
projectable set, cyclic coordinate descent for the l1-penalized quadratic,
and a dense two-phase simplex with Bland's rule.  All engines are
deterministic for a fixed configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InvalidParameter,
    IterationLimit,
    MaxItersExceeded,
    ZeroDiagonal,
)

_PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 100_000
    tol: float = 1e-9
    restarts: int = 16
    samples: int = 100_000
    seed: int = 0
    step_rule: str = "fixed_inverse_lipschitz"  # or "backtracking"

    def __post_init__(self):
        if self.max_iters < 1 or self.tol <= 0 or self.restarts < 1 or self.samples < 0:
            raise InvalidParameter("invalid solver configuration")
        if self.step_rule not in ("fixed_inverse_lipschitz", "backtracking"):
            raise InvalidParameter(f"unknown step rule {self.step_rule!r}")

    def reduced(self, restarts=2, samples=20_000) -> "SolverConfig":
        """Cheaper search profile for large instances; certified bounds are unaffected."""
        return replace(self, restarts=restarts, samples=samples)


DEFAULT_CONFIG = SolverConfig()


def project_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto {x : ||x||_1 <= radius} by sort and threshold."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise InvalidParameter("project_l1_ball expects a vector")
    if not np.all(np.isfinite(v)) or not np.isfinite(radius) or radius < 0:
        raise InvalidParameter("projection needs finite inputs and radius >= 0")
    if radius == 0.0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    cumsum = np.cumsum(u)
    ks = np.arange(1, u.size + 1)
    rho = int(np.max(np.nonzero(u * ks > (cumsum - radius))[0]))
    theta = (cumsum[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def lipschitz_estimate(quadratic: np.ndarray, iters: int = 50) -> float:
    """2 * lambda_max(Q) estimated by fixed-count power iteration."""
    q = np.asarray(quadratic, dtype=float)
    n = q.shape[0]
    x = np.ones(n) / np.sqrt(n)
    # deterministic tie-breaker so symmetric sign structures cannot stall
    x += np.arange(n) * (1e-6 / max(n, 1))
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = q @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        lam = float(x @ y)
        x = y / norm
    return 2.0 * abs(lam)


def projected_gradient_qp(quadratic, linear, projection, config: SolverConfig = DEFAULT_CONFIG,
                          x0=None, lipschitz=None):
    """Minimize x'Qx + c'x over a convex set given by an exact projection map.

    Returns (x, value, residual) where residual is the sup-norm of the
    projected-gradient step x - P(x - grad/L).  Raises MaxItersExceeded with
    the best iterate attached when the budget runs out.
    """
    q = np.asarray(quadratic, dtype=float)
    c = np.asarray(linear, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1] or c.shape != (q.shape[0],):
        raise InvalidParameter("quadratic must be square and linear must match")
    lip = lipschitz if lipschitz is not None else lipschitz_estimate(q)
    lip = max(lip * 1.01, 1e-12)

    def value(x):
        return float(x @ q @ x + c @ x)

    x = projection(np.zeros(q.shape[0]) if x0 is None else np.asarray(x0, dtype=float))
    fx = value(x)
    residual = np.inf
    for _ in range(config.max_iters):
        grad = 2.0 * (q @ x) + c
        if config.step_rule == "backtracking":
            step = 1.0 / lip
            for _ in range(60):
                cand = projection(x - step * grad)
                if value(cand) <= fx + 1e-14 * max(1.0, abs(fx)):
                    break
                step /= 2.0
            nxt = cand
        else:
            nxt = projection(x - grad / lip)
            fn = value(nxt)
            doublings = 0
            # fixed step is only valid when lip >= 2 lambda_max; recover if the
            # power-iteration estimate was low
            while fn > fx + 1e-12 * max(1.0, abs(fx)) and doublings < 60:
                lip *= 2.0
                nxt = projection(x - grad / lip)
                fn = value(nxt)
                doublings += 1
        residual = float(np.max(np.abs(x - nxt)))
        x = nxt
        fx = value(x)
        if residual <= config.tol:
            return x, fx, residual
    raise MaxItersExceeded(
        f"projected gradient did not reach tol={config.tol} in {config.max_iters} iters",
        best=(x, fx, residual),
    )


def soft_threshold(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def kkt_residual_quadratic(q, c, lam, beta) -> float:
    """Sup-norm violation of the stationarity conditions of
    beta'Q beta - 2 c'beta + lam * ||beta||_1."""
    grad = 2.0 * (q @ beta - c)
    res = 0.0
    for j in range(beta.shape[0]):
        if beta[j] != 0.0:
            res = max(res, abs(grad[j] + lam * np.sign(beta[j])))
        else:
            res = max(res, max(0.0, abs(grad[j]) - lam))
    return float(res)


def coordinate_descent_lasso(quadratic, correlation, lam: float, config: SolverConfig = DEFAULT_CONFIG,
                             start=None):
    """Minimize beta'Q beta - 2 c'beta + lam ||beta||_1 by cyclic coordinate descent.

    Termination is on the KKT residual (sup-norm <= config.tol), which is the
    exact optimality certificate for this convex objective.  Returns
    (beta, residual, sweeps).
    """
    q = np.asarray(quadratic, dtype=float)
    c = np.asarray(correlation, dtype=float)
    p = q.shape[0]
    if q.shape != (p, p) or c.shape != (p,):
        raise InvalidParameter("shape mismatch in coordinate descent")
    if lam < 0:
        raise InvalidParameter("lam must be nonnegative")
    diag = np.diag(q).copy()
    if np.any(diag <= 0.0):
        raise ZeroDiagonal("coordinate descent needs strictly positive diagonal")
    beta = np.zeros(p) if start is None else np.asarray(start, dtype=float).copy()
    g = q @ beta
    half = lam / 2.0
    best = None
    for sweep in range(1, config.max_iters + 1):
        for j in range(p):
            old = beta[j]
            z = c[j] - (g[j] - diag[j] * old)
            new = soft_threshold(z, half) / diag[j]
            if new != old:
                beta[j] = new
                g += q[:, j] * (new - old)
        grad = 2.0 * (g - c)
        active = beta != 0.0
        res_active = np.abs(grad[active] + lam * np.sign(beta[active])).max() if active.any() else 0.0
        res_zero = np.maximum(np.abs(grad[~active]) - lam, 0.0).max() if (~active).any() else 0.0
        residual = float(max(res_active, res_zero))
        if best is None or residual < best[1]:
            best = (beta.copy(), residual, sweep)
        if residual <= config.tol:
            return beta, residual, sweep
    raise MaxItersExceeded(
        f"coordinate descent did not reach tol={config.tol} in {config.max_iters} sweeps",
        best=best,
    )


@dataclass(frozen=True)
class LPProblem:
    """min c'x subject to A x = b, x >= 0."""

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        a = np.asarray(self.a_eq, dtype=float)
        b = np.asarray(self.b_eq, dtype=float)
        if a.ndim != 2 or c.ndim != 1 or b.ndim != 1:
            raise InvalidParameter("LPProblem needs matrix A and vectors c, b")
        if a.shape != (b.shape[0], c.shape[0]):
            raise InvalidParameter("LPProblem shape mismatch")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)


@dataclass(frozen=True)
class SimplexResult:
    status: str  # Optimal | Infeasible | Unbounded
    x: np.ndarray
    objective: float
    duals: np.ndarray
    pivots: int


def _simplex_phase(tableau, basis, n_real, limit, pivots):
    """Run Bland-rule pivoting on a tableau whose last row holds reduced costs."""
    m = tableau.shape[0] - 1
    while True:
        costs = tableau[-1, :-1]
        entering = -1
        for j in range(costs.shape[0]):
            if costs[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return pivots, None
        ratios = []
        for i in range(m):
            a = tableau[i, entering]
            if a > _PIVOT_TOL:
                ratios.append((tableau[i, -1] / a, basis[i], i))
        if not ratios:
            return pivots, entering  # unbounded direction
        # Bland: among minimal ratios leave the smallest basis index
        ratios.sort(key=lambda t: (t[0], t[1]))
        best_ratio = ratios[0][0]
        leave_row = min(
            (row for ratio, bidx, row in ratios if ratio <= best_ratio + _PIVOT_TOL * (1 + abs(best_ratio))),
            key=lambda r: basis[r],
        )
        pivot = tableau[leave_row, entering]
        tableau[leave_row] /= pivot
        for i in range(tableau.shape[0]):
            if i != leave_row and tableau[i, entering] != 0.0:
                tableau[i] -= tableau[i, entering] * tableau[leave_row]
        basis[leave_row] = entering
        pivots += 1
        if pivots > limit:
            raise IterationLimit(f"simplex exceeded {limit} pivots")


def simplex_lp(problem: LPProblem, config: SolverConfig = DEFAULT_CONFIG) -> SimplexResult:
    """Two-phase dense tableau simplex with Bland's anti-cycling rule."""
    a = problem.a_eq.copy()
    b = problem.b_eq.copy()
    c = problem.c.copy()
    m, n = a.shape
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0
    limit = max(config.max_iters, 10_000)

    # phase 1: artificial variables
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = list(range(n, n + m))
    tableau[-1, :] = -tableau[:m, :].sum(axis=0)
    tableau[-1, n : n + m] = 0.0
    pivots, unbounded = _simplex_phase(tableau, basis, n, limit, 0)
    if unbounded is not None:
        raise IterationLimit("phase-1 reported an unbounded direction; inconsistent input")
    phase1_value = -tableau[-1, -1]
    if phase1_value > 1e-8 * max(1.0, float(np.max(np.abs(b)) if b.size else 1.0)):
        return SimplexResult("Infeasible", np.full(n, np.nan), np.nan, np.full(m, np.nan), pivots)

    # drive remaining artificials out of the basis
    drop_rows = []
    for i in range(m):
        if basis[i] >= n:
            found = -1
            for j in range(n):
                if abs(tableau[i, j]) > _PIVOT_TOL:
                    found = j
                    break
            if found < 0:
                drop_rows.append(i)  # redundant constraint
                continue
            pivot = tableau[i, found]
            tableau[i] /= pivot
            for k in range(tableau.shape[0]):
                if k != i and tableau[k, found] != 0.0:
                    tableau[k] -= tableau[k, found] * tableau[i]
            basis[i] = found
            pivots += 1
    keep = [i for i in range(m) if i not in drop_rows]
    rows = keep + [m]
    tableau = tableau[np.ix_(rows, list(range(n)) + [n + m])]
    basis = [basis[i] for i in keep]
    m2 = len(keep)

    # phase 2
    tableau[-1, :-1] = c
    tableau[-1, -1] = 0.0
    for i in range(m2):
        if c[basis[i]] != 0.0:
            tableau[-1] -= c[basis[i]] * tableau[i]
    pivots, unbounded = _simplex_phase(tableau, basis, n, limit, pivots)
    if unbounded is not None:
        return SimplexResult("Unbounded", np.full(n, np.nan), -np.inf, np.full(m, np.nan), pivots)

    x = np.zeros(n)
    for i in range(m2):
        x[basis[i]] = tableau[i, -1]
    objective = float(c @ x)
    # duals from the final basis; rows were sign-flipped to make b >= 0, so
    # flip the corresponding multipliers back for the original system
    duals = np.zeros(m)
    if m2 > 0:
        bmat = a[np.ix_(keep, basis)]
        try:
            y = np.linalg.solve(bmat.T, c[basis])
        except np.linalg.LinAlgError:
            y = np.full(m2, np.nan)
        for pos, i in enumerate(keep):
            duals[i] = -y[pos] if flip[i] else y[pos]
    return SimplexResult("Optimal", x, objective, duals, pivots)
