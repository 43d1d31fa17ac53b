"""Worked-example Gram matrices, Gaussian design sampling, and Monte Carlo
verification of the tail bounds used by the noisy analysis.

Generators are pure functions of their spec: the same spec yields a
bit-identical matrix on every platform.  All randomness flows through
counter-based streams derived from the generator seed, with Gaussian draws by the
Box-Muller map z = sqrt(-2 ln(1 - U1)) cos(2 pi U2); matrix square roots go
through an eigendecomposition with negative eigenvalues clamped at zero so
rank-deficient populations sample cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import GramMatrix, derived_rng
from .errors import InvalidParameter
from .lasso import NoisyProblem, lambda0_bound

GENERATOR_KINDS = (
    "identity",
    "equicorrelation",
    "toeplitz_geometric",
    "block_equicorrelation",
    "rank_one_cross",
    "coupled_pair",
    "random_psd",
    "gaussian_design",
)


@dataclass(frozen=True)
class GeneratorSpec:
    """A named matrix construction plus its parameter map."""

    kind: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise InvalidParameter(
                f"unknown generator kind {self.kind!r}; expected one of {GENERATOR_KINDS}"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise InvalidParameter("generator spec must be a mapping with a 'kind' entry")
        params = data.get("parameters", {k: v for k, v in data.items() if k != "kind"})
        if not isinstance(params, dict):
            raise InvalidParameter("generator parameters must be a mapping")
        return cls(str(data["kind"]), dict(params))

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "parameters": dict(self.parameters)}


def _box_muller(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normals via z = sqrt(-2 ln(1 - U1)) cos(2 pi U2)."""
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def _psd_sqrt(entries: np.ndarray) -> np.ndarray:
    """Symmetric square root with negative eigenvalues clamped at zero."""
    vals, vecs = np.linalg.eigh(entries)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def _need_int(params: dict, key: str, minimum: int = 1) -> int:
    if key not in params:
        raise InvalidParameter(f"missing generator parameter {key!r}")
    value = params[key]
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < minimum:
        raise InvalidParameter(f"parameter {key!r} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _need_rho(params: dict, default: Optional[float] = None) -> float:
    if "rho" not in params:
        if default is not None:
            return default
        raise InvalidParameter("missing generator parameter 'rho'")
    rho = float(params["rho"])
    if not 0.0 <= rho < 1.0:
        raise InvalidParameter(f"parameter 'rho' must satisfy 0 <= rho < 1, got {rho!r}")
    return rho


def equicorrelation_entries(p: int, rho: float) -> np.ndarray:
    return (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))


def toeplitz_geometric_entries(p: int, rho: float) -> np.ndarray:
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def rank_one_cross_entries(p: int, s: int, rho: float,
                           b1=None, b2=None) -> np.ndarray:
    """Identity head block, identity tail block, and a rank-one cross block
    rho * b2 b1' with unit vectors b1 (head) and b2 (tail)."""
    if not 1 <= s < p:
        raise InvalidParameter(f"need 1 <= s < p, got s={s}, p={p}")
    b1 = np.full(s, 1.0 / math.sqrt(s)) if b1 is None else np.asarray(b1, dtype=float)
    if b2 is None:
        b2 = np.zeros(p - s)
        b2[0] = 1.0
    else:
        b2 = np.asarray(b2, dtype=float)
    if b1.shape != (s,) or b2.shape != (p - s,):
        raise InvalidParameter("b1 must have length s and b2 length p - s")
    for name, v in (("b1", b1), ("b2", b2)):
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
            raise InvalidParameter(f"{name} must have unit Euclidean norm")
    sig = np.eye(p)
    cross = rho * np.outer(b2, b1)
    sig[s:, :s] = cross
    sig[:s, s:] = cross.T
    return sig


def coupled_pair_entries(p: int, s: int, rho: float) -> np.ndarray:
    """First two active coordinates correlated at rho, everything else
    orthonormal: diag(diag([[1, rho], [rho, 1]], I_{s-2}), I_{p-s})."""
    if s <= 2:
        raise InvalidParameter(f"need s > 2, got s={s}")
    if p < s:
        raise InvalidParameter(f"need p >= s, got p={p}, s={s}")
    sig = np.eye(p)
    sig[0, 1] = sig[1, 0] = rho
    return sig


def block_equicorrelation_entries(p: int, block_size: int, rho: float) -> np.ndarray:
    if p % block_size != 0:
        raise InvalidParameter(f"block_size {block_size} must divide p {p}")
    block = equicorrelation_entries(block_size, rho)
    out = np.zeros((p, p))
    for start in range(0, p, block_size):
        out[start:start + block_size, start:start + block_size] = block
    return out


def random_psd_entries(p: int, seed: int, jitter: float = 0.0,
                       normalize: bool = True) -> np.ndarray:
    """A'A / p from Box-Muller normals, optional ridge, optionally rescaled
    to unit diagonal."""
    rng = derived_rng(seed, "generate", "random_psd", p)
    a = _box_muller(rng, (p, p))
    sig = a.T @ a / p + float(jitter) * np.eye(p)
    if normalize:
        d = np.sqrt(np.diag(sig))
        if float(np.min(d)) <= 0.0:
            raise InvalidParameter("cannot normalize a matrix with a zero diagonal entry")
        sig = sig / np.outer(d, d)
    return (sig + sig.T) / 2.0


def generate(spec: GeneratorSpec) -> Union[GramMatrix, NoisyProblem]:
    """Materialize the matrix (or sampled regression problem) a spec names."""
    params = spec.parameters
    kind = spec.kind
    if kind == "identity":
        return GramMatrix(np.eye(_need_int(params, "p")))
    if kind == "equicorrelation":
        p = _need_int(params, "p")
        return GramMatrix(equicorrelation_entries(p, _need_rho(params)))
    if kind == "toeplitz_geometric":
        p = _need_int(params, "p")
        return GramMatrix(toeplitz_geometric_entries(p, _need_rho(params)))
    if kind == "block_equicorrelation":
        p = _need_int(params, "p")
        m = _need_int(params, "block_size")
        return GramMatrix(block_equicorrelation_entries(p, m, _need_rho(params)))
    if kind == "rank_one_cross":
        p = _need_int(params, "p")
        s = _need_int(params, "s")
        return GramMatrix(rank_one_cross_entries(p, s, _need_rho(params),
                                                 params.get("b1"), params.get("b2")))
    if kind == "coupled_pair":
        p = _need_int(params, "p")
        s = _need_int(params, "s")
        return GramMatrix(coupled_pair_entries(p, s, _need_rho(params)))
    if kind == "random_psd":
        p = _need_int(params, "p")
        seed = _need_int(params, "seed", minimum=0) if "seed" in params else 0
        return GramMatrix(random_psd_entries(p, seed, float(params.get("jitter", 0.0)),
                                             bool(params.get("normalize", True))))
    if kind == "gaussian_design":
        return _generate_gaussian_design(params)
    raise InvalidParameter(f"unknown generator kind {kind!r}")


def _generate_gaussian_design(params: dict) -> NoisyProblem:
    n = _need_int(params, "n")
    p = _need_int(params, "p")
    seed = _need_int(params, "seed", minimum=0) if "seed" in params else 0
    pop = params.get("population")
    if pop is None:
        population = GramMatrix(np.eye(p))
    elif isinstance(pop, GramMatrix):
        population = pop
    elif isinstance(pop, dict):
        population = generate(GeneratorSpec.from_dict(pop))
        if not isinstance(population, GramMatrix):
            raise InvalidParameter("population spec must generate a Gram matrix")
    else:
        population = GramMatrix(np.asarray(pop, dtype=float))
    if population.p != p:
        raise InvalidParameter(f"population is {population.p}x{population.p}, expected p={p}")
    x, _ = sample_gaussian_design(n, p, population, seed)
    beta0 = params.get("beta0")
    if beta0 is None:
        beta0 = np.zeros(p)
    else:
        beta0 = np.asarray(beta0, dtype=float)
        if beta0.shape != (p,):
            raise InvalidParameter(f"beta0 must have length {p}")
    sd = float(params.get("noise_sd", 1.0))
    if sd < 0.0:
        raise InvalidParameter(f"noise_sd must be nonnegative, got {sd!r}")
    eps = sd * _box_muller(derived_rng(seed, "generate", "gaussian_design", "noise"), n)
    y = x @ beta0 + eps
    return NoisyProblem(x, y, beta0=beta0, epsilon=eps)


def sample_gaussian_design(n: int, p: int, population: GramMatrix, seed: int):
    """n i.i.d. rows with the population covariance; returns (X, inner-product
    matrix X'X / n)."""
    if n < 1 or p < 1:
        raise InvalidParameter(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    if population.p != p:
        raise InvalidParameter(f"population is {population.p}x{population.p}, expected p={p}")
    root = _psd_sqrt(population.entries)
    z = _box_muller(derived_rng(seed, "gaussian-design", n, p), (n, p))
    x = z @ root
    sighat = x.T @ x / n
    return x, GramMatrix((sighat + sighat.T) / 2.0)


def lambda_tilde(t: float, n: int, p: int) -> float:
    """Concentration radius sqrt((4t + 8 ln p)/n) + (4t + 8 ln p)/n."""
    if t < 0.0 or n < 1 or p < 1:
        raise InvalidParameter(f"need t >= 0, n >= 1, p >= 1, got t={t}, n={n}, p={p}")
    ratio = (4.0 * t + 8.0 * math.log(p)) / n
    return math.sqrt(ratio) + ratio


@dataclass(frozen=True)
class MonteCarloResult:
    """Empirical tail frequencies against their theoretical bounds.

    empirical_tail[i] is the observed frequency of the bad event at
    t_values[i]; bound[i] = 2 exp(-t).  passed[i] allows three binomial
    standard deviations plus 1/reps of slack on top of the bound.
    """

    kind: str
    reps: int
    t_values: tuple
    thresholds: tuple
    empirical_tail: tuple
    bound: tuple
    passed: tuple

    def __post_init__(self):
        for e in self.empirical_tail:
            if not 0.0 <= e <= 1.0:
                raise InvalidParameter(f"empirical tail frequency {e!r} outside [0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "reps": self.reps,
            "t_values": list(self.t_values),
            "thresholds": list(self.thresholds),
            "empirical_tail": list(self.empirical_tail),
            "bound": list(self.bound),
            "pass": list(self.passed),
        }


def _tail_verdicts(kind: str, reps: int, t_values, thresholds, statistics) -> MonteCarloResult:
    stats = np.asarray(statistics, dtype=float)
    empirical, bounds, passed = [], [], []
    for t, thr in zip(t_values, thresholds):
        emp = float(np.mean(stats > thr))
        bound = 2.0 * math.exp(-float(t))
        clipped = min(max(bound, 0.0), 1.0)
        slack = 3.0 * math.sqrt(clipped * (1.0 - clipped) / reps) + 1.0 / reps
        empirical.append(emp)
        bounds.append(bound)
        passed.append(bool(emp <= bound + slack))
    return MonteCarloResult(kind, reps, tuple(float(t) for t in t_values),
                            tuple(float(x) for x in thresholds),
                            tuple(empirical), tuple(bounds), tuple(passed))


def concentration_experiment(n: int, p: int, population: GramMatrix, reps: int,
                             t_list, seed: int = 0) -> MonteCarloResult:
    """Frequency of d_inf(inner-product matrix, population) exceeding the
    concentration radius, per t, against the 2 exp(-t) bound."""
    if reps < 100:
        raise InvalidParameter(f"need reps >= 100, got {reps}")
    if population.p != p:
        raise InvalidParameter(f"population is {population.p}x{population.p}, expected p={p}")
    t_values = [float(t) for t in t_list]
    if not t_values:
        raise InvalidParameter("t_list must be nonempty")
    pop = population.entries
    root = _psd_sqrt(pop)
    distances = np.empty(reps)
    for r in range(reps):
        z = _box_muller(derived_rng(seed, "concentration", r), (n, p))
        x = z @ root
        sighat = x.T @ x / n
        distances[r] = float(np.max(np.abs(sighat - pop)))
    thresholds = [lambda_tilde(t, n, p) for t in t_values]
    return _tail_verdicts("concentration", reps, t_values, thresholds, distances)


def noise_bound_experiment(n: int, p: int, reps: int, t_list,
                           seed: int = 0) -> MonteCarloResult:
    """Frequency of the empirical noise level 2 max_j |(psi_j, eps)_n|
    exceeding its theoretical quantile, per t, against 2 exp(-t).

    The design is a fixed Gaussian draw with every column rescaled to exact
    unit length in the n-averaged inner product, as the quantile formula
    requires.
    """
    if reps < 100:
        raise InvalidParameter(f"need reps >= 100, got {reps}")
    t_values = [float(t) for t in t_list]
    if not t_values:
        raise InvalidParameter("t_list must be nonempty")
    x = _box_muller(derived_rng(seed, "noise-bound", "design", n, p), (n, p))
    norms = np.sqrt(np.mean(x * x, axis=0))
    norms[norms == 0.0] = 1.0
    x = x / norms
    levels = np.empty(reps)
    for r in range(reps):
        eps = _box_muller(derived_rng(seed, "noise-bound", r), n)
        levels[r] = 2.0 * float(np.max(np.abs(x.T @ eps))) / n
    thresholds = [lambda0_bound(t, n, p) for t in t_values]
    return _tail_verdicts("noise", reps, t_values, thresholds, levels)
