"""Exact design-matrix condition constants.

Every function here returns either a closed-form value or an exhaustive
enumeration over index sets, so results carry Exact certificates (or
CertifiedUpper where a formula is itself an upper bound).  Enumerations are
guarded by explicit caps and fail loudly with CapExceeded.

Minima over enlargements {nset : nset contains S, |nset| <= N} are evaluated
at nset = S and at all |nset| = N; for eigenvalue-type quantities the
intermediate sizes are dominated by eigenvalue interlacing, and for the
leverage minimum this evaluation set is the documented convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_SUBSET_CAP,
    SINGULAR_RTOL,
    BoundedValue,
    ConeSpec,
    GramMatrix,
    SubsetN,
    block,
    enumerate_supersets,
    inverse_11,
    min_eigen_11,
)
from .errors import (
    AllSubmatricesSingular,
    CapExceeded,
    DenominatorNonPositive,
    InvalidParameter,
    NonpositiveDenominator,
    SingularBlock,
    SingularUniformEigenvalue,
)

DEFAULT_SIGN_CAP = 2 ** 20


def _candidate_nsets(gram: GramMatrix, cone: ConeSpec, cap: int):
    """nset = S followed by all size-N supersets, lexicographically."""
    yield SubsetN(cone.S)
    if cone.N > cone.s:
        yield from enumerate_supersets(cone, gram.p, cap)


def uniform_eigenvalue(gram: GramMatrix, cone: ConeSpec, cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """Lambda^2(S, N): the smallest eigenvalue of Sigma_11(nset) minimized over
    enlargements of S up to size N.  By interlacing the minimum over sizes
    <= N is attained at size N, so only nset = S and |nset| = N are visited."""
    cone.validate_p(gram.p)
    best = math.inf
    witness = None
    for nset in _candidate_nsets(gram, cone, cap):
        val = min_eigen_11(gram, nset)
        if val < best:
            best = val
            witness = nset.members
    return BoundedValue.exact(best, provenance=f"argmin nset={witness}")


def restricted_isometry(gram: GramMatrix, n_size: int, cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """delta_N over all size-N index sets (sizes < N are dominated by interlacing)."""
    p = gram.p
    if not (1 <= n_size <= p):
        raise InvalidParameter(f"restricted isometry needs 1 <= N <= p, got N={n_size}")
    count = math.comb(p, n_size)
    if count > cap:
        raise CapExceeded(count, cap, what=f"isometry enumeration C({p},{n_size})")
    best = -math.inf
    witness = None
    for members in itertools.combinations(range(p), n_size):
        vals = np.linalg.eigvalsh(gram.entries[np.ix_(members, members)])
        dev = max(float(vals[-1]) - 1.0, 1.0 - float(vals[0]))
        if dev > best:
            best = dev
            witness = members
    return BoundedValue.exact(best, provenance=f"argmax nset={witness}")


def _ortho_sizes(p: int, s: int, n_size: int):
    """Pair sizes (|nset|, |mset|) that dominate the sup over |nset| <= N,
    |mset| <= s with mset disjoint from nset.  Enlarging nset keeps the
    cross block's singular values nondecreasing, so for each mset size m the
    sup is attained at |nset| = min(N, p - m)."""
    sizes = {}
    for m in range(1, min(s, p - s) + 1):
        n_star = min(n_size, p - m)
        if n_star < s:
            continue
        m_star = min(s, p - n_star)
        sizes[n_star] = max(sizes.get(n_star, 0), m_star)
    return sorted(sizes.items())


def restricted_orthogonality(gram: GramMatrix, cone: ConeSpec, cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """theta(S, N): the largest singular value of Sigma[nset, mset] over
    enlargements nset of S (|nset| <= N) and disjoint msets with |mset| <= s."""
    cone.validate_p(gram.p)
    p, s = gram.p, cone.s
    s_set = set(cone.S)
    plan = _ortho_sizes(p, s, cone.N)
    total = 0
    for n_star, m_star in plan:
        total += math.comb(p - s, n_star - s) * math.comb(p - n_star, m_star)
    if total > cap:
        raise CapExceeded(total, cap, what="restricted orthogonality enumeration")
    best = 0.0
    witness = None
    others = [j for j in range(p) if j not in s_set]
    for n_star, m_star in plan:
        for extra in itertools.combinations(others, n_star - s):
            nset = tuple(sorted(cone.S + extra))
            outside = [j for j in range(p) if j not in set(nset)]
            for mset in itertools.combinations(outside, m_star):
                sv = np.linalg.svd(gram.entries[np.ix_(nset, mset)], compute_uv=False)
                if sv.size and float(sv[0]) > best:
                    best = float(sv[0])
                    witness = (nset, mset)
    return BoundedValue.exact(best, provenance=f"argmax pair={witness}")


def theta_uniform(gram: GramMatrix, s_size: int, n_size: int, cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """theta_{s,N} = max over |S| = s of theta(S, N); equivalently the sup of
    the cross-block spectral norm over all disjoint (nset, mset) pairs with
    s <= |nset| <= N and |mset| <= s."""
    p = gram.p
    if not (1 <= s_size <= p):
        raise InvalidParameter("theta_uniform needs 1 <= s <= p")
    plan = _ortho_sizes(p, s_size, min(n_size, p))
    total = sum(math.comb(p, n) * math.comb(p - n, m) for n, m in plan)
    if total > cap:
        raise CapExceeded(total, cap, what="uniform orthogonality enumeration")
    best = 0.0
    for n_star, m_star in plan:
        for nset in itertools.combinations(range(p), n_star):
            outside = [j for j in range(p) if j not in set(nset)]
            for mset in itertools.combinations(outside, m_star):
                sv = np.linalg.svd(gram.entries[np.ix_(nset, mset)], compute_uv=False)
                if sv.size:
                    best = max(best, float(sv[0]))
    return BoundedValue.exact(best)


def rip_constant(gram: GramMatrix, s_size: int, cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """theta_{s,2s} / (1 - delta_s - theta_{s,s}); the denominator must be positive."""
    delta_s = restricted_isometry(gram, s_size, cap).estimate
    t_ss = theta_uniform(gram, s_size, s_size, cap).estimate
    t_s2s = theta_uniform(gram, s_size, 2 * s_size, cap).estimate
    denom = 1.0 - delta_s - t_ss
    if denom <= 0.0:
        raise DenominatorNonPositive(
            f"1 - delta_s - theta_ss = {denom!r} is not positive (delta_s={delta_s!r}, theta_ss={t_ss!r})"
        )
    return BoundedValue.exact(
        t_s2s / denom,
        provenance=f"delta_s={delta_s!r}, theta_ss={t_ss!r}, theta_s2s={t_s2s!r}",
    )


def weak_rip_constant(gram: GramMatrix, cone: ConeSpec, cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """theta(S, N) / Lambda^2(S, N)."""
    lam2 = uniform_eigenvalue(gram, cone, cap).estimate
    scale = float(np.linalg.eigvalsh(gram.entries)[-1])
    if lam2 <= SINGULAR_RTOL * max(scale, 1.0):
        raise SingularUniformEigenvalue(f"Lambda^2(S,N) = {lam2!r} is numerically zero")
    theta = restricted_orthogonality(gram, cone, cap).estimate
    return BoundedValue.exact(theta / lam2, provenance=f"theta={theta!r}, lambda2={lam2!r}")


def _max_row_l1(gram: GramMatrix, nset: SubsetN) -> float:
    """max over tau in the sup-norm ball of ||Sigma_21 Sigma_11^{-1} tau||_inf,
    which a convexity argument reduces to the largest row l1 norm."""
    inv = inverse_11(gram, nset)
    s21 = block(gram, nset, "21")
    if s21.shape[0] == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(s21 @ inv), axis=1)))


def irrepresentable_uniform(gram: GramMatrix, cone: ConeSpec, cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """Uniform leverage constant: min over enlargements of the worst-case
    sup-norm of Sigma_21 Sigma_11^{-1} tau over the unit sup-norm ball.
    Singular Sigma_11 blocks are skipped; if every candidate is singular the
    constant is undefined."""
    cone.validate_p(gram.p)
    best = math.inf
    witness = None
    singular = 0
    total = 0
    for nset in _candidate_nsets(gram, cone, cap):
        total += 1
        try:
            val = _max_row_l1(gram, nset)
        except SingularBlock:
            singular += 1
            continue
        if val < best:
            best = val
            witness = nset.members
    if singular == total:
        raise AllSubmatricesSingular(f"all {total} candidate Sigma_11 blocks are singular")
    return BoundedValue.exact(best, provenance=f"argmin nset={witness}, singular_skipped={singular}")


def _sign_matrix(k: int) -> np.ndarray:
    """All sign vectors in {+1,-1}^k; row g maps bit i of g to -1 when set."""
    if k == 0:
        return np.ones((1, 0))
    g = np.arange(2 ** k, dtype=np.int64)
    bits = (g[:, None] >> np.arange(k)[None, :]) & 1
    return 1.0 - 2.0 * bits


def irrepresentable_signed(gram: GramMatrix, cone: ConeSpec, part: int,
                           cap: int = DEFAULT_SUBSET_CAP, sign_cap: int = DEFAULT_SIGN_CAP):
    """Sign-vector forms of the leverage condition.

    part=2: exists an enlargement nset (s <= |nset| <= N) with
            ||Sigma_21 Sigma_11^{-1} tau||_inf < 1/L for every sign vector tau
            on nset; returns (holds, witness nset).
    part=3: for every sign vector tau_S on S there exist an enlargement and a
            sign extension with ||Sigma_21 Sigma_11^{-1} tau||_inf <= 1;
            returns (holds, {tau_S: (nset, tau)}) or (False, failing tau_S).

    All enlargement sizes s..N are enumerated (smallest first, lexicographic).
    """
    cone.validate_p(gram.p)
    if part not in (2, 3):
        raise InvalidParameter("part must be 2 or 3")
    p, s = gram.p, cone.s
    if 2 ** cone.N > sign_cap:
        raise CapExceeded(2 ** cone.N, sign_cap, what="sign enumeration")
    subset_total = sum(math.comb(p - s, k - s) for k in range(s, cone.N + 1))
    if subset_total > cap:
        raise CapExceeded(subset_total, cap, what="enlargement enumeration")
    others = [j for j in range(p) if j not in set(cone.S)]

    def nsets_by_size():
        for k in range(s, cone.N + 1):
            for extra in itertools.combinations(others, k - s):
                yield SubsetN(tuple(sorted(cone.S + extra)))

    if part == 2:
        limit = math.inf if cone.L == 0 else 1.0 / cone.L
        for nset in nsets_by_size():
            try:
                inv = inverse_11(gram, nset)
            except SingularBlock:
                continue
            s21 = block(gram, nset, "21")
            m = s21 @ inv
            signs = _sign_matrix(len(nset))
            worst = float(np.max(np.abs(m @ signs.T))) if m.shape[0] else 0.0
            if worst < limit:
                return True, nset
        return False, None

    witness = {}
    tau_s_rows = _sign_matrix(s)
    for row in tau_s_rows:
        tau_s = tuple(int(v) for v in row)
        found = None
        for nset in nsets_by_size():
            try:
                inv = inverse_11(gram, nset)
            except SingularBlock:
                continue
            s21 = block(gram, nset, "21")
            m = s21 @ inv
            k = len(nset)
            pos_of = {j: i for i, j in enumerate(nset.members)}
            ext_positions = [pos_of[j] for j in nset.members if j not in set(cone.S)]
            exts = _sign_matrix(k - s)
            taus = np.zeros((exts.shape[0], k))
            for i, j in enumerate(cone.S):
                taus[:, pos_of[j]] = tau_s[i]
            for i, pos in enumerate(ext_positions):
                taus[:, pos] = exts[:, i]
            vals = np.max(np.abs(m @ taus.T), axis=0) if m.shape[0] else np.zeros(exts.shape[0])
            hits = np.nonzero(vals <= 1.0)[0]
            if hits.size:
                found = (nset, tuple(int(v) for v in taus[int(hits[0])]))
                break
        if found is None:
            return False, {"failing_tau_S": tau_s}
        witness[tau_s] = found
    return True, witness


def coherence(gram: GramMatrix, cone: ConeSpec, kind: str) -> BoundedValue:
    """Mutual or cumulative coherence constants relative to Lambda^2(S, s)."""
    cone.validate_p(gram.p)
    s = cone.s
    s_idx = list(cone.S)
    lam2 = min_eigen_11(gram, SubsetN(cone.S))
    scale = float(np.max(np.diag(gram.entries)))
    if lam2 <= SINGULAR_RTOL * max(scale, 1.0):
        raise SingularUniformEigenvalue(f"Lambda^2(S,s) = {lam2!r} is numerically zero")
    outside = [j for j in range(gram.p) if j not in set(cone.S)]
    if not outside:
        return BoundedValue.exact(0.0, provenance="empty complement")
    cross = gram.entries[np.ix_(outside, s_idx)]
    if kind == "mutual":
        value = s * float(np.max(np.abs(cross))) / lam2
    elif kind == "cumulative":
        col_abs_sums = np.sum(np.abs(cross), axis=0)
        value = math.sqrt(s) * float(np.sqrt(np.sum(col_abs_sums ** 2))) / lam2
    else:
        raise InvalidParameter(f"unknown coherence kind {kind!r}")
    return BoundedValue.exact(value, provenance=f"lambda2={lam2!r}")


def block_norm_2q(gram: GramMatrix, nset: SubsetN, q, mode: str = "exact",
                  sign_cap: int = DEFAULT_SIGN_CAP) -> BoundedValue:
    """Operator norm of Sigma_12(nset) from the dual-l_r ball into l2,
    1/q + 1/r = 1.

    exact mode: q = inf is the largest column 2-norm, q = 2 the largest
    singular value, q = 1 a sup-norm-ball vertex enumeration (sign cap).
    column_bound mode: the column-norm aggregate (sum_j ||col_j||_2^q)^(1/q),
    an upper bound that is tight at q = inf.
    """
    s12 = block(gram, nset, "12")
    r = s12.shape[1]
    qv = float(q)
    if qv < 1.0:
        raise InvalidParameter("q must satisfy q >= 1")
    if r == 0:
        return BoundedValue.exact(0.0, provenance="empty complement")
    col_norms = np.linalg.norm(s12, axis=0)
    if mode == "column_bound":
        if math.isinf(qv):
            return BoundedValue.exact(float(np.max(col_norms)), provenance="max column 2-norm")
        value = float(np.sum(col_norms ** qv) ** (1.0 / qv))
        return BoundedValue.certified_upper(value, provenance=f"column-norm aggregate q={q}")
    if mode != "exact":
        raise InvalidParameter(f"unknown mode {mode!r}")
    if math.isinf(qv):
        return BoundedValue.exact(float(np.max(col_norms)), provenance="max column 2-norm")
    if qv == 2.0:
        sv = np.linalg.svd(s12, compute_uv=False)
        return BoundedValue.exact(float(sv[0]), provenance="largest singular value")
    if qv == 1.0:
        if 2 ** r > sign_cap:
            raise CapExceeded(2 ** r, sign_cap, what="sup-norm-ball vertex enumeration")
        signs = _sign_matrix(r)
        vals = np.linalg.norm(s12 @ signs.T, axis=0)
        return BoundedValue.exact(float(np.max(vals)), provenance="vertex enumeration")
    raise InvalidParameter("exact mode supports q in {1, 2, inf} only")


def restricted_diagonal_holds(gram: GramMatrix, s_set, varphi: float) -> bool:
    """Whether Sigma - varphi * diag(indicator of s_set) is positive semidefinite.

    Direct eigenvalue test; a tiny negative tolerance absorbs roundoff.
    """
    members = tuple(sorted(int(j) for j in s_set))
    shifted = gram.entries.copy()
    for j in members:
        shifted[j, j] -= varphi
    scale = max(float(np.max(np.abs(gram.entries))), 1.0)
    return float(np.linalg.eigvalsh(shifted)[0]) >= -1e-12 * scale


def alpha_constant(gram: GramMatrix, cone: ConeSpec, phi2_s2s_lower: float,
                   cap: int = DEFAULT_SUBSET_CAP) -> BoundedValue:
    """Selection-error constant
    (sqrt(2) theta(S,s) + sqrt((1+delta_s) theta(S,s))) / (phi(S,2s) Lambda(S,s)),
    evaluated with a certified lower bound for phi^2(S,2s), hence an upper bound."""
    cone.validate_p(gram.p)
    if not (phi2_s2s_lower > 0.0):
        raise NonpositiveDenominator(f"phi^2(S,2s) lower bound {phi2_s2s_lower!r} must be positive")
    theta_s = restricted_orthogonality(gram, cone.with_(N=cone.s), cap).estimate
    delta_s = restricted_isometry(gram, cone.s, cap).estimate
    lam2 = min_eigen_11(gram, SubsetN(cone.S))
    if lam2 <= 0.0:
        raise NonpositiveDenominator(f"Lambda^2(S,s) = {lam2!r} must be positive")
    value = (math.sqrt(2.0) * theta_s + math.sqrt((1.0 + delta_s) * theta_s)) / (
        math.sqrt(phi2_s2s_lower) * math.sqrt(lam2)
    )
    return BoundedValue.certified_upper(
        value,
        provenance=f"theta_s={theta_s!r}, delta_s={delta_s!r}, lambda2={lam2!r}, phi2_lower={phi2_s2s_lower!r}",
    )


@dataclass
class ConditionReport:
    """Named condition constants for one (gram, cone) pair.

    entries maps the stable key names to BoundedValues; boolean conditions are
    encoded as 1.0 / 0.0 with their witnesses kept separately.  Keys whose
    computation failed appear in errors instead of entries.
    """

    context: dict
    entries: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "context": self.context,
            "entries": {k: v.to_json_dict() for k, v in sorted(self.entries.items())},
            "witnesses": {k: _jsonable(v) for k, v in sorted(self.witnesses.items())},
            "errors": dict(sorted(self.errors.items())),
        }


def _jsonable(obj):
    if isinstance(obj, SubsetN):
        return list(obj.members)
    if isinstance(obj, (tuple, list)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
