"""Numerical audit of the implication graph between design-matrix conditions.

Each catalogued edge is one inequality relating two certified quantities,
evaluated with sound endpoint choices: the side that must be at least as
large uses its certified lower endpoint, the side that must be at most as
large uses its certified upper endpoint.  A reported failure is therefore a
genuine counterexample (up to the stated tolerance), never an artifact of
estimation slack.  Edges whose premises fail on an instance are skipped,
not failed: conditional implications have nothing to say there.

The edge catalogue is a reconstruction assembled from the individual
results rather than from a single authoritative diagram; each entry below
states exactly the inequality it checks.

  E1  regression-to-eigenvalue: phi^2(L,S,N) >= (1 - L theta_rr)^2 Lambda^2(S,N)
      when theta_rr(S,N) < 1/L (plain variant)
  E2  block-norm bounds on the adaptive regression constant at N=s and N=2s
  E3  coherence specializations: mutual (q=inf), cumulative (q=1),
      spectral (q=2)
  E4  leverage-to-regression: irr_uniform(S,s) <= theta_rr_adaptive(S,s)
  E5  weak isometry ratio dominates the adaptive regression constant at 2s
  E6  phi^2(L,S,2s) >= (1 - L theta_wRIP)^2 Lambda^2(S,2s) when
      theta_wRIP(S,2s) < 1/L
  E7  hierarchy: phi^2_adaptive <= phi^2 <= phi^2_compat
  E8  phi^2_compat(L,S) >= (1 - L irr_uniform(S,s))^2 Lambda^2(S,s) when
      irr_uniform(S,s) < 1/L
  E9  theta_wRIP(S,N) <= theta_RIP and 1 - delta_N <= Lambda^2(S,N)
      (first part guaranteed for N <= 2s)
  E10 alpha(S) <= sqrt(2)(theta_{s,s} + sqrt(theta_{s,s})) /
      (1 - delta_s - theta_{s,s} - theta_{s,2s})
  E11 small alpha implies sign-enumerated selection: alpha(S) < 1 forces the
      Part-3 condition at N=2s and < s false positives on a solved instance
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import (
    alpha_constant,
    block_norm_2q,
    coherence,
    irrepresentable_signed,
    irrepresentable_uniform,
    restricted_isometry,
    rip_constant,
    theta_uniform,
    uniform_eigenvalue,
    weak_rip_constant,
)
from .core import (
    DEFAULT_SUBSET_CAP,
    BoundedValue,
    ConeSpec,
    GramMatrix,
    PerturbationPair,
    SubsetN,
    enumerate_supersets,
)
from .errors import (
    AllSubmatricesSingular,
    CapExceeded,
    DenominatorNonPositive,
    InvalidParameter,
    MissingInput,
    NonpositiveDenominator,
    SingularBlock,
    SingularUniformEigenvalue,
)
from .estimators import (
    ROUTE_CAP,
    compatibility_constant,
    certified_lower_phi,
    restricted_eigenvalue,
    restricted_regression,
)
from .lasso import solve_noiseless
from .solvers import DEFAULT_CONFIG, SolverConfig

EDGE_IDS = tuple(f"E{k}" for k in range(1, 12))

# relative tolerance when an inequality between certified endpoints is turned
# into a verdict
_EDGE_RTOL = 1e-7

_DIRECTION_NOTE = "certified endpoints: lower on the >=-side, upper on the <=-side"

# errors that mean "could not evaluate on this instance", turned into skips
_SKIP_ERRORS = (CapExceeded, AllSubmatricesSingular, SingularUniformEigenvalue,
                DenominatorNonPositive, NonpositiveDenominator, SingularBlock)


@dataclass(frozen=True)
class ImplicationVerdict:
    """One edge evaluated on one instance.

    holds is None when the edge was skipped (premise failed or inputs were
    unavailable); the note then starts with "skipped:".  slack is the signed
    margin, positive when the inequality holds strictly.
    """

    edge_id: str
    lhs_value: Optional[float]
    rhs_value: Optional[float]
    holds: Optional[bool]
    slack: Optional[float]
    bound_direction_note: str

    @property
    def skipped(self) -> bool:
        return self.holds is None

    def to_json_dict(self) -> dict:
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return None
            return v
        return {
            "edge_id": self.edge_id,
            "lhs_value": clean(self.lhs_value),
            "rhs_value": clean(self.rhs_value),
            "holds": self.holds,
            "slack": clean(self.slack),
            "bound_direction_note": self.bound_direction_note,
        }


def _skip(edge_id: str, reason: str) -> ImplicationVerdict:
    return ImplicationVerdict(edge_id, None, None, None, None, f"skipped: {reason}")


def _verdict(edge_id: str, lhs: float, rhs: float, relation: str, note: str) -> ImplicationVerdict:
    """relation 'ge' means lhs >= rhs must hold; 'le' means lhs <= rhs."""
    scale = max(1.0, abs(lhs), abs(rhs))
    slack = (lhs - rhs) if relation == "ge" else (rhs - lhs)
    holds = bool(slack >= -_EDGE_RTOL * scale)
    return ImplicationVerdict(edge_id, lhs, rhs, holds, slack,
                              f"{note}; {_DIRECTION_NOTE}")


class _Inputs:
    """Lazy cache of the per-instance quantities the edges consume.

    Keys present in the user-supplied mapping win; everything else is
    computed on demand from the Gram matrix.  Without a Gram matrix a miss
    raises MissingInput.
    """

    def __init__(self, gram, cone: ConeSpec, config: SolverConfig,
                 cap: int, sign_cap: int, supplied=None):
        self.gram = gram
        self.cone = cone
        self.config = config
        self.cap = cap
        self.sign_cap = sign_cap
        self.cache = dict(supplied) if supplied else {}

    def get(self, edge_id: str, key: str):
        if key in self.cache:
            return self.cache[key]
        if self.gram is None:
            raise MissingInput(edge_id, key)
        value = self._build(key)
        self.cache[key] = value
        return value

    def _build(self, key: str):
        gram, cone = self.gram, self.cone
        p, s = gram.p, cone.s
        route_cap = min(self.cap, ROUTE_CAP)
        if key == "lambda2":
            return uniform_eigenvalue(gram, cone, self.cap)
        if key == "lambda2_s":
            return uniform_eigenvalue(gram, cone.with_(N=s), self.cap)
        if key == "lambda2_2s":
            return uniform_eigenvalue(gram, cone.with_(N=2 * s), self.cap)
        if key == "irr_uniform_s":
            return irrepresentable_uniform(gram, cone.with_(N=s), self.cap)
        if key == "rr_plain_upper":
            return restricted_regression(gram, cone.with_(L=1.0), "plain", self.config,
                                         cap=route_cap, sign_cap=self.sign_cap, search=False)
        if key == "rr_ad_upper_s":
            return restricted_regression(gram, cone.with_(L=1.0, N=s), "adaptive", self.config,
                                         cap=route_cap, sign_cap=self.sign_cap, search=False)
        if key == "rr_ad_upper_2s":
            return restricted_regression(gram, cone.with_(L=1.0, N=2 * s), "adaptive", self.config,
                                         cap=route_cap, sign_cap=self.sign_cap, search=False)
        if key == "rr_ad_s":
            return restricted_regression(gram, cone.with_(L=1.0, N=s), "adaptive", self.config,
                                         cap=route_cap, sign_cap=self.sign_cap, search=True)
        if key == "phi_lower_plain":
            return certified_lower_phi(gram, cone, target="restricted_eigenvalue",
                                       variant="plain", config=self.config, cap=self.cap)
        if key == "phi_lower_plain_2s":
            return certified_lower_phi(gram, cone.with_(N=2 * s), target="restricted_eigenvalue",
                                       variant="plain", config=self.config, cap=self.cap)
        if key == "phi_lower_2s":
            return certified_lower_phi(gram, cone.with_(L=1.0, N=2 * s),
                                       target="restricted_eigenvalue", variant="plain",
                                       config=self.config, cap=self.cap)
        if key == "phi_compat":
            return compatibility_constant(gram, cone, self.config, self.sign_cap)
        if key == "phi_re":
            return restricted_eigenvalue(gram, cone, "plain", self.config, self.cap)
        if key == "phi_re_adaptive":
            return restricted_eigenvalue(gram, cone, "adaptive", self.config, self.cap)
        if key == "weak_rip_2s":
            return weak_rip_constant(gram, cone.with_(N=2 * s), self.cap)
        if key == "weak_rip_n":
            return weak_rip_constant(gram, cone, self.cap)
        if key == "rip":
            return rip_constant(gram, s, self.cap)
        if key == "delta_s":
            return restricted_isometry(gram, s, self.cap)
        if key == "delta_n":
            return restricted_isometry(gram, cone.N, self.cap)
        if key == "theta_ss":
            return theta_uniform(gram, s, s, self.cap)
        if key == "theta_s2s":
            return theta_uniform(gram, s, 2 * s, self.cap)
        if key == "mutual":
            return coherence(gram, cone, "mutual")
        if key == "cumulative":
            return coherence(gram, cone, "cumulative")
        if key == "norm_s_2inf":
            return float(block_norm_2q(gram, SubsetN(cone.S), math.inf,
                                       sign_cap=self.sign_cap).estimate)
        if key == "max_norm_2s_2inf":
            return _max_block_norm(gram, cone, 2 * s, math.inf, route_cap, self.sign_cap)
        if key == "max_norm_2s_22":
            return _max_block_norm(gram, cone, 2 * s, 2, route_cap, self.sign_cap)
        raise InvalidParameter(f"unknown input key {key!r}")


def _max_block_norm(gram: GramMatrix, cone: ConeSpec, n_size: int, q, cap: int,
                    sign_cap: int) -> float:
    """max over enlargements of size n_size of ||Sigma_12(nset)||_{2,q}."""
    worst = 0.0
    for nset in enumerate_supersets(cone.with_(N=n_size), gram.p, cap):
        bv = block_norm_2q(gram, nset, q, mode="exact", sign_cap=sign_cap)
        worst = max(worst, float(bv.estimate))
    return worst


def _get_alpha(edge_id, inputs) -> BoundedValue:
    """alpha(S) fed with the certified phi^2(S,2s) lower bound; cached."""
    if "alpha" in inputs.cache:
        return inputs.cache["alpha"]
    if inputs.gram is None:
        raise MissingInput(edge_id, "alpha")
    phi_low = inputs.get(edge_id, "phi_lower_2s")
    if not float(phi_low.estimate) > 0.0:
        raise NonpositiveDenominator("no positive certified phi^2(S,2s) lower bound")
    alpha = alpha_constant(inputs.gram, inputs.cone.with_(N=inputs.cone.s),
                           float(phi_low.estimate), inputs.cap)
    inputs.cache["alpha"] = alpha
    return alpha


def check_edge(edge_id: str, gram: Optional[GramMatrix], cone: ConeSpec,
               reports=None, config: SolverConfig = DEFAULT_CONFIG,
               cap: int = DEFAULT_SUBSET_CAP, sign_cap: int = 2 ** 20) -> ImplicationVerdict:
    """Evaluate one edge of the implication graph on one instance.

    reports may supply precomputed inputs keyed by the names in _Inputs;
    anything missing is computed from the Gram matrix (MissingInput when no
    Gram matrix was given).  Premise failures yield a skip verdict.
    """
    if edge_id not in EDGE_IDS:
        raise InvalidParameter(f"unknown edge {edge_id!r}")
    if gram is not None:
        cone.validate_p(gram.p)
    inputs = _Inputs(gram, cone, config, cap, sign_cap, reports)
    return _EDGE_CHECKS[edge_id](edge_id, inputs)


def _edge_e1(edge_id, inputs):
    cone = inputs.cone
    ru = float(inputs.get(edge_id, "rr_plain_upper").upper)
    if not cone.L * ru < 1.0:
        return _skip(edge_id, f"premise theta_rr(S,N) < 1/L fails (upper={ru!r})")
    lam2 = float(inputs.get(edge_id, "lambda2").estimate)
    lhs = float(inputs.get(edge_id, "phi_lower_plain").estimate)
    rhs = (1.0 - cone.L * ru) ** 2 * lam2
    return _verdict(edge_id, lhs, rhs, "ge",
                    "phi^2 certified lower vs (1 - L * theta_rr upper)^2 * Lambda^2")


def _edge_e2(edge_id, inputs):
    gram, cone = inputs.gram, inputs.cone
    s = cone.s
    checks = []
    lam2_s = float(inputs.get(edge_id, "lambda2_s").estimate)
    if lam2_s > 0.0:
        lhs_s = float(inputs.get(edge_id, "rr_ad_upper_s").upper)
        norm_s = inputs.get(edge_id, "norm_s_2inf")
        checks.append((lhs_s, math.sqrt(s) * norm_s / lam2_s, "at N=s: column 2-norm form"))
    if gram is None or 2 * s <= gram.p:
        lam2_2s = float(inputs.get(edge_id, "lambda2_2s").estimate)
        if lam2_2s > 0.0:
            lhs_2s = float(inputs.get(edge_id, "rr_ad_upper_2s").upper)
            worst = inputs.get(edge_id, "max_norm_2s_2inf")
            checks.append((lhs_2s, math.sqrt(s) * worst / lam2_2s,
                           "at N=2s: q=inf block-norm form"))
    if not checks:
        return _skip(edge_id, "no applicable block-norm bound (singular or 2s > p)")
    lhs, rhs, which = min(checks, key=lambda c: c[1] - c[0])
    return _verdict(edge_id, lhs, rhs, "le",
                    f"theta_rr_adaptive upper vs block-norm bound ({which})")


def _edge_e3(edge_id, inputs):
    gram, cone = inputs.gram, inputs.cone
    s = cone.s
    checks = []
    lam2_s = float(inputs.get(edge_id, "lambda2_s").estimate)
    if lam2_s > 0.0:
        lhs_s = float(inputs.get(edge_id, "rr_ad_upper_s").upper)
        norm_s = inputs.get(edge_id, "norm_s_2inf")
        intermediate = math.sqrt(s) * norm_s / lam2_s
        mutual = float(inputs.get(edge_id, "mutual").estimate)
        checks.append((lhs_s, intermediate, "mutual step 1: rr_ad <= sqrt(s) max col norm / Lambda^2"))
        checks.append((intermediate, mutual, "mutual step 2: intermediate <= mutual coherence"))
        cumulative = float(inputs.get(edge_id, "cumulative").estimate)
        checks.append((lhs_s, cumulative, "cumulative: rr_ad <= cumulative coherence"))
    if gram is None or 2 * s <= gram.p:
        lam2_2s = float(inputs.get(edge_id, "lambda2_2s").estimate)
        if lam2_2s > 0.0:
            lhs_2s = float(inputs.get(edge_id, "rr_ad_upper_2s").upper)
            worst = inputs.get(edge_id, "max_norm_2s_22")
            checks.append((lhs_2s, worst / lam2_2s, "spectral: rr_ad(2s) <= max spectral norm / Lambda^2"))
    if not checks:
        return _skip(edge_id, "no applicable coherence bound (singular or 2s > p)")
    lhs, rhs, which = min(checks, key=lambda c: (c[1] - c[0]) / max(1.0, abs(c[1])))
    return _verdict(edge_id, lhs, rhs, "le", f"coherence specializations (binding: {which})")


def _edge_e4(edge_id, inputs):
    lhs = float(inputs.get(edge_id, "irr_uniform_s").estimate)
    rhs = float(inputs.get(edge_id, "rr_ad_s").lower)
    return _verdict(edge_id, lhs, rhs, "le",
                    "irr_uniform(S,s) exact vs theta_rr_adaptive(S,s) certified lower")


def _edge_e5(edge_id, inputs):
    gram, cone = inputs.gram, inputs.cone
    if gram is not None and 2 * cone.s > gram.p:
        return _skip(edge_id, "requires 2s <= p")
    lhs = float(inputs.get(edge_id, "rr_ad_upper_2s").upper)
    rhs = float(inputs.get(edge_id, "weak_rip_2s").estimate)
    return _verdict(edge_id, lhs, rhs, "le",
                    "theta_rr_adaptive(S,2s) upper vs weak isometry ratio (exact)")


def _edge_e6(edge_id, inputs):
    gram, cone = inputs.gram, inputs.cone
    if gram is not None and 2 * cone.s > gram.p:
        return _skip(edge_id, "requires 2s <= p")
    wr = float(inputs.get(edge_id, "weak_rip_2s").estimate)
    if not cone.L * wr < 1.0:
        return _skip(edge_id, f"premise theta_wRIP(S,2s) < 1/L fails (value={wr!r})")
    lam2 = float(inputs.get(edge_id, "lambda2_2s").estimate)
    lhs = float(inputs.get(edge_id, "phi_lower_plain_2s").estimate)
    rhs = (1.0 - cone.L * wr) ** 2 * lam2
    return _verdict(edge_id, lhs, rhs, "ge",
                    "phi^2(L,S,2s) certified lower vs (1 - L * theta_wRIP)^2 * Lambda^2(S,2s)")


def _edge_e7(edge_id, inputs):
    ad = inputs.get(edge_id, "phi_re_adaptive")
    plain = inputs.get(edge_id, "phi_re")
    compat = inputs.get(edge_id, "phi_compat")
    checks = [
        (float(ad.lower), float(plain.upper), "adaptive lower vs plain upper"),
        (float(plain.lower), float(compat.upper), "plain lower vs compatibility upper"),
    ]
    lhs, rhs, which = min(checks, key=lambda c: c[1] - c[0])
    return _verdict(edge_id, lhs, rhs, "le", f"hierarchy chain (binding: {which})")


def _edge_e8(edge_id, inputs):
    cone = inputs.cone
    irr = float(inputs.get(edge_id, "irr_uniform_s").estimate)
    if not cone.L * irr < 1.0:
        return _skip(edge_id, f"premise irr_uniform(S,s) < 1/L fails (value={irr!r})")
    lam2 = float(inputs.get(edge_id, "lambda2_s").estimate)
    lhs = float(inputs.get(edge_id, "phi_compat").lower)
    rhs = (1.0 - cone.L * irr) ** 2 * lam2
    return _verdict(edge_id, lhs, rhs, "ge",
                    "phi^2_compat interval lower vs (1 - L * irr_uniform)^2 * Lambda^2(S,s)")


def _edge_e9(edge_id, inputs):
    cone = inputs.cone
    if cone.N > 2 * cone.s:
        return _skip(edge_id, "guaranteed only for N <= 2s")
    rip = float(inputs.get(edge_id, "rip").estimate)
    wr = float(inputs.get(edge_id, "weak_rip_n").estimate)
    lam2 = float(inputs.get(edge_id, "lambda2").estimate)
    delta_n = float(inputs.get(edge_id, "delta_n").estimate)
    checks = [
        (wr, rip, "theta_wRIP(S,N) <= theta_RIP"),
        (1.0 - delta_n, lam2, "1 - delta_N <= Lambda^2(S,N)"),
    ]
    lhs, rhs, which = min(checks, key=lambda c: c[1] - c[0])
    return _verdict(edge_id, lhs, rhs, "le", f"isometry comparisons (binding: {which})")


def _edge_e10(edge_id, inputs):
    gram, cone = inputs.gram, inputs.cone
    s = cone.s
    if gram is not None and 2 * s > gram.p:
        return _skip(edge_id, "requires 2s <= p")
    delta_s = float(inputs.get(edge_id, "delta_s").estimate)
    if delta_s > 1.0:
        return _skip(edge_id, f"premise delta_s <= 1 fails (value={delta_s!r})")
    theta_ss = float(inputs.get(edge_id, "theta_ss").estimate)
    theta_s2s = float(inputs.get(edge_id, "theta_s2s").estimate)
    denom = 1.0 - delta_s - theta_ss - theta_s2s
    if denom <= 0.0:
        return _skip(edge_id, f"premise 1 - delta_s - theta_ss - theta_s2s > 0 fails ({denom!r})")
    try:
        alpha = _get_alpha(edge_id, inputs)
    except NonpositiveDenominator as exc:
        return _skip(edge_id, str(exc))
    lhs = float(alpha.upper)
    rhs = math.sqrt(2.0) * (theta_ss + math.sqrt(theta_ss)) / denom
    return _verdict(edge_id, lhs, rhs, "le",
                    "alpha(S) certified upper vs uniform-constant assembly bound")


def _edge_e11(edge_id, inputs):
    gram, cone = inputs.gram, inputs.cone
    s = cone.s
    if gram is not None and 2 * s > gram.p:
        return _skip(edge_id, "requires 2s <= p")
    try:
        alpha = _get_alpha(edge_id, inputs)
    except NonpositiveDenominator as exc:
        return _skip(edge_id, str(exc))
    lhs = float(alpha.upper)
    if not lhs < 1.0:
        return _skip(edge_id, f"premise alpha(S) < 1 fails (upper={lhs!r})")
    if gram is None:
        raise MissingInput(edge_id, "gram")
    part3_ok, _ = irrepresentable_signed(gram, cone.with_(L=1.0, N=2 * s), part=3,
                                         cap=inputs.cap, sign_cap=inputs.sign_cap)
    lam = 0.1
    phi2 = float(inputs.get(edge_id, "phi_lower_2s").estimate)
    magnitude = 2.0 * lam * math.sqrt(s) / phi2
    beta0 = np.zeros(gram.p)
    beta0[list(cone.S)] = magnitude
    solution = solve_noiseless(gram, beta0, lam, inputs.config)
    false_pos = len(set(solution.active_set) - set(cone.S))
    conclusion = bool(part3_ok) and false_pos < s
    note = (f"alpha upper {lhs!r} < 1; sign-enumerated Part 3 at N=2s: {bool(part3_ok)}; "
            f"false positives {false_pos} < s on the solved instance")
    return ImplicationVerdict(edge_id, lhs, 1.0, conclusion, 1.0 - lhs,
                              f"{note}; {_DIRECTION_NOTE}")


_EDGE_CHECKS = {
    "E1": _edge_e1, "E2": _edge_e2, "E3": _edge_e3, "E4": _edge_e4,
    "E5": _edge_e5, "E6": _edge_e6, "E7": _edge_e7, "E8": _edge_e8,
    "E9": _edge_e9, "E10": _edge_e10, "E11": _edge_e11,
}


def check_all(gram: GramMatrix, cone: ConeSpec, config: SolverConfig = DEFAULT_CONFIG,
              cap: int = DEFAULT_SUBSET_CAP, sign_cap: int = 2 ** 20):
    """Run every edge on one instance, sharing computed inputs.

    Returns one ImplicationVerdict per edge id; unavailable inputs (caps
    exceeded, singular blocks) surface as skip verdicts, never exceptions.
    """
    cone.validate_p(gram.p)
    inputs = _Inputs(gram, cone, config, cap, sign_cap)
    out = []
    for edge_id in EDGE_IDS:
        try:
            out.append(_EDGE_CHECKS[edge_id](edge_id, inputs))
        except _SKIP_ERRORS as exc:
            out.append(_skip(edge_id, f"{type(exc).__name__}: {exc}"))
    return out


def perturbation_transfer(pair: PerturbationPair, cone: ConeSpec, phi0: BoundedValue,
                          which: str = "compat") -> BoundedValue:
    """Transfer a certified phi^2 lower bound across an entrywise perturbation.

    phi0 must be a certified lower bound for the squared constant on the
    reference matrix; the result is the certified lower bound
    max(0, sqrt(phi0) - (L+1) sqrt(d_inf * s))^2 for the perturbed matrix.
    The provenance also records the relative-change bound
    (L+1)^2 d_inf s / phi0 for reporting.
    """
    if which not in ("compat", "re", "re_adaptive"):
        raise InvalidParameter(f"unknown constant family {which!r}")
    phi0_sq = max(float(phi0.estimate), 0.0)
    margin = (cone.L + 1.0) * math.sqrt(pair.d_inf * cone.s)
    root = max(0.0, math.sqrt(phi0_sq) - margin)
    value = root * root
    ratio = (cone.L + 1.0) ** 2 * pair.d_inf * cone.s / phi0_sq if phi0_sq > 0 else math.inf
    note = (f"which={which}; d_inf={pair.d_inf!r}; margin={margin!r}; "
            f"ratio_bound={ratio!r}")
    return BoundedValue.certified_lower(value, provenance=note)
