"""Interval estimators for the cone-restricted constants.

Upper endpoints come from feasible points and lower endpoints from certified
routes, so the key soundness property is that the two always bracket the hand
oracle whenever one exists.
"""

import math

import numpy as np
import pytest

from lasso_audit import (
    Certificate,
    ConeSpec,
    GramMatrix,
    SolverConfig,
    certified_lower_phi,
    compatibility_constant,
    evaluate_regression_ratio,
    evaluate_restricted_ratio,
    restricted_eigenvalue,
    restricted_regression,
)
from lasso_audit.errors import CapExceeded, InvalidParameter

from conftest import random_gram


def equicorr(p, rho):
    sigma = np.full((p, p), rho)
    np.fill_diagonal(sigma, 1.0)
    return GramMatrix(sigma)


def rank_one_cross(p, s, rho):
    """Identity with one tail column correlated rho * b1 against the head."""
    sigma = np.eye(p)
    b1 = np.ones(s) / math.sqrt(s)
    sigma[s, :s] = rho * b1
    sigma[:s, s] = rho * b1
    return GramMatrix(sigma)


class TestCompatibility:
    def test_two_dim_hand_oracle(self):
        # S = {0}, L = 1: minimize 1 + 1.2 b + b^2 over |b| <= 1, optimum at
        # b = -0.6 with value 0.64
        g = GramMatrix(np.array([[1.0, 0.6], [0.6, 1.0]]))
        bv = compatibility_constant(g, ConeSpec(S=(0,), L=1.0, N=1))
        assert bv.estimate == pytest.approx(0.64, abs=1e-9)
        assert bv.lower <= 0.64 <= bv.upper + 1e-12
        assert bv.certificate is Certificate.INTERVAL

    def test_identity_is_one(self):
        bv = compatibility_constant(GramMatrix(np.eye(5)), ConeSpec(S=(1, 3), L=1.0, N=2))
        assert bv.estimate == pytest.approx(1.0, abs=1e-9)

    def test_equicorrelation_frozen(self):
        bv = compatibility_constant(equicorr(4, 0.5), ConeSpec(S=(0, 1), L=1.0, N=2))
        assert bv.estimate == pytest.approx(0.5, abs=1e-9)

    def test_unconverged_downgrades_to_estimate(self):
        # singular Gram forces the gradient path; one iteration cannot finish
        cfg = SolverConfig(max_iters=1, tol=1e-15)
        bv = compatibility_constant(GramMatrix(np.ones((2, 2))),
                                    ConeSpec(S=(0,), L=0.3, N=1), cfg)
        assert bv.certificate is Certificate.ESTIMATE
        assert "unconverged=1" in bv.provenance

    def test_sign_cap(self):
        g = GramMatrix(np.eye(6))
        with pytest.raises(CapExceeded):
            compatibility_constant(g, ConeSpec(S=(0, 1, 2, 3), L=1.0, N=4), sign_cap=4)

    def test_monotone_in_l(self):
        rng = np.random.default_rng(67)
        g = random_gram(rng, 5)
        vals = [
            compatibility_constant(g, ConeSpec(S=(0, 2), L=L, N=2)).estimate
            for L in (0.5, 1.0, 2.0)
        ]
        assert vals[0] >= vals[1] - 1e-9
        assert vals[1] >= vals[2] - 1e-9


class TestRestrictedEigenvalue:
    def test_identity(self):
        bv = restricted_eigenvalue(GramMatrix(np.eye(6)), ConeSpec(S=(0, 1), L=1.0, N=3))
        assert bv.estimate == pytest.approx(1.0, abs=1e-9)
        assert bv.lower == pytest.approx(1.0, abs=1e-9)

    def test_equicorrelation_exact_value(self):
        # lambda_min certifies 1 - rho from below; the padded head eigenvector
        # attains it from above, so the interval pins the constant
        bv = restricted_eigenvalue(equicorr(6, 0.4), ConeSpec(S=(0, 1), L=1.0, N=3))
        assert bv.lower <= 0.6 <= bv.upper + 1e-12
        assert bv.estimate == pytest.approx(0.6, abs=1e-9)

    def test_adaptive_no_larger_than_plain(self, fast_config):
        # the adaptive cone contains the plain one, so the true constants are
        # ordered; with searched upper endpoints the certified comparison is
        # lower(adaptive) <= upper(plain)
        rng = np.random.default_rng(71)
        for _ in range(3):
            g = random_gram(rng, 6)
            cone = ConeSpec(S=(0, 3), L=1.0, N=4)
            plain = restricted_eigenvalue(g, cone, "plain", fast_config)
            adaptive = restricted_eigenvalue(g, cone, "adaptive", fast_config)
            assert adaptive.lower <= plain.upper + 1e-9

    def test_interval_is_ordered(self, fast_config):
        rng = np.random.default_rng(73)
        g = random_gram(rng, 6)
        bv = restricted_eigenvalue(g, ConeSpec(S=(1, 4), L=2.0, N=3), "plain", fast_config)
        assert bv.lower <= bv.estimate <= bv.upper

    def test_unknown_variant(self):
        g = GramMatrix(np.eye(4))
        with pytest.raises(InvalidParameter):
            restricted_eigenvalue(g, ConeSpec(S=(0,), L=1.0, N=1), "weighted")


class TestRestrictedRegression:
    def test_identity_is_zero(self):
        bv = restricted_regression(GramMatrix(np.eye(5)), ConeSpec(S=(0, 2), L=1.0, N=2))
        assert bv.estimate == 0.0
        assert bv.upper == 0.0

    def test_l_zero_is_exact_zero(self):
        g = equicorr(5, 0.3)
        bv = restricted_regression(g, ConeSpec(S=(0, 1), L=0.0, N=2))
        assert bv.certificate is Certificate.EXACT
        assert bv.estimate == 0.0

    def test_rank_one_cross_adaptive_pins_rho_sqrt_s(self):
        # the inverse-sign head recovers the leverage value rho sqrt(s) and
        # the column-norm route certifies it from above
        g = rank_one_cross(8, 4, 0.5)
        bv = restricted_regression(g, ConeSpec(S=(0, 1, 2, 3), L=1.0, N=4), "adaptive")
        assert bv.lower <= 1.0 <= bv.upper + 1e-9
        assert bv.upper - bv.lower <= 0.05

    def test_scales_linearly_in_l(self):
        g = equicorr(6, 0.3)
        cone1 = ConeSpec(S=(0, 1), L=1.0, N=2)
        cone3 = ConeSpec(S=(0, 1), L=3.0, N=2)
        a = restricted_regression(g, cone1, search=False)
        b = restricted_regression(g, cone3, search=False)
        assert b.upper == pytest.approx(3.0 * a.upper, rel=1e-12)

    def test_search_false_keeps_trivial_lower(self):
        g = equicorr(6, 0.3)
        bv = restricted_regression(g, ConeSpec(S=(0, 1), L=1.0, N=2), search=False)
        assert bv.lower == 0.0
        assert bv.upper > 0.0

    def test_lower_never_exceeds_upper(self, fast_config):
        rng = np.random.default_rng(79)
        for _ in range(3):
            g = random_gram(rng, 6)
            bv = restricted_regression(g, ConeSpec(S=(0, 2), L=1.0, N=3), "plain", fast_config)
            assert bv.lower <= bv.upper + 1e-12


class TestPointEvaluators:
    def test_restricted_ratio_manual(self):
        g = equicorr(4, 0.5)
        cone = ConeSpec(S=(0, 1), L=1.0, N=3)
        beta = np.array([1.0, 1.0, 0.5, 0.0])
        # nset = {0, 1, 2}: quadratic form over the norm of the three largest
        want = float(beta @ g.entries @ beta) / float(beta @ beta)
        got = evaluate_restricted_ratio(g, cone, beta)
        assert got == pytest.approx(want, abs=1e-12)

    def test_restricted_ratio_rejects_outside_cone(self):
        g = equicorr(4, 0.5)
        cone = ConeSpec(S=(0, 1), L=1.0, N=2)
        with pytest.raises(InvalidParameter):
            evaluate_restricted_ratio(g, cone, np.array([1.0, 0.0, 2.0, 0.0]))

    def test_regression_ratio_manual(self):
        g = equicorr(4, 0.5)
        cone = ConeSpec(S=(0, 1), L=1.0, N=2)
        beta = np.array([1.0, 1.0, 1.0, 0.5])
        head = np.array([1.0, 1.0, 0.0, 0.0])
        tail = beta - head
        got = evaluate_regression_ratio(g, cone, beta)
        want = abs(float(tail @ g.entries @ head)) / float(head @ g.entries @ head)
        assert got == pytest.approx(want, abs=1e-12)

    def test_regression_ratio_zero_tail(self):
        g = equicorr(4, 0.5)
        cone = ConeSpec(S=(0, 1), L=1.0, N=2)
        assert evaluate_regression_ratio(g, cone, np.array([1.0, -1.0, 0.0, 0.0])) == 0.0


class TestCertifiedLowerPhi:
    def test_identity_lambda_min(self):
        g = GramMatrix(np.eye(5))
        bv = certified_lower_phi(g, ConeSpec(S=(0, 1), L=1.0, N=2))
        assert bv.estimate == pytest.approx(1.0, abs=1e-12)
        assert bv.certificate is Certificate.CERTIFIED_LOWER

    def test_route_restriction_honored(self):
        g = equicorr(5, 0.3)
        bv = certified_lower_phi(g, ConeSpec(S=(0, 1), L=1.0, N=2), routes=("lambda_min",))
        assert bv.provenance.startswith("route=lambda_min")
        assert bv.estimate == pytest.approx(0.7, abs=1e-12)

    def test_no_route_returns_trivial_estimate(self):
        g = GramMatrix(np.ones((2, 2)))
        bv = certified_lower_phi(g, ConeSpec(S=(0,), L=1.0, N=1))
        assert (bv.estimate, bv.lower) == (0.0, 0.0)
        assert bv.upper == math.inf
        assert bv.provenance == "route=none"
        assert bv.certificate is Certificate.ESTIMATE

    def test_lower_bounds_the_direct_interval(self, fast_config):
        rng = np.random.default_rng(83)
        for _ in range(4):
            g = random_gram(rng, 6)
            cone = ConeSpec(S=(0, 2), L=1.0, N=3)
            low = certified_lower_phi(g, cone, target="restricted_eigenvalue",
                                      config=fast_config)
            direct = restricted_eigenvalue(g, cone, "plain", fast_config)
            assert low.estimate <= direct.upper + 1e-9

    def test_compat_lower_bounds_compat(self, fast_config):
        rng = np.random.default_rng(89)
        for _ in range(4):
            g = random_gram(rng, 5)
            cone = ConeSpec(S=(1, 3), L=1.0, N=2)
            low = certified_lower_phi(g, cone, config=fast_config)
            direct = compatibility_constant(g, cone, fast_config)
            assert low.estimate <= direct.upper + 1e-9

    def test_unknown_target(self):
        g = GramMatrix(np.eye(3))
        with pytest.raises(InvalidParameter):
            certified_lower_phi(g, ConeSpec(S=(0,), L=1.0, N=1), target="sparse")
