import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import _oracles as oracle
from gpdgof.core import GpdParams, gpd_sample
from gpdgof.estimate import CensoredSample, estimate_aml, kappa_from_beta
from gpdgof.exceptions import DegenerateSampleError, SupportViolationError
from gpdgof.gof import (
    CENSORED,
    FAIL_TO_REJECT,
    NEGATIVE,
    POSITIVE,
    REJECT,
    TestReport,
    censored_test,
    censored_variance,
    delta_n_censored,
    delta_n_hat,
    delta_n_star,
    delta_p_hat,
    min_triple_ustat,
    test_negative,
    test_positive,
    u_stat_u1,
    u_stat_u2,
)


def censored_case(rng, n, frac=0.3):
    t = rng.uniform(0.1, 2.0, n)
    d = (rng.uniform(size=n) > frac).astype(int)
    d[np.argmax(t)] = 1
    return t, d


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(2024)
    return [rng.uniform(0.05, 3.0, rng.integers(3, 31)) for _ in range(50)]


class TestOracleEquivalence:
    def test_u1(self, samples):
        p = GpdParams(1.3, 0.4)
        for x in samples:
            assert u_stat_u1(x, p) == pytest.approx(oracle.u1(x, 1.3, 0.4), rel=1e-12)

    def test_u2(self, samples):
        p = GpdParams(0.7, 1.1)
        for x in samples:
            assert u_stat_u2(x, p) == pytest.approx(oracle.u2(x, 0.7, 1.1), rel=1e-12)

    def test_delta_n(self, samples):
        for x in samples:
            assert delta_n_hat(x, -0.21) == pytest.approx(oracle.delta_n(x, -0.21), rel=1e-12)

    def test_censored(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            t, d = censored_case(rng, int(rng.integers(3, 31)))
            res = delta_n_censored(CensoredSample(t, d))
            stat, star = oracle.delta_n_censored(list(t), list(d))
            assert res.stat_c == pytest.approx(stat, rel=1e-12, abs=1e-15)
            assert res.stat_c_star == pytest.approx(star, rel=1e-12, abs=1e-15)

    def test_ties(self):
        x = np.array([1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 5.0])
        p = GpdParams(2.0, 0.3)
        assert u_stat_u1(x, p) == pytest.approx(oracle.u1(x, 2.0, 0.3), rel=1e-13)
        assert u_stat_u2(x, p) == pytest.approx(oracle.u2(x, 2.0, 0.3), rel=1e-13)
        assert delta_n_hat(x, -0.3) == pytest.approx(oracle.delta_n(x, -0.3), rel=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0.01, 50), min_size=3, max_size=15),
           st.floats(0.1, 5), st.floats(0, 2))
    def test_delta_p_property(self, values, theta, beta):
        p = GpdParams(theta, beta)
        assert delta_p_hat(values, p) == pytest.approx(oracle.delta_p(values, theta, beta),
                                                       rel=1e-9, abs=1e-12)


class TestExamples:
    def test_constant_sample(self):
        a, p = 2.5, GpdParams(1.5, 0.2)
        d = p.theta + p.beta * a
        assert u_stat_u1([a] * 3, p) == pytest.approx(a * a / d ** 2)
        assert u_stat_u2([a] * 3, p) == pytest.approx(a / d)
        assert delta_n_hat([a] * 3, -0.25) == pytest.approx(-a / 2)

    def test_one_two_three(self):
        p = GpdParams(1, 0)
        assert u_stat_u1([1, 2, 3], p) == pytest.approx(5 / 3, rel=1e-15)
        assert u_stat_u2([1, 2, 3], p) == pytest.approx(5 / 3, rel=1e-15)

    def test_exponential_substitution(self):
        x = gpd_sample(20, GpdParams(1, 0), 1)
        p = GpdParams(1, 0)
        assert delta_p_hat(x, p) == pytest.approx(u_stat_u1(x, p) - u_stat_u2(x, p) + 1 / 3,
                                                  rel=1e-14)

    def test_support_violation(self):
        with pytest.raises(SupportViolationError):
            u_stat_u1([1, 2, 3], GpdParams(1, -0.5))

    def test_positive_branch_only(self):
        with pytest.raises(ValueError):
            delta_p_hat([1, 2, 3], GpdParams(1, -0.1))

    def test_too_small(self):
        with pytest.raises(DegenerateSampleError):
            delta_n_hat([1, 2], -0.25)

    def test_affine_in_k(self):
        x = gpd_sample(40, GpdParams(1, -0.3), 2)
        slope = delta_n_hat(x, 1.0) - delta_n_hat(x, 0.0)
        assert slope == pytest.approx(2 * min_triple_ustat(x), rel=1e-12)

    def test_u1_nonnegative(self):
        x = gpd_sample(25, GpdParams(1, 0.4), 3)
        assert u_stat_u1(x, GpdParams(1, 0.4)) >= 0


class TestInvariance:
    def test_permutation_bit_identical(self):
        rng = np.random.default_rng(5)
        x = gpd_sample(45, GpdParams(1, 0.3), 5)
        t, d = censored_case(rng, 30)
        p = GpdParams(1.2, 0.3)
        ref = (u_stat_u1(x, p), u_stat_u2(x, p), delta_n_hat(x, -0.2), delta_n_star(x).statistic)
        cref = delta_n_censored(CensoredSample(t, d)).stat_c_star
        for _ in range(20):
            y = rng.permutation(x)
            assert (u_stat_u1(y, p), u_stat_u2(y, p), delta_n_hat(y, -0.2),
                    delta_n_star(y).statistic) == ref
            perm = rng.permutation(30)
            assert delta_n_censored(CensoredSample(t[perm], d[perm])).stat_c_star == cref

    @pytest.mark.parametrize("c", [0.001, 1000.0])
    def test_delta_n_star_scale(self, c):
        x = gpd_sample(60, GpdParams(1, -0.4), 6)
        assert delta_n_star(c * x).statistic == pytest.approx(delta_n_star(x).statistic,
                                                              rel=1e-12)

    def test_delta_n_star_power_of_two_exact(self):
        x = gpd_sample(60, GpdParams(1, -0.4), 6)
        assert delta_n_star(1024.0 * x).statistic == delta_n_star(x).statistic

    def test_delta_p_scale(self):
        x = gpd_sample(50, GpdParams(1, 0.3), 7)
        p = estimate_aml(x)
        assert delta_p_hat(1000 * x, p.scaled(1000)) == pytest.approx(delta_p_hat(x, p),
                                                                      rel=1e-12)


class TestCensored:
    def test_zero_censoring_exact(self):
        x = gpd_sample(40, GpdParams(1, -0.5), 8)
        res = delta_n_censored(CensoredSample.uncensored(x))
        star = delta_n_star(x)
        assert res.stat_c_star == star.statistic
        assert res.stat_c == delta_n_hat(x, star.k)

    def test_censored_triples_contribute_nothing(self):
        # triples that contain a censored record carry zero weight
        t = np.array([0.2, 0.5, 0.9, 1.3, 1.7, 2.0])
        d = np.array([1, 0, 1, 1, 0, 1])
        stat, _ = oracle.delta_n_censored(list(t), list(d))
        assert delta_n_censored(CensoredSample(t, d)).stat_c == pytest.approx(stat, rel=1e-12)

    @pytest.mark.parametrize("form", ["consistent", "printed"])
    def test_variance_matches_transcription(self, form):
        rng = np.random.default_rng(15)
        for n in (5, 10, 15):
            t, d = censored_case(rng, n)
            v = censored_variance(CensoredSample(t, d), form)
            s1, s2, phi = oracle.censored_variance(list(t), list(d), form)
            assert v.sigma2_1c == pytest.approx(s1, rel=1e-10)
            assert v.sigma2_c == pytest.approx(s2, rel=1e-10)
            np.testing.assert_allclose(v.phi, phi, rtol=1e-10, atol=1e-15)

    @pytest.mark.parametrize("form", ["consistent", "printed"])
    def test_no_censoring_phi_zero(self, form):
        x = gpd_sample(30, GpdParams(1, -0.5), 9)
        v = censored_variance(CensoredSample.uncensored(x), form)
        assert np.all(v.phi == 0.0)
        np.testing.assert_array_equal(v.V, v.xi)
        if form == "printed":
            ss = math.fsum((v.xi - v.xi.mean()) ** 2)
            assert v.sigma2_1c == pytest.approx(9 / 29 * ss, rel=1e-12)

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            censored_variance(CensoredSample.uncensored([1, 2, 3]), "other")

    def test_report(self):
        rng = np.random.default_rng(4)
        t, d = censored_case(rng, 60, 0.2)
        rep = censored_test(CensoredSample(t, d))
        z = rep.meta["z"]
        assert rep.case == CENSORED
        assert rep.p_value == pytest.approx(2 * stats.norm.sf(z))
        assert rep.critical_values["z"] == pytest.approx(1.959963984540054)
        assert rep.decision == (REJECT if z > rep.critical_values["z"] else FAIL_TO_REJECT)

    def test_scale_leaves_decision(self):
        rng = np.random.default_rng(11)
        t, d = censored_case(rng, 50)
        a = censored_test(CensoredSample(t, d))
        b = censored_test(CensoredSample(1000 * t, d))
        assert a.decision == b.decision
        assert b.meta["z"] == pytest.approx(a.meta["z"], rel=1e-10)

    def test_alpha_nesting(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            t, d = censored_case(rng, 30)
            cs = CensoredSample(t, d)
            if censored_test(cs, 0.01).rejected:
                assert censored_test(cs, 0.05).rejected


class TestBootstrapTests:
    def test_deterministic(self):
        x = gpd_sample(30, GpdParams(1, -0.3), 1)
        assert test_negative(x, B=200, seed=3) == test_negative(x, B=200, seed=3)
        y = gpd_sample(30, GpdParams(1, 0.3), 1)
        assert test_positive(y, B=200, seed=3) == test_positive(y, B=200, seed=3)

    def test_random_seed_recorded(self):
        x = gpd_sample(30, GpdParams(1, -0.3), 1)
        rep = test_negative(x, B=100)
        again = test_negative(x, B=100, seed=rep.meta["seed"])
        assert rep == again

    def test_quantiles_ordered(self):
        x = gpd_sample(30, GpdParams(1, 0.2), 2)
        for rep in (test_negative(x, B=300, seed=1), test_positive(x, B=300, seed=1)):
            assert rep.critical_values["0.01"] >= rep.critical_values["0.05"]
            assert 0 < rep.p_value <= 1

    def test_alpha_nesting(self):
        for s in range(10):
            x = gpd_sample(25, GpdParams(1, -0.6), 100 + s) ** 1.5
            if test_negative(x, alpha=0.01, B=200, seed=s).rejected:
                assert test_negative(x, alpha=0.05, B=200, seed=s).rejected

    def test_cases_and_meta(self):
        x = gpd_sample(40, GpdParams(1, 0.2), 3)
        neg = test_negative(x, B=100, seed=1)
        pos = test_positive(x, B=100, seed=1)
        assert neg.case == NEGATIVE and pos.case == POSITIVE
        assert neg.kappa == kappa_from_beta(neg.estimates.beta)
        assert pos.meta["k_upper"] == 8
        assert neg.meta["B"] == 100 and neg.meta["n"] == 40

    def test_a1_method(self):
        x = gpd_sample(30, GpdParams(1, -0.3), 1)
        rep = test_negative(x, B=200, seed=1, method="a1")
        assert rep.meta["bootstrap"] == "a1"

    def test_level_uniform(self):
        # uniform data are GPD(1, -1); the parametric bootstrap test must hold its level
        rej = [test_negative(gpd_sample(50, GpdParams(1, -1), 500 + r), B=199, seed=r).rejected
               for r in range(200)]
        assert abs(np.mean(rej) - 0.05) < 0.045


class TestReportSerialization:
    def test_json_round_trip(self):
        x = gpd_sample(30, GpdParams(1, -0.3), 1)
        rep = test_negative(x, B=100, seed=5)
        assert TestReport.from_json(rep.to_json()) == rep
        crep = censored_test(CensoredSample.uncensored(x))
        assert TestReport.from_dict(crep.to_dict()) == crep
