import os
import sys

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats

sys.path.insert(0, os.getcwd())
sys.path.insert(0, os.path.join(os.getcwd(), "test"))

from iot_contracts import *
from iot_contracts import base_utils
from iot_contracts.cli import EXIT_INVALID, EXIT_OK, main
from fixtures import *


def setup_function() :
    """Before each test"""
    base_utils.PARALLEL = False
    set_debug(False)


# -- Parameters

def test_benchmark_params():
    assert BENCHMARK.values() == dict(
        alpha=1.0, q=0.5, k=0.5, theta=0.4, lambda_=0.5, mu=1.0, epsilon_prime=1.0, share_r=0.3)
    assert SOLVED_BENCHMARK.q == 2.0
    assert BENCHMARK.support_upper == 2.0
    assert BENCHMARK.variance == pytest.approx(1 / 3)


def test_invalid_params_list_all_violations():
    with pytest.raises(ParamValidationException) as exc:
        ModelParams(theta=0.6, lambda_=1.5)

    assert len(exc.value.violations) == 2
    assert "theta <= mu/2" in str(exc.value)
    assert "lambda" in str(exc.value)


def test_with_values_accepts_csv_keys():
    params = BENCHMARK.with_values(**{"lambda" : 0.2, "r" : 0.6})
    assert params.lambda_ == 0.2
    assert params.share_r == 0.6
    assert params.get("r") == 0.6

    with pytest.raises(Exception) as exc:
        BENCHMARK.with_values(foo=1)
    assert "Parameter not found" in str(exc.value)


def test_sensitivity_by_viewpoint():
    params = BENCHMARK.with_values(mu=0.8, epsilon_prime=1.5)
    assert params.sensitivity(Viewpoint.OBJECTIVE) == 0.8
    assert params.sensitivity(Viewpoint.PERCEIVED, UO) == pytest.approx(1.2)

    # Rational scenarios ignore overconfidence
    assert params.sensitivity(Viewpoint.PERCEIVED, UN) == 0.8


def test_scenario_codes():
    assert [sc.code for sc in SCENARIOS.values()] == ["un", "rn", "uo", "ro"]
    assert Scenario.from_code("ro") == RO
    assert RO.rational() == RN
    assert UO.usage_based and UO.overconfident
    assert not RN.usage_based and not RN.overconfident


def test_random_params():
    points = random_params(20, seed=1, bounds=dict(theta=(0.0, 0.6), mu=(0.2, 1.2)))
    assert len(points) == 20
    assert all(not point.violations() for point in points)
    assert points == random_params(20, seed=1, bounds=dict(theta=(0.0, 0.6), mu=(0.2, 1.2)))

    # Unset bounds fall back to the sampling range of the parameter
    assert all(0.5 <= point.q <= 2.0 for point in random_params(10, seed=1, bounds=dict(q=None)))


def test_param_rand():
    assert theta.rand(0.5) == pytest.approx(0.3)
    assert theta.rand(0.5, 0.1, 0.2) == pytest.approx(0.15)

    with pytest.raises(Exception) as exc:
        random_params(5, bounds=dict(beta=(0, 1)))
    assert "not a parameter definition" in str(exc.value)


def test_list_parameters():
    table = list_parameters()
    for key in ("alpha", "theta", "lambda", "epsilon_prime", "r") :
        assert key in table


# -- Demand and profits

def test_expected_demands():
    demands = expected_demands(BENCHMARK, EXAMPLE_DECISIONS)
    assert demands.e_d_t == pytest.approx(0.8)
    assert demands.e_d_i == pytest.approx(0.45)
    assert demands.e_d_s == pytest.approx(0.35)

    perceived = expected_demands(BENCHMARK.with_values(epsilon_prime=1.5), EXAMPLE_DECISIONS, Viewpoint.PERCEIVED)
    assert perceived.e_d_t == pytest.approx(0.95)


def test_no_margin_no_demand():
    demands = expected_demands(BENCHMARK.with_values(lambda_=0.3), Decisions(p=0.5, w=0.0))
    assert demands.e_d_t == pytest.approx(0)
    assert demands.e_d_i == pytest.approx(0)
    assert demands.e_d_s == pytest.approx(0)


def test_purchase_thresholds():
    gamma_i, gamma_s, feasible = purchase_thresholds(BENCHMARK, Decisions(p=0.3, h=0.1, s=0.1))
    assert gamma_i == pytest.approx(0.2)
    assert gamma_s == pytest.approx(0.4)
    assert feasible

    gamma_i, gamma_s, feasible = purchase_thresholds(BENCHMARK, Decisions(p=0.0))
    assert gamma_i == gamma_s == 0
    assert not feasible

    gamma_i, gamma_s, feasible = purchase_thresholds(BENCHMARK, Decisions(p=0.25))
    assert gamma_i == gamma_s == pytest.approx(0.5)
    assert feasible


def test_profits():
    assert manufacturer_profit(UN, BENCHMARK, EXAMPLE_DECISIONS) == pytest.approx(0.115)
    assert platform_profit(UN, BENCHMARK, EXAMPLE_DECISIONS) == pytest.approx(0.093)

    revenue = BENCHMARK.with_values(share_r=0.5)
    assert manufacturer_profit(RN, revenue, EXAMPLE_DECISIONS) == pytest.approx(0.095)

    # Zero margin and zero cost
    assert manufacturer_profit(UN, BENCHMARK, Decisions(p=0.2, w=0.2)) == pytest.approx(0)
    assert platform_profit(UN, BENCHMARK, Decisions(p=0.2, w=0.0)) == pytest.approx(0)

    assert supply_chain_profit(UN, BENCHMARK, EXAMPLE_DECISIONS) == pytest.approx(0.208)


def test_data_term_vanishes_without_insensitive_customers():
    params = BENCHMARK.with_values(lambda_=0.0)
    assert platform_profit(UN, params, EXAMPLE_DECISIONS) == pytest.approx(
        platform_profit(UN, params.with_values(theta=0.1), EXAMPLE_DECISIONS))


def test_missing_fee():
    with pytest.raises(MissingSoftwareFeeException):
        manufacturer_profit(UN, BENCHMARK, Decisions(p=0.25, h=0.1, s=0.1))


MC_DECISIONS = [
    Decisions(p=0.25, w=0.1, h=0.1, s=0.1),
    Decisions(p=0.4, w=0.2, h=0.3, s=0.05),
    Decisions(p=0.6, w=0.05, h=0.2, s=0.4),
    Decisions(p=0.3, w=0.25, h=0.0, s=0.2),
    Decisions(p=0.8, w=0.4, h=0.5, s=0.3)]


def test_monte_carlo_profit():
    points = random_params(5, seed=2)
    for params, d in zip(points, MC_DECISIONS) :
        for sc in SCENARIOS.values() :
            for party, closed in (
                    ("manufacturer", manufacturer_profit(sc, params, d)),
                    ("platform", platform_profit(sc, params, d))) :
                mean, stderr = monte_carlo_profit(sc, params, d, party, n=10 ** 6)
                assert abs(mean - closed) <= 3 * stderr + 1e-10 * max(1.0, abs(closed)), (params, sc.code, party)

    params = BENCHMARK.with_values(epsilon_prime=1.3)
    realized, stderr = monte_carlo_profit(UO, params, EXAMPLE_DECISIONS, viewpoint=Viewpoint.OBJECTIVE, n=10 ** 6)
    closed = manufacturer_profit(UO, params, EXAMPLE_DECISIONS, Viewpoint.OBJECTIVE)
    assert abs(realized - closed) <= 3 * stderr + 1e-10


@settings(max_examples=50, deadline=None)
@given(
    p_=floats(0, 2),
    h_=floats(0, 2),
    s_=floats(0, 2),
    lam=floats(0, 1),
    eps=floats(1, 2))
def test_demand_additivity(p_, h_, s_, lam, eps):
    params = SOLVED_BENCHMARK.with_values(lambda_=lam, epsilon_prime=eps)
    for viewpoint in (Viewpoint.OBJECTIVE, Viewpoint.PERCEIVED) :
        demands = expected_demands(params, Decisions(p=p_, h=h_, s=s_), viewpoint)
        assert demands.e_d_t == pytest.approx(demands.e_d_i + demands.e_d_s, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    margin=floats(0, 1),
    h_=floats(0, 1),
    s_=floats(0, 1),
    eps=floats(1, 2))
def test_overconfidence_inflates_perceived_profit(margin, h_, s_, eps):
    params = SOLVED_BENCHMARK.with_values(epsilon_prime=eps)
    d = Decisions(p=0.5 + margin, w=0.5, h=h_, s=s_)
    perceived = manufacturer_profit(UO, params, d, Viewpoint.PERCEIVED)
    realized = manufacturer_profit(UO, params, d, Viewpoint.OBJECTIVE)
    assert perceived >= realized - 1e-12


@settings(max_examples=50, deadline=None)
@given(
    p_=floats(0, 2),
    w_=floats(0, 1),
    h_=floats(0, 1),
    s_=floats(0, 1),
    lam=floats(0, 1),
    mu_=floats(0.8, 1.2))
def test_viewpoints_agree_without_overconfidence(p_, w_, h_, s_, lam, mu_):
    params = SOLVED_BENCHMARK.with_values(lambda_=lam, mu=mu_, epsilon_prime=1.0)
    d = Decisions(p=p_, w=w_, h=h_, s=s_)
    assert expected_demands(params, d, Viewpoint.PERCEIVED) == expected_demands(params, d, Viewpoint.OBJECTIVE)
    for sc in (UO, RO) :
        assert manufacturer_profit(sc, params, d, Viewpoint.PERCEIVED) == pytest.approx(
            manufacturer_profit(sc, params, d, Viewpoint.OBJECTIVE), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(
    p_=floats(0, 2),
    h_=floats(0, 1),
    s_=floats(0, 1),
    step=floats(1e-3, 0.5),
    lam=floats(0, 1),
    eps=floats(1, 2))
def test_demand_monotonicity(p_, h_, s_, step, lam, eps):
    params = SOLVED_BENCHMARK.with_values(lambda_=lam, epsilon_prime=eps)
    for viewpoint in (Viewpoint.OBJECTIVE, Viewpoint.PERCEIVED) :
        def demands(**changes) :
            values = {**dict(p=p_, h=h_, s=s_), **changes}
            return expected_demands(params, Decisions(**values), viewpoint)

        base = demands()
        assert demands(p=p_ + step).e_d_t <= base.e_d_t + 1e-12
        assert demands(h=h_ + step).e_d_t >= base.e_d_t - 1e-12
        assert demands(s=s_ + step).e_d_i >= base.e_d_i - 1e-12


# -- Roots

def test_poly_root():
    assert poly_root(PolySpec((64, 30, -38, -17, 1), root_index=3)) == pytest.approx(1.328649, abs=1e-6)
    assert EPS1 == pytest.approx(1.328649, abs=1e-6)
    assert MU_BOUND_REVENUE == pytest.approx(1.05588, abs=1e-5)
    assert poly_root(PolySpec((-2, 1))) == pytest.approx(2)

    assert poly_root(FIG3_POLY) == pytest.approx(0.8441654276, abs=1e-9)
    assert poly_root(PROP4_POLY) == pytest.approx(1.2041914, abs=1e-6)
    assert poly_root(PROP6_POLY) == pytest.approx(1.2129745, abs=1e-6)


def test_real_roots_sorted():
    # (x - 1)(x - 2)(x + 3)
    assert real_roots((6, -7, 0, 1)) == pytest.approx([-3, 1, 2])
    assert real_roots((6, -7, 0, 1), bracket=(0, 1.5)) == pytest.approx([1])


def test_insufficient_roots():
    with pytest.raises(InsufficientRootsException) as exc:
        poly_root(PolySpec((1,)))
    assert exc.value.found == 0

    # x² + 1
    with pytest.raises(InsufficientRootsException):
        poly_root(PolySpec((1, 0, 1)))


def test_overconfidence_bounds():
    assert eps2_bound(0.4, 0.5) == pytest.approx(1.6375, abs=1e-4)
    assert 1 < EPS1 < eps2_bound(0.4, 0.5) < EPS_MAX


# -- Closed forms

def test_lemma1_printed_values():
    outcome = lemma1_equilibrium(BENCHMARK)

    assert outcome.aux.a == pytest.approx(-0.1)
    assert outcome.aux.b == pytest.approx(1.3025)
    assert outcome.aux.den == pytest.approx(1.5025)
    assert_close(decisions_of(outcome), dict(
        p=0.01331114809, w=-0.01164725458, h=0.04991680532, s=0.05823627288))
    assert_close(outcome.printed["pi_m"], 0)
    assert_close(outcome.printed["pi_p"], outcome.decisions.h)


def test_lemma2_printed_values():
    outcome = lemma2_equilibrium(BENCHMARK)

    assert outcome.aux.c == pytest.approx(0.01275)
    assert outcome.aux.d == pytest.approx(0.08)
    assert outcome.decisions.w is None
    assert_close(decisions_of(outcome), dict(p=1.568627451, h=0.9411764706, s=4.803921569))
    assert_close(outcome.printed["pi_m"], -1.033448674)
    assert_close(outcome.printed["pi_p"], 1.12745098)


def test_overconfident_closed_forms():
    params = SOLVED_BENCHMARK.with_values(epsilon_prime=1.2)

    uo = usage_overconfident_equilibrium(params)
    assert_close(decisions_of(uo), dict(p=1.91646040, w=1.03465347, h=0.52908416, s=0.27227723), rel=1e-7)
    assert_close(uo.printed["pi_m"], 0.24882671, rel=1e-7)
    assert_close(uo.pi_m_perceived, 0.24882671, rel=1e-7)
    assert_close(uo.pi_m_realized, 0.1901669, rel=1e-6)
    assert_close(uo.pi_p, 0.37438119, rel=1e-7)

    ro = revenue_overconfident_equilibrium(params)
    assert_close(decisions_of(ro), dict(p=1.25657563, h=0.22618361, s=0.40288488), rel=1e-7)
    assert_close(ro.pi_p, 0.48916725, rel=1e-7)

    # Printed manufacturer profit misses a factor
    assert_close(ro.printed["pi_m"], 2.15803366, rel=1e-7)
    assert_close(ro.pi_m_perceived, 0.21126783, rel=1e-7)


def test_closed_form_dispatch():
    params = SOLVED_BENCHMARK.with_values(epsilon_prime=1.2)
    for code, sc in SCENARIOS.items() :
        outcome = closed_form_equilibrium(sc, params)
        assert outcome.scenario == sc
        assert outcome.method == Method.CLOSED
        assert outcome.pi_sc == pytest.approx(outcome.pi_m_realized + outcome.pi_p)


def test_specialized_forms_refuse_other_points():
    with pytest.raises(SpecializationException) as exc:
        usage_overconfident_equilibrium(SOLVED_BENCHMARK.with_values(k=0.6))
    assert "k=0.6" in str(exc.value)

    with pytest.raises(SpecializationException):
        lemma1_lambda_partials(BENCHMARK)


def test_domain_check():
    assert domain_check(SOLVED_BENCHMARK, RO) == []

    violations = domain_check(SOLVED_BENCHMARK.with_values(epsilon_prime=1.4), RO)
    assert len(violations) == 1
    assert "eps_1" in violations[0]

    # Away from θ=0.4, λ=0.5 the overconfidence bound is 2
    assert domain_check(SOLVED_BENCHMARK.with_values(epsilon_prime=1.4, lambda_=0.3), RO) == []

    violations = domain_check(SOLVED_BENCHMARK.with_values(mu=1.1), RN)
    assert "revenue sharing bound" in violations[0]

    assert domain_check(SOLVED_BENCHMARK.with_values(mu=1.1), UN) == []
    assert domain_check(SOLVED_BENCHMARK.with_values(mu=1.2), UN)

    with pytest.raises(DomainViolationException) as exc:
        closed_form_equilibrium(RO, SOLVED_BENCHMARK.with_values(epsilon_prime=1.4))
    assert exc.value.scenario == "ro"


def test_lemma1_denominator_is_checked():
    # B < 0 with λ=1, θ=3, μ=0.1 : -2μ²A + B = -0.37
    params = ModelParams.unchecked(q=2.0, theta=3.0, lambda_=1.0, mu=0.1)
    violations = domain_check(params, UN)
    assert any("is not positive" in violation for violation in violations)
    assert not any("is not positive" in violation for violation in domain_check(params, RN))

    with pytest.raises(DomainViolationException):
        lemma1_equilibrium(params)


def test_lemma1_auxiliary_signs():
    points = random_params(20, seed=4, accept=lambda params : not domain_check(params, UN))
    for params in points :
        aux = lemma1_equilibrium(params).aux
        assert aux.a <= 0
        assert aux.b > 0
        assert aux.den >= aux.b * (1 - 1e-12)


def test_no_software_without_insensitive_customers():
    params = SOLVED_BENCHMARK.with_values(lambda_=0.0, epsilon_prime=1.2)
    for sc in SCENARIOS.values() :
        assert closed_form_equilibrium(sc, params).decisions.s == pytest.approx(0, abs=1e-15), sc.code
        assert stackelberg_solve(sc, params, SolveOptions(certify=False)).decisions.s == pytest.approx(0, abs=1e-8), sc.code


# -- Oracle

def test_manufacturer_best_response():
    params = BENCHMARK.with_values(mu=0.9)
    p_, h_, diagnostics = manufacturer_best_response(UN, params, dict(w=0.1, s=0.0))

    assert p_ == pytest.approx(1.152632, abs=1e-6)
    assert h_ == pytest.approx(1.894737, abs=1e-6)
    assert diagnostics.concave


def test_degenerate_follower_at_benchmark():
    with pytest.raises(DegenerateFollowerException) as exc:
        manufacturer_best_response(UN, BENCHMARK, dict(w=0.1, s=0.0625))
    assert exc.value.determinant == pytest.approx(0, abs=1e-12)

    with pytest.raises(DegenerateFollowerException):
        stackelberg_solve(UN, BENCHMARK)


def test_specialized_response_matches_best_response():
    params = SOLVED_BENCHMARK.with_values(mu=0.9, epsilon_prime=1.2)
    for sc in (UN, UO) :
        closed = specialized_follower_response(sc, params, 0.8, 0.3)
        p_, h_, _ = manufacturer_best_response(sc, params, dict(w=0.8, s=0.3))
        assert closed == pytest.approx((p_, h_), rel=1e-9)


def test_oracle_at_concave_point():
    un = oracle_outcome("un", CONCAVE, certify=True)
    assert_close(decisions_of(un), dict(
        p=0.44399185336, w=0.260692464358, h=0.183299389002, s=0.142566191446), rel=1e-7)
    assert_close(un.pi_m_perceived, 0.0503979990128, rel=1e-7)
    assert_close(un.pi_p, 0.091649694501, rel=1e-7)
    assert un.foc_residual_max < 1e-8
    assert un.certification.passed
    assert un.soc.concave

    rn = oracle_outcome("rn", CONCAVE, certify=True)
    assert_close(decisions_of(rn), dict(p=0.296847716203, h=0.0890543148608, s=0.196673099899), rel=1e-7)
    assert_close(rn.pi_m_perceived, 0.0489058044711, rel=1e-7)
    assert_close(rn.pi_p, 0.117636246669, rel=1e-7)
    assert rn.certification.passed


def test_oracle_at_solved_benchmark():
    un = oracle_outcome("un", SOLVED_BENCHMARK)
    assert_close(decisions_of(un), dict(p=1.7759674, w=1.0427699, h=0.36659878, s=0.28513238), rel=1e-6)
    assert_close(un.pi_m_perceived, 0.201592, rel=1e-5)
    assert_close(un.pi_p, 0.36659878, rel=1e-6)

    rn = oracle_outcome("rn", SOLVED_BENCHMARK)
    assert_close(decisions_of(rn), dict(p=1.18739, h=0.178109, s=0.393346), rel=1e-5)
    assert_close(rn.pi_m_perceived, 0.195623, rel=1e-5)
    assert_close(rn.pi_p, 0.470545, rel=1e-5)


def test_oracle_is_deterministic():
    opts = SolveOptions(certify=False)
    first = stackelberg_solve(UN, CONCAVE, opts)
    second = stackelberg_solve(UN, CONCAVE, opts)
    assert first.decisions == second.decisions


def test_reconcile_overconfident_forms():
    params = SOLVED_BENCHMARK.with_values(epsilon_prime=1.2)

    uo = reconcile(usage_overconfident_equilibrium(params), oracle_outcome("uo", params))
    assert uo.all_match, uo.mismatches

    ro = reconcile(revenue_overconfident_equilibrium(params), oracle_outcome("ro", params))
    assert ro.verdicts == dict(p=Verdict.MATCH, h=Verdict.MATCH, s=Verdict.MATCH, pi_m=Verdict.MISMATCH, pi_p=Verdict.MATCH)
    assert ro.mismatches[0].note == KNOWN_DISCREPANCIES[("ro", "pi_m")]


def test_reconcile_lemma1_mismatch_is_ledgered():
    un = reconcile(lemma1_equilibrium(SOLVED_BENCHMARK), oracle_outcome("un", SOLVED_BENCHMARK))
    assert not un.all_match
    for entry in un.mismatches :
        assert entry.note is not None


def test_reconcile_needs_same_point():
    with pytest.raises(ScenarioMismatchException):
        reconcile(lemma1_equilibrium(SOLVED_BENCHMARK), oracle_outcome("rn", SOLVED_BENCHMARK))


def test_solve_options_validation():
    with pytest.raises(Exception):
        SolveOptions(damping=0)
    with pytest.raises(Exception):
        SolveOptions(mode="whatever")
    with pytest.raises(Exception) as exc:
        SolveOptions(leader_grid_resolution=4)
    assert "at least 8" in str(exc.value)
    with pytest.raises(Exception):
        SolveOptions(certification_resolution=7)

    assert SolveOptions(leader_grid_resolution=8, certification_resolution=8).leader_grid_resolution == 8


def test_well_posedness():
    assert is_well_posed(UN, CONCAVE)
    assert is_well_posed(RN, CONCAVE)

    # 4kq = μ² : the manufacturer stage is singular
    assert not is_well_posed(UN, BENCHMARK)
    assert not is_well_posed(UN, CONCAVE, margin=10.0)


def test_oracle_certifies_random_well_posed_points():
    points = random_params(50, seed=3, accept=well_posed_rational)
    for sc in (UN, RN) :
        for params, outcome in zip(points, oracle_sweep(sc, points, SolveOptions())) :
            assert outcome.foc_residual_max < 1e-8, params
            assert outcome.certification.passed, params
            assert outcome.soc.leader_concave, params


def test_overconfident_oracle_at_rationality_limit():
    opts = SolveOptions(certify=False)
    points = random_params(20, seed=5, accept=well_posed_rational)
    for params in points :
        params = params.with_values(epsilon_prime=1.0)
        for sc in (UO, RO) :
            overconfident = decisions_of(stackelberg_solve(sc, params, opts))
            rational = decisions_of(stackelberg_solve(sc.rational(), params, opts))
            for name in ("p", "w", "h", "s") :
                if rational.get(name) is None :
                    assert overconfident.get(name) is None
                else :
                    assert overconfident[name] == pytest.approx(rational[name], abs=1e-8), (params, sc.code, name)


def test_simultaneous_mode_at_concave_point():
    opts = SolveOptions(mode=SolveMode.SIMULTANEOUS)
    for sc in (UN, RN) :
        outcome = stackelberg_solve(sc, CONCAVE, opts)
        assert outcome.foc_residual_max < 1e-8, sc.code
        assert outcome.certification.passed, sc.code
        assert_follower_optimal(outcome)

    # The fee is still set first
    assert stackelberg_solve(UN, CONCAVE, opts).decisions.w is not None


def test_sequential_outcomes_are_follower_optimal():
    for code in ("un", "rn") :
        assert_follower_optimal(oracle_outcome(code, CONCAVE, certify=True))
    assert_follower_optimal(oracle_outcome("uo", SOLVED_BENCHMARK.with_values(epsilon_prime=1.2)))


def test_lemma1_suspect_values_have_own_notes():
    # Negative fee at the benchmark
    assert lemma1_equilibrium(BENCHMARK).decisions.w < 0
    assert "negative" in discrepancy_note(UN, "w", BENCHMARK)

    printed = lemma1_equilibrium(SOLVED_BENCHMARK).printed
    assert printed["pi_p"] == pytest.approx(printed["h"], rel=1e-12)
    assert "repeats the expression of h" in discrepancy_note(UN, "pi_p", SOLVED_BENCHMARK)

    assert discrepancy_note(UO, "p", SOLVED_BENCHMARK) is None


def test_specialized_forms_away_from_q2():
    params = BENCHMARK.with_values(epsilon_prime=1.2)
    assert usage_overconfident_equilibrium(params).foc_residual_max > 1e-3
    for sc in (UO, RO) :
        assert "q=2" in discrepancy_note(sc, "p", params)


# -- Comparative statics

def test_central_difference():
    estimate = central_difference(lambda x : x ** 3, 2.0)
    assert estimate.richardson == pytest.approx(12, rel=1e-8)
    assert estimate.sign == 1
    assert not estimate.unstable


def test_lambda_partials_against_oracle():
    params = SOLVED_BENCHMARK.with_values(mu=0.9, theta=0.4)
    printed = lemma1_lambda_partials(params)
    numeric = numeric_partials(["p", "w", "h", "s", "pi_m", "pi_p"], UN, params, "lambda_", method=Method.ORACLE)

    expected = dict(p=0.3424913, w=0.13022017, h=0.095522006, s=0.55878624, pi_m=0.11446545, pi_p=0.10613556)
    for name, val in expected.items() :
        assert numeric[name].richardson == pytest.approx(val, rel=1e-4), name

    for name in ("h", "s", "pi_m") :
        assert printed[name] == pytest.approx(expected[name], rel=1e-4), name

    # Printed signs are flipped for these ones
    for name in LAMBDA_PARTIAL_DISCREPANCIES :
        assert printed[name] == pytest.approx(-expected[name], rel=1e-4), name


def test_threshold_scan():
    crossings = threshold_scan(lambda x : 1 - x ** 2, (0, 3), 11)
    assert len(crossings) == 1
    assert crossings[0].at == pytest.approx(1, abs=1e-7)
    assert (crossings[0].left_sign, crossings[0].right_sign) == (1, -1)


def test_manufacturer_prefers_revenue_sharing_above_crossing():
    gap = along(quantity_difference("pi_m", UN, RN, Method.ORACLE), SOLVED_BENCHMARK, "lambda_")
    crossings = threshold_scan(gap, (0.7, 0.95), 6)

    assert len(crossings) == 1
    assert crossings[0].left_sign == 1
    assert crossings[0].at == pytest.approx(poly_root(FIG3_POLY), abs=1e-6)


def test_software_region_map():
    regions = software_region_map(
        r_values=[0.05, 0.125, 0.3],
        eps_values=np.linspace(1.001, EPS1 - 0.001, 41))
    assert regions.patterns == ["-", "+-", "+"]
    assert len(regions.boundary_at(0.125)) == 1


def test_software_slope_sign_change():
    slope = software_slope_fn(SOLVED_BENCHMARK)
    crossings = threshold_scan(lambda eps : slope(0.15, eps), (1.001, EPS1 - 0.001), 21)
    assert len(crossings) == 1
    assert crossings[0].at == pytest.approx(1.2041914, abs=1e-4)


def test_software_thresholds():
    thresholds = discover_thresholds(families=("ro",))
    assert thresholds.r_o1 == pytest.approx(0.099354, abs=1e-4)
    assert thresholds.r_o2 == pytest.approx(0.187544, abs=1e-4)
    assert thresholds.eps_1 == EPS1
    assert thresholds.r_n1 is None
    assert len(thresholds.curves["eps_of_ro"]) == 5

    df = thresholds_frame(thresholds)
    assert list(df.columns) == ["name", "input", "value"]


def test_proposition_1():
    grid = PropositionGrid(lambda_values=[0.5], mu_values=[0.9])
    report = proposition_suite(1, grid)

    un_claims = [claim for claim in report.claims if "(un)" in claim.claim]
    assert len(un_claims) == 6
    assert all(not claim.violations for claim in un_claims)


def test_proposition_3():
    report = proposition_suite(3, PropositionGrid(lambda_values=[0.5], eps_values=[1.2, 1.5]))
    assert report.verdict == SuiteVerdict.CONFIRMED
    assert report.acceptable


def test_proposition_5_perceived_and_realized():
    perceived = proposition_suite(5, PropositionGrid(eps_values=[1.2, 1.5]))
    assert perceived.verdict == SuiteVerdict.CONFIRMED

    realized = proposition_suite(5, PropositionGrid(eps_values=[1.2], profit_view=ProfitView.REALIZED))
    assert realized.verdict == SuiteVerdict.MIXED
    failing = [claim for claim in realized.claims if claim.violations]
    assert len(failing) == 1
    assert "pi_m" in failing[0].claim


def test_proposition_6():
    report = proposition_suite(6, PropositionGrid(r_values=[0.3], eps_values=[1.2], scan_resolution=21))
    assert report.verdict == SuiteVerdict.CONFIRMED
    assert any("r=0.125" in claim.claim and claim.passed == 1 for claim in report.claims)


def test_claim_without_checked_points_is_inconclusive():
    unstable = ClaimResult("dp/dλ > 0", unstable=[dict(lambda_=0.5)])
    assert unstable.inconclusive
    assert PropositionReport(1, "", [unstable]).verdict == SuiteVerdict.MIXED

    checked = ClaimResult("dp/dλ > 0")
    checked.record(dict(lambda_=0.5), True)
    assert PropositionReport(1, "", [checked]).verdict == SuiteVerdict.CONFIRMED
    assert PropositionReport(1, "", [checked, unstable]).verdict == SuiteVerdict.MIXED


def test_out_of_domain_points_are_reported():
    report = proposition_suite(5, PropositionGrid(eps_values=[1.2, 1.9]))
    assert report.out_of_domain == [dict(epsilon_prime=1.9)]


def test_unknown_proposition():
    with pytest.raises(Exception):
        proposition_suite(99)


def test_figure_5():
    df = figure_data(5, points=5)
    assert list(df.columns) == ["epsilon_prime", "s_rn_r0.1", "s_ro_r0.1", "s_rn_r0.2", "s_ro_r0.2", "s_rn_r0.3", "s_ro_r0.3"]
    assert len(df) == 5

    # Software innovation increases with overconfidence for r above r_o2
    assert (df["s_ro_r0.3"] > df["s_rn_r0.3"]).all()


# -- Files

def test_outcomes_frame():
    outcome = lemma1_equilibrium(BENCHMARK)
    df = outcomes_frame([outcome])
    assert list(df.columns) == CSV_COLUMNS
    assert df["scenario"][0] == "un"
    assert df["h"][0] == pytest.approx(0.04991680532)


def test_read_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# benchmark\ntheta = 0.3\n\nscenario=un,rn # both rational\n")
    assert read_config(str(path)) == dict(theta="0.3", scenario="un,rn")

    path.write_text("theta\n")
    with pytest.raises(ConfigException) as exc:
        read_config(str(path))
    assert ":1" in str(exc.value)


# -- Command line

def test_cli_solve(capsys):
    assert main(["solve"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert ",0.0499168053" in lines[1]


def test_cli_is_deterministic(tmp_path):
    outputs = []
    for i in range(2) :
        path = str(tmp_path / ("out%d.csv" % i))
        assert main(["sweep", "--scenario", "uo,ro", "--set", "q=2", "--vary", "epsilon_prime=1:1.3:4", "--out", path]) == EXIT_OK
        with open(path, "rb") as f :
            outputs.append(f.read())
    assert outputs[0] == outputs[1]
    assert len(pd.read_csv(str(tmp_path / "out0.csv"))) == 8


def test_cli_figure_is_deterministic(capsys):
    outputs = []
    for i in range(2) :
        assert main(["figure", "--id", "3", "--points", "3"]) == EXIT_OK
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    assert outputs[0].splitlines()[0] == "lambda,pi_m_un,pi_m_rn"


def test_cli_ledger(tmp_path):
    out, ledger = str(tmp_path / "out.csv"), str(tmp_path / "ledger.csv")
    assert main(["solve", "--scenario", "ro", "--set", "q=2", "--set", "epsilon_prime=1.2",
                 "--method", "both", "--out", out, "--ledger", ledger]) == EXIT_OK

    df = pd.read_csv(ledger)
    assert list(df.columns) == LEDGER_COLUMNS
    assert list(df[df.verdict == "Mismatch"].variable) == ["pi_m"]
    assert len(pd.read_csv(out)) == 2


def test_cli_sweep_ledger_explains_every_mismatch(tmp_path):
    out, ledger = str(tmp_path / "out.csv"), str(tmp_path / "ledger.csv")
    assert main(["sweep", "--scenario", "un,rn,uo,ro", "--set", "q=2", "--vary", "epsilon_prime=1.05:1.3:5",
                 "--method", "both", "--out", out, "--ledger", ledger]) == EXIT_OK

    df = pd.read_csv(ledger)
    assert set(df.scenario) == {"un", "rn", "uo", "ro"}
    unexplained = df[(df.verdict != Verdict.MATCH) & df.note.isna()]
    assert unexplained.empty, unexplained
    assert (df[df.scenario == "uo"].verdict == Verdict.MATCH).all()


def test_cli_invalid_input(capsys):
    assert main(["solve", "--set", "theta=0.6"]) == EXIT_INVALID
    assert "theta <= mu/2" in capsys.readouterr().err

    assert main(["solve", "--set", "foo=1"]) == EXIT_INVALID
    assert main(["solve", "--scenario", "xx"]) == EXIT_INVALID
    assert main(["props", "99"]) == EXIT_INVALID
    assert main(["roots", "1"]) == EXIT_INVALID


def test_cli_domain_violation_removes_output(tmp_path):
    path = str(tmp_path / "out.csv")
    assert main(["solve", "--scenario", "ro", "--set", "q=2", "--set", "epsilon_prime=1.5", "--out", path]) == EXIT_INVALID
    assert not os.path.exists(path)


def test_cli_roots(capsys):
    assert main(["roots", "--index", "3", "--", "64", "30", "-38", "-17", "1"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("1.3286")

    assert main(["roots", "--", "-2", "1"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "2"


def test_cli_params(capsys):
    assert main(["params"]) == EXIT_OK
    assert "epsilon_prime" in capsys.readouterr().out


if __name__ == '__main__':
    pytest.main(sys.argv)
