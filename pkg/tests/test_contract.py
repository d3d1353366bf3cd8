"""Insurer constraints, LP optimum, and the bilevel composition.

The vertex-enumeration LP is checked against an exhaustive grid search over
the (coverage, premium) rectangle, and the structural principles (zero
operating profit, linear policy line) are asserted in both directions.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyins.contract import (
    FEASIBILITY_EPS,
    check_constraints,
    coverage_floor,
    insurer_objective,
    min_coverage,
    premium_cap,
    solve_bgne,
    solve_insurer_lp,
)
from cyins.model import (
    ActionPair,
    InsurancePolicy,
    MarketParams,
    ParameterError,
    UserRiskProfile,
)

LN2 = math.log(2.0)


def _grid_search_policy(market, profile, resolution=1001):
    """Exhaustive oracle for the insurer problem on a (s, T) grid.

    The IC-u/IR-i pair is an equality up to rounding, so grid feasibility
    accepts it within a hair; the strict insurability floor is closed the
    same way as in the LP.
    """
    rstar = premium_cap(market)
    floor = coverage_floor(market, profile)
    s = np.linspace(0.0, 1.0, resolution)[:, None]
    premium = np.linspace(0.0, rstar, resolution)[None, :]
    objective = (profile.gamma * (1.0 - s) * rstar
                 + market.profit_weight * (s * rstar - premium))
    feasible = ((premium <= rstar + 1e-12)
                & (np.abs(premium - s * rstar) <= 1e-9)
                & (s >= floor + FEASIBILITY_EPS - 1e-15))
    masked = np.where(feasible, objective, np.inf)
    flat = int(np.argmin(masked))
    i, j = divmod(flat, resolution)
    return float(s[i, 0]), float(premium[0, j]), float(masked[i, j])


# --- premium cap -----------------------------------------------------------

def test_premium_cap_values():
    assert premium_cap(MarketParams(1.0, 1.0)) == pytest.approx(LN2, abs=1e-12)
    assert premium_cap(MarketParams(1.0, 3.0)) == pytest.approx(math.log(4.0 / 3.0), abs=1e-12)
    assert premium_cap(MarketParams(1e-12, 1.0)) == pytest.approx(0.0, abs=1e-11)


@settings(max_examples=50, deadline=None)
@given(cu=st.floats(0.01, 50.0), ca=st.floats(0.01, 50.0), bump=st.floats(0.01, 5.0))
def test_premium_cap_monotone(cu, ca, bump):
    base = premium_cap(MarketParams(cu, ca))
    assert premium_cap(MarketParams(cu + bump, ca)) > base
    assert premium_cap(MarketParams(cu, ca + bump)) < base


# --- minimum coverage --------------------------------------------------------

def test_min_coverage_values():
    market = MarketParams(1.0, 1.0)
    assert min_coverage(0.0, market) == 0.0
    assert min_coverage(LN2 / 2.0, market) == 0.5
    assert min_coverage(0.3465735, market) == pytest.approx(0.5, abs=1e-6)
    assert min_coverage(LN2, market) == 1.0


def test_min_coverage_domain_errors():
    market = MarketParams(1.0, 1.0)
    with pytest.raises(ParameterError):
        min_coverage(LN2 + 0.01, market)
    with pytest.raises(ParameterError):
        min_coverage(-0.1, market)


# --- constraint verdicts -------------------------------------------------------

def test_constraints_full_coverage_max_premium():
    verdict = check_constraints(InsurancePolicy(1.0, LN2), MarketParams(1.0, 1.0),
                                UserRiskProfile(1.0))
    assert verdict.all_hold()
    # the policy line is active in both directions; IR-u happens to bind too
    # because the premium equals its cap here
    assert {"IC-u", "IR-i"} <= set(verdict.binding)


def test_constraints_coverage_below_floor():
    verdict = check_constraints(InsurancePolicy(0.2, 0.0), MarketParams(1.0, 1.0),
                                UserRiskProfile(2.0))
    assert not verdict.feasibility_insurer
    assert verdict.slacks["F-i"] == pytest.approx(0.2 - (1.0 - 1.0 / (2.0 * LN2)), abs=1e-12)
    assert coverage_floor(MarketParams(1.0, 1.0), UserRiskProfile(2.0)) == pytest.approx(
        0.2786525, abs=1e-6)


def test_constraints_no_insurance_point():
    verdict = check_constraints(InsurancePolicy(0.0, 0.0), MarketParams(1.0, 1.0),
                                UserRiskProfile(1.0))
    assert verdict.all_hold()  # floor is negative, everything else trivial
    assert coverage_floor(MarketParams(1.0, 1.0), UserRiskProfile(1.0)) < 0.0


def test_constraints_insurer_rationality_fails_without_premium():
    verdict = check_constraints(InsurancePolicy(0.9, 0.0), MarketParams(1.0, 1.0),
                                UserRiskProfile(1.0))
    assert not verdict.ir_insurer and verdict.ic_user


# --- the insurer LP -------------------------------------------------------------

@pytest.mark.parametrize("cu,ca,gamma,cs", [
    (1.0, 1.0, 1.0, 1.0),
    (1.0, 3.0, 2.0, 0.5),
    (1.0, 1.0, 1.0, 0.0),
    (5.0, 0.5, 0.7, 2.0),
])
def test_lp_returns_full_coverage_max_premium(cu, ca, gamma, cs):
    market = MarketParams(cu, ca, cs)
    policy, objective = solve_insurer_lp(market, UserRiskProfile(gamma))
    assert policy.coverage == 1.0
    assert policy.premium == premium_cap(market)
    assert objective == pytest.approx(0.0, abs=1e-12)
    assert policy.premium - policy.coverage * premium_cap(market) == 0.0


@pytest.mark.parametrize("cu,ca,gamma,cs", [
    (1.0, 1.0, 1.0, 1.0),
    (2.0, 0.5, 1.5, 0.25),
    (0.5, 5.0, 2.0, 3.0),
])
def test_lp_matches_grid_search(cu, ca, gamma, cs):
    market = MarketParams(cu, ca, cs)
    profile = UserRiskProfile(gamma)
    policy, objective = solve_insurer_lp(market, profile)
    _, _, grid_objective = _grid_search_policy(market, profile)
    assert objective == pytest.approx(grid_objective, abs=1e-6)


def test_lp_optimum_satisfies_all_constraints():
    market = MarketParams(1.0, 3.0, 0.5)
    profile = UserRiskProfile(2.0)
    policy, _ = solve_insurer_lp(market, profile)
    assert check_constraints(policy, market, profile).all_hold()


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.0, 1.0), premium=st.floats(0.0, LN2),
       gamma=st.floats(0.1, 4.0))
def test_linear_policy_principle(s, premium, gamma):
    # IC-u and IR-i together hold exactly on the line T = s R*, both ways
    market = MarketParams(1.0, 1.0)
    verdict = check_constraints(InsurancePolicy(s, premium), market, UserRiskProfile(gamma))
    on_line = premium == s * premium_cap(market)
    assert (verdict.ic_user and verdict.ir_insurer) == on_line


def test_insurer_objective_formula():
    market = MarketParams(1.0, 1.0, 2.0)
    value = insurer_objective(0.25, 0.1, market, UserRiskProfile(1.0))
    assert value == pytest.approx(0.75 * LN2 + 2.0 * (0.25 * LN2 - 0.1), abs=1e-12)


# --- bilevel composition ----------------------------------------------------------

def test_bgne_symmetric_market():
    solution = solve_bgne(MarketParams(1.0, 1.0, 1.0), UserRiskProfile(1.0))
    assert solution.policy == InsurancePolicy(1.0, LN2)
    assert solution.actions == ActionPair(0.0, 0.0)
    assert solution.zero_profit_check == 0.0
    assert solution.insurer_objective == pytest.approx(0.0, abs=1e-12)
    assert solution.user_payoff == 0.0


def test_bgne_asymmetric_market():
    solution = solve_bgne(MarketParams(2.0, 1.0, 2.0), UserRiskProfile(3.0))
    assert solution.policy.premium == pytest.approx(math.log(3.0), abs=1e-12)
    assert solution.actions == ActionPair(0.0, 0.0)
    report = solution.report
    assert report.risk == 0.0
    assert report.expected_effective_loss == 0.0
    assert report.expected_payout == 0.0
    assert report.feasible


def test_bgne_premium_ignores_gamma_and_profit_weight():
    for gamma in (0.5, 1.0, 3.0):
        for cs in (0.0, 1.0, 5.0):
            solution = solve_bgne(MarketParams(1.0, 1.0, cs), UserRiskProfile(gamma))
            assert solution.policy.premium == premium_cap(MarketParams(1.0, 1.0))
