"""The insurer's side: participation constraints, policy optimum, composition.

Because the equilibrium risk ``R* = ln(c_u/c_a + 1)`` of the underlying game
depends only on the two effort prices, the insurer can price a contract
knowing just the market.  Four constraints shape the feasible policies:

- IR-u (user rationality): the premium cannot exceed ``R*``, the loss the
  user would carry with no insurance at all.
- IC-u (user incentive): for a premium ``T``, coverage must reach
  ``s0 = T / R*`` before subscribing beats staying uninsured.
- IR-i (insurer rationality): the premium must cover the expected payout,
  ``T >= s R*``.
- F-i (insurability): coverage must exceed ``1 - 1/(gamma R*)``, below which
  the user's expected disutility diverges and no contract helps.

IC-u and IR-i squeeze every feasible policy onto the line ``T = s R*``: the
insurer's operating profit is identically zero, and its objective reduces to
the user's retained loss, minimized at full coverage.  The optimum is always
``s* = 1`` with the maximal premium ``T* = R*``, and the induced game
collapses to the no-effort equilibrium (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .game import closed_form_spe
from .model import (
    CyinsError,
    EquilibriumReport,
    InsurancePolicy,
    MarketParams,
    ParameterError,
    UserRiskProfile,
    ActionPair,
    equilibrium_report,
)

__all__ = [
    "ConstraintVerdict",
    "BgneSolution",
    "premium_cap",
    "min_coverage",
    "coverage_floor",
    "check_constraints",
    "insurer_objective",
    "solve_insurer_lp",
    "solve_bgne",
]

#: Tolerance at which a constraint counts as binding (slack at equality).
BINDING_TOL = 1e-9
#: The strict insurability constraint is closed by this epsilon inside the LP.
FEASIBILITY_EPS = 1e-9

_CONSTRAINT_NAMES = ("IR-u", "IC-u", "IR-i", "F-i")


@dataclass(frozen=True)
class ConstraintVerdict:
    """Truth values and slacks of the four policy constraints."""

    ir_user: bool
    ic_user: bool
    ir_insurer: bool
    feasibility_insurer: bool
    binding: tuple[str, ...]
    slacks: Mapping[str, float] = field(default_factory=dict)

    def all_hold(self) -> bool:
        return self.ir_user and self.ic_user and self.ir_insurer and self.feasibility_insurer


@dataclass(frozen=True)
class BgneSolution:
    """Joint solution of the policy optimum and the game it induces."""

    policy: InsurancePolicy
    actions: ActionPair
    insurer_objective: float
    user_payoff: float
    zero_profit_check: float
    report: EquilibriumReport


def premium_cap(market: MarketParams) -> float:
    """Largest premium any rational user accepts: the uninsured loss ``R*``.

    Computed with the portable log so quoted premiums are bit-identical
    across platforms and kernel backends.
    """
    return _backend.kernels().plog(
        market.protection_cost / market.attack_cost + 1.0)


def min_coverage(premium: float, market: MarketParams) -> float:
    """Least coverage at which a user subscribes for a given premium: ``T / R*``.

    Zero premium is accepted at any coverage; the maximal premium requires
    full coverage.  Raises ParameterError for premiums above the cap, where
    no coverage level suffices.
    """
    premium = float(premium)
    cap = premium_cap(market)
    if premium < 0.0:
        raise ParameterError(f"premium must be >= 0, got {premium!r}")
    if premium > cap:
        raise ParameterError(
            f"premium {premium!r} exceeds the cap {cap!r}: no coverage level suffices")
    if premium == 0.0:
        return 0.0
    return premium / cap


def coverage_floor(market: MarketParams, profile: UserRiskProfile) -> float:
    """Divergence floor of the coverage level: ``1 - 1/(gamma R*)``.

    Coverage must strictly exceed this for the user to be insurable; the
    floor is negative (vacuous) whenever ``gamma R* < 1``.
    """
    return 1.0 - 1.0 / (profile.gamma * premium_cap(market))


def check_constraints(policy: InsurancePolicy, market: MarketParams,
                      profile: UserRiskProfile) -> ConstraintVerdict:
    """Evaluate IR-u, IC-u, IR-i, and F-i for a policy, recording slacks.

    A constraint is listed as binding when its slack is within BINDING_TOL of
    zero (whether or not it holds).
    """
    rstar = premium_cap(market)
    s, premium = policy.coverage, policy.premium
    floor = coverage_floor(market, profile)
    slacks = {
        "IR-u": rstar - premium,
        "IC-u": s * rstar - premium,
        "IR-i": premium - s * rstar,
        "F-i": s - floor,
    }
    binding = tuple(name for name in _CONSTRAINT_NAMES if abs(slacks[name]) < BINDING_TOL)
    return ConstraintVerdict(
        ir_user=premium <= rstar,
        ic_user=s * rstar >= premium,
        ir_insurer=premium >= s * rstar,
        feasibility_insurer=s > floor,
        binding=binding,
        slacks=slacks,
    )


def insurer_objective(coverage: float, premium: float, market: MarketParams,
                      profile: UserRiskProfile) -> float:
    """``gamma (1-s) R* + c_s (s R* - T)``: retained loss plus weighted payout gap."""
    rstar = premium_cap(market)
    return (profile.gamma * (1.0 - coverage) * rstar
            + market.profit_weight * (coverage * rstar - premium))


def _feasible(point: tuple[float, float], halfplanes, tol: float) -> bool:
    s, premium = point
    return all(a * s + b * premium <= c + tol for a, b, c in halfplanes)


def solve_insurer_lp(market: MarketParams, profile: UserRiskProfile
                     ) -> tuple[InsurancePolicy, float]:
    """Minimize the insurer objective over the policy polytope.

    Two variables and at most seven half-planes make vertex enumeration exact
    and dependency-free: intersect every boundary pair, keep the feasible
    intersections, and take the best objective value, breaking ties toward
    larger coverage and then larger premium.  The strict insurability floor
    is closed by FEASIBILITY_EPS.  The winning vertex is snapped onto its
    active constraints so the optimum ``(1, R*)`` is returned exactly.
    """
    rstar = premium_cap(market)
    floor = coverage_floor(market, profile)
    # (a, b, c) encodes a*s + b*T <= c
    halfplanes = [
        (-1.0, 0.0, 0.0),            # s >= 0
        (1.0, 0.0, 1.0),             # s <= 1
        (0.0, -1.0, 0.0),            # T >= 0
        (0.0, 1.0, rstar),           # IR-u: T <= R*
        (-rstar, 1.0, 0.0),          # IC-u: T <= s R*
        (rstar, -1.0, 0.0),          # IR-i: T >= s R*
        (-1.0, 0.0, -(floor + FEASIBILITY_EPS)),  # F-i, closed
    ]
    tol = BINDING_TOL * max(1.0, rstar)
    candidates: list[tuple[float, float]] = []
    for i in range(len(halfplanes)):
        a1, b1, c1 = halfplanes[i]
        for j in range(i + 1, len(halfplanes)):
            a2, b2, c2 = halfplanes[j]
            det = a1 * b2 - a2 * b1
            if abs(det) < 1e-14:
                continue
            s = (c1 * b2 - c2 * b1) / det
            premium = (a1 * c2 - a2 * c1) / det
            if _feasible((s, premium), halfplanes, tol):
                candidates.append((s, premium))
    if not candidates:
        raise CyinsError("empty policy polytope; cannot happen for valid parameters")

    def objective(point):
        return insurer_objective(point[0], point[1], market, profile)

    best = candidates[0]
    best_val = objective(best)
    for point in candidates[1:]:
        val = objective(point)
        if val < best_val - 1e-12 or (abs(val - best_val) <= 1e-12 and point > best):
            best, best_val = point, val

    s, premium = best
    # Snap onto the active constraints; removes the last-ulp noise that
    # different boundary pairs leave on the same geometric vertex.
    if abs(s - 1.0) <= tol:
        s = 1.0
    elif abs(s) <= tol:
        s = 0.0
    if abs(premium - s * rstar) <= tol:
        premium = s * rstar
    premium = min(max(premium, 0.0), rstar)
    policy = InsurancePolicy(coverage=s, premium=premium)
    return policy, insurer_objective(s, premium, market, profile)


def solve_bgne(market: MarketParams, profile: UserRiskProfile) -> BgneSolution:
    """Optimal policy plus the saddle point it induces, with loss accounting.

    The composition is internally checked against its known shape: full
    coverage, maximal premium, no-effort actions, and zero operating profit.
    """
    policy, objective = solve_insurer_lp(market, profile)
    spe = closed_form_spe(profile, policy.coverage, market)
    rstar = premium_cap(market)
    if policy.coverage != 1.0 or policy.premium != rstar or \
            spe.actions != ActionPair(0.0, 0.0):
        raise CyinsError(
            f"bilevel composition produced an unexpected solution: policy {policy}, "
            f"actions {spe.actions}")
    report = equilibrium_report(spe.actions, policy, profile, market,
                                interior=spe.interior)
    return BgneSolution(
        policy=policy,
        actions=spe.actions,
        insurer_objective=objective,
        user_payoff=spe.payoff,
        zero_profit_check=policy.premium - policy.coverage * rstar,
        report=report,
    )
