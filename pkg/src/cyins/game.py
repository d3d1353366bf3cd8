"""Saddle points of the constrained protection-vs-attack game.

The user minimizes and the attacker maximizes the payoff
``K = gamma (1-s) R + c_u p_u - c_a p_a`` over the coupled feasible set where
the margin ``1 - gamma (1-s) R`` stays positive.  With
``t = gamma (1 - s)``, the game has a unique saddle point in closed form
whenever the insurability margin ``1 - t ln(c_u/c_a + 1)`` is positive:

    p_u* = t / (c_u + c_a)          p_a* = c_u t / (c_a (c_u + c_a))

The action ratio ``p_a*/p_u* = c_u/c_a`` and the induced risk
``R* = ln(c_u/c_a + 1)`` depend only on the two effort prices, not on the
coverage level; higher coverage scales both actions down (the Peltzman
effect, in insurance terms).  The closed form is validated here by two
independent numerical routes: damped best-response iteration and a minimax
scan over a dense action grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .model import (
    ActionPair,
    ConvergenceError,
    MarketParams,
    NotInsurableError,
    ParameterError,
    UserRiskProfile,
    risk_level,
    zero_sum_payoff,
)

__all__ = [
    "SpeDiagnostics",
    "SpeSolution",
    "attacker_best_response",
    "user_best_response",
    "insurability_margin",
    "insurable_protection_cost_limit",
    "insurable_protection_cost_limit_alt",
    "min_protection_vs_best_attack",
    "min_protection_vs_best_attack_alt",
    "closed_form_spe",
    "numerical_spe",
    "verify_saddle_inequality",
]

#: Action grids live on [GRID_EPS, 1]: the payoff is singular at zero
#: protection, and the excluded sliver is infeasible for any relevant weight.
GRID_EPS = 1e-6
DEFAULT_RESOLUTION = 2001
DEFAULT_DAMPING = 0.5
DEFAULT_ITERATION_CAP = 10_000
DEFAULT_TOLERANCE = 1e-10
_DAMPING_RESTARTS = 8
#: Iterates this close to 0 or 1 count as boundary solutions, not interior.
_BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class SpeDiagnostics:
    """Solution diagnostics: action ratio, induced risk, solver telemetry."""

    ratio: float
    risk: float
    raw_protection: float | None = None
    raw_attack: float | None = None
    damping_used: float | None = None
    iterations: int | None = None
    grid_gap: float | None = None


@dataclass(frozen=True)
class SpeSolution:
    """A (candidate) saddle point of the zero-sum game under a coverage level."""

    actions: ActionPair
    payoff: float
    feasible: bool
    interior: bool
    diagnostics: SpeDiagnostics


def _weight(profile: UserRiskProfile, coverage: float) -> float:
    return profile.gamma * (1.0 - coverage)


def attacker_best_response(protection: float, profile: UserRiskProfile,
                           coverage: float, market: MarketParams) -> float:
    """Attack level maximizing the payoff against a fixed protection level.

    The unclamped maximizer is ``gamma (1-s)/c_a - p_u``; the result is
    clamped to [0, 1].
    """
    raw = _weight(profile, coverage) / market.attack_cost - protection
    return min(max(raw, 0.0), 1.0)


def user_best_response(attack: float, profile: UserRiskProfile,
                       coverage: float, market: MarketParams) -> float:
    """Protection level minimizing the payoff against a fixed attack level.

    The first-order condition in the protection level is the quadratic
    ``c_u p_u**2 + c_u p_a p_u - gamma (1-s) p_a = 0``; the positive root,
    clamped to [0, 1], is returned.  No attack (or full coverage) makes
    protection pointless and returns 0.
    """
    if attack <= 0.0:
        return 0.0
    t = _weight(profile, coverage)
    if t == 0.0:
        return 0.0
    cu = market.protection_cost
    disc = cu * cu * attack * attack + 4.0 * cu * t * attack
    root = (-cu * attack + math.sqrt(disc)) / (2.0 * cu)
    return min(max(root, 0.0), 1.0)


def insurability_margin(profile: UserRiskProfile, coverage: float,
                        market: MarketParams) -> float:
    """``1 - gamma (1-s) ln(c_u/c_a + 1)``: positive iff a saddle point exists."""
    rstar = _backend.kernels().plog(
        market.protection_cost / market.attack_cost + 1.0)
    return 1.0 - _weight(profile, coverage) * rstar


def insurable_protection_cost_limit(profile: UserRiskProfile, coverage: float,
                                    market: MarketParams) -> float:
    """Largest protection cost keeping the game insurable: ``c_a (e**(1/t) - 1)``.

    Exact: ``c_u`` below this limit is equivalent to a positive insurability
    margin.  Infinite at full coverage, where every market is insurable.
    """
    t = _weight(profile, coverage)
    if t == 0.0:
        return math.inf
    return market.attack_cost * math.expm1(1.0 / t)


def insurable_protection_cost_limit_alt(profile: UserRiskProfile, coverage: float,
                                        market: MarketParams) -> float:
    """Alternate closed form ``c_a (1 - e**-t)`` for the protection-cost limit.

    Kept for comparison only: it is not equivalent to the margin condition.
    It under-counts insurable markets for small ``t`` and over-counts them for
    large ``t`` (the tests exhibit concrete counterexamples on both sides);
    use :func:`insurable_protection_cost_limit` for decisions.
    """
    t = _weight(profile, coverage)
    return market.attack_cost * -math.expm1(-t)


def min_protection_vs_best_attack(profile: UserRiskProfile, coverage: float,
                                  market: MarketParams) -> float:
    """Smallest protection level that stays feasible against the best attack.

    Substituting the attacker's unclamped best response into the feasibility
    margin gives ``p_u > (t/c_a) e**(-1/t)`` with ``t = gamma (1-s)``; returns
    that threshold (0 at full coverage).
    """
    t = _weight(profile, coverage)
    if t == 0.0:
        return 0.0
    return (t / market.attack_cost) * math.exp(-1.0 / t)


def min_protection_vs_best_attack_alt(profile: UserRiskProfile, coverage: float,
                                      market: MarketParams) -> float:
    """Alternate threshold ``(t/c_a) e**t``.

    Strictly larger than :func:`min_protection_vs_best_attack`, so it is
    sufficient but far from necessary; for moderate ``t`` it exceeds 1 and
    would declare every protection level infeasible.  Kept for comparison
    only (see the counterexample tests).
    """
    t = _weight(profile, coverage)
    return (t / market.attack_cost) * math.exp(t)


def closed_form_spe(profile: UserRiskProfile, coverage: float,
                    market: MarketParams) -> SpeSolution:
    """The closed-form saddle point; flagged rather than raising on failure.

    ``feasible`` is False when the insurability margin is not positive (no
    saddle point exists; the returned actions are the clamped formula values
    and the payoff is infinite).  ``interior`` is False when the formula
    leaves the open square (0, 1)^2; if a formula value exceeds 1 the closed
    form is invalid there and :func:`numerical_spe` is the authoritative
    answer for the clamped game.
    """
    cu, ca = market.protection_cost, market.attack_cost
    t = _weight(profile, coverage)
    raw_pu = t / (cu + ca)
    raw_pa = cu * t / (ca * (cu + ca))
    ratio = raw_pa / raw_pu if raw_pu > 0.0 else math.nan
    actions = ActionPair(min(raw_pu, 1.0), min(raw_pa, 1.0))
    feasible = insurability_margin(profile, coverage, market) > 0.0
    interior = feasible and 0.0 < raw_pu < 1.0 and 0.0 < raw_pa < 1.0
    if feasible:
        payoff = zero_sum_payoff(actions, profile, coverage, market)
        risk = risk_level(actions)
    else:
        payoff = math.inf
        risk = math.inf
    diagnostics = SpeDiagnostics(ratio=ratio, risk=risk,
                                 raw_protection=raw_pu, raw_attack=raw_pa)
    return SpeSolution(actions, payoff, feasible, interior, diagnostics)


def _action_grid(resolution: int) -> np.ndarray:
    return np.linspace(GRID_EPS, 1.0, resolution)


def _grid_saddle(profile: UserRiskProfile, coverage: float, market: MarketParams,
                 resolution: int) -> tuple[float, float, float]:
    """Grid minimax: returns (protection, attack, minimax - maximin gap).

    For each grid attack level the payoff is minimized over grid protection
    levels; the attacker's value is the max of those minima.  The dual sweep
    gives the min over rows of per-row maxima; the two coincide at a saddle
    up to grid resolution.  Ties resolve to the lowest grid index.
    """
    grid = _action_grid(resolution)
    t = _weight(profile, coverage)
    col_min, col_arg, row_max, row_arg = _backend.kernels().saddle_scan(
        grid, grid, t, market.protection_cost, market.attack_cost)
    playable_cols = np.isfinite(col_min)
    if not playable_cols.any():
        raise NotInsurableError("no feasible action pair on the grid")
    maximin_j = int(np.argmax(np.where(playable_cols, col_min, -np.inf)))
    maximin = float(col_min[maximin_j])
    minimax_i = int(np.argmin(np.where(np.isfinite(row_max), row_max, np.inf)))
    minimax = float(row_max[minimax_i])
    best_i = int(col_arg[maximin_j])
    return float(grid[best_i]), float(grid[maximin_j]), minimax - maximin


def numerical_spe(profile: UserRiskProfile, coverage: float, market: MarketParams,
                  resolution: int = DEFAULT_RESOLUTION,
                  damping: float = DEFAULT_DAMPING,
                  *, iteration_cap: int = DEFAULT_ITERATION_CAP,
                  tolerance: float = DEFAULT_TOLERANCE,
                  gap_tol: float | None = None) -> SpeSolution:
    """Numerical saddle point: damped best-response iteration plus grid check.

    From (0.5, 0.5), iterates ``p <- (1-a) p + a BR(p)`` with both clamped
    best responses until the sup-norm step falls below ``tolerance``.  Cost
    ratios far from 1 make the fixed-damping map locally expansive, so on
    failure the iteration restarts with the damping halved (up to 8 times)
    before signalling ConvergenceError with the last iterate.  The fixed
    point is then validated against an independent grid minimax: the scan's
    maximin/minimax gap and saddle location must agree with the iterate to
    grid accuracy, else ConvergenceError.

    Raises NotInsurableError when the insurability margin is not positive.
    """
    if insurability_margin(profile, coverage, market) <= 0.0:
        raise NotInsurableError(
            "no saddle point: the insurability margin is not positive for "
            f"coverage {coverage}")
    alpha = damping
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"damping must be in (0, 1], got {damping!r}")
    pu = pa = 0.5
    converged = False
    iterations = 0
    for _ in range(_DAMPING_RESTARTS + 1):
        pu, pa = 0.5, 0.5
        for it in range(1, iteration_cap + 1):
            bu = user_best_response(pa, profile, coverage, market)
            ba = attacker_best_response(pu, profile, coverage, market)
            nxt_u = (1.0 - alpha) * pu + alpha * bu
            nxt_a = (1.0 - alpha) * pa + alpha * ba
            step = max(abs(nxt_u - pu), abs(nxt_a - pa))
            pu, pa = nxt_u, nxt_a
            if step < tolerance:
                converged = True
                iterations = it
                break
        if converged:
            break
        alpha *= 0.5
    if not converged:
        raise ConvergenceError(
            f"best-response iteration did not converge within {iteration_cap} "
            f"iterations down to damping {alpha * 2:.4g}", last_iterate=(pu, pa))

    grid_pu, grid_pa, gap = _grid_saddle(profile, coverage, market, resolution)
    step_size = (1.0 - GRID_EPS) / (resolution - 1)
    if gap_tol is None:
        gap_tol = 10.0 * step_size * (1.0 + market.protection_cost + market.attack_cost
                                      + _weight(profile, coverage))
    if gap > gap_tol or abs(grid_pu - pu) > 5.0 * step_size or abs(grid_pa - pa) > 5.0 * step_size:
        raise ConvergenceError(
            f"grid minimax disagrees with the best-response fixed point: "
            f"gap {gap:.3g} (tol {gap_tol:.3g}), grid saddle ({grid_pu:.6f}, {grid_pa:.6f}) "
            f"vs iterate ({pu:.6f}, {pa:.6f})", last_iterate=(pu, pa))

    actions = ActionPair(pu, pa)
    diagnostics = SpeDiagnostics(
        ratio=pa / pu if pu > 0.0 else math.nan,
        risk=risk_level(actions),
        damping_used=alpha,
        iterations=iterations,
        grid_gap=gap,
    )
    payoff = zero_sum_payoff(actions, profile, coverage, market)
    interior = (_BOUNDARY_TOL < pu < 1.0 - _BOUNDARY_TOL
                and _BOUNDARY_TOL < pa < 1.0 - _BOUNDARY_TOL)
    return SpeSolution(actions, payoff, True, interior, diagnostics)


def verify_saddle_inequality(candidate: ActionPair, profile: UserRiskProfile,
                             coverage: float, market: MarketParams,
                             resolution: int = DEFAULT_RESOLUTION,
                             tol: float = 1e-9) -> bool:
    """Check the saddle inequalities against all feasible grid deviations.

    True iff no feasible attacker deviation beats the candidate payoff by
    more than ``tol`` and no feasible user deviation undercuts it by more
    than ``tol``;  infeasible deviations (infinite payoff for the user side,
    excluded for the attacker side) do not count.
    """
    value = zero_sum_payoff(candidate, profile, coverage, market)
    if math.isinf(value):
        return False
    grid = _action_grid(resolution)
    for pa in grid:
        k = zero_sum_payoff(ActionPair(candidate.protection, float(pa)),
                            profile, coverage, market)
        if math.isfinite(k) and k > value + tol:
            return False
    for pu in grid:
        k = zero_sum_payoff(ActionPair(float(pu), candidate.attack),
                            profile, coverage, market)
        if k < value - tol:  # +inf never trips this
            return False
    return True
