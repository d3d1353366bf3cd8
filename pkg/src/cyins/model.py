"""Core types and primitives of the attack-aware cyber-insurance model.

The model couples three quantities:

- An action pair: the user's protection level ``p_u`` and the attacker's
  effort ``p_a``, both in ``[0, 1]``.
- The induced risk level ``R = ln(p_a / p_u + 1)``, which is the mean of the
  user's monetary loss ``X``.  ``X`` is exponentially distributed with mean
  ``R``; a linear policy reimburses ``s * X``, so the retained loss is
  ``xi = (1 - s) X``.
- A risk-averse user who scores retained loss through ``exp(gamma * xi)``
  with ``gamma > 0``.

The disutility ``E[exp(gamma * xi)]`` has the closed form
``1 / (1 - gamma * (1 - s) * R)`` whenever the feasibility margin
``1 - gamma * (1 - s) * R`` is positive.  When the margin is not positive the
expectation diverges: no linear contract can mitigate the loss, and the
affected operations return ``math.inf`` rather than raising.  Divergence is a
modeled outcome of this model, not an error condition.

All functions here are pure; they hold no state and are safe to call from any
number of threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _backend

__all__ = [
    "CyinsError",
    "ParameterError",
    "UnboundedRiskError",
    "NotInsurableError",
    "ConvergenceError",
    "MarketParams",
    "UserRiskProfile",
    "InsurancePolicy",
    "ActionPair",
    "EquilibriumReport",
    "NEAR_BOUNDARY_TOL",
    "risk_level",
    "loss_density",
    "expected_loss_factor",
    "feasibility_margin",
    "near_boundary",
    "zero_sum_payoff",
    "equilibrium_report",
]

#: Margins in (0, NEAR_BOUNDARY_TOL) are feasible but numerically on the edge
#: of the divergence boundary; reports carry an advisory flag for them.
NEAR_BOUNDARY_TOL = 1e-9


class CyinsError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(CyinsError, ValueError):
    """An input violates its domain (construction or call preconditions)."""


class UnboundedRiskError(CyinsError, ValueError):
    """Risk is unbounded: zero protection against a positive attack level."""


class NotInsurableError(CyinsError):
    """No equilibrium with finite expected disutility exists for these inputs."""


class ConvergenceError(CyinsError, RuntimeError):
    """An iterative solver failed to converge; carries the last iterate."""

    def __init__(self, message: str, last_iterate: tuple[float, float] | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate


def _checked(value, name: str, *, low=None, high=None, low_open=False) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    if low is not None:
        if low_open and not value > low:
            raise ParameterError(f"{name} must be > {low}, got {value!r}")
        if not low_open and not value >= low:
            raise ParameterError(f"{name} must be >= {low}, got {value!r}")
    if high is not None and not value <= high:
        raise ParameterError(f"{name} must be <= {high}, got {value!r}")
    return value


@dataclass(frozen=True)
class MarketParams:
    """Market prices of effort plus the insurer's objective weight.

    protection_cost and attack_cost are the per-unit prices of the user's
    protection effort and of mounting an attack.  profit_weight scales the
    operating-profit term in the insurer's objective against the user-safety
    term.
    """

    protection_cost: float
    attack_cost: float
    profit_weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "protection_cost",
                           _checked(self.protection_cost, "protection_cost", low=0.0, low_open=True))
        object.__setattr__(self, "attack_cost",
                           _checked(self.attack_cost, "attack_cost", low=0.0, low_open=True))
        object.__setattr__(self, "profit_weight",
                           _checked(self.profit_weight, "profit_weight", low=0.0))


@dataclass(frozen=True)
class UserRiskProfile:
    """Risk aversion of the user: retained loss xi is scored as exp(gamma * xi)."""

    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _checked(self.gamma, "gamma", low=0.0, low_open=True))


@dataclass(frozen=True)
class InsurancePolicy:
    """A linear contract: coverage fraction s in [0, 1] and premium T >= 0."""

    coverage: float
    premium: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coverage", _checked(self.coverage, "coverage", low=0.0, high=1.0))
        object.__setattr__(self, "premium", _checked(self.premium, "premium", low=0.0))


@dataclass(frozen=True)
class ActionPair:
    """The user's protection level and the attacker's effort, both in [0, 1]."""

    protection: float
    attack: float

    def __post_init__(self):
        object.__setattr__(self, "protection", _checked(self.protection, "protection", low=0.0, high=1.0))
        object.__setattr__(self, "attack", _checked(self.attack, "attack", low=0.0, high=1.0))


def risk_level(actions: ActionPair) -> float:
    """Mean loss induced by an action pair: ``ln(attack / protection + 1)``.

    The risk is strictly decreasing (and convex) in protection and strictly
    increasing (and concave) in attack.  Zero attack carries zero risk, and
    the no-effort pair (0, 0) is assigned risk 0 by convention so that the
    all-zero equilibrium has finite loss accounting.

    Computed with the portable log so that reported risks are bit-identical
    across platforms and kernel backends, not just across runs.

    Raises UnboundedRiskError for zero protection against a positive attack;
    callers probing the uninsurable regime must handle that case explicitly.
    """
    if actions.attack == 0.0:
        return 0.0
    if actions.protection == 0.0:
        raise UnboundedRiskError(
            f"risk is unbounded at protection=0 with attack={actions.attack}")
    return _backend.kernels().plog(actions.attack / actions.protection + 1.0)


def loss_density(x: float, actions: ActionPair) -> float:
    """Density ``(1/R) exp(-x/R)`` of the loss distribution at ``x >= 0``.

    Raises ParameterError when the risk level is zero: the loss is then a
    point mass at 0 and has no density (expectations of it are handled
    directly by the callers).
    """
    x = _checked(x, "x", low=0.0)
    risk = risk_level(actions)
    if risk == 0.0:
        raise ParameterError("zero risk level: the loss is a point mass at 0, not a density")
    return math.exp(-x / risk) / risk


def expected_loss_factor(risk: float, profile: UserRiskProfile, coverage: float) -> float:
    """Expected disutility ``E[exp(gamma (1-s) X)]`` for X exponential with mean risk.

    Returns the closed form ``1 / (1 - gamma (1-s) risk)`` when the margin is
    positive, and ``math.inf`` when the expectation diverges (the uninsurable
    regime).  The infinity is a first-class result, never an exception.
    """
    risk = _checked(risk, "risk", low=0.0)
    coverage = _checked(coverage, "coverage", low=0.0, high=1.0)
    margin = 1.0 - profile.gamma * (1.0 - coverage) * risk
    if margin <= 0.0:
        return math.inf
    return 1.0 / margin


def feasibility_margin(actions: ActionPair, profile: UserRiskProfile, coverage: float) -> float:
    """``1 - gamma (1-s) r(actions)``; strictly positive exactly on the insurable set.

    At full coverage the retained loss is identically zero, so the margin is 1
    regardless of the actions, even where the risk level itself is unbounded.
    For partial coverage a zero-protection/positive-attack pair propagates
    UnboundedRiskError from risk_level.
    """
    coverage = _checked(coverage, "coverage", low=0.0, high=1.0)
    weight = profile.gamma * (1.0 - coverage)
    if weight == 0.0:
        return 1.0
    return 1.0 - weight * risk_level(actions)


def near_boundary(margin: float) -> bool:
    """Advisory flag: feasible but within NEAR_BOUNDARY_TOL of divergence."""
    return 0.0 < margin < NEAR_BOUNDARY_TOL


def zero_sum_payoff(actions: ActionPair, profile: UserRiskProfile, coverage: float,
                    market: MarketParams) -> float:
    """Objective of the protection-vs-attack game, or ``math.inf`` when infeasible.

    On the feasible set this is ``gamma (1-s) R + c_u p_u - c_a p_a``: the log
    of the expected disutility plus the players' effort costs.  The user
    minimizes it, the attacker maximizes it.  Outside the feasible set the
    disutility diverges and the payoff is taken to be an infinite cost.
    """
    coverage = _checked(coverage, "coverage", low=0.0, high=1.0)
    cost = market.protection_cost * actions.protection - market.attack_cost * actions.attack
    weight = profile.gamma * (1.0 - coverage)
    if weight == 0.0:
        return cost
    if actions.protection == 0.0 and actions.attack > 0.0:
        return math.inf  # unbounded risk: infeasible for any positive weight
    risk = risk_level(actions)
    if 1.0 - weight * risk <= 0.0:
        return math.inf
    return weight * risk + cost


@dataclass(frozen=True)
class EquilibriumReport:
    """Loss accounting at an equilibrium of the game under a given policy.

    The exponential loss model makes the direct loss equal the risk level;
    effective loss and payout are the (1-s)- and s-fractions of it.
    """

    actions: ActionPair
    risk: float
    expected_direct_loss: float
    expected_effective_loss: float
    expected_payout: float
    policy: InsurancePolicy
    feasible: bool
    interior: bool
    near_boundary: bool = False
    payoff: float = math.nan


def equilibrium_report(actions: ActionPair, policy: InsurancePolicy,
                       profile: UserRiskProfile, market: MarketParams,
                       *, interior: bool) -> EquilibriumReport:
    """Assemble the loss accounting for an action pair under a policy."""
    risk = risk_level(actions)
    margin = feasibility_margin(actions, profile, policy.coverage)
    return EquilibriumReport(
        actions=actions,
        risk=risk,
        expected_direct_loss=risk,
        expected_effective_loss=(1.0 - policy.coverage) * risk,
        expected_payout=policy.coverage * risk,
        policy=policy,
        feasible=margin > 0.0,
        interior=interior,
        near_boundary=near_boundary(margin),
        payoff=zero_sum_payoff(actions, profile, policy.coverage, market),
    )
