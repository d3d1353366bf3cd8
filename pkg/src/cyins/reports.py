"""Report payloads and their table / JSON / CSV renderings.

Every command builds a plain dict payload first; the renderers turn it into
one of the output formats.  JSON keeps floats at full precision (``repr``
round trip), so an emitted report parses back bit-exactly; tables and CSV
format numbers to 9 significant digits with a locale-independent decimal
point, which keeps golden files stable.

The sweep CSV schema is frozen::

    value,p_u_star,p_a_star,ratio,risk_star,expected_effective_loss,s_star,t_star,feasible

one row per swept value, LF line endings, no quoting.  Infeasible steps leave
the five equilibrium columns blank and set ``feasible`` to ``false``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from . import contract, game, mc
from .model import (
    ActionPair,
    EquilibriumReport,
    InsurancePolicy,
    MarketParams,
    ParameterError,
    UserRiskProfile,
    equilibrium_report,
)
from .scenario import Scenario, ScenarioError, scenario_to_dict

__all__ = [
    "fmt9",
    "run_spe",
    "run_policy",
    "run_bgne",
    "run_simulate",
    "SweepRow",
    "sweep_rows",
    "run_sweep",
    "SWEEP_HEADER",
    "SWEEP_PARAMETERS",
    "report_to_dict",
    "report_from_dict",
    "render",
]

SWEEP_HEADER = ("value,p_u_star,p_a_star,ratio,risk_star,"
                "expected_effective_loss,s_star,t_star,feasible")
SWEEP_PARAMETERS = ("s", "gamma", "cu", "ca", "cs")


def fmt9(value) -> str:
    """Format one cell: 9 significant digits for floats, blank for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".9g")
    return str(value)


def report_to_dict(report: EquilibriumReport) -> dict:
    return {
        "p_u": report.actions.protection,
        "p_a": report.actions.attack,
        "risk": report.risk,
        "expected_direct_loss": report.expected_direct_loss,
        "expected_effective_loss": report.expected_effective_loss,
        "expected_payout": report.expected_payout,
        "policy": {"s": report.policy.coverage, "t": report.policy.premium},
        "payoff": report.payoff,
        "feasible": report.feasible,
        "interior": report.interior,
        "near_boundary": report.near_boundary,
    }


def report_from_dict(data: Mapping[str, Any]) -> EquilibriumReport:
    return EquilibriumReport(
        actions=ActionPair(data["p_u"], data["p_a"]),
        risk=data["risk"],
        expected_direct_loss=data["expected_direct_loss"],
        expected_effective_loss=data["expected_effective_loss"],
        expected_payout=data["expected_payout"],
        policy=InsurancePolicy(data["policy"]["s"], data["policy"]["t"]),
        feasible=data["feasible"],
        interior=data["interior"],
        near_boundary=data["near_boundary"],
        payoff=data["payoff"],
    )


def _policy_of(scenario: Scenario) -> InsurancePolicy:
    return scenario.policy if scenario.policy is not None else InsurancePolicy(0.0, 0.0)


def run_spe(scenario: Scenario) -> dict:
    """Equilibrium report payload; ``insurable: False`` when no SPE exists.

    The closed form is authoritative on the interior; if it leaves [0, 1] the
    clamped game's equilibrium comes from the numerical solver instead and
    the payload says so in ``method``.
    """
    policy = _policy_of(scenario)
    solution = game.closed_form_spe(scenario.profile, policy.coverage, scenario.market)
    payload: dict[str, Any] = {"command": "spe", "scenario": scenario_to_dict(scenario)}
    if not solution.feasible:
        payload["insurable"] = False
        payload["margin"] = game.insurability_margin(
            scenario.profile, policy.coverage, scenario.market)
        return payload
    method = "closed-form"
    diag = solution.diagnostics
    if (diag.raw_protection is not None and diag.raw_protection > 1.0) or \
            (diag.raw_attack is not None and diag.raw_attack > 1.0):
        solution = game.numerical_spe(scenario.profile, policy.coverage, scenario.market)
        method = "grid-validated-iteration"
    report = equilibrium_report(solution.actions, policy, scenario.profile,
                                scenario.market, interior=solution.interior)
    payload["insurable"] = True
    payload["equilibrium"] = report_to_dict(report)
    payload["equilibrium"]["ratio"] = solution.diagnostics.ratio
    payload["method"] = method
    return payload


def run_policy(scenario: Scenario) -> dict:
    """Optimal-policy payload: (s*, T*), objective, binding constraints."""
    policy, objective = contract.solve_insurer_lp(scenario.market, scenario.profile)
    verdict = contract.check_constraints(policy, scenario.market, scenario.profile)
    return {
        "command": "policy",
        "scenario": scenario_to_dict(scenario),
        "policy": {
            "s_star": policy.coverage,
            "t_star": policy.premium,
            "objective": objective,
            "premium_cap": contract.premium_cap(scenario.market),
            "zero_profit": policy.premium - policy.coverage * contract.premium_cap(scenario.market),
            "binding": list(verdict.binding),
        },
    }


def run_bgne(scenario: Scenario) -> dict:
    """Full bilevel payload: policy, induced actions, accounting, checks."""
    solution = contract.solve_bgne(scenario.market, scenario.profile)
    return {
        "command": "bgne",
        "scenario": scenario_to_dict(scenario),
        "policy": {"s_star": solution.policy.coverage, "t_star": solution.policy.premium},
        "insurer_objective": solution.insurer_objective,
        "user_payoff": solution.user_payoff,
        "zero_profit_check": solution.zero_profit_check,
        "equilibrium": report_to_dict(solution.report),
    }


def run_simulate(scenario: Scenario) -> dict:
    """Monte Carlo vs analytic payload, or a divergence probe when uninsurable.

    In the insurable regime: one row per quantity (direct loss, retained
    loss, payout, loss factor) comparing the analytic equilibrium value with
    the empirical estimate and its CI; ``within_ci`` applies the coverage
    rule.  Variance advisories from the estimator are surfaced verbatim.
    """
    policy = _policy_of(scenario)
    coverage = policy.coverage
    profile, market, sim = scenario.profile, scenario.market, scenario.sim
    rstar = contract.premium_cap(market)
    weight = profile.gamma * (1.0 - coverage)
    payload: dict[str, Any] = {"command": "simulate", "scenario": scenario_to_dict(scenario)}
    if weight * rstar >= 1.0:
        probe = mc.divergence_probe(rstar, profile, coverage, sim)
        payload["mode"] = "divergence-probe"
        payload["insurable"] = False
        payload["stages"] = list(probe.stages)
        payload["estimates"] = list(probe.estimates)
        payload["growth_factor"] = probe.growth_factor
        payload["growing"] = probe.growing
        return payload

    direct, effective, payout = mc.estimate_loss_accounting(rstar, coverage, sim)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", mc.VarianceUnboundedWarning)
        factor = mc.estimate_loss_factor(rstar, profile, coverage, sim)
    advisories = [str(w.message) for w in caught
                  if issubclass(w.category, mc.VarianceUnboundedWarning)]

    def row(name: str, analytic: float, est: mc.EstimateWithCI) -> dict:
        return {
            "quantity": name,
            "analytic": analytic,
            "estimate": est.point,
            "half_width": est.half_width,
            "within_ci": abs(analytic - est.point) <= est.half_width,
        }

    payload["mode"] = "estimate"
    payload["insurable"] = True
    payload["rows"] = [
        row("direct_loss", rstar, direct),
        row("effective_loss", (1.0 - coverage) * rstar, effective),
        row("insurer_payout", coverage * rstar, payout),
        row("loss_factor", 1.0 / (1.0 - weight * rstar), factor),
    ]
    payload["loss_factor_regime"] = factor.regime
    payload["advisories"] = advisories
    return payload


@dataclass(frozen=True)
class SweepRow:
    """One step of a parameter sweep; equilibrium fields are None when infeasible."""

    value: float
    feasible: bool
    p_u: float | None
    p_a: float | None
    ratio: float | None
    risk: float | None
    effective_loss: float | None
    s_star: float
    t_star: float


def sweep_rows(scenario: Scenario, parameter: str, start: float, stop: float,
               steps: int) -> list[SweepRow]:
    """Closed-form equilibrium and policy optimum along one swept parameter."""
    if parameter not in SWEEP_PARAMETERS:
        raise ScenarioError(
            f"unknown sweep parameter '{parameter}'; choose from {SWEEP_PARAMETERS}")
    if steps < 2:
        raise ScenarioError(f"steps must be >= 2, got {steps}")
    rows = []
    for value in np.linspace(float(start), float(stop), int(steps)):
        value = float(value)
        market, profile = scenario.market, scenario.profile
        coverage = scenario.coverage
        try:
            if parameter == "s":
                coverage = value
                InsurancePolicy(coverage)  # domain check
            elif parameter == "gamma":
                profile = UserRiskProfile(value)
            elif parameter == "cu":
                market = MarketParams(value, market.attack_cost, market.profit_weight)
            elif parameter == "ca":
                market = MarketParams(market.protection_cost, value, market.profit_weight)
            else:
                market = MarketParams(market.protection_cost, market.attack_cost, value)
        except ParameterError as exc:
            raise ScenarioError(f"sweep value {value!r} out of domain for '{parameter}': {exc}") from exc
        policy, _ = contract.solve_insurer_lp(market, profile)
        spe = game.closed_form_spe(profile, coverage, market)
        if spe.feasible:
            rows.append(SweepRow(
                value=value, feasible=True,
                p_u=spe.actions.protection, p_a=spe.actions.attack,
                ratio=spe.diagnostics.ratio, risk=spe.diagnostics.risk,
                effective_loss=(1.0 - coverage) * spe.diagnostics.risk,
                s_star=policy.coverage, t_star=policy.premium))
        else:
            rows.append(SweepRow(
                value=value, feasible=False,
                p_u=None, p_a=None, ratio=None, risk=None, effective_loss=None,
                s_star=policy.coverage, t_star=policy.premium))
    return rows


def run_sweep(scenario: Scenario, parameter: str, start: float, stop: float,
              steps: int) -> dict:
    rows = sweep_rows(scenario, parameter, start, stop, steps)
    return {
        "command": "sweep",
        "scenario": scenario_to_dict(scenario),
        "parameter": parameter,
        "rows": [
            {"value": r.value, "p_u_star": r.p_u, "p_a_star": r.p_a, "ratio": r.ratio,
             "risk_star": r.risk, "expected_effective_loss": r.effective_loss,
             "s_star": r.s_star, "t_star": r.t_star, "feasible": r.feasible}
            for r in rows
        ],
    }


# --- rendering -------------------------------------------------------------

def _flatten(prefix: str, value, pairs: list[tuple[str, str]]) -> None:
    if isinstance(value, Mapping):
        for key, sub in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), sub, pairs)
    elif isinstance(value, (list, tuple)):
        pairs.append((prefix, " ".join(fmt9(v) for v in value)))
    else:
        pairs.append((prefix, fmt9(value)))


def _render_pairs(payload: Mapping) -> str:
    pairs: list[tuple[str, str]] = []
    _flatten("", payload, pairs)
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in pairs)


def _columns(header: tuple[str, ...], rows: list[dict]) -> str:
    cells = [list(header)] + [[fmt9(row[c]) for c in header] for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() + "\n"
                   for line in cells)


def _render_table(payload: Mapping) -> str:
    if payload.get("command") == "sweep":
        return _columns(_SWEEP_COLUMNS, payload["rows"])
    if payload.get("command") == "simulate" and payload.get("mode") == "estimate":
        head = dict(payload)
        rows = head.pop("rows")
        return _render_pairs(head) + _columns(
            ("quantity", "analytic", "estimate", "half_width", "within_ci"), rows)
    return _render_pairs(payload)


_SWEEP_COLUMNS = ("value", "p_u_star", "p_a_star", "ratio", "risk_star",
                  "expected_effective_loss", "s_star", "t_star", "feasible")


def _render_csv(payload: Mapping) -> str:
    if payload.get("command") == "sweep":
        lines = [SWEEP_HEADER]
        for row in payload["rows"]:
            lines.append(",".join(fmt9(row[col]) for col in _SWEEP_COLUMNS))
        return "\n".join(lines) + "\n"
    if payload.get("command") == "simulate":
        if payload.get("mode") == "estimate":
            lines = ["quantity,analytic,estimate,half_width,within_ci"]
            for row in payload["rows"]:
                lines.append(",".join(fmt9(row[c]) for c in
                                      ("quantity", "analytic", "estimate",
                                       "half_width", "within_ci")))
            return "\n".join(lines) + "\n"
        lines = ["samples,estimate"]
        for n, est in zip(payload["stages"], payload["estimates"]):
            lines.append(f"{n},{fmt9(est)}")
        return "\n".join(lines) + "\n"
    pairs: list[tuple[str, str]] = []
    _flatten("", payload, pairs)
    return "key,value\n" + "\n".join(f"{k},{v}" for k, v in pairs) + "\n"


def render(payload: Mapping, fmt: str) -> str:
    """Render a payload as ``table``, ``json``, or ``csv`` text (LF endings)."""
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(payload)
    if fmt == "table":
        return _render_table(payload)
    raise ScenarioError(f"unknown format '{fmt}'; choose table, json, or csv")
