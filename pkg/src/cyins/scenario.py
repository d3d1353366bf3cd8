"""Scenario configuration: file parsing, flag merging, serialization.

A scenario file is flat ``key = value`` text with dotted section prefixes,
one entry per line; ``#`` starts a comment.  Recognized keys::

    market.cu       protection cost (> 0, required)
    market.ca       attack cost (> 0, required)
    market.cs       insurer profit weight (>= 0, default 0)
    profile.gamma   risk aversion (> 0, required)
    policy.s        coverage level in [0, 1]
    policy.t        premium (>= 0, default 0 when policy.s is given)
    sim.samples     Monte Carlo sample count (default 1000000)
    sim.seed        64-bit seed (default 0)
    sim.batches     batch count for confidence intervals (default 50)

Unknown keys are rejected by name.  Command-line flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .mc import SimConfig
from .model import CyinsError, InsurancePolicy, MarketParams, ParameterError, UserRiskProfile

__all__ = ["Scenario", "ScenarioError", "load_config", "build_scenario",
           "scenario_to_dict", "scenario_from_dict"]


class ScenarioError(CyinsError, ValueError):
    """A scenario file or flag set cannot be turned into a valid Scenario."""


_FLOAT_KEYS = {"market.cu", "market.ca", "market.cs", "profile.gamma", "policy.s", "policy.t"}
_INT_KEYS = {"sim.samples", "sim.seed", "sim.batches"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS


@dataclass(frozen=True)
class Scenario:
    """Everything a command needs: market, user profile, optional policy, sim."""

    market: MarketParams
    profile: UserRiskProfile
    policy: InsurancePolicy | None = None
    sim: SimConfig = SimConfig()

    @property
    def coverage(self) -> float:
        """The scenario's coverage level; no policy means no insurance."""
        return self.policy.coverage if self.policy is not None else 0.0


def load_config(path: str | Path) -> dict[str, float | int]:
    """Parse a scenario file into typed values, rejecting unknown keys."""
    values: dict[str, float | int] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key not in _ALL_KEYS:
            raise ScenarioError(f"{path}:{lineno}: unknown configuration key '{key}'")
        try:
            values[key] = int(text) if key in _INT_KEYS else float(text)
        except ValueError:
            kind = "an integer" if key in _INT_KEYS else "a number"
            raise ScenarioError(f"{path}:{lineno}: {key} must be {kind}, got {text!r}") from None
    return values


def build_scenario(flags: Mapping[str, Any], config: Mapping[str, float | int] | None = None
                   ) -> Scenario:
    """Merge flag values over file values and validate into a Scenario.

    ``flags`` uses the flag names (cu, ca, cs, gamma, s, t, samples, seed,
    batches) with None meaning "not given".  Raises ScenarioError naming the
    offending field.
    """
    merged: dict[str, float | int] = dict(config or {})
    flag_to_key = {"cu": "market.cu", "ca": "market.ca", "cs": "market.cs",
                   "gamma": "profile.gamma", "s": "policy.s", "t": "policy.t",
                   "samples": "sim.samples", "seed": "sim.seed", "batches": "sim.batches"}
    for flag, key in flag_to_key.items():
        value = flags.get(flag)
        if value is not None:
            merged[key] = value

    for key, flag in (("market.cu", "--cu"), ("market.ca", "--ca"), ("profile.gamma", "--gamma")):
        if key not in merged:
            raise ScenarioError(f"missing required value {key} ({flag})")

    try:
        market = MarketParams(protection_cost=merged["market.cu"],
                              attack_cost=merged["market.ca"],
                              profit_weight=merged.get("market.cs", 0.0))
        profile = UserRiskProfile(gamma=merged["profile.gamma"])
        policy = None
        if "policy.s" in merged or "policy.t" in merged:
            policy = InsurancePolicy(coverage=merged.get("policy.s", 0.0),
                                     premium=merged.get("policy.t", 0.0))
        sim = SimConfig(sample_count=int(merged.get("sim.samples", SimConfig.sample_count)),
                        seed=int(merged.get("sim.seed", SimConfig.seed)),
                        batch_count=int(merged.get("sim.batches", SimConfig.batch_count)))
    except ParameterError as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(market=market, profile=profile, policy=policy, sim=sim)


def scenario_to_dict(scenario: Scenario) -> dict:
    """JSON-ready dict; floats stay full precision for bit-exact round trips."""
    policy = scenario.policy
    return {
        "market": {"cu": scenario.market.protection_cost,
                   "ca": scenario.market.attack_cost,
                   "cs": scenario.market.profit_weight},
        "profile": {"gamma": scenario.profile.gamma},
        "policy": None if policy is None else {"s": policy.coverage, "t": policy.premium},
        "sim": {"samples": scenario.sim.sample_count,
                "seed": scenario.sim.seed,
                "batches": scenario.sim.batch_count},
    }


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    """Inverse of :func:`scenario_to_dict`."""
    market = MarketParams(protection_cost=data["market"]["cu"],
                          attack_cost=data["market"]["ca"],
                          profit_weight=data["market"]["cs"])
    profile = UserRiskProfile(gamma=data["profile"]["gamma"])
    policy = None
    if data.get("policy") is not None:
        policy = InsurancePolicy(coverage=data["policy"]["s"], premium=data["policy"]["t"])
    sim = SimConfig(sample_count=data["sim"]["samples"], seed=data["sim"]["seed"],
                    batch_count=data["sim"]["batches"])
    return Scenario(market=market, profile=profile, policy=policy, sim=sim)
