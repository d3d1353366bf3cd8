"""Scenario files, flag merging, and serialization round trips."""

import math

import pytest

from cyins.mc import SimConfig
from cyins.model import InsurancePolicy
from cyins.scenario import (
    Scenario,
    ScenarioError,
    build_scenario,
    load_config,
    scenario_from_dict,
    scenario_to_dict,
)


def _write(tmp_path, text):
    path = tmp_path / "scenario.cfg"
    path.write_text(text, encoding="utf-8")
    return path


def test_load_config_parses_typed_values(tmp_path):
    path = _write(tmp_path, """
# demo scenario
market.cu = 1.5
market.ca = 0.5   # trailing comment
profile.gamma = 2.0
policy.s = 0.25
sim.seed = 42
sim.samples = 10000
""")
    values = load_config(path)
    assert values["market.cu"] == 1.5
    assert values["sim.seed"] == 42
    assert isinstance(values["sim.samples"], int)


def test_load_config_rejects_unknown_key(tmp_path):
    path = _write(tmp_path, "market.cv = 1.0\n")
    with pytest.raises(ScenarioError, match="unknown configuration key 'market.cv'"):
        load_config(path)


def test_load_config_rejects_bad_number(tmp_path):
    path = _write(tmp_path, "profile.gamma = fast\n")
    with pytest.raises(ScenarioError, match="profile.gamma"):
        load_config(path)


def test_load_config_rejects_non_integer_seed(tmp_path):
    path = _write(tmp_path, "sim.seed = 1.5\n")
    with pytest.raises(ScenarioError, match="sim.seed"):
        load_config(path)


def test_build_scenario_requires_core_fields():
    with pytest.raises(ScenarioError, match="market.cu"):
        build_scenario({"ca": 1.0, "gamma": 1.0})
    with pytest.raises(ScenarioError, match="profile.gamma"):
        build_scenario({"cu": 1.0, "ca": 1.0})


def test_build_scenario_flags_override_file(tmp_path):
    path = _write(tmp_path, "market.cu = 1.0\nmarket.ca = 1.0\nprofile.gamma = 1.0\npolicy.s = 0.25\n")
    scenario = build_scenario({"s": 0.75}, load_config(path))
    assert scenario.policy == InsurancePolicy(0.75, 0.0)
    assert scenario.market.protection_cost == 1.0


def test_build_scenario_policy_absent_means_solve():
    scenario = build_scenario({"cu": 1.0, "ca": 1.0, "gamma": 1.0})
    assert scenario.policy is None
    assert scenario.coverage == 0.0
    assert scenario.sim == SimConfig()


def test_build_scenario_validates_domains():
    with pytest.raises(ScenarioError):
        build_scenario({"cu": -1.0, "ca": 1.0, "gamma": 1.0})
    with pytest.raises(ScenarioError):
        build_scenario({"cu": 1.0, "ca": 1.0, "gamma": 1.0, "s": 1.5})


def test_scenario_dict_round_trip():
    scenario = build_scenario({"cu": 1.0, "ca": 3.0, "gamma": 2.0, "cs": 0.5,
                               "s": 1.0 / 3.0, "t": math.log(2.0) / 3.0,
                               "seed": 42, "samples": 12345})
    data = scenario_to_dict(scenario)
    assert scenario_from_dict(data) == scenario
    # floats survive exactly
    assert data["policy"]["s"] == 1.0 / 3.0


def test_scenario_round_trip_without_policy():
    scenario = build_scenario({"cu": 2.0, "ca": 1.0, "gamma": 0.5})
    assert scenario_from_dict(scenario_to_dict(scenario)) == scenario


def test_scenario_is_frozen():
    scenario = build_scenario({"cu": 1.0, "ca": 1.0, "gamma": 1.0})
    assert isinstance(scenario, Scenario)
    with pytest.raises(AttributeError):
        scenario.market = None
