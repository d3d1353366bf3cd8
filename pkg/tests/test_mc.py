"""Monte Carlo estimators: determinism, convergence, regimes, probes."""

import math

import numpy as np
import pytest

from cyins.mc import (
    DivergenceProbe,
    FactorRegime,
    SimConfig,
    VarianceUnboundedWarning,
    divergence_probe,
    estimate_loss_accounting,
    estimate_loss_factor,
    sample_losses,
)
from cyins.model import ActionPair, ParameterError, UserRiskProfile

LN2 = math.log(2.0)


def test_sim_config_validation():
    with pytest.raises(ParameterError):
        SimConfig(sample_count=10, batch_count=20)
    with pytest.raises(ParameterError):
        SimConfig(batch_count=1)
    with pytest.raises(ParameterError):
        SimConfig(seed=-1)
    with pytest.raises(ParameterError):
        SimConfig(seed=2 ** 64)


def test_sample_mean_converges(backend):
    samples = sample_losses(LN2, SimConfig(sample_count=10 ** 6, seed=42))
    assert samples.mean() == pytest.approx(LN2, abs=2e-3)
    assert samples.min() >= 0.0


def test_sample_losses_accepts_action_pair(backend):
    config = SimConfig(sample_count=1000, seed=3)
    by_actions = sample_losses(ActionPair(1.0, 1.0), config)
    by_risk = sample_losses(LN2, config)
    assert np.array_equal(by_actions, by_risk)


def test_sample_losses_zero_risk_degenerates(backend):
    samples = sample_losses(0.0, SimConfig(sample_count=500, seed=1))
    assert (samples == 0.0).all()


def test_sample_losses_rejects_negative_risk():
    with pytest.raises(ParameterError):
        sample_losses(-0.5, SimConfig(sample_count=100, seed=0))


def test_sample_losses_deterministic(backend):
    config = SimConfig(sample_count=4096, seed=977)
    first = sample_losses(1.3, config)
    second = sample_losses(1.3, config)
    assert np.array_equal(first.view(np.uint64), second.view(np.uint64))


def test_accounting_scaling_is_exact(backend):
    config = SimConfig(sample_count=10 ** 5, seed=11)
    direct, effective, payout = estimate_loss_accounting(LN2, 0.3, config)
    # algebraic identity on the same stream, not a second estimate
    assert effective.point == 0.7 * direct.point
    assert payout.point == 0.3 * direct.point
    assert effective.half_width == 0.7 * direct.half_width


def test_accounting_covers_analytic_values(backend):
    config = SimConfig(sample_count=10 ** 6, seed=42)
    direct, effective, payout = estimate_loss_accounting(LN2, 0.5, config)
    assert abs(direct.point - LN2) <= 3 * direct.half_width
    assert abs(effective.point - 0.5 * LN2) <= 3 * effective.half_width
    assert abs(payout.point - 0.5 * LN2) <= 3 * payout.half_width


def test_accounting_exact_at_coverage_extremes(backend):
    config = SimConfig(sample_count=10 ** 4, seed=5)
    _, effective, _ = estimate_loss_accounting(LN2, 1.0, config)
    assert effective.point == 0.0 and effective.half_width == 0.0
    _, _, payout = estimate_loss_accounting(LN2, 0.0, config)
    assert payout.point == 0.0 and payout.half_width == 0.0


def test_loss_factor_matches_analytic(backend):
    config = SimConfig(sample_count=10 ** 6, seed=42)
    estimate = estimate_loss_factor(LN2, UserRiskProfile(1.0), 0.5, config)
    analytic = 1.0 / (1.0 - 0.5 * LN2)
    assert estimate.regime == FactorRegime.CI_VALID
    assert estimate.point == pytest.approx(analytic, rel=0.01)
    assert abs(estimate.point - analytic) <= estimate.half_width


def test_loss_factor_exact_at_full_coverage(backend):
    estimate = estimate_loss_factor(LN2, UserRiskProfile(1.0), 1.0,
                                    SimConfig(sample_count=10 ** 4, seed=9))
    assert estimate.point == 1.0
    assert estimate.half_width == 0.0


def test_loss_factor_variance_advisory(backend):
    # mean exists (weight * risk < 1) but the variance does not (2 w r >= 1)
    with pytest.warns(VarianceUnboundedWarning, match="variance"):
        estimate = estimate_loss_factor(LN2, UserRiskProfile(1.0), 0.0,
                                        SimConfig(sample_count=10 ** 4, seed=7))
    assert estimate.regime == FactorRegime.VARIANCE_UNBOUNDED


def test_loss_factor_divergent_advisory(backend):
    with pytest.warns(VarianceUnboundedWarning, match="diverges"):
        estimate = estimate_loss_factor(LN2, UserRiskProfile(1.6), 0.0,
                                        SimConfig(sample_count=10 ** 4, seed=7))
    assert estimate.regime == FactorRegime.MEAN_DIVERGENT


def test_probe_grows_in_divergent_regime(backend):
    probe = divergence_probe(math.log(101.0), UserRiskProfile(2.0), 0.0,
                             SimConfig(seed=0), stages=(10 ** 3, 10 ** 4, 10 ** 5))
    assert isinstance(probe, DivergenceProbe)
    assert probe.growing
    assert probe.growth_factor >= 10.0


def test_probe_stabilizes_in_feasible_regime(backend):
    probe = divergence_probe(LN2, UserRiskProfile(1.0), 0.5, SimConfig(seed=0),
                             stages=(10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6))
    assert not probe.growing
    assert probe.estimates[-1] == pytest.approx(1.0 / (1.0 - 0.5 * LN2), rel=0.01)


def test_probe_constant_at_zero_risk(backend):
    probe = divergence_probe(0.0, UserRiskProfile(1.0), 0.0, SimConfig(seed=0),
                             stages=(100, 1000))
    assert probe.estimates == (1.0, 1.0)
    assert not probe.growing


def test_probe_running_estimates_share_the_stream(backend):
    # stage k is the running mean of the same prefix a direct run would use
    config = SimConfig(seed=123)
    probe = divergence_probe(LN2, UserRiskProfile(1.0), 0.5, config,
                             stages=(500, 2000))
    samples = sample_losses(LN2, SimConfig(sample_count=2000, seed=123))
    factors = np.exp(0.5 * samples)
    assert probe.estimates[1] == pytest.approx(float(factors.mean()), rel=1e-9)


def test_probe_stage_validation():
    with pytest.raises(ParameterError):
        divergence_probe(LN2, UserRiskProfile(1.0), 0.5, SimConfig(seed=0),
                         stages=(1000,))
    with pytest.raises(ParameterError):
        divergence_probe(LN2, UserRiskProfile(1.0), 0.5, SimConfig(seed=0),
                         stages=(1000, 1000))


def test_estimates_identical_across_backends(both_backends):
    from cyins import _backend
    results = []
    for name in _backend.available_backends():
        with _backend.use_backend(name):
            config = SimConfig(sample_count=10 ** 5, seed=31)
            direct, effective, payout = estimate_loss_accounting(LN2, 0.25, config)
            factor = estimate_loss_factor(LN2, UserRiskProfile(1.0), 0.6, config)
            results.append((direct.point, direct.half_width, effective.point,
                            payout.point, factor.point, factor.half_width))
    assert results[0] == results[1]
