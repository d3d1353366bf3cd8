"""Seeded Monte Carlo verification of the exponential loss model.

Sampling is reproducible bit for bit across runs, platforms, and kernel
backends: draw ``i`` of a stream is obtained by applying the SplitMix64
finalizer to ``seed + (i + 1) * 0x9E3779B97F4A7C15`` (mod 2**64), mapping the
high 52 bits onto the uniform lattice ``(k + 0.5) * 2**-52`` in (0, 1), and
inverting the exponential CDF, ``X = -R * log(U)``, with the portable log/exp
kernels.  There is no global generator state; a sample is a pure function of
(seed, index), so any partition of an index range over workers reproduces the
same stream.  All reductions below use a fixed fold order, independent of
NumPy version and backend.

Confidence intervals use batch means: the stream is cut into ``batch_count``
equal batches and a Student-t interval is formed over the batch means.  That
stays usable for the heavy-tailed ``exp(weight * X)`` estimator near its
variance boundary, where the naive sample variance is badly behaved.  The
variance of that estimator is finite only while ``2 * weight * risk < 1``;
estimates outside that band carry an explicit regime marker and raise a
``VarianceUnboundedWarning`` instead of silently reporting an invalid CI.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import t as _student_t

from . import _backend
from .model import ActionPair, ParameterError, UserRiskProfile, risk_level

__all__ = [
    "SimConfig",
    "EstimateWithCI",
    "LossFactorEstimate",
    "DivergenceProbe",
    "FactorRegime",
    "VarianceUnboundedWarning",
    "sample_losses",
    "estimate_loss_accounting",
    "estimate_loss_factor",
    "divergence_probe",
]

#: Samples are generated and reduced in chunks of this many values.
BLOCK = 1 << 18

_CONFIDENCE = 0.95


class VarianceUnboundedWarning(UserWarning):
    """The loss-factor estimator left the band where its CI is valid."""


@dataclass(frozen=True)
class SimConfig:
    """Simulation size, seed, and batch count for batch-means intervals."""

    sample_count: int = 1_000_000
    seed: int = 0
    batch_count: int = 50

    def __post_init__(self):
        if not isinstance(self.sample_count, int) or not isinstance(self.batch_count, int):
            raise ParameterError("sample_count and batch_count must be integers")
        if self.batch_count < 2:
            raise ParameterError(f"batch_count must be >= 2, got {self.batch_count}")
        if self.sample_count < self.batch_count:
            raise ParameterError(
                f"sample_count ({self.sample_count}) must be >= batch_count ({self.batch_count})")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ParameterError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")


@dataclass(frozen=True)
class EstimateWithCI:
    """Point estimate with a 95% batch-means confidence half-width."""

    point: float
    half_width: float
    sample_count: int


class FactorRegime:
    """Validity regime of a loss-factor estimate."""

    CI_VALID = "ci-valid"
    VARIANCE_UNBOUNDED = "variance-unbounded"
    MEAN_DIVERGENT = "mean-divergent"


@dataclass(frozen=True)
class LossFactorEstimate(EstimateWithCI):
    """Loss-factor estimate plus the regime its CI validity falls in."""

    regime: str = FactorRegime.CI_VALID


@dataclass(frozen=True)
class DivergenceProbe:
    """Running loss-factor estimates at geometrically growing sample counts."""

    stages: tuple[int, ...]
    estimates: tuple[float, ...]
    growth_factor: float
    growing: bool


def _as_risk(risk) -> float:
    if isinstance(risk, ActionPair):
        return risk_level(risk)
    risk = float(risk)
    if not math.isfinite(risk) or risk < 0.0:
        raise ParameterError(f"risk must be finite and >= 0, got {risk!r}")
    return risk


def _fold_sum(chunk: np.ndarray) -> float:
    # Deterministic pairwise fold; the order is fixed by this loop alone, so
    # both kernel backends and every NumPy version reduce identically.
    a = chunk.copy()
    n = a.size
    while n > 1:
        half = n >> 1
        a[:half] += a[n - half:n]
        n -= half
    return float(a[0])


def _range_sum(fill, seed: int, start: int, count: int) -> float:
    total = 0.0
    buf = np.empty(min(BLOCK, count), dtype=np.float64)
    pos = start
    end = start + count
    while pos < end:
        m = min(BLOCK, end - pos)
        fill(buf[:m], seed, pos)
        total += _fold_sum(buf[:m])
        pos += m
    return total


def _batch_statistics(fill, config: SimConfig) -> tuple[float, np.ndarray]:
    """Overall mean plus batch means of the first batch_count * m samples."""
    n, b = config.sample_count, config.batch_count
    m = n // b
    batch_sums = np.empty(b, dtype=np.float64)
    for i in range(b):
        batch_sums[i] = _range_sum(fill, config.seed, i * m, m)
    total = _fold_sum(batch_sums)
    tail = n - b * m
    if tail:
        total += _range_sum(fill, config.seed, b * m, tail)
    return total / n, batch_sums / m


def _half_width(batch_means: np.ndarray) -> float:
    b = batch_means.size
    center = _fold_sum(batch_means) / b
    spread = math.sqrt(_fold_sum((batch_means - center) ** 2) / (b - 1))
    quantile = float(_student_t.ppf(0.5 + _CONFIDENCE / 2.0, b - 1))
    return quantile * spread / math.sqrt(b)


def sample_losses(risk, config: SimConfig) -> np.ndarray:
    """The full loss stream for a risk level (or the action pair inducing it).

    Deterministic in (seed, index); see the module docstring.  A zero risk
    level yields the all-zero stream of the degenerate loss.  Mostly useful
    for inspection and tests; the estimators below stream in blocks instead
    of materializing large arrays.
    """
    risk = _as_risk(risk)
    out = np.empty(config.sample_count, dtype=np.float64)
    if risk == 0.0:
        out[:] = 0.0
        return out
    kern = _backend.kernels()
    for pos in range(0, config.sample_count, BLOCK):
        m = min(BLOCK, config.sample_count - pos)
        kern.fill_losses(out[pos:pos + m], config.seed, pos, risk)
    return out


def estimate_loss_accounting(risk, coverage: float, config: SimConfig
                             ) -> tuple[EstimateWithCI, EstimateWithCI, EstimateWithCI]:
    """Empirical (direct loss, retained loss, insurer payout) means with CIs.

    All three come from one pass over the same loss stream: the retained and
    payout estimates are the direct-loss estimate scaled by exactly ``1 - s``
    and ``s``, an algebraic identity of the linear policy rather than three
    separate statistical estimates.
    """
    risk = _as_risk(risk)
    coverage = float(coverage)
    if not 0.0 <= coverage <= 1.0:
        raise ParameterError(f"coverage must be in [0, 1], got {coverage!r}")
    if risk == 0.0:
        zero = EstimateWithCI(0.0, 0.0, config.sample_count)
        return zero, zero, zero
    kern = _backend.kernels()

    def fill(buf, seed, start):
        kern.fill_losses(buf, seed, start, risk)

    mean, batch_means = _batch_statistics(fill, config)
    hw = _half_width(batch_means)

    def scaled(factor: float) -> EstimateWithCI:
        return EstimateWithCI(factor * mean, factor * hw, config.sample_count)

    return scaled(1.0), scaled(1.0 - coverage), scaled(coverage)


def estimate_loss_factor(risk, profile: UserRiskProfile, coverage: float,
                         config: SimConfig) -> LossFactorEstimate:
    """Empirical mean of ``exp(gamma (1-s) X)`` with a batch-means CI.

    The regime marker records whether the CI is trustworthy:

    - ``ci-valid``: 2 gamma (1-s) risk < 1, the estimator has finite variance.
    - ``variance-unbounded``: the mean exists but the variance does not; the
      interval is reported for completeness and a warning is raised.
    - ``mean-divergent``: gamma (1-s) risk >= 1, the analytic mean is infinite
      and any finite estimate only reflects the sample size.
    """
    risk = _as_risk(risk)
    coverage = float(coverage)
    if not 0.0 <= coverage <= 1.0:
        raise ParameterError(f"coverage must be in [0, 1], got {coverage!r}")
    weight = profile.gamma * (1.0 - coverage)
    kern = _backend.kernels()

    def fill(buf, seed, start):
        kern.fill_loss_factors(buf, seed, start, risk, weight)

    mean, batch_means = _batch_statistics(fill, config)
    hw = _half_width(batch_means)
    wr = weight * risk
    if wr >= 1.0:
        regime = FactorRegime.MEAN_DIVERGENT
        warnings.warn(
            f"loss-factor mean diverges at gamma*(1-s)*risk = {wr:.6g} >= 1; "
            "the empirical estimate reflects only the sample size",
            VarianceUnboundedWarning, stacklevel=2)
    elif 2.0 * wr >= 1.0:
        regime = FactorRegime.VARIANCE_UNBOUNDED
        warnings.warn(
            f"loss-factor CI is invalid at 2*gamma*(1-s)*risk = {2.0 * wr:.6g} >= 1 "
            "(mean exists, variance does not)",
            VarianceUnboundedWarning, stacklevel=2)
    else:
        regime = FactorRegime.CI_VALID
    return LossFactorEstimate(mean, hw, config.sample_count, regime)


_DEFAULT_STAGES = (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7)


def divergence_probe(risk, profile: UserRiskProfile, coverage: float, config: SimConfig,
                     stages: Sequence[int] | None = None,
                     growth_threshold: float = 10.0) -> DivergenceProbe:
    """Running loss-factor estimates at geometrically increasing sample counts.

    In the divergent regime (``gamma (1-s) risk >= 1``) the running estimate
    keeps growing with the sample count instead of stabilizing; ``growing``
    records whether the last stage exceeds the first by ``growth_threshold``.
    Feasible parameters give a flat sequence near the analytic factor, and a
    zero risk level gives the constant 1.
    """
    risk = _as_risk(risk)
    coverage = float(coverage)
    if not 0.0 <= coverage <= 1.0:
        raise ParameterError(f"coverage must be in [0, 1], got {coverage!r}")
    stage_list = tuple(int(s) for s in (stages if stages is not None else _DEFAULT_STAGES))
    if len(stage_list) < 2 or any(b <= a for a, b in zip(stage_list, stage_list[1:])) \
            or stage_list[0] < 1:
        raise ParameterError(f"stages must be at least two increasing positive counts, got {stage_list}")
    weight = profile.gamma * (1.0 - coverage)
    if risk == 0.0:
        estimates = tuple(1.0 for _ in stage_list)
        return DivergenceProbe(stage_list, estimates, 1.0, False)
    kern = _backend.kernels()

    def fill(buf, seed, start):
        kern.fill_loss_factors(buf, seed, start, risk, weight)

    estimates = []
    running = 0.0
    pos = 0
    for n in stage_list:
        running += _range_sum(fill, config.seed, pos, n - pos)
        pos = n
        estimates.append(running / n)
    growth = estimates[-1] / estimates[0] if estimates[0] > 0.0 else math.inf
    return DivergenceProbe(stage_list, tuple(estimates), growth, growth >= growth_threshold)
