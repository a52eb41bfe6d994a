"""Spectral efficiency and estimation penalties of planar-wavefront combining."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrays import ArrayConfig, PolarPosition, element_distances
from .metrics import (
    AngleSearchPolicy,
    MetricSample,
    _at_value,
    _eta_grid,
    _geometry,
    _worst_over_angle,
    _worst_over_angle_batch,
)

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class LinkBudget:
    """Linear pilot/data SNRs and pilot length for the estimation model."""

    pilot_snr: float
    data_snr: float
    pilot_len: int

    def __post_init__(self) -> None:
        if self.pilot_snr <= 0:
            raise ValueError("pilot_snr must be positive")
        if self.data_snr < 0:
            raise ValueError("data_snr must be nonnegative")
        if int(self.pilot_len) != self.pilot_len or self.pilot_len < 1:
            raise ValueError("pilot_len must be a positive integer")


DEFAULT_BUDGET = LinkBudget(pilot_snr=1e4, data_snr=1e6, pilot_len=64)
"""Stand-in budget for the bundled presets: data SNR 60 dB, pilot SNR 40 dB,
64 pilot symbols.  Chosen so matched-filter SE at the presets' classical
transition ranges lands in the 5-15 bits/s/Hz band while the worst-case SE
loss there clears the presets' 0.5 bits/s/Hz budget.  Always overridable."""


@dataclass(frozen=True)
class SEReport:
    """Matched-filter vs mismatched-combiner spectral efficiencies at one position."""

    se_opt: float
    se_mis: float
    delta_se: float
    eta: float
    gain: float


def channel_gain(cfg: ArrayConfig, pos: PolarPosition) -> float:
    """Squared channel norm G = sum_n (lambda/(4*pi*R_n))^2."""
    dist = element_distances(cfg, pos)
    amp = cfg.wavelength / (4.0 * math.pi)
    return float((amp * amp) * np.sum(1.0 / (dist * dist)))


def se_optimal(gain: float, budget: LinkBudget) -> float:
    """Matched-filter spectral efficiency log2(1 + data_snr * G)."""
    if gain < 0:
        raise ValueError("gain must be nonnegative")
    return math.log1p(budget.data_snr * gain) / _LN2


def snr_mismatched(gain: float, eta: float, budget: LinkBudget) -> float:
    """Post-combiner SNR when the combiner is estimated on the planar subspace.

    eta is the array-gain efficiency; the pilot-noise terms keep this strictly
    below eta * G * data_snr for any finite pilot energy.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if gain <= 0:
        raise ValueError("gain must be positive")
    pilot_energy = budget.pilot_len * budget.pilot_snr
    num = eta * eta * gain * gain * budget.data_snr
    den = gain * eta * budget.data_snr / pilot_energy + eta * gain + 1.0 / pilot_energy
    # the ratio never exceeds eta*G*rho_d algebraically; keep that exact in floats
    return min(num / den, eta * gain * budget.data_snr)


def se_loss(cfg: ArrayConfig, pos: PolarPosition, budget: LinkBudget) -> SEReport:
    """SE penalty of planar-subspace estimation and combining at one position."""
    gain = channel_gain(cfg, pos)
    eta = _at_value(cfg, pos, _eta_grid)
    se_opt = se_optimal(gain, budget)
    se_mis = math.log1p(snr_mismatched(gain, eta, budget)) / _LN2
    return SEReport(se_opt=se_opt, se_mis=se_mis, delta_se=se_opt - se_mis, eta=eta, gain=gain)


def _se_loss_grid(budget: LinkBudget):
    def grid_fn(cfg: ArrayConfig, r: np.ndarray, cos_t: np.ndarray) -> np.ndarray:
        dist, _, dphi = _geometry(cfg, r, cos_t)
        inv = 1.0 / dist
        inv2_sum = (inv * inv).sum(axis=2)
        amp = cfg.wavelength / (4.0 * math.pi)
        gain = (amp * amp) * inv2_sum
        csum = (np.cos(dphi) * inv).sum(axis=2)
        ssum = (np.sin(dphi) * inv).sum(axis=2)
        eta = np.minimum((csum * csum + ssum * ssum) / (cfg.n_elements * inv2_sum), 1.0)
        pilot_energy = budget.pilot_len * budget.pilot_snr
        snr_opt = budget.data_snr * gain
        num = eta * eta * gain * gain * budget.data_snr
        den = gain * eta * budget.data_snr / pilot_energy + eta * gain + 1.0 / pilot_energy
        snr_mis = np.minimum(num / den, eta * gain * budget.data_snr)
        return (np.log1p(snr_opt) - np.log1p(snr_mis)) / _LN2

    return grid_fn


def se_loss_worst(
    cfg: ArrayConfig,
    r: float,
    budget: LinkBudget,
    policy: AngleSearchPolicy | None = None,
) -> MetricSample:
    """Worst-case SE loss over the look angle at range r, in bits/s/Hz."""
    return _worst_over_angle(cfg, r, policy or AngleSearchPolicy(), _se_loss_grid(budget))


def se_loss_worst_batch(
    cfg: ArrayConfig,
    r_values,
    budget: LinkBudget,
    policy: AngleSearchPolicy | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vector form of se_loss_worst: (values, theta_stars) for an array of ranges."""
    return _worst_over_angle_batch(
        cfg, r_values, policy or AngleSearchPolicy(), _se_loss_grid(budget)
    )


def nmse_lower_bound(cfg: ArrayConfig, pos: PolarPosition, budget: LinkBudget) -> float:
    """Floor of the planar-constrained estimator's NMSE: (1 - eta) + noise term."""
    eta = _at_value(cfg, pos, _eta_grid)
    noise = 1.0 / (budget.pilot_len * budget.pilot_snr * channel_gain(cfg, pos))
    return (1.0 - eta) + noise


def nmse_bias_approx(e_l2_value: float) -> float:
    """Small-mismatch bias approximation 1 - (1 - x^2/2)^2 of the NMSE floor."""
    if e_l2_value < 0:
        raise ValueError("mismatch value must be nonnegative")
    half_sq = 0.5 * e_l2_value * e_l2_value
    return 1.0 - (1.0 - half_sq) * (1.0 - half_sq)
