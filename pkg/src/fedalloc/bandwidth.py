"""Closed-form sensor bandwidth split that equalizes upload times inside an SBS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LN2, InvalidArgumentError, Organization, Scenario, SystemParams


@dataclass(frozen=True)
class BandwidthSolution:
    per_sensor_bandwidth: np.ndarray
    receive_time: float


def _spectral_efficiency(org: Organization, params: SystemParams) -> np.ndarray:
    snr = params.sensor_max_power * org.sensor_gains / (params.sbs_bandwidth * params.noise_psd)
    if np.any(~(snr > 0)) or not np.all(np.isfinite(snr)):
        raise InvalidArgumentError(f"org {org.id}: sensor SNR must be positive and finite")
    return np.log1p(snr) / LN2


def optimal_bandwidth(org: Organization, params: SystemParams) -> BandwidthSolution:
    """Split ``B_j`` so that every sensor finishes uploading at the same instant.

    Each sensor receives bandwidth proportional to its data size divided by its
    spectral efficiency; the common finish time is that weighted load over ``B_j``.
    An empty organization gets an empty split and a zero receive time.
    """
    if not org.sensors:
        return BandwidthSolution(np.zeros(0), 0.0)
    load = org.sensor_data / _spectral_efficiency(org, params)
    total = load.sum()
    B_j = params.sbs_bandwidth
    return BandwidthSolution(B_j * load / total, float(total / B_j))


def allocate(scenario: Scenario) -> list:
    """Per-organization optimal splits for a whole scenario."""
    return [optimal_bandwidth(org, scenario.params) for org in scenario.orgs]


def equal_split(org: Organization, params: SystemParams) -> BandwidthSolution:
    """Equal share per sensor; the receive time is then set by the slowest sensor."""
    n = len(org.sensors)
    if n == 0:
        return BandwidthSolution(np.zeros(0), 0.0)
    bw = np.full(n, params.sbs_bandwidth / n)
    times = org.sensor_data / (bw * _spectral_efficiency(org, params))
    return BandwidthSolution(bw, float(times.max()))
