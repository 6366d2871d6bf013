"""Domain types and the cost model of an edge-assisted federated learning round.

All quantities are SI: W, Hz, bits, s, J. Channel gains are linear power gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

LN2 = math.log(2.0)


class InvalidArgumentError(ValueError):
    pass


class InfeasibleAllocationError(ValueError):
    pass


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _require_finite(**kwargs) -> None:
    for name, value in kwargs.items():
        if not np.all(np.isfinite(value)):
            raise InvalidArgumentError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    num_orgs: int
    mbs_total_bandwidth: float
    noise_psd: float
    sensor_max_power: float
    sbs_max_power: float
    sbs_bandwidth: float
    sbs_max_freq: float
    switched_capacitance: float
    cycles_per_bit: float
    model_size: float
    waterfall_threshold: float
    alpha: float = 0.5
    rho: float = 0.5

    def __post_init__(self):
        if self.num_orgs < 1:
            raise InvalidArgumentError("num_orgs must be >= 1")
        positive = (
            "mbs_total_bandwidth", "noise_psd", "sensor_max_power", "sbs_max_power",
            "sbs_bandwidth", "sbs_max_freq", "switched_capacitance", "cycles_per_bit",
            "model_size",
        )
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.waterfall_threshold) and self.waterfall_threshold >= 0):
            raise InvalidArgumentError("waterfall_threshold must be >= 0")
        for name in ("alpha", "rho"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value!r}")

    @property
    def subcarrier_bandwidth(self) -> float:
        return self.mbs_total_bandwidth / self.num_orgs

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Sensor:
    data_size: float
    channel_gain: float
    position: Optional[tuple] = None

    def __post_init__(self):
        if not (math.isfinite(self.data_size) and self.data_size > 0):
            raise InvalidArgumentError("sensor data_size must be positive")
        if not (math.isfinite(self.channel_gain) and self.channel_gain > 0):
            raise InvalidArgumentError("sensor channel_gain must be positive")


@dataclass(frozen=True)
class Organization:
    id: int
    sensors: tuple
    uplink_gains: np.ndarray
    position: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "sensors", tuple(self.sensors))
        gains = _frozen(self.uplink_gains)
        if gains.ndim != 1 or not np.all(np.isfinite(gains)) or np.any(gains <= 0):
            raise InvalidArgumentError(f"org {self.id}: uplink gains must be a positive 1-D vector")
        object.__setattr__(self, "uplink_gains", gains)

    @property
    def data_size(self) -> float:
        """Total data collected by the SBS, the sum of its sensors' data."""
        return float(sum(s.data_size for s in self.sensors))

    @property
    def sensor_data(self) -> np.ndarray:
        return np.array([s.data_size for s in self.sensors], dtype=float)

    @property
    def sensor_gains(self) -> np.ndarray:
        return np.array([s.channel_gain for s in self.sensors], dtype=float)


@dataclass(frozen=True)
class Scenario:
    params: SystemParams
    orgs: tuple

    def __post_init__(self):
        object.__setattr__(self, "orgs", tuple(self.orgs))
        check_scenario(self)

    @property
    def num_orgs(self) -> int:
        return self.params.num_orgs

    @property
    def org_data(self) -> np.ndarray:
        return np.array([org.data_size for org in self.orgs], dtype=float)

    @property
    def gain_matrix(self) -> np.ndarray:
        """``J x J`` uplink gains, row = organization, column = subcarrier."""
        return np.vstack([org.uplink_gains for org in self.orgs])

    def with_params(self, **changes) -> "Scenario":
        return Scenario(self.params.replace(**changes), self.orgs)


def check_scenario(scenario: Scenario) -> Scenario:
    """Validate structural invariants shared by every solver entry point."""
    J = scenario.params.num_orgs
    if len(scenario.orgs) != J:
        raise InvalidArgumentError(f"expected {J} organizations, got {len(scenario.orgs)}")
    for org in scenario.orgs:
        if org.uplink_gains.shape != (J,):
            raise InvalidArgumentError(
                f"org {org.id}: expected {J} uplink gains, got {org.uplink_gains.shape[0]}"
            )
    return scenario


@dataclass(frozen=True)
class Allocation:
    sensor_bandwidths: tuple
    frequencies: np.ndarray
    powers: np.ndarray
    assignment: np.ndarray
    latency_bound: float

    def __post_init__(self):
        object.__setattr__(
            self, "sensor_bandwidths", tuple(_frozen(b) for b in self.sensor_bandwidths)
        )
        object.__setattr__(self, "frequencies", _frozen(self.frequencies))
        object.__setattr__(self, "powers", _frozen(self.powers))
        object.__setattr__(self, "assignment", _frozen(self.assignment, dtype=int))


@dataclass(frozen=True)
class OrgCost:
    t_r: float
    t_cmp: float
    t_up: float
    e_cmp: float
    e_up: float
    error_rate: float
    e_sensors: float = 0.0

    @property
    def t_total(self) -> float:
        return self.t_r + self.t_cmp + self.t_up


@dataclass(frozen=True)
class CostBreakdown:
    t_one: float
    e_one: float
    c_learn: float
    c_system: float
    c_total: float
    per_org: tuple = field(default_factory=tuple)


def compose_costs(t_one, e_one, c_learn, alpha, rho):
    """Return ``(c_system, c_total)`` from the three cost components."""
    c_system = alpha * t_one + (1.0 - alpha) * e_one
    return c_system, rho * c_system + (1.0 - rho) * c_learn


def sensor_rate(bandwidth, gain, params: SystemParams):
    """Sensor uplink rate with transmit power proportional to allocated bandwidth."""
    _require_finite(bandwidth=bandwidth, gain=gain)
    if np.any(np.asarray(bandwidth) < 0):
        raise InvalidArgumentError("bandwidth must be >= 0")
    if np.any(np.asarray(gain) <= 0):
        raise InvalidArgumentError("gain must be > 0")
    snr = params.sensor_max_power * np.asarray(gain, dtype=float) / (params.sbs_bandwidth * params.noise_psd)
    return np.asarray(bandwidth, dtype=float) * np.log1p(snr) / LN2


def uplink_rate(power, gain, params: SystemParams):
    _require_finite(power=power, gain=gain)
    if np.any(np.asarray(power) < 0):
        raise InvalidArgumentError("power must be >= 0")
    if np.any(np.asarray(gain) <= 0):
        raise InvalidArgumentError("gain must be > 0")
    B = params.subcarrier_bandwidth
    return B * np.log1p(np.asarray(power, dtype=float) * gain / (B * params.noise_psd)) / LN2


def packet_error(power, gain, params: SystemParams):
    """Packet error probability over a Rayleigh channel (waterfall approximation).

    Zero power returns the limit value 1.
    """
    _require_finite(power=power, gain=gain)
    if params.waterfall_threshold < 0:
        raise InvalidArgumentError("waterfall threshold must be >= 0")
    power = np.asarray(power, dtype=float)
    if np.any(power < 0):
        raise InvalidArgumentError("power must be >= 0")
    B = params.subcarrier_bandwidth
    with np.errstate(divide="ignore"):
        x = params.waterfall_threshold * B * params.noise_psd / (power * gain)
    out = -np.expm1(-x)
    return np.where(power == 0, 1.0, out)


def upload_times(scenario: Scenario, powers, assignment) -> np.ndarray:
    """Model upload time of every org on its assigned subcarrier."""
    G = scenario.gain_matrix
    gains = G[np.arange(scenario.num_orgs), np.asarray(assignment)]
    rates = uplink_rate(np.asarray(powers, dtype=float), gains, scenario.params)
    with np.errstate(divide="ignore"):
        return scenario.params.model_size / rates


def check_allocation(scenario: Scenario, alloc: Allocation, rtol: float = 1e-9) -> None:
    """Raise if ``alloc`` violates a constraint of the joint problem."""
    p = scenario.params
    J = p.num_orgs
    if len(alloc.sensor_bandwidths) != J:
        raise InvalidArgumentError("one bandwidth vector per organization is required")
    for org, bw in zip(scenario.orgs, alloc.sensor_bandwidths):
        if bw.shape != (len(org.sensors),):
            raise InvalidArgumentError(f"org {org.id}: bandwidth vector has wrong length")
        if np.any(bw < 0) or bw.sum() > p.sbs_bandwidth * (1 + rtol):
            raise InfeasibleAllocationError(f"org {org.id}: sensor bandwidths violate the SBS budget")
    for name, arr in (("frequencies", alloc.frequencies), ("powers", alloc.powers)):
        if arr.shape != (J,) or not np.all(np.isfinite(arr)):
            raise InvalidArgumentError(f"{name} must be a finite vector of length {J}")
    if np.any(alloc.powers < 0) or np.any(alloc.powers > p.sbs_max_power * (1 + rtol)):
        raise InfeasibleAllocationError("SBS powers outside [0, p_max]")
    if np.any(alloc.frequencies < 0) or np.any(alloc.frequencies > p.sbs_max_freq * (1 + rtol)):
        raise InfeasibleAllocationError("MEC frequencies outside [0, f_max]")
    if sorted(alloc.assignment.tolist()) != list(range(J)):
        raise InfeasibleAllocationError("subcarrier assignment is not a permutation")


def evaluate(scenario: Scenario, alloc: Allocation) -> CostBreakdown:
    """Evaluate latency, energy, learning cost and their weighted totals."""
    check_allocation(scenario, alloc)
    p = scenario.params
    eps, kappa = p.cycles_per_bit, p.switched_capacitance
    per_org = []
    for j, org in enumerate(scenario.orgs):
        bw = alloc.sensor_bandwidths[j]
        D_j = org.data_size
        f_j = float(alloc.frequencies[j])
        p_j = float(alloc.powers[j])
        if len(org.sensors):
            rates = sensor_rate(bw, org.sensor_gains, p)
            if np.any(rates <= 0):
                raise InfeasibleAllocationError(f"org {org.id}: a sensor has zero bandwidth")
            t_k = org.sensor_data / rates
            t_r = float(t_k.max())
            e_sensors = float(np.sum(p.sensor_max_power * t_k))
        else:
            t_r = e_sensors = 0.0
        if D_j > 0:
            if f_j <= 0:
                raise InfeasibleAllocationError(f"org {org.id}: zero frequency with pending data")
            t_cmp = eps * D_j / f_j
            e_cmp = kappa * eps * D_j * f_j**2
        else:
            t_cmp = e_cmp = 0.0
        if p_j <= 0:
            raise InfeasibleAllocationError(f"org {org.id}: zero transmit power")
        gain = org.uplink_gains[alloc.assignment[j]]
        t_up = p.model_size / float(uplink_rate(p_j, gain, p))
        err = float(packet_error(p_j, gain, p))
        per_org.append(OrgCost(t_r, t_cmp, t_up, e_cmp, p_j * t_up, err, e_sensors))

    t_one = max(o.t_total for o in per_org)
    e_one = sum(o.e_cmp + o.e_up for o in per_org)
    c_learn = sum(org.data_size * o.error_rate for org, o in zip(scenario.orgs, per_org))
    c_system, c_total = compose_costs(t_one, e_one, c_learn, p.alpha, p.rho)
    return CostBreakdown(t_one, e_one, c_learn, c_system, c_total, tuple(per_org))


def equal_bandwidths(org: Organization, params: SystemParams) -> np.ndarray:
    n = len(org.sensors)
    return np.full(n, params.sbs_bandwidth / n) if n else np.zeros(0)


def receive_time(org: Organization, bandwidths: Sequence[float], params: SystemParams) -> float:
    """Time until the SBS holds every sensor's data (slowest sensor)."""
    if not org.sensors:
        return 0.0
    rates = sensor_rate(np.asarray(bandwidths, dtype=float), org.sensor_gains, params)
    with np.errstate(divide="ignore"):
        return float(np.max(org.sensor_data / rates))
