"""Round-latency bound and MEC compute frequencies for fixed powers and subcarriers.

Given every organization's receive time ``a_j`` and upload time ``t_up_j``, the
latency bound ``T`` trades latency (weight ``rho*alpha``) against compute energy,
which falls as ``T`` grows because each server may then run slower.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import InfeasibleAllocationError, InvalidArgumentError, Scenario, upload_times


class UnboundedProblemError(ValueError):
    """Raised when the latency weight is zero and no latency cap is configured."""


@dataclass(frozen=True)
class LatencyFreqSolution:
    T: float
    frequencies: np.ndarray
    t_min: float


def _fixed_delays(receive_times, up_times) -> np.ndarray:
    a = np.asarray(receive_times, dtype=float)
    t_up = np.asarray(up_times, dtype=float)
    if a.shape != t_up.shape:
        raise InvalidArgumentError("receive and upload time vectors differ in length")
    return a + t_up


def compute_t_min(scenario: Scenario, receive_times, up_times) -> float:
    """Smallest feasible latency bound: every server at full frequency."""
    p = scenario.params
    fixed = _fixed_delays(receive_times, up_times)
    return float(np.max(fixed + p.cycles_per_bit * scenario.org_data / p.sbs_max_freq))


def objective(T, scenario: Scenario, receive_times, up_times, params=None) -> float:
    """Latency plus compute-energy cost once each frequency is set as low as ``T`` allows."""
    p = params or scenario.params
    D = scenario.org_data
    active = D > 0
    slack = T - _fixed_delays(receive_times, up_times)[active]
    energy = p.switched_capacitance * p.cycles_per_bit**3 * np.sum(D[active] ** 3 / slack**2)
    return p.rho * p.alpha * T + p.rho * (1 - p.alpha) * energy


def g_of_T(T, scenario: Scenario, receive_times, up_times, params=None) -> float:
    """Derivative of :func:`objective` in ``T``; increasing on its domain."""
    p = params or scenario.params
    D = scenario.org_data
    active = D > 0
    slack = T - _fixed_delays(receive_times, up_times)[active]
    if np.any(slack <= 0):
        raise InvalidArgumentError(f"T={T!r} is at or below a pole of the derivative")
    k = 2 * p.rho * (1 - p.alpha) * p.switched_capacitance * p.cycles_per_bit**3
    return float(p.rho * p.alpha - k * np.sum(D[active] ** 3 / slack**3))


def frequencies_for(T: float, scenario: Scenario, receive_times, up_times) -> np.ndarray:
    """Slowest frequencies meeting the latency bound ``T``; zero for empty orgs."""
    p = scenario.params
    D = scenario.org_data
    slack = T - _fixed_delays(receive_times, up_times)
    f = np.zeros_like(D)
    active = D > 0
    f[active] = p.cycles_per_bit * D[active] / slack[active]
    # T >= t_min keeps f <= f_max up to rounding.
    return np.minimum(f, p.sbs_max_freq)


def _bisect_root(fun, lo: float, hi: float, rtol: float) -> float:
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fun(mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo if abs(fun(lo)) <= abs(fun(hi)) else hi


def optimal_T(
    scenario: Scenario,
    receive_times,
    up_times,
    *,
    params=None,
    t_cap: Optional[float] = None,
    rtol: float = 1e-15,
) -> tuple:
    """Return ``(T*, t_min)`` for the convex one-dimensional latency problem."""
    p = params or scenario.params
    t_min = compute_t_min(scenario, receive_times, up_times)
    if not math.isfinite(t_min):
        raise InfeasibleAllocationError("an upload time is infinite (zero transmit power?)")
    if p.alpha == 0 and p.rho > 0 and np.any(scenario.org_data > 0):
        if t_cap is None:
            raise UnboundedProblemError(
                "alpha = 0 makes the cost decrease forever in T; pass t_cap to bound it"
            )
        if t_cap < t_min:
            raise InfeasibleAllocationError(f"t_cap={t_cap} is below the minimum latency {t_min}")
        return float(t_cap), t_min

    def g(T):
        return g_of_T(T, scenario, receive_times, up_times, params=p)

    if g(t_min) >= 0:
        return t_min, t_min
    offset = t_min * 1e-12
    while g(t_min + offset) <= 0:
        offset *= 2.0
    return _bisect_root(g, t_min, t_min + offset, rtol), t_min


def solve(
    scenario: Scenario,
    powers,
    assignment,
    receive_times,
    *,
    params=None,
    t_cap: Optional[float] = None,
    pin_t_min: bool = False,
) -> LatencyFreqSolution:
    """Optimal latency bound and frequencies for fixed powers and subcarriers.

    ``params`` overrides the cost weights used for the optimization (the
    scenario's physical constants are always used). ``pin_t_min`` skips the
    trade-off and runs the bottleneck server at full speed.
    """
    powers = np.asarray(powers, dtype=float)
    if np.any(powers <= 0):
        raise InfeasibleAllocationError("zero transmit power gives an infinite upload time")
    t_up = upload_times(scenario, powers, assignment)
    if pin_t_min:
        T = t_min = compute_t_min(scenario, receive_times, t_up)
    else:
        T, t_min = optimal_T(scenario, receive_times, t_up, params=params, t_cap=t_cap)
    return LatencyFreqSolution(T, frequencies_for(T, scenario, receive_times, t_up), t_min)
