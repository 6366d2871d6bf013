"""Joint bandwidth / frequency / power / subcarrier optimization and benchmark schemes."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import bandwidth, latency, subcarrier
from .model import Allocation, CostBreakdown, Scenario, SystemParams, evaluate, upload_times
from .power import PENALTY, SCAOptions, coefficients, link_cost

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    PROPOSED = "proposed"
    EQUAL_BANDWIDTH = "equal_bandwidth"
    LEARNING_GUARANTEED = "learning_guaranteed"
    GREEDY_SUBCARRIER = "greedy_subcarrier"
    SYSTEM_GUARANTEED = "system_guaranteed"
    TIME_BIASED = "time_biased"

    @classmethod
    def parse(cls, name) -> "Scheme":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "equalbandwidth": "equal_bandwidth",
            "learningguaranteed": "learning_guaranteed",
            "greedysubcarrier": "greedy_subcarrier",
            "systemguaranteed": "system_guaranteed",
            "timebiased": "time_biased",
        }
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {name!r}; choose from {choices}") from None


ALL_SCHEMES = tuple(Scheme)


@dataclass(frozen=True)
class SolverOptions:
    outer_tolerance: Optional[float] = None
    outer_rtol: float = 1e-6
    max_outer_iterations: int = 50
    sca: SCAOptions = field(default_factory=SCAOptions)
    rho_system_guaranteed: float = 0.999
    penalty: float = PENALTY
    seed: int = 0
    t_cap: Optional[float] = None
    init: str = "cost"

    def __post_init__(self):
        if self.outer_tolerance is not None and self.outer_tolerance <= 0:
            raise ValueError("outer_tolerance must be positive")
        if self.outer_rtol <= 0:
            raise ValueError("outer_rtol must be positive")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if self.init not in ("cost", "gain"):
            raise ValueError("init must be 'cost' or 'gain'")


@dataclass(frozen=True)
class SolveResult:
    allocation: Optional[Allocation]
    cost: Optional[CostBreakdown]
    trace: tuple
    iterations: int
    wall_time: float
    scheme: Scheme = Scheme.PROPOSED
    feasible: bool = True
    message: str = ""
    iteration_times: tuple = ()


def _gain_greedy_assignment(scenario: Scenario) -> np.ndarray:
    G = scenario.gain_matrix
    return subcarrier.hungarian(1.0 - G / G.max()).mapping


def _full_power_assignment(scenario: Scenario, weights: SystemParams) -> np.ndarray:
    """Subcarriers minimizing the summed link cost when every SBS transmits at full power."""
    p_max = scenario.params.sbs_max_power
    a, b, c, d = coefficients(weights, scenario.org_data[:, None], scenario.gain_matrix)
    return subcarrier.hungarian(link_cost(p_max, a, b, c, d)).mapping


def _initial_assignment(scenario: Scenario, weights: SystemParams, opts: SolverOptions) -> np.ndarray:
    if opts.init == "gain":
        return _gain_greedy_assignment(scenario)
    return _full_power_assignment(scenario, weights)


def _allocation(bw, lf, powers, assignment) -> Allocation:
    return Allocation(
        sensor_bandwidths=[s.per_sensor_bandwidth for s in bw],
        frequencies=lf.frequencies,
        powers=powers,
        assignment=assignment,
        latency_bound=lf.T,
    )


def _alternate(
    scenario: Scenario,
    weights: SystemParams,
    bw: list,
    opts: SolverOptions,
    *,
    assignment=None,
    fixed_assignment: bool = False,
    pin_t_min: bool = False,
    scheme: Scheme = Scheme.PROPOSED,
) -> SolveResult:
    """Alternate the latency/frequency step with the power/subcarrier step.

    ``weights`` carries the cost weights being optimized; the returned cost is
    evaluated under the scenario's own weights, while ``trace`` records the
    optimized objective after every accepted iteration.
    """
    start = time.perf_counter()
    J = scenario.num_orgs
    rows = np.arange(J)
    working = Scenario(weights, scenario.orgs)
    receive = np.array([s.receive_time for s in bw])
    C = _initial_assignment(scenario, weights, opts) if assignment is None else np.asarray(assignment)
    P = np.full(J, scenario.params.sbs_max_power)

    def tf_step(P, C):
        lf = latency.solve(scenario, P, C, receive, params=weights, t_cap=opts.t_cap, pin_t_min=pin_t_min)
        alloc = _allocation(bw, lf, P, C)
        return lf, alloc, evaluate(working, alloc).c_total

    lf, alloc, obj = tf_step(P, C)
    trace = [obj]
    tol = opts.outer_tolerance if opts.outer_tolerance is not None else opts.outer_rtol * abs(obj)
    iter_times = []
    feasible, message = True, ""

    for _ in range(opts.max_outer_iterations):
        t0 = time.perf_counter()
        cm = subcarrier.build_cost_matrix(
            scenario, lf.T, lf.frequencies, receive,
            params=weights, options=opts.sca,
            warm_assignment=C, warm_powers=P,
            columns=C if fixed_assignment else None,
            penalty=opts.penalty,
        )
        new_C = C if fixed_assignment else subcarrier.hungarian(cm.values).mapping
        if np.any(cm.infeasible[rows, new_C]):
            # The incumbent subcarriers always stay feasible, so this only
            # happens when the scenario itself is degenerate.
            feasible, message = False, "some organization has no subcarrier meeting the latency bound"
            iter_times.append(time.perf_counter() - t0)
            break
        new_P = cm.powers[rows, new_C]
        new_lf, new_alloc, new_obj = tf_step(new_P, new_C)
        iter_times.append(time.perf_counter() - t0)
        if new_obj > obj:
            logger.debug("outer step raised the objective by %.3g; keeping the incumbent", new_obj - obj)
            break
        change = obj - new_obj
        C, P, lf, alloc, obj = new_C, new_P, new_lf, new_alloc, new_obj
        trace.append(obj)
        if change < tol:
            break

    cost = evaluate(scenario, alloc)
    return SolveResult(alloc, cost, tuple(trace), len(iter_times), time.perf_counter() - start,
                       scheme, feasible, message, tuple(iter_times))


def joint_solve(scenario: Scenario, opts: Optional[SolverOptions] = None) -> SolveResult:
    """Proposed joint optimization: optimal bandwidth, then alternate (T, F) and (P, C)."""
    opts = opts or SolverOptions()
    return _alternate(scenario, scenario.params, bandwidth.allocate(scenario), opts)


def _time_biased(scenario: Scenario, opts: SolverOptions) -> SolveResult:
    start = time.perf_counter()
    p = scenario.params
    J = scenario.num_orgs
    bw = bandwidth.allocate(scenario)
    P = np.full(J, p.sbs_max_power)
    F = np.full(J, p.sbs_max_freq)
    C = _full_power_assignment(scenario, p)
    receive = np.array([s.receive_time for s in bw])
    t_up = upload_times(scenario, P, C)
    T = float(np.max(receive + p.cycles_per_bit * scenario.org_data / F + t_up))
    alloc = _allocation(bw, latency.LatencyFreqSolution(T, F, T), P, C)
    cost = evaluate(scenario, alloc)
    elapsed = time.perf_counter() - start
    return SolveResult(alloc, cost, (cost.c_total,), 1, elapsed, Scheme.TIME_BIASED, True, "", (elapsed,))


def solve(scheme, scenario: Scenario, opts: Optional[SolverOptions] = None) -> SolveResult:
    """Run ``scheme`` on ``scenario``; every result is costed under the scenario's weights."""
    scheme = Scheme.parse(scheme)
    opts = opts or SolverOptions()
    p = scenario.params
    if scheme is Scheme.PROPOSED:
        return joint_solve(scenario, opts)
    if scheme is Scheme.EQUAL_BANDWIDTH:
        bw = [bandwidth.equal_split(org, p) for org in scenario.orgs]
        return _alternate(scenario, p, bw, opts, scheme=scheme)
    if scheme is Scheme.LEARNING_GUARANTEED:
        return _alternate(scenario, p.replace(rho=0.0), bandwidth.allocate(scenario), opts,
                          pin_t_min=True, scheme=scheme)
    if scheme is Scheme.GREEDY_SUBCARRIER:
        return _alternate(scenario, p, bandwidth.allocate(scenario), opts,
                          assignment=_gain_greedy_assignment(scenario), fixed_assignment=True,
                          scheme=scheme)
    if scheme is Scheme.SYSTEM_GUARANTEED:
        return _alternate(scenario, p.replace(rho=opts.rho_system_guaranteed),
                          bandwidth.allocate(scenario), opts, scheme=scheme)
    return _time_biased(scenario, opts)
