"""SBS transmit power on a given subcarrier by successive convex approximation.

Per organization and subcarrier the cost of a power ``p`` is::

    h(p) = a * p / log2(1 + b*p) + c * (1 - exp(-d / p))

(upload energy plus packet-error-weighted data). The surrogate at ``p_prev`` is
the first-order expansion plus ``tau/2 * (p - p_prev)**2``; its box-constrained
minimizer gives a search direction along which an Armijo backtracking step is
taken. The core loop is vectorized so a whole cost matrix is solved at once.

``tau`` is either a fixed positive constant or, by default, matched to the
local curvature of ``h`` at every iterate (floored so the unconstrained step
never exceeds the box width). At the scales of a typical network ``h'`` is of
order ``1e-3`` per watt, so ``tau = 1`` would crawl for thousands of steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import LN2, InvalidArgumentError, SystemParams

PENALTY = 1e12


@dataclass(frozen=True)
class SCAOptions:
    tau: Optional[float] = None
    beta: float = 0.5
    sigma: float = 0.1
    delta: float = 1e-8
    max_iter: int = 200
    max_backtracks: int = 60

    def __post_init__(self):
        if self.tau is not None and not self.tau > 0:
            raise InvalidArgumentError("tau must be positive (or None for curvature matching)")
        if not 0 < self.beta < 1:
            raise InvalidArgumentError("beta must lie in (0, 1)")
        if not 0 < self.sigma < 0.5:
            raise InvalidArgumentError("sigma must lie in (0, 0.5)")
        if self.delta <= 0 or self.max_iter < 1:
            raise InvalidArgumentError("delta must be positive and max_iter >= 1")


@dataclass(frozen=True)
class PowerProblem:
    a: float
    b: float
    c: float
    d: float
    p_min: float
    p_max: float
    options: SCAOptions = field(default_factory=SCAOptions)

    def __post_init__(self):
        if self.a < 0 or self.c < 0:
            raise InvalidArgumentError("a and c must be nonnegative")
        if not (self.b > 0 and self.d > 0):
            raise InvalidArgumentError("b and d must be positive")

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.p_min) and self.p_min <= self.p_max

    @classmethod
    def for_link(cls, params: SystemParams, org_data: float, gain: float, p_lo: float,
                 p_hi: float = None, options: SCAOptions = None) -> "PowerProblem":
        """Coefficients for one organization on one subcarrier under ``params``' weights."""
        a, b, c, d = coefficients(params, org_data, gain)
        return cls(float(a), float(b), float(c), float(d), p_lo,
                   params.sbs_max_power if p_hi is None else p_hi,
                   options or SCAOptions())


@dataclass(frozen=True)
class PowerResult:
    power: float
    objective: float
    iterations: int
    feasible: bool


def coefficients(params: SystemParams, org_data, gain):
    B, N0 = params.subcarrier_bandwidth, params.noise_psd
    gain = np.asarray(gain, dtype=float)
    org_data = np.asarray(org_data, dtype=float)
    a = params.rho * (1 - params.alpha) * params.model_size / B
    b = gain / (B * N0)
    c = (1 - params.rho) * org_data
    d = params.waterfall_threshold * B * N0 / gain
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    return a, b, c, d


def min_power_array(budget, gain, params: SystemParams) -> np.ndarray:
    """Smallest power finishing the model upload within ``budget`` seconds.

    Non-positive budgets and powers above the SBS cap come back as ``inf``.
    """
    B, N0 = params.subcarrier_bandwidth, params.noise_psd
    budget = np.asarray(budget, dtype=float)
    gain = np.asarray(gain, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        exponent = params.model_size / (B * budget)
        pmin = B * N0 / gain * np.expm1(LN2 * exponent)
    pmin = np.where(budget > 0, pmin, np.inf)
    p_max = params.sbs_max_power
    # A budget met exactly at p_max may round a hair above it.
    pmin = np.where((pmin > p_max) & (pmin <= p_max * (1 + 1e-9)), p_max, pmin)
    return np.where(pmin <= p_max, pmin, np.inf)


def p_min(T, receive_time, frequency, gain, org_data, params: SystemParams):
    """Minimum power meeting latency bound ``T``, or ``None`` if the link cannot."""
    compute = params.cycles_per_bit * org_data / frequency if org_data > 0 else 0.0
    value = float(min_power_array(T - receive_time - compute, gain, params))
    return value if math.isfinite(value) else None


def link_cost(p, a, b, c, d):
    """Vectorized ``h(p)`` for raw coefficient arrays."""
    return a * p / (np.log1p(b * p) / LN2) - c * np.expm1(-d / p)


def _h_prime(p, a, b, c, d):
    bp = b * p
    log2 = np.log1p(bp) / LN2
    energy = (a * log2 - a * bp / ((1 + bp) * LN2)) / log2**2
    return energy - c * d / p**2 * np.exp(-d / p)


def _h_second(p, a, b, c, d):
    bp = b * p
    log2 = np.log1p(bp) / LN2
    dlog = b / ((1 + bp) * LN2)
    d2log = -b * b / ((1 + bp) ** 2 * LN2)
    energy = -2 * a * dlog / log2**2 - a * p * d2log / log2**2 + 2 * a * p * dlog**2 / log2**3
    error = c * np.exp(-d / p) * (2 * d / p**3 - d * d / p**4)
    return energy + error


def _curvature_tau(p, grad, a, b, c, d, lo, hi):
    """Surrogate weight matching ``h''`` at ``p``, floored to keep steps inside the box."""
    width = np.maximum(hi - lo, np.finfo(float).tiny)
    with np.errstate(over="ignore"):
        # a collapsed box gives tau = inf, i.e. no step
        floor = np.maximum(np.abs(grad) / width, np.finfo(float).tiny)
    return np.maximum(_h_second(p, a, b, c, d), floor)


def _check_power(p):
    if np.any(~(np.asarray(p) > 0)):
        raise InvalidArgumentError("power must be positive")


def objective_h(p, prob: PowerProblem):
    _check_power(p)
    return link_cost(np.asarray(p, dtype=float), prob.a, prob.b, prob.c, prob.d)


def objective_h_prime(p, prob: PowerProblem):
    _check_power(p)
    return _h_prime(np.asarray(p, dtype=float), prob.a, prob.b, prob.c, prob.d)


def surrogate_tau(p_prev, prob: PowerProblem) -> float:
    """Surrogate weight in force at ``p_prev``."""
    if prob.options.tau is not None:
        return prob.options.tau
    grad = objective_h_prime(p_prev, prob)
    return float(_curvature_tau(np.asarray(p_prev, dtype=float), grad, prob.a, prob.b, prob.c, prob.d,
                                prob.p_min, prob.p_max))


def surrogate_g(p, p_prev, prob: PowerProblem):
    tau = surrogate_tau(p_prev, prob)
    step = np.asarray(p, dtype=float) - p_prev
    return objective_h(p_prev, prob) + objective_h_prime(p_prev, prob) * step + 0.5 * tau * step**2


def surrogate_argmin(p_prev, prob: PowerProblem):
    tau = surrogate_tau(p_prev, prob)
    return np.clip(p_prev - objective_h_prime(p_prev, prob) / tau, prob.p_min, prob.p_max)


def optimize_batch(a, b, c, d, lo, hi, p_init, options: SCAOptions = None):
    """Run the SCA iteration on many independent problems.

    Returns ``(power, objective, iterations)`` arrays. Problems with an
    infeasible box (``lo > hi`` or ``lo`` infinite) get ``nan`` power, zero
    iterations and an infinite objective.
    """
    opts = options or SCAOptions()
    arrays = np.broadcast_arrays(a, b, c, d, lo, hi, p_init)
    shape = arrays[0].shape
    a, b, c, d, lo, hi, p = (np.array(x, dtype=float).ravel() for x in arrays)
    lo = np.maximum(lo, np.finfo(float).tiny)
    feasible = np.isfinite(lo) & (lo <= hi)
    p = np.where(feasible, np.clip(p, lo, hi), np.nan)
    iterations = np.zeros(p.shape, dtype=int)
    active = feasible.copy()

    for _ in range(opts.max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        pa, aa, ba, ca, da = p[idx], a[idx], b[idx], c[idx], d[idx]
        h0 = link_cost(pa, aa, ba, ca, da)
        g0 = _h_prime(pa, aa, ba, ca, da)
        if opts.tau is None:
            tau = _curvature_tau(pa, g0, aa, ba, ca, da, lo[idx], hi[idx])
        else:
            tau = opts.tau
        direction = np.clip(pa - g0 / tau, lo[idx], hi[idx]) - pa
        slope = g0 * direction
        step = np.ones_like(pa)
        ok = link_cost(pa + direction, aa, ba, ca, da) <= h0 + opts.sigma * slope
        for _ in range(opts.max_backtracks):
            bad = ~ok
            if not bad.any():
                break
            step[bad] *= opts.beta
            trial = pa[bad] + step[bad] * direction[bad]
            ok[bad] = link_cost(trial, aa[bad], ba[bad], ca[bad], da[bad]) <= h0[bad] + opts.sigma * step[bad] * slope[bad]
        step[~ok] = 0.0
        new = np.clip(pa + step * direction, lo[idx], hi[idx])
        iterations[idx] += 1
        moved = np.abs(new - pa)
        p[idx] = new
        active[idx[moved < opts.delta]] = False

    objective = np.full(p.shape, np.inf)
    objective[feasible] = link_cost(p[feasible], a[feasible], b[feasible], c[feasible], d[feasible])
    return p.reshape(shape), objective.reshape(shape), iterations.reshape(shape)


def optimize(prob: PowerProblem, p_init: float = None) -> PowerResult:
    """Minimize ``h`` over ``[p_min, p_max]``; defaults to starting at ``p_max``."""
    if not prob.feasible:
        return PowerResult(float("nan"), PENALTY, 0, False)
    start = prob.p_max if p_init is None else p_init
    if not prob.p_min <= start <= prob.p_max:
        raise InvalidArgumentError(f"p_init={start} lies outside [{prob.p_min}, {prob.p_max}]")
    p, obj, it = optimize_batch(prob.a, prob.b, prob.c, prob.d, prob.p_min, prob.p_max, start, prob.options)
    return PowerResult(float(p), float(obj), int(it), True)
