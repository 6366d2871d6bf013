"""Subcarrier assignment: per-link optimal power costs and an exact Hungarian solver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import power
from .model import InvalidArgumentError, Scenario, SystemParams


@dataclass(frozen=True)
class CostMatrix:
    values: np.ndarray
    powers: np.ndarray

    @property
    def infeasible(self) -> np.ndarray:
        return ~np.isfinite(self.powers)


@dataclass(frozen=True)
class Assignment:
    mapping: np.ndarray
    total_cost: float


def hungarian(matrix) -> Assignment:
    """Minimum-cost perfect matching of a square cost matrix.

    Shortest augmenting paths with row/column potentials, ``O(n^3)``. Rows are
    inserted in index order and column scans break ties toward the lowest
    index, so the result is deterministic.
    """
    cost = np.asarray(matrix, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1] or cost.shape[0] == 0:
        raise InvalidArgumentError(f"expected a non-empty square matrix, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise InvalidArgumentError("cost matrix entries must be finite")
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    row_of = np.zeros(n + 1, dtype=int)  # column -> row (1-based; 0 = free)
    way = np.zeros(n + 1, dtype=int)
    padded = np.zeros((n + 1, n + 1))
    padded[1:, 1:] = cost

    for i in range(1, n + 1):
        row_of[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_of[j0]
            free = ~used
            free[0] = False
            reduced = padded[i0] - u[i0] - v
            better = free & (reduced < minv)
            minv[better] = reduced[better]
            way[better] = j0
            candidates = np.where(free, minv, np.inf)
            j1 = int(np.argmin(candidates))
            delta = candidates[j1]
            u[row_of[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if row_of[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            row_of[j0] = row_of[j1]
            j0 = j1

    mapping = np.empty(n, dtype=int)
    mapping[row_of[1:] - 1] = np.arange(n)
    total = float(sum(cost[r, mapping[r]] for r in range(n)))
    return Assignment(mapping, total)


def compute_budgets(scenario: Scenario, T: float, frequencies, receive_times) -> np.ndarray:
    """Time left for the model upload of each org once reception and training finish."""
    p = scenario.params
    D = scenario.org_data
    f = np.asarray(frequencies, dtype=float)
    compute = np.zeros_like(D)
    active = D > 0
    compute[active] = p.cycles_per_bit * D[active] / f[active]
    return T - np.asarray(receive_times, dtype=float) - compute


def build_cost_matrix(
    scenario: Scenario,
    T: float,
    frequencies,
    receive_times,
    *,
    params: Optional[SystemParams] = None,
    options: Optional[power.SCAOptions] = None,
    warm_assignment=None,
    warm_powers=None,
    columns=None,
    penalty: float = power.PENALTY,
) -> CostMatrix:
    """Optimal-power cost of every (organization, subcarrier) pair.

    Pairs that cannot meet the latency bound even at full power get
    ``penalty``. Each organization's current subcarrier is warm-started from
    its current power; every other pair starts from ``p_max``. ``columns``
    restricts the evaluation to one subcarrier per organization (the rest are
    marked infeasible).
    """
    weights = params or scenario.params
    J = scenario.num_orgs
    G = scenario.gain_matrix
    budgets = compute_budgets(scenario, T, frequencies, receive_times)
    lo = power.min_power_array(budgets[:, None], G, scenario.params)
    if columns is not None:
        keep = np.zeros((J, J), dtype=bool)
        keep[np.arange(J), np.asarray(columns)] = True
        lo = np.where(keep, lo, np.inf)
    hi = np.full((J, J), scenario.params.sbs_max_power)
    start = hi.copy()
    if warm_assignment is not None:
        rows = np.arange(J)
        cols = np.asarray(warm_assignment)
        start[rows, cols] = np.asarray(warm_powers, dtype=float)
    a, b, c, d = power.coefficients(weights, scenario.org_data[:, None], G)
    powers, objective, _ = power.optimize_batch(a, b, c, d, lo, hi, np.maximum(start, np.minimum(lo, hi)), options)
    values = np.where(np.isfinite(objective), objective, penalty)
    return CostMatrix(values, np.where(np.isfinite(objective), powers, np.inf))
