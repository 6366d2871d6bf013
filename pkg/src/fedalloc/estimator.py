"""Estimator-style wrapper around :func:`fedalloc.solver.solve`.

A scenario plays the role of ``X``; there is no ``y``. ``fit`` solves the
allocation problem and ``predict`` returns the fitted allocation, so the usual
``get_params``/``set_params``/``clone`` machinery works for hyperparameter
sweeps over solver settings.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .model import Allocation, Scenario, evaluate
from .power import PENALTY, SCAOptions
from .solver import Scheme, SolverOptions, solve


class ResourceAllocator(BaseEstimator):
    """Joint resource allocation for one scenario.

    Parameters mirror :class:`SolverOptions` and :class:`SCAOptions`.

    Attributes
    ----------
    result_ : SolveResult
    allocation_ : Allocation
    cost_ : CostBreakdown
    trace_ : tuple of float
    n_iter_ : int
    """

    def __init__(
        self,
        scheme="proposed",
        outer_tolerance=None,
        outer_rtol=1e-6,
        max_outer_iterations=50,
        tau=None,
        beta=0.5,
        sigma=0.1,
        delta=1e-8,
        max_sca_iterations=200,
        rho_system_guaranteed=0.999,
        penalty=PENALTY,
        t_cap=None,
        init="cost",
    ):
        self.scheme = scheme
        self.outer_tolerance = outer_tolerance
        self.outer_rtol = outer_rtol
        self.max_outer_iterations = max_outer_iterations
        self.tau = tau
        self.beta = beta
        self.sigma = sigma
        self.delta = delta
        self.max_sca_iterations = max_sca_iterations
        self.rho_system_guaranteed = rho_system_guaranteed
        self.penalty = penalty
        self.t_cap = t_cap
        self.init = init

    def _options(self) -> SolverOptions:
        sca = SCAOptions(tau=self.tau, beta=self.beta, sigma=self.sigma,
                         delta=self.delta, max_iter=self.max_sca_iterations)
        return SolverOptions(
            outer_tolerance=self.outer_tolerance,
            outer_rtol=self.outer_rtol,
            max_outer_iterations=self.max_outer_iterations,
            sca=sca,
            rho_system_guaranteed=self.rho_system_guaranteed,
            penalty=self.penalty,
            t_cap=self.t_cap,
            init=self.init,
        )

    @staticmethod
    def _check_scenario(X) -> Scenario:
        if not isinstance(X, Scenario):
            raise TypeError(f"expected a Scenario, got {type(X).__name__}")
        return X

    def fit(self, X, y=None):
        scenario = self._check_scenario(X)
        result = solve(Scheme.parse(self.scheme), scenario, self._options())
        self.result_ = result
        self.allocation_ = result.allocation
        self.cost_ = result.cost
        self.trace_ = result.trace
        self.n_iter_ = result.iterations
        return self

    def predict(self, X=None) -> Allocation:
        check_is_fitted(self, "allocation_")
        return self.allocation_

    def fit_predict(self, X, y=None) -> Allocation:
        return self.fit(X).predict()

    def score(self, X, y=None) -> float:
        """Negated total cost of the fitted allocation on ``X`` (higher is better)."""
        check_is_fitted(self, "allocation_")
        return -evaluate(self._check_scenario(X), self.allocation_).c_total
