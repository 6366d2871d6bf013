import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from factories import scenario
from fedalloc import ResourceAllocator, joint_solve
from fedalloc.model import evaluate
from fedalloc.sim import GeneratorConfig, channel_key, layout_key, make_layout, realize


def test_params_round_trip_and_clone():
    est = ResourceAllocator(scheme="time_biased", max_outer_iterations=7, tau=0.5)
    params = est.get_params()
    assert params["scheme"] == "time_biased" and params["max_outer_iterations"] == 7 and params["tau"] == 0.5
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(scheme="proposed")
    assert est.scheme == "proposed"


def test_fit_matches_functional_api():
    sc = scenario(21)
    est = ResourceAllocator().fit(sc)
    ref = joint_solve(sc)
    assert est.cost_.c_total == ref.cost.c_total
    assert est.trace_ == ref.trace and est.n_iter_ == ref.iterations
    assert np.array_equal(est.predict().powers, ref.allocation.powers)
    assert est.score(sc) == -ref.cost.c_total


def test_fit_predict_and_score_on_new_channel():
    cfg = GeneratorConfig()
    layout = make_layout(cfg, layout_key(22))
    sc, other = realize(cfg, layout, channel_key(22, 0)), realize(cfg, layout, channel_key(22, 1))
    est = ResourceAllocator(scheme="EqualBandwidth")
    alloc = est.fit_predict(sc)
    assert est.score(other) == -evaluate(other, alloc).c_total


def test_unfitted_and_bad_input():
    with pytest.raises(NotFittedError):
        ResourceAllocator().predict()
    with pytest.raises(TypeError):
        ResourceAllocator().fit(np.zeros((3, 3)))
