import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factories import default_params, random_org
from fedalloc.bandwidth import equal_split, optimal_bandwidth
from fedalloc.model import InvalidArgumentError, Organization, Sensor, sensor_rate


def bisection_oracle(org, params):
    """Find the common finish time ``a`` with sum_k D_k / (a r_k) = B_j by bisection.

    ``r_k`` is each sensor's rate per hertz; each bandwidth is back-substituted
    from ``a`` afterwards.
    """
    r = sensor_rate(1.0, org.sensor_gains, params)
    D = org.sensor_data

    def excess(a):
        return np.sum(D / (a * r)) - params.sbs_bandwidth

    lo, hi = 1e-30, 1.0
    while excess(hi) > 0:
        hi *= 2
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    return D / (a * r), a


def upload_times(org, bw, params):
    return org.sensor_data / sensor_rate(bw, org.sensor_gains, params)


def test_single_sensor():
    params = default_params()
    org = Organization(0, [Sensor(2e6, 1e-8)], np.ones(params.num_orgs))
    sol = optimal_bandwidth(org, params)
    assert sol.per_sensor_bandwidth[0] == params.sbs_bandwidth
    expected = 2e6 / float(sensor_rate(params.sbs_bandwidth, 1e-8, params))
    assert sol.receive_time == pytest.approx(expected, rel=1e-14)


def test_symmetric_and_proportional_splits():
    params = default_params()
    same = Organization(0, [Sensor(1e6, 1e-8), Sensor(1e6, 1e-8)], np.ones(params.num_orgs))
    np.testing.assert_allclose(optimal_bandwidth(same, params).per_sensor_bandwidth,
                               [params.sbs_bandwidth / 2] * 2, rtol=1e-15)
    double = Organization(0, [Sensor(2e6, 1e-8), Sensor(1e6, 1e-8)], np.ones(params.num_orgs))
    np.testing.assert_allclose(optimal_bandwidth(double, params).per_sensor_bandwidth,
                               [2 * params.sbs_bandwidth / 3, params.sbs_bandwidth / 3], rtol=1e-15)


def test_twelve_sensor_org_matches_bisection():
    params = default_params()
    org = random_org(np.random.default_rng(12), params, 12)
    sol = optimal_bandwidth(org, params)
    bw, a = bisection_oracle(org, params)
    np.testing.assert_allclose(sol.per_sensor_bandwidth, bw, rtol=1e-9)
    assert sol.receive_time == pytest.approx(a, rel=1e-9)


def test_equal_finish_times_and_full_budget():
    params = default_params()
    rng = np.random.default_rng(3)
    for n in (1, 2, 7, 30):
        org = random_org(rng, params, n)
        sol = optimal_bandwidth(org, params)
        t = upload_times(org, sol.per_sensor_bandwidth, params)
        assert t.max() - t.min() <= 1e-9 * sol.receive_time
        assert sol.per_sensor_bandwidth.sum() == pytest.approx(params.sbs_bandwidth, rel=1e-12)
        assert np.all(sol.per_sensor_bandwidth > 0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 25), scale=st.floats(1e-3, 1e3))
def test_scaling_data_scales_receive_time(seed, n, scale):
    params = default_params()
    org = random_org(np.random.default_rng(seed), params, n)
    scaled = Organization(0, [Sensor(scale * s.data_size, s.channel_gain) for s in org.sensors],
                          org.uplink_gains)
    a, b = optimal_bandwidth(org, params), optimal_bandwidth(scaled, params)
    assert b.receive_time == pytest.approx(scale * a.receive_time, rel=1e-12)
    np.testing.assert_allclose(b.per_sensor_bandwidth, a.per_sensor_bandwidth, rtol=1e-12)


def test_moving_bandwidth_never_helps():
    params = default_params()
    rng = np.random.default_rng(4)
    for _ in range(20):
        org = random_org(rng, params, int(rng.integers(2, 20)))
        sol = optimal_bandwidth(org, params)
        for _ in range(20):
            i, k = rng.choice(len(org.sensors), 2, replace=False)
            bw = sol.per_sensor_bandwidth.copy()
            delta = rng.uniform(0.01, 0.99) * bw[i]
            bw[i] -= delta
            bw[k] += delta
            assert upload_times(org, bw, params).max() >= sol.receive_time


def test_empty_org_and_equal_split():
    params = default_params()
    empty = optimal_bandwidth(Organization(0, [], np.ones(params.num_orgs)), params)
    assert empty.receive_time == 0.0 and empty.per_sensor_bandwidth.size == 0

    org = random_org(np.random.default_rng(5), params, 6)
    eq = equal_split(org, params)
    np.testing.assert_allclose(eq.per_sensor_bandwidth, params.sbs_bandwidth / 6)
    assert eq.receive_time == pytest.approx(upload_times(org, eq.per_sensor_bandwidth, params).max(), rel=1e-15)
    assert eq.receive_time >= optimal_bandwidth(org, params).receive_time


def test_identical_sensors_make_equal_split_optimal():
    params = default_params()
    org = Organization(0, [Sensor(1e6, 3e-8)] * 5, np.ones(params.num_orgs))
    np.testing.assert_allclose(equal_split(org, params).per_sensor_bandwidth,
                               optimal_bandwidth(org, params).per_sensor_bandwidth, rtol=1e-15)


def test_nonpositive_snr_rejected():
    params = default_params(sensor_max_power=1e-300, noise_psd=1e300)
    org = Organization(0, [Sensor(1e6, 1e-300)], np.ones(params.num_orgs))
    with pytest.raises(InvalidArgumentError):
        optimal_bandwidth(org, params)
