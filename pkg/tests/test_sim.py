import json
import math
from dataclasses import replace

import numpy as np
import pytest

from fedalloc.model import InvalidArgumentError
from fedalloc.serialization import load_scenario, save_scenario, scenario_from_dict, scenario_to_dict
from fedalloc.sim import (
    FIELDS,
    GeneratorConfig,
    SweepSpec,
    TrialRecord,
    apply_param,
    default_workers,
    dbm_to_watt,
    emit,
    fading_power,
    generate_scenario,
    make_layout,
    read_records,
    realize,
    run_sweep,
)


def _records(n):
    return [TrialRecord(i, "proposed", "Rho", 0.5, 1.0 / (i + 3), 0.1 * i, 2.0 + i, 0.3, 1e-3 * i, i % 4, 0.01)
            for i in range(n)]


def test_unit_conversions():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert dbm_to_watt(-174.0) == pytest.approx(3.981071705534969e-21, rel=1e-12)


def test_default_config_values():
    p = GeneratorConfig().system_params()
    assert p.sbs_max_power == pytest.approx(5.011872336272722)
    assert p.sensor_max_power == pytest.approx(0.19952623149688797)
    assert p.subcarrier_bandwidth == pytest.approx(312500.0)
    assert (p.sbs_max_freq, p.switched_capacitance, p.cycles_per_bit, p.model_size) == (5e9, 2e-29, 30.0, 1e5)


def test_generation_is_deterministic_and_geometric():
    cfg = GeneratorConfig()
    a, b = generate_scenario(cfg, 42), generate_scenario(cfg, 42)
    assert np.array_equal(a.gain_matrix, b.gain_matrix)
    assert [s.channel_gain for o in a.orgs for s in o.sensors] == [s.channel_gain for o in b.orgs for s in o.sensors]
    for org in a.orgs:
        r = math.hypot(*org.position)
        assert 200 <= r <= 500
        assert 10 <= len(org.sensors) <= 20
        for s in org.sensors:
            assert 5 <= math.dist(s.position, org.position) <= 50
    assert not np.array_equal(a.gain_matrix, generate_scenario(cfg, 43).gain_matrix)


def test_without_fading_gain_falls_with_distance():
    cfg = replace(GeneratorConfig(), fading=False)
    sc = generate_scenario(cfg, 1)
    for org in sc.orgs:
        dist = np.array([math.dist(s.position, org.position) for s in org.sensors])
        order = np.argsort(dist)
        assert np.all(np.diff(org.sensor_gains[order]) <= 0)
    dist = np.array([math.hypot(*o.position) for o in sc.orgs])
    gain = sc.gain_matrix[:, 0][np.argsort(dist)]
    assert np.all(np.diff(gain) < 0)


def test_fading_statistics():
    rng = np.random.default_rng(0)
    draws = fading_power(rng, 100_000)
    assert abs(draws.mean() - 1.0) < 0.01
    cfg = GeneratorConfig()
    layout = make_layout(cfg, (0, 0))
    pairs = np.array([realize(cfg, layout, (0, 1, t)).gain_matrix[0, :2] for t in range(10_000)])
    assert abs(np.corrcoef(pairs.T)[0, 1]) < 0.05


def test_layouts_nest_across_org_counts():
    small = make_layout(replace(GeneratorConfig(), num_orgs=4), (5, 0))
    big = make_layout(replace(GeneratorConfig(), num_orgs=8), (5, 0))
    assert np.array_equal(small.org_positions, big.org_positions[:4])


def test_degenerate_config_rejected():
    with pytest.raises(InvalidArgumentError):
        GeneratorConfig(area_radius=0.0)
    with pytest.raises(InvalidArgumentError):
        GeneratorConfig(sensor_ring=(60.0, 10.0))


def test_apply_param_org_count_keeps_subcarrier_width():
    cfg = GeneratorConfig()
    bigger = apply_param(cfg, "OrgCount", 20)
    assert bigger.system_params().subcarrier_bandwidth == pytest.approx(cfg.system_params().subcarrier_bandwidth)
    assert apply_param(cfg, "SbsMaxPower", 30).sbs_power_dbm == 30


def test_sweep_spec_validation():
    with pytest.raises(InvalidArgumentError):
        SweepSpec("Rho", [0.1, 0.5, 0.3])
    with pytest.raises(InvalidArgumentError):
        SweepSpec("Rho", [])
    with pytest.raises(InvalidArgumentError):
        SweepSpec("Speed", [1])


def test_single_record_sweep_and_two_line_csv(tmp_path):
    records = run_sweep(SweepSpec("Rho", [0.5], 1, ["proposed"]), base_seed=3, workers=1)
    assert len(records) == 1 and records[0].feasible
    path = tmp_path / "one.csv"
    emit(records, "csv", path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2 and lines[0] == ",".join(FIELDS)


def test_first_trial_matches_generated_scenario():
    from fedalloc.solver import solve

    rec = run_sweep(SweepSpec("Rho", [0.5], 1, ["proposed"]), base_seed=9, workers=1)[0]
    assert rec.c_total == solve("proposed", generate_scenario(GeneratorConfig(), 9)).cost.c_total


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_emit_round_trip(tmp_path, fmt):
    records = _records(25)
    path = tmp_path / f"r.{fmt}"
    emit(records, fmt, path)
    assert read_records(path) == records


def test_row_count_and_bit_stability(tmp_path):
    records = _records(1500)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(records, "csv", a)
    emit(records, "csv", b)
    assert len(a.read_text().splitlines()) == 1501
    assert a.read_bytes() == b.read_bytes()


def test_unwritable_path_names_the_path(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        emit(_records(1), "csv", bad)


def test_infeasible_results_are_flagged():
    rec = TrialRecord(0, "proposed", "Rho", 0.5, math.nan, math.nan, math.nan, math.nan, math.nan, 1, 0.0)
    assert not rec.feasible


def test_parallel_and_serial_sweeps_agree(monkeypatch):
    spec = SweepSpec("SbsBandwidth", [5e6, 1e7], 3, ["proposed", "time_biased"])
    serial = run_sweep(spec, base_seed=2, workers=1)
    parallel = run_sweep(spec, base_seed=2, workers=2)
    strip = [replace(r, wall_time_s=0.0) for r in serial]
    assert strip == [replace(r, wall_time_s=0.0) for r in parallel]
    monkeypatch.setenv("FEDALLOC_THREADS", "3")
    assert default_workers() == 3


def test_org_count_trend():
    # one layout is too few for the trend to show through the fading; average over ten
    cfg = GeneratorConfig()
    counts = [4, 6, 8, 10]
    means = np.zeros(len(counts))
    for layout_seed in range(10):
        recs = run_sweep(SweepSpec("OrgCount", counts, 10, ["proposed"]), cfg, base_seed=layout_seed, workers=1)
        for k, J in enumerate(counts):
            means[k] += np.mean([r.c_total for r in recs if r.value == J])
    assert np.all(np.diff(means) >= 0), means


def test_scenario_file_round_trip(tmp_path):
    cfg = GeneratorConfig()
    sc = generate_scenario(cfg, 7)
    path = tmp_path / "s.json"
    save_scenario(sc, path, seed=7, config=cfg)
    back = load_scenario(path)
    assert np.array_equal(back.gain_matrix, sc.gain_matrix)
    assert back.params == sc.params
    assert set(json.loads(path.read_text())) >= {"params", "orgs", "sensors", "gains"}


def test_missing_gains_regenerated_from_seed():
    cfg = GeneratorConfig()
    sc = generate_scenario(cfg, 8)
    doc = scenario_to_dict(sc, seed=8, config=cfg)
    del doc["gains"]
    back = scenario_from_dict(doc)
    assert np.array_equal(back.gain_matrix, sc.gain_matrix)
    assert [s.channel_gain for o in back.orgs for s in o.sensors] == [
        s.channel_gain for o in sc.orgs for s in o.sensors]
    del doc["seed"]
    with pytest.raises(InvalidArgumentError):
        scenario_from_dict(doc)


def test_malformed_scenario_document():
    with pytest.raises(InvalidArgumentError):
        scenario_from_dict({"orgs": []})
