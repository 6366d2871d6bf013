"""JSON scenario files and solve results.

A scenario file has four sections::

    {
      "params":  {SystemParams fields},
      "orgs":    [{"id": 0, "position": [x, y]}, ...],
      "sensors": [{"org": 0, "data_size": 3e6, "position": [x, y]}, ...],
      "gains":   {"sensor": [...], "uplink": [[...], ...]},
      "seed": 7,
      "path_loss": {"reference_gain_db": -30, "exponent": 3.5}
    }

``gains`` (or either half of it) may be omitted, in which case the gains are
redrawn from the positions, ``path_loss`` and ``seed``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, fields, replace

import numpy as np

from .model import InvalidArgumentError, Organization, Scenario, Sensor, SystemParams
from .sim import GeneratorConfig, Layout, channel_key, realize


def scenario_to_dict(scenario: Scenario, seed=None, config: GeneratorConfig = None) -> dict:
    doc = {
        "params": asdict(scenario.params),
        "orgs": [{"id": org.id, "position": list(org.position) if org.position else None}
                 for org in scenario.orgs],
        "sensors": [
            {"org": j, "data_size": s.data_size, "position": list(s.position) if s.position else None}
            for j, org in enumerate(scenario.orgs) for s in org.sensors
        ],
        "gains": {
            "sensor": [s.channel_gain for org in scenario.orgs for s in org.sensors],
            "uplink": scenario.gain_matrix.tolist(),
        },
    }
    if seed is not None:
        doc["seed"] = seed
    if config is not None:
        doc["path_loss"] = {"reference_gain_db": config.reference_gain_db,
                            "exponent": config.path_loss_exponent}
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        names = {f.name for f in fields(SystemParams)}
        params = SystemParams(**{k: v for k, v in doc["params"].items() if k in names})
        org_docs = doc["orgs"]
        sensor_docs = doc["sensors"]
    except (KeyError, TypeError) as exc:
        raise InvalidArgumentError(f"malformed scenario document: {exc}") from exc

    J = params.num_orgs
    if len(org_docs) != J:
        raise InvalidArgumentError(f"params say {J} organizations but {len(org_docs)} are listed")
    per_org = [[] for _ in range(J)]
    for s in sensor_docs:
        per_org[int(s["org"])].append(s)
    gains = doc.get("gains") or {}
    sensor_gains = gains.get("sensor")
    uplink = gains.get("uplink")

    if sensor_gains is None or uplink is None:
        drawn = _redraw(doc, params, org_docs, per_org)
        if sensor_gains is None:
            sensor_gains = [s.channel_gain for org in drawn.orgs for s in org.sensors]
        if uplink is None:
            uplink = drawn.gain_matrix.tolist()

    flat_count = sum(len(group) for group in per_org)
    if len(sensor_gains) != flat_count:
        raise InvalidArgumentError("one sensor gain per sensor is required")
    uplink = np.asarray(uplink, dtype=float)
    if uplink.shape != (J, J):
        raise InvalidArgumentError(f"uplink gains must be {J}x{J}")

    orgs, k = [], 0
    for j, (odoc, group) in enumerate(zip(org_docs, per_org)):
        sensors = []
        for s in group:
            pos = tuple(s["position"]) if s.get("position") is not None else None
            sensors.append(Sensor(float(s["data_size"]), float(sensor_gains[k]), pos))
            k += 1
        pos = tuple(odoc["position"]) if odoc.get("position") is not None else None
        orgs.append(Organization(int(odoc.get("id", j)), sensors, uplink[j], pos))
    return Scenario(params, orgs)


def _redraw(doc, params, org_docs, per_org) -> Scenario:
    if "seed" not in doc:
        raise InvalidArgumentError("gains are missing and no seed is given to regenerate them")
    try:
        org_pos = np.array([o["position"] for o in org_docs], dtype=float)
        sensor_pos = tuple(np.array([s["position"] for s in group], dtype=float).reshape(-1, 2)
                           for group in per_org)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError("positions are required to regenerate gains") from exc
    pl = doc.get("path_loss", {})
    config = replace(
        GeneratorConfig(),
        num_orgs=params.num_orgs,
        reference_gain_db=pl.get("reference_gain_db", -30.0),
        path_loss_exponent=pl.get("exponent", 3.5),
    )
    data = [[float(s["data_size"]) for s in group] for group in per_org]
    return realize(config, Layout(org_pos, sensor_pos), channel_key(int(doc["seed"])), data)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: Scenario, path, seed=None, config=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario, seed, config), fh, indent=1)
        fh.write("\n")


def result_to_dict(result) -> dict:
    alloc, cost = result.allocation, result.cost
    doc = {
        "scheme": result.scheme.value,
        "feasible": result.feasible,
        "message": result.message,
        "iterations": result.iterations,
        "wall_time_s": result.wall_time,
        "trace": list(result.trace),
    }
    if alloc is not None:
        doc["allocation"] = {
            "sensor_bandwidths": [b.tolist() for b in alloc.sensor_bandwidths],
            "frequencies": alloc.frequencies.tolist(),
            "powers": alloc.powers.tolist(),
            "assignment": alloc.assignment.tolist(),
            "latency_bound": alloc.latency_bound,
        }
    if cost is not None:
        doc["cost"] = {
            "t_one": cost.t_one, "e_one": cost.e_one, "c_learn": cost.c_learn,
            "c_system": cost.c_system, "c_total": cost.c_total,
            "per_org": [asdict(o) for o in cost.per_org],
        }
    return doc
