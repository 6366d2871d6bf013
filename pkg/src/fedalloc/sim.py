"""Scenario generation and Monte Carlo sweeps with CSV/JSON result files."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .model import InvalidArgumentError, Organization, Scenario, Sensor, SystemParams
from .solver import Scheme, SolverOptions, solve


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class GeneratorConfig:
    num_orgs: int = 10
    area_radius: float = 500.0
    org_ring: tuple = (200.0, 500.0)
    sbs_radius: float = 50.0
    sensors_per_org: tuple = (10, 20)
    sensor_ring: tuple = (5.0, 50.0)
    sensor_data: float = 3e6
    model_size: float = 1e5
    sensor_power_dbm: float = 23.0
    sbs_power_dbm: float = 37.0
    mec_freq: float = 5e9
    noise_psd_dbm: float = -174.0
    kappa: float = 2e-29
    cycles_per_bit: float = 30.0
    mbs_bandwidth: float = 3.125e6
    sbs_bandwidth: float = 1e7
    waterfall_m: float = 0.023
    alpha: float = 0.5
    rho: float = 0.5
    reference_gain_db: float = -30.0
    path_loss_exponent: float = 3.5
    fading: bool = True

    def __post_init__(self):
        for name in ("area_radius", "sbs_radius", "sensor_data", "model_size", "mec_freq",
                     "kappa", "cycles_per_bit", "mbs_bandwidth", "sbs_bandwidth", "path_loss_exponent"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        for name in ("org_ring", "sensors_per_org", "sensor_ring"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi:
                raise InvalidArgumentError(f"{name} must satisfy 0 <= lo <= hi, got {(lo, hi)}")
        if self.org_ring[1] > self.area_radius:
            raise InvalidArgumentError("organizations must lie inside the area")
        if self.sensor_ring[1] > self.sbs_radius:
            raise InvalidArgumentError("sensors must lie inside the SBS cell")
        if self.num_orgs < 1 or self.sensors_per_org[1] < 1:
            raise InvalidArgumentError("need at least one organization and one sensor")

    def system_params(self) -> SystemParams:
        return SystemParams(
            num_orgs=self.num_orgs,
            mbs_total_bandwidth=self.mbs_bandwidth,
            noise_psd=dbm_to_watt(self.noise_psd_dbm),
            sensor_max_power=dbm_to_watt(self.sensor_power_dbm),
            sbs_max_power=dbm_to_watt(self.sbs_power_dbm),
            sbs_bandwidth=self.sbs_bandwidth,
            sbs_max_freq=self.mec_freq,
            switched_capacitance=self.kappa,
            cycles_per_bit=self.cycles_per_bit,
            model_size=self.model_size,
            waterfall_threshold=self.waterfall_m,
            alpha=self.alpha,
            rho=self.rho,
        )

    def path_gain(self, distance) -> np.ndarray:
        """Large-scale power gain at ``distance`` metres."""
        return db_to_linear(self.reference_gain_db) * np.asarray(distance, dtype=float) ** -self.path_loss_exponent


@dataclass(frozen=True)
class Layout:
    org_positions: np.ndarray
    sensor_positions: tuple


def _annulus(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    # Uniform over the annulus area, not over the radius.
    r = np.sqrt(rng.uniform(lo**2, hi**2, size=n))
    theta = rng.uniform(0.0, 2 * np.pi, size=n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _stream(key, j: int) -> np.random.Generator:
    key = (key,) if np.isscalar(key) else tuple(key)
    return np.random.default_rng(np.random.SeedSequence([*map(int, key), j]))


def make_layout(config: GeneratorConfig, seed) -> Layout:
    """Positions of SBSs and sensors.

    Organization ``j`` draws from its own stream, so a layout with more
    organizations extends a smaller one built from the same seed.
    """
    lo, hi = config.sensors_per_org
    orgs, sensors = [], []
    for j in range(config.num_orgs):
        rng = _stream(seed, j)
        centre = _annulus(rng, 1, *config.org_ring)[0]
        n = int(rng.integers(lo, hi + 1))
        orgs.append(centre)
        sensors.append(centre + _annulus(rng, n, *config.sensor_ring))
    return Layout(np.array(orgs), tuple(sensors))


def fading_power(rng: np.random.Generator, size) -> np.ndarray:
    """Rayleigh fading power: unit-mean exponential."""
    return rng.exponential(1.0, size=size)


def realize(config: GeneratorConfig, layout: Layout, seed, data_sizes=None) -> Scenario:
    """Draw one channel realization on a fixed layout."""
    J = len(layout.org_positions)
    if J != config.num_orgs:
        raise InvalidArgumentError("layout and config disagree on the number of organizations")
    orgs = []
    for j, (centre, positions) in enumerate(zip(layout.org_positions, layout.sensor_positions)):
        rng = _stream(seed, j)
        n = len(positions)
        fade_s = fading_power(rng, n) if config.fading else np.ones(n)
        fade_u = fading_power(rng, J) if config.fading else np.ones(J)
        sensor_gain = config.path_gain(np.linalg.norm(positions - centre, axis=1)) * fade_s
        uplink = config.path_gain(np.linalg.norm(centre)) * fade_u
        sizes = data_sizes[j] if data_sizes is not None else np.full(n, config.sensor_data)
        sensors = [Sensor(float(D), float(g), tuple(map(float, pos)))
                   for D, g, pos in zip(sizes, sensor_gain, positions)]
        orgs.append(Organization(j, sensors, uplink, tuple(map(float, centre))))
    return Scenario(config.system_params(), orgs)


def layout_key(seed: int) -> tuple:
    return (seed, 0)


def channel_key(seed: int, trial: int = 0) -> tuple:
    return (seed, 1, trial)


def generate_scenario(config: GeneratorConfig, seed: int) -> Scenario:
    """Scenario for ``seed``; identical to trial 0 of a sweep with that base seed."""
    if config.area_radius <= 0 or config.sbs_radius <= 0:
        raise InvalidArgumentError("degenerate geometry")
    return realize(config, make_layout(config, layout_key(seed)), channel_key(seed, 0))


class SweepParam(str, Enum):
    SBS_BANDWIDTH = "SbsBandwidth"
    SBS_MAX_POWER = "SbsMaxPower"
    SENSOR_DATA_SIZE = "SensorDataSize"
    ORG_COUNT = "OrgCount"
    MBS_BANDWIDTH = "MbsBandwidth"
    MEC_CAPACITY = "MecCapacity"
    RHO = "Rho"

    @classmethod
    def parse(cls, name) -> "SweepParam":
        if isinstance(name, cls):
            return name
        lookup = {p.value.lower(): p for p in cls}
        lookup.update({p.name.lower(): p for p in cls})
        key = str(name).strip().lower()
        if key not in lookup:
            raise InvalidArgumentError(f"unknown sweep parameter {name!r}")
        return lookup[key]


def apply_param(config: GeneratorConfig, param: SweepParam, value) -> GeneratorConfig:
    """Config with one swept parameter set; SBS power is given in dBm."""
    param = SweepParam.parse(param)
    if param is SweepParam.SBS_BANDWIDTH:
        return replace(config, sbs_bandwidth=float(value))
    if param is SweepParam.SBS_MAX_POWER:
        return replace(config, sbs_power_dbm=float(value))
    if param is SweepParam.SENSOR_DATA_SIZE:
        return replace(config, sensor_data=float(value))
    if param is SweepParam.ORG_COUNT:
        # Per-subcarrier bandwidth stays constant as organizations are added.
        per_carrier = config.mbs_bandwidth / config.num_orgs
        return replace(config, num_orgs=int(value), mbs_bandwidth=per_carrier * int(value))
    if param is SweepParam.MBS_BANDWIDTH:
        return replace(config, mbs_bandwidth=float(value))
    if param is SweepParam.MEC_CAPACITY:
        return replace(config, mec_freq=float(value))
    return replace(config, rho=float(value))


@dataclass(frozen=True)
class SweepSpec:
    parameter: SweepParam
    values: tuple
    trials: int = 1
    schemes: tuple = (Scheme.PROPOSED,)

    def __post_init__(self):
        object.__setattr__(self, "parameter", SweepParam.parse(self.parameter))
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))
        if not self.values:
            raise InvalidArgumentError("a sweep needs at least one value")
        diffs = np.diff(np.asarray(self.values, dtype=float))
        if not (np.all(diffs >= 0) or np.all(diffs <= 0)):
            raise InvalidArgumentError("sweep values must be monotone")
        if self.trials < 1:
            raise InvalidArgumentError("trials must be >= 1")
        if not self.schemes:
            raise InvalidArgumentError("at least one scheme is required")


FIELDS = ("trial", "scheme", "parameter", "value", "c_total", "c_system", "c_learn",
          "t_one", "e_one", "iterations", "wall_time_s")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    scheme: str
    parameter: str
    value: float
    c_total: float
    c_system: float
    c_learn: float
    t_one: float
    e_one: float
    iterations: int
    wall_time_s: float

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.c_total)


def _record(trial, scheme, parameter, value, result) -> TrialRecord:
    if result.feasible and result.cost is not None:
        c = result.cost
        costs = (c.c_total, c.c_system, c.c_learn, c.t_one, c.e_one)
    else:
        costs = (math.nan,) * 5
    return TrialRecord(trial, scheme.value, parameter, float(value), *map(float, costs),
                       int(result.iterations), float(result.wall_time))


def _run_item(item):
    config, layout, parameter, value, trial, base_seed, schemes, opts = item
    scenario = realize(config, layout, channel_key(base_seed, trial))
    return [_record(trial, s, parameter, value, solve(s, scenario, opts)) for s in schemes]


def default_workers() -> int:
    env = os.environ.get("FEDALLOC_THREADS")
    if env:
        workers = int(env)
        if workers < 1:
            raise InvalidArgumentError("FEDALLOC_THREADS must be >= 1")
        return workers
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, config: Optional[GeneratorConfig] = None, base_seed: int = 0,
              opts: Optional[SolverOptions] = None, workers: Optional[int] = None) -> list:
    """Run every scheme on every (value, trial) pair.

    Positions are drawn once per base seed; fading is redrawn per trial from a
    seed that depends only on the base seed and the trial index, so results
    never depend on scheduling.
    """
    config = config or GeneratorConfig()
    opts = opts or SolverOptions()
    items = []
    layouts = {}
    for value in spec.values:
        cfg = apply_param(config, spec.parameter, value)
        key = (cfg.num_orgs,)
        if key not in layouts:
            layouts[key] = make_layout(cfg, layout_key(base_seed))
        for trial in range(spec.trials):
            items.append((cfg, layouts[key], spec.parameter.value, value, trial, base_seed,
                          spec.schemes, opts))
    workers = workers or default_workers()
    if workers == 1 or len(items) == 1:
        chunks = map(_run_item, items)
        return [rec for chunk in chunks for rec in chunk]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = pool.map(_run_item, items, chunksize=max(1, len(items) // (4 * workers)))
        return [rec for chunk in chunks for rec in chunk]


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(records: Sequence[TrialRecord], fmt: str, path) -> None:
    """Write records as CSV or as a JSON array with the same fields."""
    if not records:
        raise InvalidArgumentError("no records to write")
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise InvalidArgumentError(f"unsupported format {fmt!r}")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if fmt == "csv":
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(FIELDS)
                for rec in records:
                    writer.writerow([_format(getattr(rec, f)) for f in FIELDS])
            else:
                rows = [{f: getattr(rec, f) for f in FIELDS} for rec in records]
                json.dump(rows, fh, indent=1, allow_nan=True)
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


_CASTS = {"trial": int, "iterations": int, "scheme": str, "parameter": str}


def read_records(path) -> list:
    """Parse a CSV or JSON results file back into records."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(text.splitlines()))
    return [TrialRecord(**{f: _CASTS.get(f, float)(row[f]) for f in FIELDS}) for row in rows]
