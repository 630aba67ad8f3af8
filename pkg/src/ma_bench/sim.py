"""
Seeded Monte Carlo engine.

Every trial realizes one slot: Poisson arrivals, uniform placements, then
the scheme's admission or random-access rules. Trial randomness comes from
substreams keyed on (master_seed, global trial index), so a sweep produces
bit-identical results no matter how its trials are ordered or spread over
workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .model import (COORDINATED, FDMA, NOMA, TDMA, UNCOORDINATED, DeviceSet,
                    SystemParams, TrafficModel, channel_gain, make_device_set,
                    sample_arrivals, sample_placement, trial_rng)
from . import coordinated as co
from . import uncoordinated as un


@dataclass(frozen=True)
class SchemeConfig:
    """What to simulate: a family, a scheme, and its knobs.

    For uncoordinated schemes the concrete broadcast design is load
    dependent; leave ``design`` unset and the sweep derives it per arrival
    rate (optimizer for fdma/tdma, power-control fixed point for noma).
    """

    family: str                                   # coordinated | uncoordinated
    scheme: str                                   # fdma | tdma | noma
    enforce_minimum: bool = False                 # coordinated partition minima
    design: un.UncoordinatedDesign | None = None
    noma_rule: str = un.NOMINAL

    def __post_init__(self):
        if self.family not in (COORDINATED, UNCOORDINATED):
            raise ValueError(f"unknown family {self.family!r}")
        if self.scheme not in (FDMA, TDMA, NOMA):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def tag(self) -> str:
        return f"{self.family}-{self.scheme}"


@dataclass(frozen=True)
class TrialOutcome:
    """One realized slot."""

    arrivals: int
    served: int
    scheme: str
    seed_substream: tuple[int, int]   # (master_seed, trial_index)


@dataclass(frozen=True)
class TrialStats:
    """Sample statistics over a batch of trials."""

    count: int
    mean_served: float
    std_served: float
    mean_throughput_pps: float
    ci95_halfwidth_pps: float


@dataclass(frozen=True)
class SweepRow:
    """One (scheme, arrival rate) result."""

    scheme: str
    lam: float                  # arrival rate, packets per second
    trials: int
    mean_throughput_pps: float
    ci95_halfwidth: float       # packets per second
    seed: int
    params_digest: str


def resolve_design(config: SchemeConfig, params: SystemParams,
                   traffic: TrafficModel) -> SchemeConfig:
    """Fill in the load-dependent broadcast design for uncoordinated runs."""
    if config.family != UNCOORDINATED or config.design is not None:
        return config
    if config.scheme == NOMA:
        design = un.noma_design(params, traffic, config.noma_rule)
    else:
        design = un.optimize_design(config.scheme, params, traffic)
    return replace(config, design=design)


def _coordinated_served(scheme: str, devices: DeviceSet, params: SystemParams,
                        enforce_minimum: bool) -> int:
    if scheme == FDMA:
        return co.fdma_kmax(devices, params, enforce_minimum).admitted
    if scheme == TDMA:
        return co.tdma_kmax(devices, params, enforce_minimum).admitted
    return co.noma_admitted_count(devices.gains, params)


def _random_access_served(design: un.UncoordinatedDesign, arrivals: int,
                          params: SystemParams, rng: np.random.Generator) -> int:
    """Realize one random-access slot and count delivered packets."""
    if design.scheme == NOMA:
        gains = channel_gain(sample_placement(arrivals, rng), params.pathloss_exp)
        transmitting = int(np.count_nonzero(params.ref_snr * gains >= design.target_snr))
        if transmitting and un.noma_supported(transmitting, design.target_snr, params):
            return transmitting
        return 0
    active = int(rng.binomial(arrivals, design.access_prob)) if arrivals else 0
    gains = channel_gain(sample_placement(active, rng), params.pathloss_exp)
    threshold = un.gain_threshold(design.scheme, design.partitions, params)
    transmitters = int(np.count_nonzero(gains >= threshold))
    picks = rng.integers(0, design.partitions, size=transmitters)
    occupancy = np.bincount(picks, minlength=design.partitions)
    return int(np.count_nonzero(occupancy == 1))


def run_trial(config: SchemeConfig, params: SystemParams, traffic: TrafficModel,
              trial_seed: tuple[int, int]) -> TrialOutcome:
    """Simulate one slot under the scheme's rules.

    Coordinated schemes serve their admitted prefix of the realized device
    set. Random-access schemes thin by the access probability, apply each
    device's own power-feasibility check, and resolve partition collisions
    (or the all-or-nothing cancellation outcome for noma).
    """
    rng = trial_rng(*trial_seed)
    arrivals = sample_arrivals(traffic, params.slot_s, rng)
    if config.family == COORDINATED:
        devices = make_device_set(arrivals, params, rng)
        served = _coordinated_served(config.scheme, devices, params,
                                     config.enforce_minimum)
    else:
        if config.design is None:
            raise ValueError("uncoordinated trial needs a concrete design; "
                             "see resolve_design")
        served = _random_access_served(config.design, arrivals, params, rng)
    return TrialOutcome(arrivals, served, config.tag, tuple(trial_seed))


def aggregate(outcomes: list[TrialOutcome], params: SystemParams) -> TrialStats:
    """Mean, sample standard deviation and normal 95% half-width."""
    if not outcomes:
        raise ValueError("no trial outcomes to aggregate")
    served = np.array([o.served for o in outcomes], dtype=float)
    n = served.size
    mean = float(served.mean())
    std = float(served.std(ddof=1)) if n > 1 else 0.0
    halfwidth = 1.96 * std / math.sqrt(n)
    return TrialStats(int(n), mean, std,
                      mean / params.slot_s, halfwidth / params.slot_s)


def _trial_block(config: SchemeConfig, params: SystemParams, traffic: TrafficModel,
                 master_seed: int, start: int, count: int) -> list[TrialOutcome]:
    return [run_trial(config, params, traffic, (master_seed, start + i))
            for i in range(count)]


def _block_bounds(total: int, workers: int) -> list[tuple[int, int]]:
    size = -(-total // workers)
    return [(start, min(size, total - start)) for start in range(0, total, size)]


def run_sweep(config: SchemeConfig, params: SystemParams, lambda_grid,
              trials: int, master_seed: int, workers: int = 1) -> list[SweepRow]:
    """One SweepRow per arrival rate.

    Trial substreams are keyed on the global trial index (point index *
    trials + trial), so equal inputs and master_seed give bit-identical rows
    for any worker count; per-point results are merged by index.
    """
    grid = [float(lam) for lam in lambda_grid]
    if not grid:
        raise ValueError("lambda_grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda_grid must be strictly increasing")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    rows = []
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for index, lam in enumerate(grid):
            traffic = TrafficModel(lam)
            concrete = resolve_design(config, params, traffic)
            base = index * trials
            if executor is None:
                outcomes = _trial_block(concrete, params, traffic, master_seed,
                                        base, trials)
            else:
                futures = [executor.submit(_trial_block, concrete, params, traffic,
                                           master_seed, base + start, count)
                           for start, count in _block_bounds(trials, workers)]
                outcomes = [out for future in futures for out in future.result()]
            stats = aggregate(outcomes, params)
            rows.append(SweepRow(concrete.tag, lam, trials,
                                 stats.mean_throughput_pps,
                                 stats.ci95_halfwidth_pps,
                                 master_seed, params.digest()))
    finally:
        if executor is not None:
            executor.shutdown()
    return rows


def analytic_rows(config: SchemeConfig, params: SystemParams, lambda_grid,
                  master_seed: int) -> list[SweepRow]:
    """Closed-form counterpart of run_sweep for uncoordinated schemes.

    Rows carry the scheme tag suffixed with ``-analytic`` and trials = 1 (a
    single deterministic evaluation). Coordinated schemes have no closed
    form and are rejected.
    """
    if config.family != UNCOORDINATED:
        raise ValueError("no closed-form throughput for coordinated schemes; "
                         "run the Monte Carlo sweep")
    rows = []
    for lam in lambda_grid:
        traffic = TrafficModel(float(lam))
        concrete = resolve_design(config, params, traffic)
        analysis = un.uncoordinated_throughput(concrete.design, params, traffic)
        rows.append(SweepRow(concrete.tag + "-analytic", float(lam), 1,
                             analysis.expected_success / params.slot_s, 0.0,
                             master_seed, params.digest()))
    return rows
