"""
Full-CSI resource allocation for one slot.

Given the realized channel gains, each scheme admits as many devices as the
slot supports: FDMA hands every device the smallest subchannel that carries
its packet, TDMA the smallest time share, and superposition (NOMA) stacks
all devices on the full band with the minimal power staircase that keeps
every successive-cancellation stage decodable. Devices are admitted
strongest gain first, since weaker devices always need more resource.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import FDMA, NOMA, TDMA, DeviceSet, Infeasible, SystemParams

_LN2 = math.log(2.0)

# Resource budgets are only defined to the root-finder's residual, and long
# cumulative sums accumulate rounding; compare against the budget with this
# relative slack so exactly-filling allocations are admitted.
_BUDGET_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CoordinatedAllocation:
    """Per-device resource assignment for the admitted prefix."""

    scheme: str             # fdma | tdma | noma
    admitted: int
    gains: np.ndarray       # admitted devices, strongest first
    resources: np.ndarray   # Hz (fdma), seconds (tdma), power fraction (noma)

    @property
    def per_device(self) -> list[tuple[float, float]]:
        return list(zip(self.gains.tolist(), self.resources.tolist()))


def _deliverable_bits_limit(gains: np.ndarray, params: SystemParams) -> np.ndarray:
    """Bits deliverable in one slot as the subchannel grows without bound:
    slot_s * ref_snr * bandwidth_hz * gain / ln 2."""
    return params.slot_s * params.ref_snr * params.bandwidth_hz * gains / _LN2


def min_bandwidth_array(gains: np.ndarray, params: SystemParams) -> np.ndarray:
    """Smallest subchannel (Hz) carrying one packet for each gain.

    Solves  payload = w * slot_s * log2(1 + ref_snr * (W/w) * gain)  by
    bisection; the left side of the residual is strictly increasing in w.
    Entries whose capacity limit falls below the payload come back as inf.
    """
    g = np.asarray(gains, dtype=float)
    if g.size == 0:
        return np.empty(0)
    out = np.full(g.shape, np.inf)
    feasible = params.payload_bits < _deliverable_bits_limit(g, params)
    if not feasible.any():
        return out

    power_term = params.ref_snr * params.bandwidth_hz * g[feasible]
    payload = params.payload_bits
    slot = params.slot_s

    def shortfall(w):
        return w * slot * np.log1p(power_term / w) / _LN2 - payload

    lo = np.full(power_term.shape, 1e-6 * params.bandwidth_hz)
    while True:
        high_side = shortfall(lo) >= 0
        if not high_side.any():
            break
        lo[high_side] *= 0.25
    hi = np.full(power_term.shape, params.bandwidth_hz)
    while True:
        low_side = shortfall(hi) < 0
        if not low_side.any():
            break
        hi[low_side] *= 4.0
    for _ in range(200):
        if np.all(np.nextafter(lo, hi) >= hi):
            break
        mid = 0.5 * (lo + hi)
        enough = shortfall(mid) >= 0
        hi = np.where(enough, mid, hi)
        lo = np.where(enough, lo, mid)
    # hi is the smallest bracketed width that delivers the payload
    out[feasible] = hi
    return out


def fdma_min_bandwidth(gain: float, params: SystemParams) -> float:
    """Smallest subchannel (Hz) over which one device delivers its packet.

    Raises Infeasible when even an unbounded subchannel cannot carry the
    payload (the capacity limit slot_s * ref_snr * W * gain / ln 2 is below
    the packet size).
    """
    if gain < 1.0:
        raise ValueError("gain must be >= 1 (device inside the cell)")
    w = float(min_bandwidth_array(np.array([gain]), params)[0])
    if not np.isfinite(w):
        raise Infeasible(
            f"payload {params.payload_bits} bits exceeds the capacity limit "
            f"{float(_deliverable_bits_limit(np.array([gain]), params)[0]):.6g} bits")
    return w


def tdma_min_time(gain: float, params: SystemParams) -> float:
    """Smallest time share (s) for one device at full power on the full band:
    payload / (W * log2(1 + ref_snr * gain))."""
    snr = params.ref_snr * gain
    if snr <= 0:
        raise ValueError("ref_snr * gain must be > 0")
    return params.payload_bits * _LN2 / (params.bandwidth_hz * math.log1p(snr))


def _min_time_array(gains: np.ndarray, params: SystemParams) -> np.ndarray:
    return params.payload_bits * _LN2 / (
        params.bandwidth_hz * np.log1p(params.ref_snr * np.asarray(gains, dtype=float)))


def _greedy_admit(gains: np.ndarray, params: SystemParams, budget: float,
                  minimum: float, per_device, chunk: int = 4096):
    """Admit strongest-first while the running resource sum fits the budget.

    ``per_device`` maps a gain chunk to its resource demand (nondecreasing as
    gains fall, so the first device that does not fit ends the admission).
    Demands below ``minimum`` are padded up to it. Returns (count, resources).
    """
    taken = []
    used = 0.0
    limit = budget * (1.0 + _BUDGET_TOL)
    count = 0
    for start in range(0, gains.size, chunk):
        demand = per_device(gains[start:start + chunk], params)
        if minimum > 0.0:
            demand = np.maximum(demand, minimum)
        running = used + np.cumsum(demand)
        fit = int(np.searchsorted(running, limit, side="right"))
        if fit:
            taken.append(demand[:fit])
            count += fit
        if fit < demand.size:
            break
        used = float(running[-1])
    resources = np.concatenate(taken) if taken else np.empty(0)
    return count, resources


def fdma_kmax(devices: DeviceSet, params: SystemParams,
              enforce_minimum: bool = False) -> CoordinatedAllocation:
    """Largest device prefix whose minimal subchannels fit in the band.

    With enforce_minimum, every subchannel is padded up to
    min_subchannel_hz, which also caps the count at
    bandwidth_hz / min_subchannel_hz."""
    minimum = params.min_subchannel_hz if enforce_minimum else 0.0
    count, resources = _greedy_admit(
        devices.gains, params, params.bandwidth_hz, minimum, min_bandwidth_array)
    return CoordinatedAllocation(FDMA, count, devices.gains[:count], resources)


def tdma_kmax(devices: DeviceSet, params: SystemParams,
              enforce_minimum: bool = False) -> CoordinatedAllocation:
    """Largest device prefix whose minimal time shares fit in the slot."""
    minimum = params.min_slot_s if enforce_minimum else 0.0
    count, resources = _greedy_admit(
        devices.gains, params, params.slot_s, minimum, _min_time_array)
    return CoordinatedAllocation(TDMA, count, devices.gains[:count], resources)


def noma_power_allocation(devices: DeviceSet, params: SystemParams) -> np.ndarray:
    """Minimal power fractions for all devices of the set under successive
    cancellation, decoded strongest first.

    Working backwards from the last-decoded device, every stage must clear
    the single-packet SNR floor over the interference of the stages after
    it, which gives

        power_i = 2**((K - i) * spectral_load) * snr_floor / (ref_snr * gain_i)

    Values above 1 mean the stack is not realizable; the caller judges.
    """
    k = len(devices)
    if k < 1:
        raise ValueError("power allocation needs at least one device")
    stage = np.arange(k, 0, -1) - 1   # K - i for i = 1..K
    return (2.0 ** (stage * params.spectral_load)) * params.snr_floor / (
        params.ref_snr * devices.gains)


def noma_admitted_count(gains: np.ndarray, params: SystemParams) -> int:
    """Largest prefix length with a realizable power stack (all fractions <= 1).

    Feasibility is monotone (each extra device scales every earlier power by
    2**spectral_load), so grow the prefix while the tightest per-device bound

        K <= i + log2(ref_snr * gain_i / snr_floor) / spectral_load

    still holds.
    """
    g = np.asarray(gains, dtype=float)
    if g.size == 0:
        return 0
    load = params.spectral_load
    largest_stack = np.arange(1, g.size + 1) + np.log2(
        params.ref_snr * g / params.snr_floor) / load
    tightest = np.minimum.accumulate(largest_stack)
    return int(np.count_nonzero(tightest >= np.arange(1, g.size + 1)))


def noma_kmax(devices: DeviceSet, params: SystemParams) -> CoordinatedAllocation:
    """Largest device prefix the superposition scheme can serve at once."""
    count = noma_admitted_count(devices.gains, params)
    admitted = devices.top(count)
    powers = noma_power_allocation(admitted, params) if count else np.empty(0)
    return CoordinatedAllocation(NOMA, count, admitted.gains, powers)
