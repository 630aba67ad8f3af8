"""
Random access without channel state at the base station.

The base station only knows the offered load. It broadcasts a design point:
an access probability and a partition count (subchannels for FDMA, sub-slots
for TDMA), or a common target received SNR for power-controlled
superposition. Devices thin themselves by the access probability, check
whether their own channel can afford the partition's rate at full power,
pick a partition uniformly at random, and collide whenever a partition
carries more than one transmitter.

The analytical model chains expected counts through the per-device transmit
probability and the collision probability; it deliberately plugs a
real-valued expected transmitter count into the collision formula, so it is
an expectation hybrid rather than an exact average (the Monte Carlo engine
in ``sim`` provides the exact counterpart).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import FDMA, NOMA, TDMA, Infeasible, SystemParams, TrafficModel

NOMINAL = "nominal"
REDERIVED = "rederived"
SNR_RULES = (NOMINAL, REDERIVED)

# Guard for comparisons that sit exactly on the SIC rate boundary after a
# root-finding step; affects only realizations within 1e-9 relative of it.
_RATE_TOL = 1e-9


@dataclass(frozen=True)
class UncoordinatedDesign:
    """Broadcast design point for one random-access scheme."""

    scheme: str                    # fdma | tdma | noma
    access_prob: float = 1.0       # thinning probability in [0, 1]
    partitions: int = 1            # subchannels or sub-slots; unused for noma
    target_snr: float | None = None   # common received SNR, noma only

    def __post_init__(self):
        if self.scheme not in (FDMA, TDMA, NOMA):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0.0 <= self.access_prob <= 1.0:
            raise ValueError("access_prob must lie in [0, 1]")
        if self.partitions < 1:
            raise ValueError("partitions must be >= 1")
        if self.scheme == NOMA and not (self.target_snr and self.target_snr > 0):
            raise ValueError("noma design needs target_snr > 0")


@dataclass(frozen=True)
class UncoordinatedAnalysis:
    """Expected per-slot counts for one design point."""

    expected_active: float        # devices that switch their radio on
    expected_transmitting: float  # of those, devices whose power suffices
    collision_prob: float
    expected_success: float       # packets delivered per slot


def gain_threshold(scheme: str, partitions: int, params: SystemParams) -> float:
    """Smallest channel gain at which full power covers one partition's rate.

    A device holding one of ``partitions`` equal shares must clear
    2**(spectral_load * partitions) - 1 received SNR; splitting the band
    (FDMA) concentrates the transmit power by the same factor, splitting
    time (TDMA) does not.
    """
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    need = 2.0 ** (params.spectral_load * partitions) - 1.0
    if scheme == FDMA:
        return need / (partitions * params.ref_snr)
    if scheme == TDMA:
        return need / params.ref_snr
    raise ValueError(f"gain threshold undefined for scheme {scheme!r}")


def _gain_tail_probability(threshold: float, pathloss_exp: float) -> float:
    """P(gain >= threshold) under uniform placement: min(1, t**(-2/gamma))."""
    if threshold <= 1.0:
        return 1.0
    return threshold ** (-2.0 / pathloss_exp)


def fdma_tx_probability(design: UncoordinatedDesign, params: SystemParams) -> float:
    """Probability an active device can afford its subchannel and transmits."""
    return _gain_tail_probability(
        gain_threshold(FDMA, design.partitions, params), params.pathloss_exp)


def tdma_tx_probability(design: UncoordinatedDesign, params: SystemParams) -> float:
    """Probability an active device can afford its sub-slot and transmits."""
    return _gain_tail_probability(
        gain_threshold(TDMA, design.partitions, params), params.pathloss_exp)


def collision_probability(expected_transmitting: float, partitions: int) -> float:
    """Probability a transmitter shares its partition with at least one other.

    1 - (1 - 1/partitions)**(expected_transmitting - 1), with the exponent
    clamped at zero: below one expected transmitter there is nobody to
    collide with.
    """
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    exponent = max(expected_transmitting, 1.0) - 1.0
    return 1.0 - (1.0 - 1.0 / partitions) ** exponent


def noma_device_cap(params: SystemParams) -> float:
    """Most simultaneous power-controlled transmitters one slot can carry:
    1 / snr_floor."""
    return 1.0 / params.snr_floor


def noma_required_snr(expected_transmitting: float, params: SystemParams,
                      rule: str = NOMINAL) -> float:
    """Common received SNR at which the expected transmitter count still
    decodes through successive cancellation.

    The default (nominal) form is 1 / (1/snr_floor - n). The re-derived rule
    replaces n by n - 1 (the last cancellation stage sees n - 1 interferers,
    so a lone transmitter needs exactly snr_floor); both are kept because
    they disagree by one device.
    """
    if rule not in SNR_RULES:
        raise ValueError(f"unknown rule {rule!r}")
    offset = expected_transmitting if rule == NOMINAL else expected_transmitting - 1.0
    room = noma_device_cap(params) - offset
    if room <= 0.0:
        raise Infeasible(
            f"load {expected_transmitting:.6g} at or above the capacity bound "
            f"{noma_device_cap(params):.6g}")
    return 1.0 / room


def noma_feasibility_probability(target_snr: float, params: SystemParams) -> float:
    """Probability a device can afford the broadcast receive-power target:
    its power fraction target_snr / (ref_snr * gain) must not exceed 1."""
    if target_snr <= 0:
        raise ValueError("target_snr must be > 0")
    return _gain_tail_probability(target_snr / params.ref_snr, params.pathloss_exp)


def noma_supported(transmitting: float, target_snr: float, params: SystemParams) -> bool:
    """Whether ``transmitting`` simultaneous equal-power transmitters all
    decode: the last cancellation stage's SINR
    target_snr / (1 + (n - 1) * target_snr) must reach the packet SNR floor.
    """
    beta = params.snr_floor
    headroom = 1.0 - beta * (transmitting - 1.0)
    return target_snr * headroom >= beta * (1.0 - _RATE_TOL)


def noma_design(params: SystemParams, traffic: TrafficModel,
                rule: str = NOMINAL) -> UncoordinatedDesign:
    """Power-control target for the expected load, with no access thinning.

    The target SNR and the share of devices that can afford it determine
    each other, so the design point is the self-consistent expected
    transmitter count: the unique n with

        n = arrival_rate * slot_s * P(feasible | required_snr(n)).

    The left side grows and the right side falls in n, so bisection applies.
    """
    active = traffic.arrival_rate * params.slot_s
    if active == 0.0:
        return UncoordinatedDesign(NOMA, access_prob=1.0, partitions=1,
                                   target_snr=params.snr_floor)
    cap = noma_device_cap(params) + (0.0 if rule == NOMINAL else 1.0)
    lo, hi = 0.0, cap * (1.0 - 1e-12)

    def excess(n):
        snr = noma_required_snr(n, params, rule)
        return active * noma_feasibility_probability(snr, params) - n

    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if excess(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return UncoordinatedDesign(NOMA, access_prob=1.0, partitions=1,
                               target_snr=noma_required_snr(lo, params, rule))


def uncoordinated_throughput(design: UncoordinatedDesign, params: SystemParams,
                             traffic: TrafficModel) -> UncoordinatedAnalysis:
    """Expected-count analysis of one design point at the given load."""
    active = design.access_prob * traffic.arrival_rate * params.slot_s
    if design.scheme == NOMA:
        transmitting = active * noma_feasibility_probability(design.target_snr, params)
        delivered = transmitting if noma_supported(
            transmitting, design.target_snr, params) else 0.0
        return UncoordinatedAnalysis(active, transmitting, 0.0, delivered)
    if design.scheme == FDMA:
        p_tx = fdma_tx_probability(design, params)
    else:
        p_tx = tdma_tx_probability(design, params)
    transmitting = active * p_tx
    collision = collision_probability(transmitting, design.partitions)
    return UncoordinatedAnalysis(active, transmitting, collision,
                                 transmitting * (1.0 - collision))


def _golden_section_max(objective, lo: float, hi: float, tol: float = 1e-12):
    """Best evaluated point of a unimodal objective on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = objective(c), objective(d)
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = objective(c)
            if fc > best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = objective(d)
            if fd > best_f:
                best_x, best_f = d, fd
    return best_x, best_f


def max_partitions(scheme: str, params: SystemParams) -> int:
    """Most partitions the smallest usable partition size allows.

    The ratio is floored with a 1e-9 relative slack so budgets that divide
    exactly in decimal (1 s / 1 ms) are not cut short by binary rounding.
    """
    if scheme == FDMA:
        ratio = params.bandwidth_hz / params.min_subchannel_hz
    elif scheme == TDMA:
        ratio = params.slot_s / params.min_slot_s
    else:
        raise ValueError(f"partitions undefined for scheme {scheme!r}")
    return max(1, int(ratio * (1.0 + 1e-9)))


def optimize_design(scheme: str, params: SystemParams,
                    traffic: TrafficModel) -> UncoordinatedDesign:
    """Access probability and partition count maximizing expected successes.

    For a fixed partition count the expected success is unimodal in the
    expected transmitter count, so the access probability comes from a
    golden-section search (plus the interval endpoints, so that boundary
    optima are hit exactly); partition counts are scanned exhaustively.
    Ties break toward fewer partitions, then a smaller access probability.
    """
    if scheme not in (FDMA, TDMA):
        raise ValueError("optimize_design covers fdma and tdma only")
    active_full = traffic.arrival_rate * params.slot_s
    tail = fdma_tx_probability if scheme == FDMA else tdma_tx_probability

    best_n, best_p, best_s = 1, 0.0, -1.0
    for n in range(1, max_partitions(scheme, params) + 1):
        p_tx = tail(UncoordinatedDesign(scheme, 1.0, n), params)

        def success(p):
            m = p * active_full * p_tx
            return m * (1.0 - collision_probability(m, n))

        inner_x, inner_f = _golden_section_max(success, 0.0, 1.0)
        candidates = sorted([(0.0, success(0.0)), (inner_x, inner_f), (1.0, success(1.0))])
        p_best, s_best = candidates[0]
        for p, s in candidates[1:]:
            if s > s_best:
                p_best, s_best = p, s
        if s_best > best_s:
            best_n, best_p, best_s = n, p_best, s_best
    return UncoordinatedDesign(scheme, access_prob=best_p, partitions=best_n)
