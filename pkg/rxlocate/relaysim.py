"""Distance-relay simulation of phase-A-to-ground faults.

The fault is solved in the phasor domain by connecting the positive, negative
and zero sequence networks in series through 3Rf. Relay-terminal waveforms
are then synthesized from the pre-fault and fault phasors (with a decaying DC
offset on the currents), run through a sliding full-cycle DFT and turned
into the compensated ground-loop impedance Va / (Ia + k0 * 3I0) that a
distance relay plots on its R-X screen.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .config import RelayConfig
from .errors import ConfigError, DomainError, EmptyTrajectoryError, SingularNetworkError
from .netmodel import (
    INFINITE_IMPEDANCE,
    NetworkModel,
    SequenceImpedance,
    cumulative_sequence_impedance,
    k0_factor,
    load_impedance,
)
from .types import FaultType
from .utils import NumericUtils

logger = logging.getLogger(__name__)

_A = cmath.exp(2j * math.pi / 3)
# phase = SEQ_TO_PHASE @ (zero, positive, negative)
SEQ_TO_PHASE = np.array(
    [[1, 1, 1], [1, _A**2, _A], [1, _A, _A**2]],
    dtype=complex,
)

MIN_SAMPLES_PER_CYCLE = 16


def _finite(z: complex) -> bool:
    return NumericUtils.is_finite_complex(z)


@dataclass(frozen=True)
class FaultScenario:
    """An A-g fault at ``location`` km from the relay."""

    location: float
    fault_resistance: float = 0.1
    inception_angle: float = 0.0
    fault_type: FaultType = FaultType.AG

    def check(self, net: NetworkModel) -> None:
        if self.fault_type is not FaultType.AG:
            raise DomainError(f"unsupported fault type {self.fault_type}")
        total = net.line.total_length
        if not (math.isfinite(self.location) and 0.0 < self.location < total):
            raise DomainError(f"fault location {self.location} km not inside line (0, {total})")
        if not (math.isfinite(self.fault_resistance) and self.fault_resistance >= 0):
            raise DomainError(f"fault resistance must be >= 0, got {self.fault_resistance}")


@dataclass(frozen=True)
class FaultSolution:
    """Steady-state phasors at the relay terminal.

    Attributes:
        relay_voltages: Phase voltages (A, B, C) in volts
        relay_currents: Phase currents (A, B, C) in amperes, flowing into the line
        fault_i1: Positive-sequence fault current at the fault point
        loop_impedance: Z1th + Z2th + Z0th + 3Rf seen from the fault point

    """

    relay_voltages: tuple[complex, complex, complex]
    relay_currents: tuple[complex, complex, complex]
    fault_i1: complex = 0j
    loop_impedance: complex = INFINITE_IMPEDANCE

    @property
    def relay_va(self) -> complex:
        return self.relay_voltages[0]

    @property
    def relay_ia(self) -> complex:
        return self.relay_currents[0]

    @property
    def relay_3i0(self) -> complex:
        return sum(self.relay_currents, 0j)


@dataclass(frozen=True, eq=False)
class RelayRecord:
    """Sampled relay-terminal waveforms.

    Attributes:
        sampling_rate: Samples per second
        frequency: System frequency in Hz
        voltages: Array of shape (3, n) with phase voltages
        currents: Array of shape (3, n) with phase currents
        fault_index: First sample carrying fault data (n when no fault is applied)
        dc_offsets: Initial DC offset per current channel
        time_constant: Decay time constant of the DC offsets in seconds

    """

    sampling_rate: float
    frequency: float
    voltages: np.ndarray
    currents: np.ndarray
    fault_index: int
    dc_offsets: np.ndarray
    time_constant: float

    @property
    def n_samples(self) -> int:
        return int(self.voltages.shape[1])

    @property
    def samples_per_cycle(self) -> int:
        return int(round(self.sampling_rate / self.frequency))

    @property
    def residual(self) -> np.ndarray:
        """3I0 samples, the sum of the phase currents."""
        return self.currents.sum(axis=0)


@dataclass(frozen=True, eq=False)
class PhasorSeries:
    """Sliding-window phasors (RMS, angle referenced to the window start)."""

    voltages: np.ndarray  # (3, m) complex
    currents: np.ndarray  # (3, m) complex
    residual: np.ndarray  # (m,) complex
    window_start: np.ndarray  # (m,) int


@dataclass(frozen=True, eq=False)
class ImpedanceTrajectory:
    """Apparent-impedance locus, one point per emitted DFT window."""

    impedance: np.ndarray  # complex ohm
    window_start: np.ndarray

    def __post_init__(self) -> None:
        if self.impedance.size == 0:
            raise EmptyTrajectoryError("trajectory has no points")
        if not np.all(np.isfinite(self.impedance)):
            raise DomainError("trajectory contains non-finite points")

    @classmethod
    def from_points(cls, points: list[tuple[float, float]]) -> ImpedanceTrajectory:
        z = np.array([complex(r, x) for r, x in points], dtype=complex)
        return cls(z, np.arange(z.size))

    @property
    def r(self) -> np.ndarray:
        return self.impedance.real

    @property
    def x(self) -> np.ndarray:
        return self.impedance.imag

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.r.tolist(), self.x.tolist()))

    @property
    def final(self) -> complex:
        return complex(self.impedance[-1])

    def __len__(self) -> int:
        return int(self.impedance.size)


# ---------------------------------------------------------------------------
# steady state


def _remote_thevenin(net: NetworkModel) -> tuple[complex, complex]:
    """Positive-sequence EMF and impedance of the remote bus (source plus load)."""
    z_load = load_impedance(net)
    remote = net.source_remote
    if not remote.connected:
        return 0j, z_load
    if not _finite(z_load):
        return remote.emf, remote.z1
    emf = remote.emf * z_load / (remote.z1 + z_load)
    return emf, NumericUtils.parallel(remote.z1, z_load)


def _prefault_current(net: NetworkModel, a1: complex, b1: complex) -> complex:
    e_remote, _ = _remote_thevenin(net)
    if not _finite(b1):
        return 0j
    total = a1 + b1
    if total == 0:
        raise SingularNetworkError("pre-fault loop has zero impedance")
    return (net.source_local.emf - e_remote) / total


def _phase(zero: complex, positive: complex, negative: complex) -> tuple[complex, complex, complex]:
    abc = SEQ_TO_PHASE @ np.array([zero, positive, negative], dtype=complex)
    return complex(abc[0]), complex(abc[1]), complex(abc[2])


def solve_prefault(net: NetworkModel) -> FaultSolution:
    """Healthy-network steady state at the relay terminal."""
    if not net.source_local.connected:
        raise ConfigError("the relay-end source must be connected")
    line_z1 = net.line.total_impedance.z1
    _, z_remote = _remote_thevenin(net)
    a1 = net.source_local.z1 + line_z1
    i1 = _prefault_current(net, a1, z_remote)
    v1 = net.source_local.emf - net.source_local.z1 * i1
    return FaultSolution(
        relay_voltages=_phase(0j, v1, 0j),
        relay_currents=_phase(0j, i1, 0j),
    )


def solve_slg_fault(net: NetworkModel, sc: FaultScenario) -> FaultSolution:
    """Solve the A-g fault by series connection of the sequence networks.

    The fault point splits each sequence network into a relay-side branch
    (local source plus line up to the fault) and a remote branch (rest of the
    line plus remote source, with the load in the positive and negative
    sequence networks only). The relay share of each sequence current follows
    from current division between the two branches.

    Args:
        net: The network
        sc: Fault scenario with location strictly inside the line

    Returns:
        Post-fault steady-state phasors at the relay

    Raises:
        DomainError: If the scenario is outside the line or not A-g
        SingularNetworkError: If the fault loop has zero total impedance

    """
    sc.check(net)
    if not net.source_local.connected:
        raise ConfigError("the relay-end source must be connected")
    line = net.line
    near = cumulative_sequence_impedance(line, sc.location)
    total = line.total_impedance
    far = SequenceImpedance(total.z1 - near.z1, total.z0 - near.z0)

    local = net.source_local
    remote = net.source_remote
    _, z_remote1 = _remote_thevenin(net)
    z_remote0 = remote.z0 if remote.connected else INFINITE_IMPEDANCE

    # relay-side (a) and remote (b) branch impedances per sequence 1, 2, 0
    a = (local.z1 + near.z1, local.z1 + near.z1, local.z0 + near.z0)
    b = (
        far.z1 + z_remote1 if _finite(z_remote1) else INFINITE_IMPEDANCE,
        far.z1 + z_remote1 if _finite(z_remote1) else INFINITE_IMPEDANCE,
        far.z0 + z_remote0 if _finite(z_remote0) else INFINITE_IMPEDANCE,
    )
    z_th = [NumericUtils.parallel(ak, bk) for ak, bk in zip(a, b)]

    i_pre = _prefault_current(net, a[0], b[0])
    v_f0 = local.emf - a[0] * i_pre

    loop = z_th[0] + z_th[1] + z_th[2] + 3.0 * sc.fault_resistance
    if loop == 0:
        raise SingularNetworkError(f"zero fault-loop impedance at {sc.location} km")
    i_f = v_f0 / loop

    def relay_share(ak: complex, bk: complex) -> complex:
        if not _finite(bk):
            return i_f
        return i_f * bk / (ak + bk)

    d1, d2, d0 = (relay_share(ak, bk) for ak, bk in zip(a, b))
    i1 = i_pre + d1
    v1 = local.emf - local.z1 * i1
    v2 = -local.z1 * d2
    v0 = -local.z0 * d0
    return FaultSolution(
        relay_voltages=_phase(v0, v1, v2),
        relay_currents=_phase(d0, i1, d2),
        fault_i1=i_f,
        loop_impedance=loop,
    )


def steady_apparent_impedance(sol: FaultSolution, k0: complex) -> complex:
    """Compensated ground-loop impedance Va / (Ia + k0 * 3I0) from phasors."""
    denominator = sol.relay_ia + k0 * sol.relay_3i0
    if denominator == 0:
        raise SingularNetworkError("zero compensated current")
    return sol.relay_va / denominator


def dc_time_constant(z_loop: complex, frequency: float) -> float:
    """Decay time constant L/R = X / (omega R) of a loop impedance; infinite when R = 0."""
    if not _finite(z_loop):
        return 0.0
    if z_loop.real == 0:
        return math.inf
    return z_loop.imag / (2.0 * math.pi * frequency * z_loop.real)


# ---------------------------------------------------------------------------
# waveforms and phasors


def samples_per_cycle(sampling_rate: float, frequency: float) -> int:
    """Validate the sampling rate and return the samples per cycle.

    Raises:
        ConfigError: Unless the rate is an integer multiple of 2x the frequency
            with at least 16 samples per cycle

    """
    ratio = sampling_rate / (2.0 * frequency)
    if not math.isfinite(ratio) or abs(ratio - round(ratio)) > 1e-9 or ratio <= 0:
        raise ConfigError(
            f"sampling rate {sampling_rate} Hz is not an integer multiple of 2 x {frequency} Hz"
        )
    n = 2 * int(round(ratio))
    if n < MIN_SAMPLES_PER_CYCLE:
        raise ConfigError(f"need at least {MIN_SAMPLES_PER_CYCLE} samples per cycle, got {n}")
    return n


def _waveform(phasors: np.ndarray, omega_t: np.ndarray) -> np.ndarray:
    # phasors (3,), omega_t (n,) -> (3, n) instantaneous values
    return math.sqrt(2.0) * np.real(phasors[:, None] * np.exp(1j * omega_t)[None, :])


def synthesize_record(
    net: NetworkModel,
    sc: FaultScenario,
    prefault: FaultSolution,
    fault: FaultSolution,
    sampling_rate: float,
    n_cycles_pre: int,
    n_cycles_post: int,
) -> RelayRecord:
    """Synthesize relay-terminal samples around fault inception.

    Pre-fault samples are steady sinusoids from ``prefault``. The inception
    sample is the first sample after the pre-fault cycles where the A-phase
    voltage angle reaches ``sc.inception_angle`` (to the nearest sample).
    From there on the fault phasors apply and every current channel carries
    a DC offset that keeps the current continuous at inception and decays
    with the fault-loop time constant.

    Raises:
        ConfigError: If the sampling rate is invalid or a cycle count is negative

    """
    frequency = net.line.frequency
    n_cycle = samples_per_cycle(sampling_rate, frequency)
    if n_cycles_pre < 0 or n_cycles_post < 0 or n_cycles_pre + n_cycles_post == 0:
        raise ConfigError("record needs a non-negative number of cycles, at least one in total")

    n_pre = n_cycles_pre * n_cycle
    n_samples = n_pre + n_cycles_post * n_cycle
    t = np.arange(n_samples) / sampling_rate
    omega_t = 2.0 * math.pi * frequency * t

    v_pre = np.array(prefault.relay_voltages, dtype=complex)
    i_pre = np.array(prefault.relay_currents, dtype=complex)
    voltages = _waveform(v_pre, omega_t)
    currents = _waveform(i_pre, omega_t)
    dc = np.zeros(3)
    tau = dc_time_constant(fault.loop_impedance, frequency)

    if n_cycles_post == 0:
        fault_index = n_samples
    else:
        # n_pre is a whole number of cycles, so the A-phase angle there is its phasor angle
        theta = math.degrees(cmath.phase(v_pre[0])) if v_pre[0] != 0 else 0.0
        step = ((sc.inception_angle - theta) % 360.0) / 360.0 * n_cycle
        fault_index = n_pre + NumericUtils.round_half_up(step) % n_cycle

        post = slice(fault_index, n_samples)
        v_f = np.array(fault.relay_voltages, dtype=complex)
        i_f = np.array(fault.relay_currents, dtype=complex)
        voltages[:, post] = _waveform(v_f, omega_t[post])
        steady = _waveform(i_f, omega_t[post])
        dc = currents[:, fault_index] - steady[:, 0]
        elapsed = t[post] - t[fault_index]
        if math.isinf(tau):
            decay = np.ones_like(elapsed)
        elif tau > 0:
            decay = np.exp(-elapsed / tau)
        else:
            decay = (elapsed == 0).astype(float)
        currents[:, post] = steady + dc[:, None] * decay[None, :]

    return RelayRecord(
        sampling_rate=float(sampling_rate),
        frequency=frequency,
        voltages=voltages,
        currents=currents,
        fault_index=fault_index,
        dc_offsets=dc,
        time_constant=tau,
    )


def _sliding_dft(x: np.ndarray, n: int) -> np.ndarray:
    # (..., samples) -> (..., samples - n + 1) RMS phasors
    kernel = np.exp(-2j * math.pi * np.arange(n) / n) * (math.sqrt(2.0) / n)
    windows = sliding_window_view(x, n, axis=-1)
    return windows @ kernel


def estimate_phasors(rec: RelayRecord) -> PhasorSeries:
    """Full-cycle DFT at the fundamental, sliding one sample at a time.

    Raises:
        DomainError: If the record is shorter than one cycle

    """
    n = rec.samples_per_cycle
    if rec.n_samples < n:
        raise DomainError(f"record of {rec.n_samples} samples is shorter than one cycle ({n})")
    return PhasorSeries(
        voltages=_sliding_dft(rec.voltages, n),
        currents=_sliding_dft(rec.currents, n),
        residual=_sliding_dft(rec.residual, n),
        window_start=np.arange(rec.n_samples - n + 1),
    )


def impedance_trajectory(
    rec: RelayRecord, k0: complex, min_current: float = 1e-3
) -> ImpedanceTrajectory:
    """Apparent impedance Va / (Ia + k0 * 3I0) for every DFT window.

    Windows whose compensated current magnitude is below ``min_current`` are
    skipped.

    Raises:
        EmptyTrajectoryError: If every window is skipped

    """
    phasors = estimate_phasors(rec)
    denominator = phasors.currents[0] + k0 * phasors.residual
    keep = np.abs(denominator) >= min_current
    if not np.any(keep):
        raise EmptyTrajectoryError("every window was below the current threshold")
    skipped = int(keep.size - np.count_nonzero(keep))
    if skipped:
        logger.debug("skipped %d low-current windows", skipped)
    z = phasors.voltages[0][keep] / denominator[keep]
    return ImpedanceTrajectory(z, phasors.window_start[keep])


# ---------------------------------------------------------------------------
# facade


def relay_k0(net: NetworkModel, source: str, location: float | None = None) -> complex:
    """Residual compensation setting of the relay.

    Args:
        net: The network
        source: ``first-section``, ``line-average`` or ``matched-path``
        location: Fault location, required for ``matched-path``

    """
    if source == "first-section":
        return k0_factor(net.line.sections[0].z)
    if source == "line-average":
        return k0_factor(net.line.total_impedance)
    if source == "matched-path":
        if location is None:
            raise ConfigError("matched-path k0 needs the fault location")
        return k0_factor(cumulative_sequence_impedance(net.line, location))
    raise ConfigError(f"unknown k0 source {source!r}")


def simulate_trajectory(
    net: NetworkModel, sc: FaultScenario, cfg: RelayConfig
) -> ImpedanceTrajectory:
    """Pre-fault solve, fault solve, record, phasors and trajectory in one call."""
    prefault = solve_prefault(net)
    fault = solve_slg_fault(net, sc)
    record = synthesize_record(
        net,
        sc,
        prefault,
        fault,
        cfg.sampling_rate_hz,
        cfg.n_cycles_pre,
        cfg.n_cycles_post,
    )
    k0 = relay_k0(net, cfg.k0_source, sc.location)
    return impedance_trajectory(record, k0, cfg.min_current_a)


def converged_impedance(net: NetworkModel, location: float, cfg: RelayConfig) -> complex:
    """Apparent impedance the relay settles on for an A-g fault at ``location`` km.

    This is the steady fault-phasor value the trajectory converges to, so it
    does not depend on the inception angle.
    """
    sc = FaultScenario(
        location,
        fault_resistance=cfg.fault_resistance_ohm,
        inception_angle=cfg.inception_angle_deg,
    )
    return steady_apparent_impedance(solve_slg_fault(net, sc), relay_k0(net, cfg.k0_source, location))
