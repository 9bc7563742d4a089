"""Sequence-impedance model of a two-source mixed overhead/cable line.

The line is an ordered chain of sections, relay end first. Every section has
its own per-km positive- and zero-sequence impedance, so the impedance seen
from the relay is piecewise linear in distance with a change of slope at
each junction.

Example:
    >>> net = build_standard_line()
    >>> net.line.total_length
    260.0
    >>> z1, _ = cumulative_sequence_impedance(net.line, 200.0)
    >>> round(z1.imag, 6)
    84.0

"""

from __future__ import annotations

import bisect
import cmath
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from itertools import accumulate

from .config import NetworkConfig, SectionConfig, SourceConfig
from .errors import ConfigError, DomainError, SingularImpedanceError
from .types import SectionKind

logger = logging.getLogger(__name__)

INFINITE_IMPEDANCE = complex(math.inf, 0.0)

# cable/overhead bounds for mixed-line validation
INDUCTANCE_RATIO_RANGE = (0.50, 0.70)
SHUNT_RATIO_RANGE = (30.0, 40.0)


@dataclass(frozen=True)
class SequenceImpedance:
    """Positive- and zero-sequence impedance pair (ohm or ohm/km)."""

    z1: complex
    z0: complex

    def __iter__(self) -> Iterator[complex]:
        yield self.z1
        yield self.z0

    def scaled(self, length: float) -> SequenceImpedance:
        return SequenceImpedance(self.z1 * length, self.z0 * length)

    def problems(self) -> list[str]:
        """Return violated sign conditions (empty when valid)."""
        issues = []
        for name, z in (("z1", self.z1), ("z0", self.z0)):
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                issues.append(f"{name} is not finite")
            elif z.real < 0:
                issues.append(f"re({name}) < 0")
            elif z.imag <= 0:
                issues.append(f"im({name}) <= 0")
        return issues


@dataclass(frozen=True)
class LineSection:
    """One homogeneous stretch of the line.

    Attributes:
        kind: overhead or cable
        length: Section length in km
        z: Per-km sequence impedances
        shunt_nf_per_km: Shunt capacitance, checked by validation only

    """

    kind: SectionKind
    length: float
    z: SequenceImpedance
    shunt_nf_per_km: float = 0.0

    @classmethod
    def from_config(cls, cfg: SectionConfig) -> LineSection:
        return cls(cfg.kind, cfg.length_km, SequenceImpedance(cfg.z1, cfg.z0), cfg.shunt_nf_per_km)

    @property
    def impedance(self) -> SequenceImpedance:
        """Total sequence impedance of the whole section."""
        return self.z.scaled(self.length)


@dataclass(frozen=True)
class MixedLine:
    """Ordered chain of sections, relay end first."""

    sections: tuple[LineSection, ...]
    nominal_voltage: float = 154.0  # kV line-to-line
    frequency: float = 50.0
    _bounds: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(
            self, "_bounds", (0.0, *accumulate(s.length for s in self.sections))
        )

    @property
    def total_length(self) -> float:
        return self._bounds[-1]

    @property
    def boundaries(self) -> tuple[float, ...]:
        """Section start positions plus the line end, in km."""
        return self._bounds

    def section_start(self, index: int) -> float:
        return self._bounds[index]

    def section_end(self, index: int) -> float:
        return self._bounds[index + 1]

    def section_index_at(self, d: float) -> int:
        """Index of the section containing ``d``; a junction belongs to the earlier section."""
        if not 0.0 <= d <= self.total_length:
            raise DomainError(f"distance {d} km outside line [0, {self.total_length}]")
        index = bisect.bisect_left(self._bounds, d) - 1
        return min(max(index, 0), len(self.sections) - 1)

    @property
    def total_impedance(self) -> SequenceImpedance:
        return cumulative_sequence_impedance(self, self.total_length)

    def validate(self) -> None:
        """Check the structural and mixed-line invariants.

        Raises:
            ConfigError: On the first violated invariant

        """
        if not self.sections:
            raise ConfigError("line needs at least one section")
        if self.frequency <= 0:
            raise ConfigError(f"frequency must be positive, got {self.frequency}")
        if self.nominal_voltage <= 0:
            raise ConfigError(f"nominal voltage must be positive, got {self.nominal_voltage}")
        for i, section in enumerate(self.sections):
            if section.length <= 0:
                raise ConfigError(f"section {i}: length must be positive, got {section.length}")
            problems = section.z.problems()
            if problems:
                raise ConfigError(f"section {i}: {'; '.join(problems)}")

        overhead = [s for s in self.sections if s.kind is SectionKind.OVERHEAD]
        cables = [s for s in self.sections if s.kind is SectionKind.CABLE]
        for cable in cables:
            for oh in overhead:
                ratio = cable.z.z1.imag / oh.z.z1.imag
                low, high = INDUCTANCE_RATIO_RANGE
                if not low - 1e-12 <= ratio <= high + 1e-12:
                    raise ConfigError(
                        f"cable/overhead series reactance ratio {ratio:.3f} outside [{low}, {high}]"
                    )
                if oh.shunt_nf_per_km > 0:
                    shunt = cable.shunt_nf_per_km / oh.shunt_nf_per_km
                    low, high = SHUNT_RATIO_RANGE
                    if not low <= shunt <= high:
                        raise ConfigError(
                            f"cable/overhead shunt capacitance ratio {shunt:.1f} outside [{low}, {high}]"
                        )


@dataclass(frozen=True)
class SourceModel:
    """Thevenin equivalent behind a terminal; ``connected=False`` is an open terminal."""

    emf: complex  # phase-to-neutral volts
    z1: complex
    z0: complex
    connected: bool = True

    def __post_init__(self) -> None:
        if self.connected and abs(self.emf) == 0:
            raise ConfigError("source EMF magnitude must be positive")


@dataclass(frozen=True)
class NetworkModel:
    """Line, two sources and the lumped load at the remote bus."""

    line: MixedLine
    source_local: SourceModel
    source_remote: SourceModel
    load_mw: float = 20.0
    load_power_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.load_mw < 0:
            raise ConfigError(f"load must be non-negative, got {self.load_mw} MW")
        if not 0 < self.load_power_factor <= 1:
            raise ConfigError(f"power factor must be in (0, 1], got {self.load_power_factor}")

    @property
    def phase_voltage(self) -> float:
        """Nominal phase-to-neutral voltage in volts."""
        return self.line.nominal_voltage * 1e3 / math.sqrt(3.0)


def _source_from_config(cfg: SourceConfig, nominal_kv: float) -> SourceModel:
    magnitude_kv = cfg.emf_kv if cfg.emf_kv is not None else nominal_kv / math.sqrt(3.0)
    emf = cmath.rect(magnitude_kv * 1e3, math.radians(cfg.angle_deg))
    return SourceModel(emf=emf, z1=cfg.z1, z0=cfg.z0, connected=cfg.connected)


def build_network(cfg: NetworkConfig) -> NetworkModel:
    """Build and validate a network from its configuration.

    Raises:
        ConfigError: If the line violates a structural or mixed-line invariant

    """
    line = MixedLine(
        sections=tuple(LineSection.from_config(s) for s in cfg.sections),
        nominal_voltage=cfg.nominal_voltage_kv,
        frequency=cfg.frequency_hz,
    )
    line.validate()
    net = NetworkModel(
        line=line,
        source_local=_source_from_config(cfg.source_local, cfg.nominal_voltage_kv),
        source_remote=_source_from_config(cfg.source_remote, cfg.nominal_voltage_kv),
        load_mw=cfg.load_mw,
        load_power_factor=cfg.load_power_factor,
    )
    logger.debug(
        "network: %d sections, %.1f km, load %.1f MW",
        len(line.sections),
        line.total_length,
        net.load_mw,
    )
    return net


def build_standard_line() -> NetworkModel:
    """The 154 kV, 50 Hz line: overhead 200 km, cable 10 km, overhead 50 km."""
    return build_network(NetworkConfig())


def cumulative_sequence_impedance(line: MixedLine, d: float) -> SequenceImpedance:
    """Sequence impedance from the relay to distance ``d`` km.

    Args:
        line: The mixed line
        d: Distance from the relay end, 0 <= d <= total length

    Returns:
        The (Z1, Z0) pair in ohm, unpackable as ``z1, z0 = ...``

    Raises:
        DomainError: If ``d`` is outside the line

    """
    if not (math.isfinite(d) and 0.0 <= d <= line.total_length):
        raise DomainError(f"distance {d} km outside line [0, {line.total_length}]")
    z1 = 0j
    z0 = 0j
    for start, section in zip(line.boundaries, line.sections):
        if d <= start:
            break
        traversed = min(section.length, d - start)
        z1 += traversed * section.z.z1
        z0 += traversed * section.z.z0
    return SequenceImpedance(z1, z0)


def k0_factor(z: SequenceImpedance) -> complex:
    """Residual compensation factor (z0 - z1) / (3 z1).

    Works on per-km values as well as on totals.

    Raises:
        SingularImpedanceError: If ``z.z1`` is zero

    """
    if z.z1 == 0:
        raise SingularImpedanceError("k0 undefined for zero positive-sequence impedance")
    return (z.z0 - z.z1) / (3.0 * z.z1)


def load_impedance(net: NetworkModel) -> complex:
    """Per-phase load impedance at nominal voltage, V_LL^2 * pf / P at angle acos(pf).

    A zero load returns ``INFINITE_IMPEDANCE`` instead of raising.
    """
    if net.load_mw == 0:
        return INFINITE_IMPEDANCE
    v_ll = net.line.nominal_voltage * 1e3
    s_va = net.load_mw * 1e6 / net.load_power_factor
    return cmath.rect(v_ll**2 / s_va, math.acos(net.load_power_factor))
