"""Experiment configuration for rxlocate.

Configuration is a tree of frozen dataclasses. Every knob has a default that
reproduces the reference experiment; ``configs/default.yaml`` lists all of
them with comments. Files are loaded with :func:`load_config`, which rejects
unknown keys and wrong types with a :class:`~rxlocate.errors.ConfigError`
naming the dotted key path.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional, TypeVar

import yaml

from .errors import ConfigError
from .types import RegressorVariant, SectionKind

T = TypeVar("T")


# ---------------------------------------------------------------------------
# value converters


def _check_keys(data: Any, path: str, allowed: tuple[str, ...]) -> Mapping[str, Any]:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path or 'config'}: expected a mapping, got {type(data).__name__}")
    unknown = sorted(str(k) for k in data if k not in allowed)
    if unknown:
        prefix = f"{path}." if path else ""
        raise ConfigError(f"unknown key {prefix}{unknown[0]}")
    return data


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    result = float(value)
    if not math.isfinite(result):
        raise ConfigError(f"{path}: must be finite")
    return result


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false, got {value!r}")
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


def _complex(value: Any, path: str) -> complex:
    """Accept ``[re, im]``, ``"re+imj"`` or a plain number."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_float(value[0], path), _float(value[1], path))
    if isinstance(value, str):
        try:
            result = complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"{path}: not a complex number: {value!r}") from None
        if not (math.isfinite(result.real) and math.isfinite(result.imag)):
            raise ConfigError(f"{path}: must be finite")
        return result
    return complex(_float(value, path), 0.0)


def _sequence(value: Any, path: str, item: Callable[[Any, str], T]) -> tuple[T, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{path}: expected a list, got {value!r}")
    return tuple(item(v, f"{path}[{i}]") for i, v in enumerate(value))


def _offset(value: Any, path: str) -> tuple[int, int]:
    pair = _sequence(value, path, _int)
    if len(pair) != 2:
        raise ConfigError(f"{path}: an offset is a [dr, dc] pair")
    return pair[0], pair[1]


def _optional(value: Any, path: str, item: Callable[[Any, str], T]) -> Optional[T]:
    return None if value is None else item(value, path)


def _complex_out(z: complex) -> list[float]:
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# network


@dataclass(frozen=True)
class SectionConfig:
    """One line section with its per-km sequence impedances.

    Attributes:
        kind: overhead or cable
        length_km: Section length
        z1: Positive-sequence series impedance (ohm/km)
        z0: Zero-sequence series impedance (ohm/km)
        shunt_nf_per_km: Shunt capacitance, used for validation only

    """

    kind: SectionKind
    length_km: float
    z1: complex
    z0: complex
    shunt_nf_per_km: float

    KEYS = ("kind", "length_km", "z1", "z0", "shunt_nf_per_km")

    @classmethod
    def overhead(cls, length_km: float) -> SectionConfig:
        """Overhead section with the default 154 kV conductor constants."""
        return cls(SectionKind.OVERHEAD, length_km, 0.045 + 0.42j, 0.30 + 1.26j, 9.0)

    @classmethod
    def cable(cls, length_km: float) -> SectionConfig:
        """Cable section with the default XLPE cable constants."""
        return cls(SectionKind.CABLE, length_km, 0.040 + 0.21j, 0.15 + 0.10j, 315.0)

    @classmethod
    def from_dict(cls, data: Any, path: str) -> SectionConfig:
        data = _check_keys(data, path, cls.KEYS)
        for key in cls.KEYS:
            if key not in data:
                raise ConfigError(f"{_join(path, key)}: required")
        try:
            kind = SectionKind(_str(data["kind"], _join(path, "kind")))
        except ValueError:
            raise ConfigError(f"{_join(path, 'kind')}: expected overhead or cable") from None
        return cls(
            kind=kind,
            length_km=_float(data["length_km"], _join(path, "length_km")),
            z1=_complex(data["z1"], _join(path, "z1")),
            z0=_complex(data["z0"], _join(path, "z0")),
            shunt_nf_per_km=_float(data["shunt_nf_per_km"], _join(path, "shunt_nf_per_km")),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "length_km": self.length_km,
            "z1": _complex_out(self.z1),
            "z0": _complex_out(self.z0),
            "shunt_nf_per_km": self.shunt_nf_per_km,
        }


@dataclass(frozen=True)
class SourceConfig:
    """Thevenin source behind a line terminal.

    Attributes:
        emf_kv: Phase-to-neutral EMF magnitude; None means nominal/sqrt(3)
        angle_deg: EMF angle
        z1: Positive-sequence source impedance (ohm)
        z0: Zero-sequence source impedance (ohm)
        connected: False leaves the terminal open (radial feeding)

    """

    emf_kv: Optional[float] = None
    angle_deg: float = 0.0
    z1: complex = 5j
    z0: complex = 7j
    connected: bool = True

    KEYS = ("emf_kv", "angle_deg", "z1", "z0", "connected")

    @classmethod
    def from_dict(cls, data: Any, path: str, base: SourceConfig) -> SourceConfig:
        data = _check_keys(data, path, cls.KEYS)
        return replace(
            base,
            emf_kv=_optional(data["emf_kv"], _join(path, "emf_kv"), _float)
            if "emf_kv" in data
            else base.emf_kv,
            angle_deg=_float(data.get("angle_deg", base.angle_deg), _join(path, "angle_deg")),
            z1=_complex(data.get("z1", _complex_out(base.z1)), _join(path, "z1")),
            z0=_complex(data.get("z0", _complex_out(base.z0)), _join(path, "z0")),
            connected=_bool(data.get("connected", base.connected), _join(path, "connected")),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "emf_kv": self.emf_kv,
            "angle_deg": self.angle_deg,
            "z1": _complex_out(self.z1),
            "z0": _complex_out(self.z0),
            "connected": self.connected,
        }


def _standard_sections() -> tuple[SectionConfig, ...]:
    return (
        SectionConfig.overhead(200.0),
        SectionConfig.cable(10.0),
        SectionConfig.overhead(50.0),
    )


@dataclass(frozen=True)
class NetworkConfig:
    """Two-source mixed line with a lumped load at the remote bus."""

    nominal_voltage_kv: float = 154.0
    frequency_hz: float = 50.0
    sections: tuple[SectionConfig, ...] = field(default_factory=_standard_sections)
    source_local: SourceConfig = field(default_factory=SourceConfig)
    source_remote: SourceConfig = field(
        default_factory=lambda: SourceConfig(angle_deg=-10.0)
    )
    load_mw: float = 20.0
    load_power_factor: float = 1.0

    KEYS = (
        "nominal_voltage_kv",
        "frequency_hz",
        "sections",
        "source_local",
        "source_remote",
        "load_mw",
        "load_power_factor",
    )

    @classmethod
    def from_dict(cls, data: Any, path: str) -> NetworkConfig:
        data = _check_keys(data, path, cls.KEYS)
        base = cls()
        sections = base.sections
        if "sections" in data:
            sections = _sequence(data["sections"], _join(path, "sections"), SectionConfig.from_dict)
        return cls(
            nominal_voltage_kv=_float(
                data.get("nominal_voltage_kv", base.nominal_voltage_kv),
                _join(path, "nominal_voltage_kv"),
            ),
            frequency_hz=_float(data.get("frequency_hz", base.frequency_hz), _join(path, "frequency_hz")),
            sections=sections,
            source_local=SourceConfig.from_dict(
                data.get("source_local", {}), _join(path, "source_local"), base.source_local
            ),
            source_remote=SourceConfig.from_dict(
                data.get("source_remote", {}), _join(path, "source_remote"), base.source_remote
            ),
            load_mw=_float(data.get("load_mw", base.load_mw), _join(path, "load_mw")),
            load_power_factor=_float(
                data.get("load_power_factor", base.load_power_factor),
                _join(path, "load_power_factor"),
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "nominal_voltage_kv": self.nominal_voltage_kv,
            "frequency_hz": self.frequency_hz,
            "sections": [s.to_dict() for s in self.sections],
            "source_local": self.source_local.to_dict(),
            "source_remote": self.source_remote.to_dict(),
            "load_mw": self.load_mw,
            "load_power_factor": self.load_power_factor,
        }


# ---------------------------------------------------------------------------
# relay, canvas, features


K0_SOURCES = ("first-section", "line-average", "matched-path")


@dataclass(frozen=True)
class RelayConfig:
    """Relay sampling, record length, k0 setting and fault defaults.

    Attributes:
        sampling_rate_hz: Must be an integer multiple of 2x the frequency
        n_cycles_pre: Pre-fault cycles in each record
        n_cycles_post: Post-fault cycles in each record
        k0_source: first-section, line-average or matched-path
        min_current_a: Windows with a smaller compensated current are skipped
        fault_resistance_ohm: Fault resistance used for every scenario
        inception_angle_deg: A-phase voltage angle at fault inception

    """

    sampling_rate_hz: float = 4000.0
    n_cycles_pre: int = 2
    n_cycles_post: int = 6
    k0_source: str = "first-section"
    min_current_a: float = 1e-3
    fault_resistance_ohm: float = 0.1
    inception_angle_deg: float = 0.0

    KEYS = (
        "sampling_rate_hz",
        "n_cycles_pre",
        "n_cycles_post",
        "k0_source",
        "min_current_a",
        "fault_resistance_ohm",
        "inception_angle_deg",
    )

    @classmethod
    def from_dict(cls, data: Any, path: str) -> RelayConfig:
        data = _check_keys(data, path, cls.KEYS)
        base = cls()
        k0_source = _str(data.get("k0_source", base.k0_source), _join(path, "k0_source"))
        if k0_source not in K0_SOURCES:
            raise ConfigError(f"{_join(path, 'k0_source')}: expected one of {', '.join(K0_SOURCES)}")
        return cls(
            sampling_rate_hz=_float(
                data.get("sampling_rate_hz", base.sampling_rate_hz), _join(path, "sampling_rate_hz")
            ),
            n_cycles_pre=_int(data.get("n_cycles_pre", base.n_cycles_pre), _join(path, "n_cycles_pre")),
            n_cycles_post=_int(data.get("n_cycles_post", base.n_cycles_post), _join(path, "n_cycles_post")),
            k0_source=k0_source,
            min_current_a=_float(data.get("min_current_a", base.min_current_a), _join(path, "min_current_a")),
            fault_resistance_ohm=_float(
                data.get("fault_resistance_ohm", base.fault_resistance_ohm),
                _join(path, "fault_resistance_ohm"),
            ),
            inception_angle_deg=_float(
                data.get("inception_angle_deg", base.inception_angle_deg),
                _join(path, "inception_angle_deg"),
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        return {key: getattr(self, key) for key in self.KEYS}


FRAMINGS = ("line", "section", "converged")


@dataclass(frozen=True)
class CanvasConfig:
    """Raster size, R-X window framing and zone characteristic.

    Attributes:
        width: Image width in pixels
        height: Image height in pixels
        line_low: Lower window bound as a multiple of |Z1 line|
        line_high: Upper window bound as a multiple of |Z1 line|
        overhead_margin: Half-width of an overhead section window in multiples
            of the section's impedance span
        cable_margin: Half-width of a cable section window, likewise
        zone_reach_fraction: Mho reach as a fraction of |Z1 line|
        circle_vertices: Polygon vertices used to outline the mho circle
        overhead_framing: line, section or converged
        cable_framing: line, section or converged

    """

    width: int = 128
    height: int = 128
    line_low: float = -0.25
    line_high: float = 1.25
    overhead_margin: float = 0.6
    cable_margin: float = 0.75
    zone_reach_fraction: float = 0.8
    circle_vertices: int = 256
    overhead_framing: str = "converged"
    cable_framing: str = "converged"

    KEYS = (
        "width",
        "height",
        "line_low",
        "line_high",
        "overhead_margin",
        "cable_margin",
        "zone_reach_fraction",
        "circle_vertices",
        "overhead_framing",
        "cable_framing",
    )

    def framing_for(self, kind: SectionKind) -> str:
        return self.overhead_framing if kind is SectionKind.OVERHEAD else self.cable_framing

    def margin_for(self, kind: SectionKind) -> float:
        return self.overhead_margin if kind is SectionKind.OVERHEAD else self.cable_margin

    @classmethod
    def from_dict(cls, data: Any, path: str) -> CanvasConfig:
        data = _check_keys(data, path, cls.KEYS)
        base = cls()
        framings = {}
        for key in ("overhead_framing", "cable_framing"):
            value = _str(data.get(key, getattr(base, key)), _join(path, key))
            if value not in FRAMINGS:
                raise ConfigError(f"{_join(path, key)}: expected one of {', '.join(FRAMINGS)}")
            framings[key] = value
        margins: dict[str, float] = {}
        for key in ("overhead_margin", "cable_margin"):
            value = _float(data.get(key, getattr(base, key)), _join(path, key))
            if not value > 0:
                raise ConfigError(f"{_join(path, key)}: must be positive, got {value}")
            margins[key] = value
        return cls(
            width=_int(data.get("width", base.width), _join(path, "width")),
            height=_int(data.get("height", base.height), _join(path, "height")),
            line_low=_float(data.get("line_low", base.line_low), _join(path, "line_low")),
            line_high=_float(data.get("line_high", base.line_high), _join(path, "line_high")),
            zone_reach_fraction=_float(
                data.get("zone_reach_fraction", base.zone_reach_fraction),
                _join(path, "zone_reach_fraction"),
            ),
            circle_vertices=_int(data.get("circle_vertices", base.circle_vertices), _join(path, "circle_vertices")),
            **margins,
            **framings,
        )

    def to_dict(self) -> dict[str, Any]:
        return {key: getattr(self, key) for key in self.KEYS}


DEFAULT_OFFSETS: tuple[tuple[int, int], ...] = ((0, 1), (-1, 1), (-1, 0), (-1, -1))

DEFAULT_GLOBAL_STATISTICS: tuple[str, ...] = (
    "intensity_mean",
    "intensity_std",
    "intensity_skewness",
    "intensity_kurtosis",
    "histogram_energy",
    "histogram_entropy",
)

# Experiment presets: skewness and kurtosis give way to the centroid of the
# brightest level.
EXPERIMENT_GLOBAL_STATISTICS: tuple[str, ...] = (
    "intensity_mean",
    "intensity_std",
    "top_level_row_centroid",
    "top_level_col_centroid",
    "histogram_energy",
    "histogram_entropy",
)


@dataclass(frozen=True)
class FeatureConfig:
    """Quantization and GLCM settings for feature extraction.

    Attributes:
        levels: Gray levels after quantization, also the GLCM size
        offsets: GLCM offsets (dr, dc) averaged per statistic
        symmetric: Build symmetric GLCMs
        global_statistics: Names of the six whole-image statistics

    """

    levels: int = 8
    offsets: tuple[tuple[int, int], ...] = DEFAULT_OFFSETS
    symmetric: bool = True
    global_statistics: tuple[str, ...] = DEFAULT_GLOBAL_STATISTICS

    KEYS = ("levels", "offsets", "symmetric", "global_statistics")

    @classmethod
    def from_dict(cls, data: Any, path: str, base: FeatureConfig | None = None) -> FeatureConfig:
        data = _check_keys(data, path, cls.KEYS)
        base = base if base is not None else cls()
        offsets = base.offsets
        if "offsets" in data:
            offsets = _sequence(data["offsets"], _join(path, "offsets"), _offset)
        global_statistics = base.global_statistics
        if "global_statistics" in data:
            global_statistics = _sequence(
                data["global_statistics"], _join(path, "global_statistics"), _str
            )
        return cls(
            levels=_int(data.get("levels", base.levels), _join(path, "levels")),
            offsets=offsets,
            symmetric=_bool(data.get("symmetric", base.symmetric), _join(path, "symmetric")),
            global_statistics=global_statistics,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "levels": self.levels,
            "offsets": [list(o) for o in self.offsets],
            "symmetric": self.symmetric,
            "global_statistics": list(self.global_statistics),
        }


EXPERIMENT_FEATURES = FeatureConfig(global_statistics=EXPERIMENT_GLOBAL_STATISTICS)


# ---------------------------------------------------------------------------
# grids, models, root


@dataclass(frozen=True)
class GridConfig:
    """Training grid and test points of one experiment, in km from section start.

    Attributes:
        section_index: Index of the line section the experiment covers
        start: First training location
        stop: Last training location (inclusive)
        step: Grid spacing
        test_points: Fresh test locations

    """

    section_index: int
    start: float
    stop: float
    step: float
    test_points: tuple[float, ...]

    KEYS = ("section_index", "start", "stop", "step", "test_points")

    def train_points(self) -> tuple[float, ...]:
        """Return the training grid, inclusive of ``stop``."""
        if self.step <= 0:
            raise ConfigError("grid step must be positive")
        count = int(round((self.stop - self.start) / self.step)) + 1
        return tuple(round(self.start + i * self.step, 9) for i in range(count))

    @classmethod
    def from_dict(cls, data: Any, path: str, base: GridConfig) -> GridConfig:
        data = _check_keys(data, path, cls.KEYS)
        test_points = base.test_points
        if "test_points" in data:
            test_points = _sequence(data["test_points"], _join(path, "test_points"), _float)
        return cls(
            section_index=_int(data.get("section_index", base.section_index), _join(path, "section_index")),
            start=_float(data.get("start", base.start), _join(path, "start")),
            stop=_float(data.get("stop", base.stop), _join(path, "stop")),
            step=_float(data.get("step", base.step), _join(path, "step")),
            test_points=test_points,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "section_index": self.section_index,
            "start": self.start,
            "stop": self.stop,
            "step": self.step,
            "test_points": list(self.test_points),
        }


OVERHEAD_GRID = GridConfig(
    section_index=0,
    start=5.0,
    stop=200.0,
    step=5.0,
    test_points=(20.0, 45.0, 70.0, 95.0, 120.0, 145.0, 170.0, 195.0),
)

CABLE_GRID = GridConfig(
    section_index=1,
    start=0.2,
    stop=10.0,
    step=0.2,
    test_points=(0.8, 1.8, 2.8, 3.8, 4.8, 5.8, 6.8, 7.8, 8.8, 9.8),
)


@dataclass(frozen=True)
class ModelConfig:
    """Model list, cross-validation folds and hyperparameter overrides.

    Attributes:
        variants: Variant names to train, in any order (reports use table order)
        cv_k: Number of cross-validation folds
        hyperparameters: Per-variant overrides, e.g. ``{"Fine Tree": {"min_leaf": 2}}``

    """

    variants: tuple[RegressorVariant, ...] = tuple(RegressorVariant)
    cv_k: int = 5
    hyperparameters: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    KEYS = ("variants", "cv_k", "hyperparameters")

    @classmethod
    def from_dict(cls, data: Any, path: str) -> ModelConfig:
        data = _check_keys(data, path, cls.KEYS)
        base = cls()
        variants = base.variants
        if "variants" in data:
            names = _sequence(data["variants"], _join(path, "variants"), _str)
            try:
                variants = tuple(RegressorVariant(n) for n in names)
            except ValueError as exc:
                raise ConfigError(f"{_join(path, 'variants')}: {exc}") from None
        hyper: dict[str, dict[str, float]] = {}
        raw = data.get("hyperparameters", {}) or {}
        if not isinstance(raw, Mapping):
            raise ConfigError(f"{_join(path, 'hyperparameters')}: expected a mapping")
        for name, values in raw.items():
            where = _join(_join(path, "hyperparameters"), str(name))
            try:
                RegressorVariant(name)
            except ValueError:
                raise ConfigError(f"unknown key {where}") from None
            if not isinstance(values, Mapping):
                raise ConfigError(f"{where}: expected a mapping")
            hyper[name] = {str(k): _float(v, _join(where, str(k))) for k, v in values.items()}
        return cls(
            variants=variants,
            cv_k=_int(data.get("cv_k", base.cv_k), _join(path, "cv_k")),
            hyperparameters=hyper,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "variants": [v.value for v in self.variants],
            "cv_k": self.cv_k,
            "hyperparameters": {k: dict(v) for k, v in sorted(self.hyperparameters.items())},
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Root configuration of an experiment run.

    Attributes:
        seed: Seed for fold assignment and ensemble sampling (mandatory)
        network: Line, sources and load
        relay: Relay sampling and fault settings
        canvas: R-X raster settings
        features: Texture feature settings
        models: Model list and cross-validation
        overhead: Overhead-section experiment grid
        cable: Cable-section experiment grid
        output_dir: Directory receiving images, CSVs, models and reports
        parallel: Simulate scenarios in a process pool
        processes: Pool size; None uses cpu_count() - 1

    """

    seed: int
    network: NetworkConfig = field(default_factory=NetworkConfig)
    relay: RelayConfig = field(default_factory=RelayConfig)
    canvas: CanvasConfig = field(default_factory=CanvasConfig)
    features: FeatureConfig = EXPERIMENT_FEATURES
    models: ModelConfig = field(default_factory=ModelConfig)
    overhead: GridConfig = OVERHEAD_GRID
    cable: GridConfig = CABLE_GRID
    output_dir: str = "out"
    parallel: bool = False
    processes: Optional[int] = None

    KEYS = (
        "seed",
        "network",
        "relay",
        "canvas",
        "features",
        "models",
        "overhead",
        "cable",
        "output_dir",
        "parallel",
        "processes",
    )

    @classmethod
    def reference(cls, seed: int = 42) -> ExperimentConfig:
        """The reference experiment: both grids, all 19 models.

        Example:
            >>> cfg = ExperimentConfig.reference()
            >>> len(cfg.overhead.train_points())
            40

        """
        return cls(seed=seed)

    @classmethod
    def quick(cls, seed: int = 42) -> ExperimentConfig:
        """Coarse grids and one model per family, for smoke runs."""
        return cls(
            seed=seed,
            overhead=replace(OVERHEAD_GRID, step=10.0, start=10.0, test_points=(45.0, 145.0)),
            cable=replace(CABLE_GRID, step=0.5, start=0.5, test_points=(2.8, 7.8)),
            models=ModelConfig(
                variants=(
                    RegressorVariant.LINEAR,
                    RegressorVariant.ROBUST_LINEAR,
                    RegressorVariant.FINE_TREE,
                    RegressorVariant.LINEAR_SVM,
                    RegressorVariant.BOOSTED_TREES,
                    RegressorVariant.SQUARED_EXPONENTIAL_GPR,
                ),
                cv_k=3,
            ),
        )

    @classmethod
    def from_dict(cls, data: Any) -> ExperimentConfig:
        data = _check_keys(data, "", cls.KEYS)
        if data.get("seed") is None:
            raise ConfigError("seed: required for reproducibility")
        return cls(
            seed=_int(data["seed"], "seed"),
            network=NetworkConfig.from_dict(data.get("network", {}), "network"),
            relay=RelayConfig.from_dict(data.get("relay", {}), "relay"),
            canvas=CanvasConfig.from_dict(data.get("canvas", {}), "canvas"),
            features=FeatureConfig.from_dict(data.get("features", {}), "features", EXPERIMENT_FEATURES),
            models=ModelConfig.from_dict(data.get("models", {}), "models"),
            overhead=GridConfig.from_dict(data.get("overhead", {}), "overhead", OVERHEAD_GRID),
            cable=GridConfig.from_dict(data.get("cable", {}), "cable", CABLE_GRID),
            output_dir=_str(data.get("output_dir", "out"), "output_dir"),
            parallel=_bool(data.get("parallel", False), "parallel"),
            processes=_optional(data.get("processes"), "processes", _int),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "network": self.network.to_dict(),
            "relay": self.relay.to_dict(),
            "canvas": self.canvas.to_dict(),
            "features": self.features.to_dict(),
            "models": self.models.to_dict(),
            "overhead": self.overhead.to_dict(),
            "cable": self.cable.to_dict(),
            "output_dir": self.output_dir,
            "parallel": self.parallel,
            "processes": self.processes,
        }


def load_config(path: str | Path) -> ExperimentConfig:
    """Load an experiment configuration from a YAML file.

    Args:
        path: Path to the YAML document

    Returns:
        The parsed configuration

    Raises:
        ConfigError: If the file is not valid YAML or contains unknown keys,
            wrong types or no seed

    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data or {})
