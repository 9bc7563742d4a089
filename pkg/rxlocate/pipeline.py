"""Config-driven experiment runner.

The experiment runs in four stages, each reading the previous stage's
artifacts from the output directory::

    simulate   scenarios -> R-X images        images/<section>/<id>.pgm
    featurize  images -> feature rows         features_<section>.csv
    train      cross-validation, best refit   cv_<section>.json, models/<section>_best.json
    evaluate   test estimates -> reports      report_<section>.txt / .json

Per-scenario work is pure and may run in a process pool; results are
merged in scenario-id order, so every output byte depends only on the
configuration and seed.
"""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass, replace
from multiprocessing import Pool, cpu_count
from pathlib import Path
from typing import Optional, TypeVar

import numpy as np

from .config import ExperimentConfig, GridConfig
from .datasets import Dataset, read_dataset_csv, write_dataset_csv
from .errors import ConfigError, RxLocateError, StageError
from .evalkit import EvalReport, LocationEstimate, best_variant, build_report
from .formatter import OutputFormatter
from .netmodel import NetworkModel, build_network
from .regress import CVReport, RegressorSpec, all_specs, cross_validate, dump_model, fit, load_model, predict
from .relaysim import FaultScenario, simulate_trajectory
from .rxplot import (
    GrayImage,
    canvas_for,
    line_angle,
    load_pgm,
    quantize_levels,
    render_rx_image,
    save_pgm,
    zone_reach,
)
from .texture import extract_features, feature_names
from .types import PipelineStage, SectionKind

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

TRAIN = "train"
TEST = "test"


@dataclass(frozen=True)
class Scenario:
    """One fault to simulate.

    Attributes:
        scenario_id: ``<section>-<role>-<index>``, zero padded so ids sort in grid order
        section: Kind of the faulted section
        section_index: Index of the faulted section on the line
        offset_km: Absolute start of the section
        section_length_km: Length of the section
        relative_km: Fault distance from the section start
        role: ``train`` or ``test``

    """

    scenario_id: str
    section: SectionKind
    section_index: int
    offset_km: float
    section_length_km: float
    relative_km: float
    role: str

    @property
    def location_km(self) -> float:
        return self.offset_km + self.relative_km

    @property
    def target(self) -> float:
        return self.relative_km / self.section_length_km


@dataclass(frozen=True)
class ScenarioSet:
    """Training grid and test points of one section experiment.

    Locations are kept relative to the section start; :attr:`locations`
    gives absolute distances from the relay.
    """

    section: SectionKind
    section_index: int
    section_offset_km: float
    section_length_km: float
    relative_locations: tuple[float, ...]
    relative_test_locations: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        for name, points in (("grid", self.relative_locations), ("test", self.relative_test_locations)):
            for rel in points:
                if not 0.0 < rel <= self.section_length_km:
                    raise ConfigError(
                        f"{self.section.value} {name} point {rel} km is outside the section "
                        f"(0, {self.section_length_km}]"
                    )
            if any(b <= a for a, b in zip(points, points[1:])):
                raise ConfigError(f"{self.section.value} {name} points must be strictly increasing")
        if not self.relative_locations:
            raise ConfigError(f"{self.section.value} grid is empty")

    @property
    def locations(self) -> tuple[float, ...]:
        return tuple(self.section_offset_km + r for r in self.relative_locations)

    @property
    def test_locations(self) -> tuple[float, ...]:
        return tuple(self.section_offset_km + r for r in self.relative_test_locations)

    def scenarios(self, role: str = TRAIN) -> list[Scenario]:
        points = self.relative_locations if role == TRAIN else self.relative_test_locations
        return [
            Scenario(
                f"{self.section.value}-{role}-{i:03d}",
                self.section,
                self.section_index,
                self.section_offset_km,
                self.section_length_km,
                rel,
                role,
            )
            for i, rel in enumerate(points, start=1)
        ]

    def all_scenarios(self) -> list[Scenario]:
        return self.scenarios(TRAIN) + self.scenarios(TEST)


@dataclass(frozen=True)
class ExperimentResult:
    overhead: EvalReport
    cable: EvalReport
    output_dir: Path

    @property
    def reports(self) -> tuple[EvalReport, EvalReport]:
        return (self.overhead, self.cable)


@contextmanager
def stage(name: PipelineStage, scenario_id: Optional[str] = None) -> Iterator[None]:
    """Re-raise library and file errors as a :class:`StageError` tagged ``name``."""
    try:
        yield
    except StageError:
        raise
    except (RxLocateError, OSError) as exc:
        raise StageError(name, scenario_id, exc) from exc


def _scenario_set(net: NetworkModel, grid: GridConfig) -> ScenarioSet:
    line = net.line
    if not 0 <= grid.section_index < len(line.sections):
        raise ConfigError(f"grid section_index {grid.section_index} is not a line section")
    section = line.sections[grid.section_index]
    return ScenarioSet(
        section=section.kind,
        section_index=grid.section_index,
        section_offset_km=line.section_start(grid.section_index),
        section_length_km=section.length,
        relative_locations=grid.train_points(),
        relative_test_locations=tuple(grid.test_points),
    )


def generate_scenarios(cfg: ExperimentConfig) -> tuple[ScenarioSet, ScenarioSet]:
    """Overhead and cable scenario sets of the configured grids.

    Raises:
        ConfigError: If a grid or test point lies outside its section

    Example:
        >>> overhead, cable = generate_scenarios(ExperimentConfig.reference())
        >>> len(overhead.locations), len(cable.locations)
        (40, 50)

    """
    net = build_network(cfg.network)
    overhead = _scenario_set(net, cfg.overhead)
    cable = _scenario_set(net, cfg.cable)
    if overhead.section is not SectionKind.OVERHEAD:
        raise ConfigError(f"overhead.section_index {cfg.overhead.section_index} is not an overhead section")
    if cable.section is not SectionKind.CABLE:
        raise ConfigError(f"cable.section_index {cfg.cable.section_index} is not a cable section")
    logger.info(
        "%d %s and %d %s training scenarios",
        len(overhead.relative_locations),
        overhead.section.value,
        len(cable.relative_locations),
        cable.section.value,
    )
    return overhead, cable


# ---------------------------------------------------------------------------
# per-scenario work


def render_scenario(cfg: ExperimentConfig, sc: Scenario) -> GrayImage:
    """Simulate one fault and return its quantized R-X image."""
    net = build_network(cfg.network)
    with stage(PipelineStage.SIMULATE, sc.scenario_id):
        fault = FaultScenario(
            sc.location_km,
            fault_resistance=cfg.relay.fault_resistance_ohm,
            inception_angle=cfg.relay.inception_angle_deg,
        )
        traj = simulate_trajectory(net, fault, cfg.relay)
    with stage(PipelineStage.RENDER, sc.scenario_id):
        img = render_rx_image(
            traj,
            zone_reach(net, cfg.canvas),
            canvas_for(net, sc.section_index, cfg.canvas, cfg.relay),
            line_angle=line_angle(net),
            circle_vertices=cfg.canvas.circle_vertices,
        )
        return quantize_levels(img, cfg.features.levels)


def _render_job(job: tuple[ExperimentConfig, Scenario]) -> tuple[str, GrayImage]:
    cfg, sc = job
    return sc.scenario_id, render_scenario(cfg, sc)


def _pool_size(cfg: ExperimentConfig) -> int:
    return cfg.processes if cfg.processes else max(1, cpu_count() - 1)


def _map(cfg: ExperimentConfig, fn: Callable[[T], R], jobs: list[T]) -> list[R]:
    if cfg.parallel and len(jobs) > 1:
        with Pool(processes=_pool_size(cfg)) as pool:
            return pool.map(fn, jobs)
    return [fn(job) for job in jobs]


# ---------------------------------------------------------------------------
# artifact layout


def image_path(out: Path, sc: Scenario) -> Path:
    return out / "images" / sc.section.value / f"{sc.scenario_id}.pgm"


def features_path(out: Path, section: SectionKind) -> Path:
    return out / f"features_{section.value}.csv"


def cv_path(out: Path, section: SectionKind) -> Path:
    return out / f"cv_{section.value}.json"


def model_path(out: Path, section: SectionKind) -> Path:
    return out / "models" / f"{section.value}_best.json"


def report_paths(out: Path, section: SectionKind) -> tuple[Path, Path]:
    return out / f"report_{section.value}.txt", out / f"report_{section.value}.json"


def _output_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output_dir)


def _sets(cfg: ExperimentConfig) -> tuple[ScenarioSet, ScenarioSet]:
    with stage(PipelineStage.CONFIG):
        return generate_scenarios(cfg)


# ---------------------------------------------------------------------------
# stages


def simulate(cfg: ExperimentConfig) -> list[Path]:
    """Render every training and test scenario to a PGM file.

    Returns:
        Written image paths in scenario-id order

    """
    out = _output_dir(cfg)
    scenarios = sorted(
        (sc for s in _sets(cfg) for sc in s.all_scenarios()), key=lambda sc: sc.scenario_id
    )
    started = time.perf_counter()
    results = dict(_map(cfg, _render_job, [(cfg, sc) for sc in scenarios]))
    paths = []
    for sc in scenarios:
        path = image_path(out, sc)
        with stage(PipelineStage.RENDER, sc.scenario_id):
            save_pgm(path, results[sc.scenario_id])
        paths.append(path)
    logger.info("rendered %d images in %.1f s", len(paths), time.perf_counter() - started)
    return paths


def _featurize_set(cfg: ExperimentConfig, out: Path, sset: ScenarioSet) -> Dataset:
    names = feature_names(cfg.features)
    scenarios = sset.all_scenarios()
    rows = []
    for sc in scenarios:
        with stage(PipelineStage.FEATURIZE, sc.scenario_id):
            rows.append(extract_features(load_pgm(image_path(out, sc)), cfg.features).values)
    return Dataset(
        np.vstack(rows),
        np.array([sc.target for sc in scenarios]),
        tuple(sc.scenario_id for sc in scenarios),
        names,
    )


def featurize(cfg: ExperimentConfig) -> list[Path]:
    """Extract features from the on-disk images into one CSV per section."""
    out = _output_dir(cfg)
    paths = []
    for sset in _sets(cfg):
        with stage(PipelineStage.FEATURIZE):
            ds = _featurize_set(cfg, out, sset)
            path = features_path(out, sset.section)
            path.write_bytes(write_dataset_csv(ds))
        logger.info("wrote %d feature rows to %s", ds.n_samples, path)
        paths.append(path)
    return paths


def _training_rows(ds: Dataset, sset: ScenarioSet) -> Dataset:
    train_ids = {sc.scenario_id for sc in sset.scenarios(TRAIN)}
    if not train_ids <= set(ds.ids):
        missing = sorted(train_ids - set(ds.ids))[0]
        raise ConfigError(f"feature file has no row for {missing}; rerun featurize")
    return ds.subset(np.array([i in train_ids for i in ds.ids]))


def _specs(cfg: ExperimentConfig) -> list[RegressorSpec]:
    return all_specs(cfg.models.variants, cfg.models.hyperparameters)


def train(cfg: ExperimentConfig) -> dict[SectionKind, CVReport]:
    """Cross-validate every configured model and refit the best one per section."""
    out = _output_dir(cfg)
    results = {}
    for sset in _sets(cfg):
        with stage(PipelineStage.TRAIN):
            ds = read_dataset_csv(features_path(out, sset.section).read_bytes())
            train_ds = _training_rows(ds, sset)
            train_ds.check_normalized_targets()
            specs = _specs(cfg)
            processes = _pool_size(cfg) if cfg.parallel else None
            cv = cross_validate(train_ds, specs, cfg.models.cv_k, cfg.seed, processes)
            best = best_variant(list(cv.rmse.items()))
            model = fit(train_ds, next(s for s in specs if s.variant is best), cfg.seed)
            cv_path(out, sset.section).write_text(
                json.dumps(cv.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            path = model_path(out, sset.section)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(dump_model(model), encoding="utf-8")
        logger.info("%s: best model %s (CV RMSE %.6g)", sset.section.value, best.value, cv.rmse[best])
        results[sset.section] = cv
    return results


def evaluate(cfg: ExperimentConfig) -> ExperimentResult:
    """Estimate the test locations with the refit models and write the reports."""
    out = _output_dir(cfg)
    reports: dict[SectionKind, EvalReport] = {}
    sets = _sets(cfg)
    net = build_network(cfg.network)
    for sset in sets:
        with stage(PipelineStage.EVALUATE):
            ds = read_dataset_csv(features_path(out, sset.section).read_bytes())
            cv = CVReport.from_dict(json.loads(cv_path(out, sset.section).read_text(encoding="utf-8")))
            model = load_model(model_path(out, sset.section).read_text(encoding="utf-8"))
            row_of = {sid: i for i, sid in enumerate(ds.ids)}
            estimates = []
            for sc in sset.scenarios(TEST):
                if sc.scenario_id not in row_of:
                    raise ConfigError(f"feature file has no row for {sc.scenario_id}; rerun featurize")
                estimated = predict(model, ds.x[row_of[sc.scenario_id]]) * sset.section_length_km
                estimates.append(
                    LocationEstimate(
                        sc.scenario_id,
                        sc.relative_km,
                        estimated,
                        net.line.section_index_at(sc.location_km),
                    )
                )
        with stage(PipelineStage.REPORT):
            report = build_report(
                cv,
                estimates,
                sset.section,
                sset.section_length_km,
                variants=[s.variant for s in _specs(cfg)],
                section_start_km=sset.section_offset_km,
                framing=cfg.canvas.framing_for(net.line.sections[sset.section_index].kind),
            )
            text_path, json_path = report_paths(out, sset.section)
            text_path.write_text(OutputFormatter.format_text(report), encoding="utf-8")
            json_path.write_text(OutputFormatter.to_json(report), encoding="utf-8")
        reports[sset.section] = report
    overhead, cable = (reports[s.section] for s in sets)
    return ExperimentResult(overhead, cable, out)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all four stages and return both section reports."""
    started = time.perf_counter()
    with stage(PipelineStage.CONFIG):
        _output_dir(cfg).mkdir(parents=True, exist_ok=True)
    simulate(cfg)
    featurize(cfg)
    train(cfg)
    result = evaluate(cfg)
    logger.info("experiment finished in %.1f s", time.perf_counter() - started)
    return result


def with_overrides(
    cfg: ExperimentConfig, seed: Optional[int] = None, output_dir: Optional[str] = None
) -> ExperimentConfig:
    """Copy of ``cfg`` with the command-line seed and output directory applied."""
    changes: dict[str, object] = {}
    if seed is not None:
        changes["seed"] = seed
    if output_dir is not None:
        changes["output_dir"] = output_dir
    return replace(cfg, **changes) if changes else cfg
