"""Scenario configuration and end-to-end orchestration.

A scenario is described by one JSON document (versioned, strict schema)
covering phantom geometry, sensing ensemble, counting statistics, drift,
matrix mode, normalization switch, solver, and trial seeds.  ``run``
executes phantom -> ensemble -> simulation -> normalization -> solver ->
metrics once per trial seed and writes, per trial, the measurement CSV,
the raw reconstruction CSV and its PGM rendering, plus one summary CSV
row; a manifest lists every output file with its content hash.

All CSV content is deterministic given (config, seeds): floats are
rendered at fixed precision and wall-clock timings go to the manifest
only.  Sweep drivers replicate the measurement-number and photon-budget
comparison grids over the three matrix modes.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import report
from .errors import ConfigError, ToolkitError
from .ioutil import sha256_file, write_csv
from .metrics import cnr, rel_error
from .normalization import normalize, raw_vectors
from .photonsim import DriftModel, NoiseConfig, save_record_csv, simulate_record
from .scene import make_double_slit, save_phantom_pgm
from .sensing import build_ensemble, differential_matrix
from .solvers import OmpOptions, TvOptions, omp, save_recon_csv, save_recon_pgm, tv_admm

CONFIG_VERSION = 1
MATRIX_MODES = ("plus", "minus", "differential")
SOLVERS = ("omp", "tv")

SUMMARY_HEADER = [
    "solver", "matrix_mode", "normalization", "n_pixels", "m_pairs",
    "sampling_ratio", "fullwhite_rate", "integration_s", "shot_noise",
    "background_rate", "drift_amplitude", "drift_period", "drift_walk_sigma",
    "drift_per_frame", "drift_gain", "drift_seed", "trial_seed", "iterations",
    "residual_norm", "threshold", "n_signal", "n_background", "mean_signal",
    "mean_background", "std_background", "cnr", "rel_error",
]


@dataclass(eq=False)
class PhantomConfig:
    """Double-slit phantom geometry; micrometre pitches and object-plane sizes."""

    rows: int = 32
    cols: int = 64
    pitch_x: float = 164.16
    pitch_y: float = 109.44
    slit_width: float = 200.0
    slit_separation: float = 800.0
    beta: float = 2.56


@dataclass(eq=False)
class EnsembleConfig:
    n_pixels: int = 2048
    m_pairs: int = 400
    seed: int = 101


@dataclass(eq=False)
class ExperimentConfig:
    version: int = CONFIG_VERSION
    phantom: PhantomConfig = field(default_factory=PhantomConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    drift: DriftModel | None = field(default_factory=DriftModel)
    matrix_mode: str = "differential"
    normalization: bool = True
    solver: str = "tv"
    omp_options: OmpOptions = field(default_factory=OmpOptions)
    tv_options: TvOptions = field(default_factory=TvOptions)
    trial_seeds: tuple[int, ...] = (1,)
    output_dir: str = "runs/experiment"

    def __post_init__(self):
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version!r}")
        if self.matrix_mode not in MATRIX_MODES:
            raise ConfigError(f"matrix_mode must be one of {MATRIX_MODES}, got {self.matrix_mode!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        self.trial_seeds = tuple(int(s) for s in self.trial_seeds)
        if not self.trial_seeds:
            raise ConfigError("trial_seeds must not be empty")
        if self.phantom.rows * self.phantom.cols != self.ensemble.n_pixels:
            raise ConfigError(
                f"phantom grid {self.phantom.rows}x{self.phantom.cols} does not match "
                f"ensemble n_pixels {self.ensemble.n_pixels}"
            )


def _dataclass_from_dict(cls, doc, where):
    if doc is None:
        return None
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {type(doc).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**doc)
    except ToolkitError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    doc = dict(doc)
    if "normalization" in doc and isinstance(doc["normalization"], str):
        mapping = {"on": True, "off": False}
        if doc["normalization"] not in mapping:
            raise ConfigError(f"normalization must be true/false or 'on'/'off', got {doc['normalization']!r}")
        doc["normalization"] = mapping[doc["normalization"]]
    sub = {
        "phantom": PhantomConfig,
        "ensemble": EnsembleConfig,
        "noise": NoiseConfig,
        "drift": DriftModel,
        "omp_options": OmpOptions,
        "tv_options": TvOptions,
    }
    kwargs = {}
    for key, value in doc.items():
        if key in sub:
            kwargs[key] = _dataclass_from_dict(sub[key], value, key)
        elif key == "trial_seeds":
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        return ExperimentConfig(**kwargs)
    except ToolkitError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    doc = dataclasses.asdict(config)
    doc["trial_seeds"] = list(config.trial_seeds)
    return doc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(doc)


def save_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n")


@dataclass(eq=False)
class RunResult:
    out_dir: Path
    files: list[Path]
    rows: list[dict]
    wall_times_s: dict[str, float]
    images: dict[str, np.ndarray]


def _sampling_ratio(m: int, n: int) -> str:
    return f"{m / n:.4f}"


def _trial_tag(config: ExperimentConfig, seed: int) -> str:
    return (f"{config.matrix_mode}_{config.solver}"
            f"_M{config.ensemble.m_pairs}_T{config.noise.integration_s:g}_seed{seed}")


def run(config: ExperimentConfig, out_dir=None, figures: bool = False) -> RunResult:
    """Execute the configured scenario once per trial seed.

    Writes phantom.pgm, per-trial measurement/reconstruction files, a
    summary CSV and a manifest into the output directory.  On any error,
    files written by this invocation are removed before the error
    propagates.  Per-trial drift uses drift.seed + trial_seed so trials
    differ in both counting noise and drift realization.
    """
    out = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    try:
        phantom = make_double_slit(
            rows=config.phantom.rows, cols=config.phantom.cols,
            pitch_x=config.phantom.pitch_x, pitch_y=config.phantom.pitch_y,
            slit_width_obj=config.phantom.slit_width,
            separation_obj=config.phantom.slit_separation,
            beta=config.phantom.beta,
        )
        ensemble = build_ensemble(config.ensemble.n_pixels, config.ensemble.m_pairs,
                                  config.ensemble.seed)
        if config.matrix_mode == "differential":
            sense = differential_matrix(ensemble).astype(float)
        else:
            kind = "pos" if config.matrix_mode == "plus" else "neg"
            sense = ensemble.pattern_matrix(kind).astype(float)
        gram = sense.T @ sense if config.solver == "tv" else None
        shape = (config.phantom.rows, config.phantom.cols)

        phantom_path = out / "phantom.pgm"
        save_phantom_pgm(phantom, phantom_path)
        created.append(phantom_path)

        rows: list[dict] = []
        wall: dict[str, float] = {}
        images: dict[str, np.ndarray] = {}
        for seed in config.trial_seeds:
            t0 = time.perf_counter()
            drift = (replace(config.drift, seed=config.drift.seed + seed)
                     if config.drift is not None else None)
            record = simulate_record(ensemble, phantom, config.noise, drift, seed)
            vectors = normalize(record) if config.normalization else raw_vectors(record)
            y = {"plus": vectors.c_pos, "minus": vectors.c_neg,
                 "differential": vectors.delta}[config.matrix_mode]
            if config.solver == "omp":
                image = omp(sense, y, shape, config.omp_options)
            else:
                image = tv_admm(sense, y, shape, config.tv_options, gram=gram)
            report_cnr = cnr(image)
            err = rel_error(image, phantom)
            elapsed = time.perf_counter() - t0

            tag = _trial_tag(config, seed)
            meas_path = out / f"measurements_{tag}.csv"
            save_record_csv(record, meas_path)
            created.append(meas_path)
            recon_csv = out / f"recon_{tag}.csv"
            save_recon_csv(image, recon_csv)
            created.append(recon_csv)
            recon_pgm = out / f"recon_{tag}.pgm"
            save_recon_pgm(image, recon_pgm)
            created.append(recon_pgm)
            created.append(Path(str(recon_pgm) + ".txt"))

            drift_row = config.drift if config.drift is not None else DriftModel(
                sine_amplitude=0.0, walk_sigma=0.0)
            rows.append({
                "solver": config.solver,
                "matrix_mode": config.matrix_mode,
                "normalization": config.normalization,
                "n_pixels": config.ensemble.n_pixels,
                "m_pairs": config.ensemble.m_pairs,
                "sampling_ratio": _sampling_ratio(config.ensemble.m_pairs,
                                                  config.ensemble.n_pixels),
                "fullwhite_rate": config.noise.fullwhite_rate,
                "integration_s": config.noise.integration_s,
                "shot_noise": config.noise.shot_noise,
                "background_rate": config.noise.background_rate,
                "drift_amplitude": drift_row.sine_amplitude,
                "drift_period": drift_row.sine_period,
                "drift_walk_sigma": drift_row.walk_sigma,
                "drift_per_frame": drift_row.per_frame,
                "drift_gain": drift_row.gain,
                "drift_seed": drift_row.seed,
                "trial_seed": seed,
                "iterations": image.iterations,
                "residual_norm": image.residual_norm,
                "threshold": report_cnr.threshold,
                "n_signal": report_cnr.n_signal,
                "n_background": report_cnr.n_background,
                "mean_signal": report_cnr.mean_signal,
                "mean_background": report_cnr.mean_background,
                "std_background": report_cnr.std_background,
                "cnr": report_cnr.cnr,
                "rel_error": err,
            })
            wall[tag] = elapsed
            images[tag] = image.values.copy()

        summary_path = out / "summary.csv"
        write_csv(summary_path, SUMMARY_HEADER,
                  [[row[k] for k in SUMMARY_HEADER] for row in rows])
        created.append(summary_path)

        if figures:
            for tag, values in images.items():
                fig_path = out / f"recon_{tag}.png"
                report.save_image_figure(values, fig_path, title=tag,
                                         reference=phantom.values)
                created.append(fig_path)

        manifest_path = out / "manifest.json"
        manifest = {
            "version": CONFIG_VERSION,
            "config": config_to_dict(config),
            "files": {p.name: {"sha256": sha256_file(p), "bytes": p.stat().st_size}
                      for p in created},
            "wall_time_s": wall,
        }
        manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
        created.append(manifest_path)
    except Exception:
        for p in created:
            p.unlink(missing_ok=True)
        raise
    return RunResult(out_dir=out, files=created, rows=rows,
                     wall_times_s=wall, images=images)


def _write_combined(out: Path, results: list[RunResult]) -> Path:
    rows = [row for res in results for row in res.rows]
    path = out / "sweep_summary.csv"
    write_csv(path, SUMMARY_HEADER, [[row[k] for k in SUMMARY_HEADER] for row in rows])
    return path


def sweep_measurements(base: ExperimentConfig, ms, out_dir=None,
                       figures: bool = False) -> list[RunResult]:
    """Run all three matrix modes at each measurement count.

    Produces |modes| x |ms| runs of the base config's solver in
    subdirectories <mode>_m<M> plus one combined sweep_summary.csv; with
    figures on, a reconstruction panel grid and a CNR-vs-M curve.
    """
    out = Path(out_dir) if out_dir is not None else Path(base.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results: list[RunResult] = []
    panels = []
    for mode in MATRIX_MODES:
        for m in ms:
            cfg = replace(base,
                          ensemble=replace(base.ensemble, m_pairs=int(m)),
                          matrix_mode=mode,
                          output_dir=str(out / f"{mode}_m{int(m)}"))
            res = run(cfg)
            results.append(res)
            first_tag = _trial_tag(cfg, cfg.trial_seeds[0])
            panels.append((mode, f"M={int(m)}", res.images[first_tag]))
    combined = _write_combined(out, results)
    if figures and results:
        report.save_grid_figure(panels, out / "sweep_grid.png")
        report.save_metric_curves([r for res in results for r in res.rows],
                                  x_field="m_pairs", path=out / "cnr_vs_m.png")
    elif figures:
        pass  # nothing to draw for an empty sweep
    _ = combined
    return results


def sweep_photons(base: ExperimentConfig, intervals_s, out_dir=None,
                  figures: bool = False) -> list[RunResult]:
    """Run the plus and differential modes with the TV solver at each
    integration interval; the photon budget per measurement is
    fullwhite_rate * interval."""
    out = Path(out_dir) if out_dir is not None else Path(base.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results: list[RunResult] = []
    panels = []
    for mode in ("plus", "differential"):
        for interval in intervals_s:
            cfg = replace(base,
                          noise=replace(base.noise, integration_s=float(interval)),
                          matrix_mode=mode,
                          solver="tv",
                          output_dir=str(out / f"{mode}_t{interval:g}"))
            res = run(cfg)
            results.append(res)
            budget = cfg.noise.fullwhite_rate * cfg.noise.integration_s
            first_tag = _trial_tag(cfg, cfg.trial_seeds[0])
            panels.append((mode, f"{budget:g} photons", res.images[first_tag]))
    _write_combined(out, results)
    if figures and results:
        report.save_grid_figure(panels, out / "sweep_grid.png")
        report.save_metric_curves([r for res in results for r in res.rows],
                                  x_field="integration_s", path=out / "cnr_vs_photons.png")
    return results
