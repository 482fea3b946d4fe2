"""Complementary compressive ghost imaging: simulation and reconstruction.

The measurement model displays binary patterns and their bitwise
complements, records photon-pair coincidence counts per pattern, and
reconstructs the object transmission image from far fewer pattern pairs
than pixels.  Pair-sum normalization cancels slow detector-efficiency
drift; the pattern/complement difference turns the 0/1 pattern matrix into
a +-1 sensing matrix with exactly orthogonal rows.
"""

from .errors import (ConfigError, DegenerateMeasurementError, DegeneratePartitionError,
                     InvalidMatrixError, ParameterError, SolverDivergenceError,
                     ToolkitError, UndefinedCnrError)
from .metrics import CnrReport, cnr, rel_error
from .normalization import MeasurementVectors, normalize, raw_vectors
from .photonsim import (DriftModel, MeasurementRecord, NoiseConfig, drift_factors,
                        expected_counts, save_record_csv, simulate_record)
from .pipeline import (ExperimentConfig, EnsembleConfig, PhantomConfig, RunResult,
                       load_config, run, save_config, sweep_measurements, sweep_photons)
from .scene import (OpticsGeometry, Phantom, load_phantom_pgm, make_double_slit,
                    save_phantom_pgm, solve_geometry)
from .sensing import (PatternPair, SensingEnsemble, build_ensemble, differential_matrix,
                      hadamard, load_ensemble, save_ensemble)
from .solvers import (OmpOptions, ReconImage, TvOptions, omp, save_recon_csv,
                      save_recon_pgm, tv_admm)

__version__ = "0.1.0"

__all__ = [
    "CnrReport", "ConfigError", "DegenerateMeasurementError", "DegeneratePartitionError",
    "DriftModel", "EnsembleConfig", "ExperimentConfig", "InvalidMatrixError",
    "MeasurementRecord", "MeasurementVectors", "NoiseConfig", "OmpOptions",
    "OpticsGeometry", "ParameterError", "PatternPair", "Phantom", "PhantomConfig",
    "ReconImage", "RunResult", "SensingEnsemble", "SolverDivergenceError",
    "ToolkitError", "TvOptions", "UndefinedCnrError", "build_ensemble", "cnr",
    "differential_matrix", "drift_factors", "expected_counts", "hadamard",
    "load_config", "load_ensemble", "load_phantom_pgm", "make_double_slit",
    "normalize", "omp", "raw_vectors", "rel_error", "run", "save_config",
    "save_ensemble", "save_phantom_pgm", "save_record_csv", "save_recon_csv",
    "save_recon_pgm", "simulate_record", "solve_geometry", "sweep_measurements",
    "sweep_photons", "tv_admm",
]
