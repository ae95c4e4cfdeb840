"""mechlaws: learn the laws of observed mechanical motions and continue them.

Pipeline: simulate (or load) uniformly sampled trajectories, build the
finite-difference phase dataset, train a random-feature (ELM) model of the
conserved quantities and the discrete force, then continue the motion with
a second-order recursion stabilized by projection onto the learned
conservation surfaces.
"""

from .config import ExperimentConfig, load_config, load_preset, parse_config
from .dataset import Dataset, PhaseSample, Scaler, build_dataset, fit_scaler, wrap_angle
from .errors import DegenerateModelError, DivergenceError, InvalidInputError, MechlawsError
from .features import FeatureBank, feature_matrix, features, sample_bank
from .integrators import integrate, solve_sampled
from .laws import (ConservedLaw, ForceModel, LawModel, evaluate_force, evaluate_law,
                   extract_conserved, fit_force, load_model, save_model, train)
from .linalg import eigh_sym
from .metrics import (Report, conservation_report, divergence_time, force_precision,
                      max_velocity_proxy, reconstruction_error)
from .oscillator import HarmonicSpec, discrete_energy, harmonic_discrete_force, harmonic_step, z_factor
from .recursion import (ContinuationResult, RecursionConfig, continue_motion, project,
                        save_continuation_csv, step_eom)
from .systems import SystemSpec, double_pendulum, energy, gravity_pendulum, harmonic, rhs
from .trajectory import Trajectory, load_trajectory_csv, save_trajectory_csv

__version__ = "0.1.0"

__all__ = [
    "ConservedLaw", "ContinuationResult", "Dataset", "DegenerateModelError", "DivergenceError",
    "ExperimentConfig", "FeatureBank", "ForceModel", "HarmonicSpec", "InvalidInputError",
    "LawModel", "MechlawsError", "PhaseSample", "RecursionConfig", "Report", "Scaler",
    "SystemSpec", "Trajectory", "build_dataset", "conservation_report", "continue_motion",
    "discrete_energy", "divergence_time", "double_pendulum", "eigh_sym", "energy",
    "evaluate_force", "evaluate_law", "extract_conserved", "feature_matrix", "features",
    "fit_force", "fit_scaler", "force_precision", "gravity_pendulum",
    "harmonic", "harmonic_discrete_force", "harmonic_step", "integrate", "load_config",
    "load_model", "load_preset", "load_trajectory_csv", "max_velocity_proxy", "parse_config",
    "project", "reconstruction_error", "rhs", "sample_bank", "save_continuation_csv",
    "save_model", "save_trajectory_csv", "solve_sampled", "step_eom", "train", "wrap_angle",
    "z_factor",
]
