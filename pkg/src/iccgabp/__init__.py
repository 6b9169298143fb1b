"""Joint QPSK detection and over-the-air sum computation with bivariate Gaussian belief propagation."""

from .combiner import SingularSystemError, apply_combiner, build_omega, combine_sum, compute_combiner
from .estimator import JointIccReceiver
from .gabp import DetectionResult, run_detector
from .harness import Scenario, StoppingRule, SweepReport, run_sweep, run_trial
from .metrics import TrialMetrics, genie_compute_bound, genie_data_bound, nmse, wilson_interval
from .numerics import DecompositionError, hermitian_solve, rng_stream
from .system_model import ConfigError, SystemConfig, qpsk_demodulate, qpsk_modulate

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DecompositionError", "DetectionResult", "JointIccReceiver", "Scenario",
    "SingularSystemError", "StoppingRule", "SweepReport", "SystemConfig", "TrialMetrics",
    "apply_combiner", "build_omega", "combine_sum", "compute_combiner", "genie_compute_bound",
    "genie_data_bound", "hermitian_solve", "nmse", "qpsk_demodulate", "qpsk_modulate",
    "rng_stream", "run_detector", "run_sweep", "run_trial", "wilson_interval",
]
