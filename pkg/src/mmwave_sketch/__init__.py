"""Sparse mm-Wave large-array channel estimation from low-dimensional sketches."""

from .array_geom import UlaConfig, grid_atoms, steering_matrix, steering_vector
from .channel_model import ScatteringGeometry, TrainingSchedule
from .metrics import ccdf, eta, mu
from .one_shot import DenoiseConfig, atomic_denoise, time_average_estimate
from .rmmv import EigenGap, KnownRank, extract_subspace, reduce_window, rmmv_fit, subspace_ls_estimate
from .sdp import SdpSolution, SolverConfig, solve_sdp
from .sketching import SketchMatrix, coprime_antenna_selection, random_antenna_selection, sketch

__version__ = "0.1.0"
