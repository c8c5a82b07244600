"""Numerical laboratory for planar free-boundary plasma spikes."""

from .emden import EmdenSolution, eval_dphi, eval_phi, solve_emden
from .entire import EntireSolution, OneDimSolution, make_entire, masses, rescale, solve_onedim
from .green import DiskGreen, KRConfig, RectGreen, far_field_check, green_fn, kr_critical, kr_gradient, kr_hamiltonian
from .grid import GridDomain, disk_domain, read_field, rect_domain, write_field
from .profiles import DYProfile, build_profile, constraint_parameters, profile_masses
from .scales import ScaleParams, solve_scale
from .solver import GridSolution, ParameterSet, SolverConfig, SpikeInit, continuation_sweep, recover_parameters, solve
from .spikes import ClassifyConfig, SpikeRecord, SpikeSequence, ball_masses, classify, find_peaks, normalize_rescale, quantization_report, roundness, track_spikes

__version__ = "0.1.0"

__all__ = [
    "EmdenSolution", "solve_emden", "eval_phi", "eval_dphi",
    "EntireSolution", "OneDimSolution", "make_entire", "rescale", "masses", "solve_onedim",
    "ScaleParams", "solve_scale",
    "DYProfile", "build_profile", "profile_masses", "constraint_parameters",
    "GridDomain", "disk_domain", "rect_domain", "write_field", "read_field",
    "GridSolution", "SolverConfig", "SpikeInit", "ParameterSet",
    "solve", "continuation_sweep", "recover_parameters",
    "SpikeRecord", "SpikeSequence", "ClassifyConfig",
    "find_peaks", "normalize_rescale", "ball_masses", "classify",
    "roundness", "quantization_report", "track_spikes",
    "DiskGreen", "RectGreen", "KRConfig", "green_fn",
    "kr_hamiltonian", "kr_gradient", "kr_critical", "far_field_check",
]
