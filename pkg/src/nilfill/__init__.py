"""Cone fillings of cycles in simply connected nilpotent Lie groups, in exponential coordinates."""

from .algebra import NilpotentAlgebra, catalog, load_algebra, validate
from .bch import bch, frame, left_translate
from .chains import PLChain, boundary, group_translate, mass
from .distortion import LatticeSpec, bfs_ball, distortion_fit
from .experiments import ExperimentConfig, run_experiment, write_outputs
from .filling import cone, fill_cycle, fill_loop
from .grid import GridSpec, grid_deform
from .metrics import check_sandwich, cone_exponent, similarity_bound
from .quadrature import QuadratureSpec

__version__ = "0.1.0"

__all__ = [
    "NilpotentAlgebra", "catalog", "load_algebra", "validate",
    "bch", "frame", "left_translate",
    "PLChain", "boundary", "group_translate", "mass",
    "LatticeSpec", "bfs_ball", "distortion_fit",
    "ExperimentConfig", "run_experiment", "write_outputs",
    "cone", "fill_cycle", "fill_loop",
    "GridSpec", "grid_deform",
    "check_sandwich", "cone_exponent", "similarity_bound",
    "QuadratureSpec",
]
