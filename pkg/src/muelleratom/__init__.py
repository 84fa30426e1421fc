"""Radial solvers for density-matrix (Mueller), reduced Hartree-Fock and
Thomas-Fermi atoms, with an operator-inequality verification harness."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .coulomb import Potential, RadialDensity, ScreenedProfile
from .dmatrix import Channel, EnergyBreakdown, NaturalOrbitalEnsemble
from .grid import RadialGrid, build_log_grid, default_grid
from .solver import MinimizationResult, SolverConfig, minimize_mueller, minimize_rhf
from .tf import CONSTANTS, TFSolution, tf_solve_atomic, tf_solve_exterior

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Potential",
    "RadialDensity",
    "ScreenedProfile",
    "Channel",
    "EnergyBreakdown",
    "NaturalOrbitalEnsemble",
    "RadialGrid",
    "build_log_grid",
    "default_grid",
    "MinimizationResult",
    "SolverConfig",
    "minimize_mueller",
    "minimize_rhf",
    "CONSTANTS",
    "TFSolution",
    "tf_solve_atomic",
    "tf_solve_exterior",
    "__version__",
]
