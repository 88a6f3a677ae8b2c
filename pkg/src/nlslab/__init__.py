"""Spectral numerical lab for L^2-constrained ground states of second-order and
biharmonic nonlinear Schroedinger equations with bounded coefficients."""

__version__ = "0.1.0"

from .grid import Grid, make_grid
from .potentials import PotentialSpec, eval_potential
from .energy import EnergyModel, energy, total_energy
from .groundstate import GroundState, SolverOptions, minimize
from .dynamics import BlowUpError, evolve
from .stability import orbit_distance, stability_experiment

__all__ = [
    "Grid", "make_grid", "PotentialSpec", "eval_potential", "EnergyModel", "energy",
    "total_energy", "GroundState", "SolverOptions", "minimize", "BlowUpError", "evolve",
    "orbit_distance", "stability_experiment", "__version__",
]
