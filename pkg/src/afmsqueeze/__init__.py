"""Renormalized magnon dispersions and two-mode quadrature squeezing in
uniaxial two-sublattice antiferromagnets."""

from .lattice import BZPath, LatticeSpec, WaveVector, bz_grid, high_symmetry_path, structure_factor
from .spinwave import BogoliubovPair, ModelParams, bare_bogoliubov, bare_dispersion, bose_occupation
from .meanfield import MeanFieldParams, MeanFieldSolution, RenormalizedPoint, solve_self_consistent
from .states import CompositeTransform, HybridPair, StateAmplitudes, eigenstate_amplitudes
from .quadrature import QuadratureStats, variance_xp

__version__ = "0.1.0"

__all__ = [
    "BZPath",
    "LatticeSpec",
    "WaveVector",
    "bz_grid",
    "high_symmetry_path",
    "structure_factor",
    "BogoliubovPair",
    "ModelParams",
    "bare_bogoliubov",
    "bare_dispersion",
    "bose_occupation",
    "MeanFieldParams",
    "MeanFieldSolution",
    "RenormalizedPoint",
    "solve_self_consistent",
    "CompositeTransform",
    "HybridPair",
    "StateAmplitudes",
    "eigenstate_amplitudes",
    "QuadratureStats",
    "variance_xp",
]
