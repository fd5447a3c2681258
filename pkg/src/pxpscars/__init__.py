"""Exact-numerics toolkit for deformed constrained spin chains with
quantum many-body scars."""

from .basis import ConstrainedBasis, SymmetrySector, build_sector, enumerate_basis, neel_state
from .operators import (
    AlgebraConstants,
    CouplingSet,
    ansatz_couplings,
    build_deformation,
    build_hamiltonian,
    build_pxp,
    commutator_hz,
    optimal_h2_analytic,
    solve_constraint,
    split_pm,
)

__version__ = "0.1.0"
