"""Eigenvalues of -d2/dx2 + V(x) for even polynomial V in trigonometric bases.

Typical use::

    from specbox import make_context, Potential, BasisSpec, hamiltonian_matrix, eig_sym

    ctx = make_context(60)
    p = Potential.quartic(1, "0.1")
    spec = BasisSpec("periodic", "even", 40, ctx.mpf("11.07433"))
    energies = eig_sym(hamiltonian_matrix(p, spec, ctx), ctx).eigenvalues
"""
from .basis import BasisSpec, Family, Parity, basis_value, kinetic_eigenvalue
from .eigensolve import ConvergenceError, SpectrumResult, eig_sym, estimate_significant_digits
from .matelem import SymMatrix, cosine_moment, hamiltonian_matrix, potential_matrix
from .optimizer import NoCandidateError, ScanResult, find_optimal_L, scan_energy
from .potential import Potential, ScalingMap, evaluate, outer_turning_point, reduce
from .precision import PrecisionCtx, make_context, to_decimal_string

__all__ = [
    "BasisSpec", "Family", "Parity", "basis_value", "kinetic_eigenvalue",
    "ConvergenceError", "SpectrumResult", "eig_sym", "estimate_significant_digits",
    "SymMatrix", "cosine_moment", "hamiltonian_matrix", "potential_matrix",
    "NoCandidateError", "ScanResult", "find_optimal_L", "scan_energy",
    "Potential", "ScalingMap", "evaluate", "outer_turning_point", "reduce",
    "PrecisionCtx", "make_context", "to_decimal_string",
]
