"""Quantization of one-dimensional wells through the quantum Hamilton-Jacobi equation.

Typical use::

    from qhjquant import PotentialSpec, solve
    level = solve(2, PotentialSpec.quartic(1.0, 1.0))
    level.E   # 5.1792916...
"""

from .allowed import find_b_star
from .assembly import assemble, export_series
from .eigensolver import EigenResult, SolverOptions, solve
from .errors import QHJError
from .potential import PhysicalConstants, PotentialSpec, find_turning_points
from .reference import classical_action, numerov_solve, wkb_energy

__version__ = "0.1.0"

__all__ = [
    "PhysicalConstants",
    "PotentialSpec",
    "find_turning_points",
    "SolverOptions",
    "EigenResult",
    "solve",
    "find_b_star",
    "assemble",
    "export_series",
    "classical_action",
    "numerov_solve",
    "wkb_energy",
    "QHJError",
]
