"""Finite element solvers for antiplane contact with Tresca friction.

The same discrete problem is solved three ways: as a variational inequality
of the second kind (smoothing + Newton), and as a box-constrained saddle point
(projected Uzawa, primal-dual active set). The ``equivalence`` and ``verify``
modules check that the answers coincide and satisfy the pointwise friction law.
"""

from .assembly import DiscreteSystem, ProblemSpec, build_system, eval_j, eval_j_eps
from .equivalence import compare_formulations, infsup_estimate
from .mesh import Mesh, generate_unit_square, load_mesh, refine
from .mixed_solver import solve_pdas, solve_uzawa
from .vi_solver import RegularizationSchedule, solve_vi

__all__ = [
    "DiscreteSystem",
    "Mesh",
    "ProblemSpec",
    "RegularizationSchedule",
    "build_system",
    "compare_formulations",
    "eval_j",
    "eval_j_eps",
    "generate_unit_square",
    "infsup_estimate",
    "load_mesh",
    "refine",
    "solve_pdas",
    "solve_uzawa",
    "solve_vi",
]
