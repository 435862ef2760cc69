"""Exact LP/MILP core: two-phase simplex plus best-bound branch-and-bound."""
from .bnb import BnbNode, solve_milp
from .lpformat import read_lp, write_lp
from .model import LpProblem, LpSolution, LpStatus
from .simplex import solve_lp

__all__ = [
    "BnbNode",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "read_lp",
    "solve_lp",
    "solve_milp",
    "write_lp",
]
