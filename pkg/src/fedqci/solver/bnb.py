"""Best-bound branch-and-bound over binary variables."""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .model import LpProblem, LpSolution, LpStatus
from .simplex import FEAS_TOL, solve_lp

INT_TOL = 1e-6


@dataclass(order=True)
class BnbNode:
    bound: float
    seq: int
    fixed: dict[int, int] = field(compare=False, default_factory=dict)
    depth: int = field(compare=False, default=0)


def _most_fractional(x: np.ndarray, binaries: list[int], tol: float) -> int | None:
    best, best_j = tol, None
    for j in binaries:
        frac = min(x[j] - np.floor(x[j]), np.ceil(x[j]) - x[j])
        if frac > best:
            best, best_j = frac, j
    return best_j


def solve_milp(
    p: LpProblem,
    binaries: Iterable[int],
    *,
    int_tol: float = INT_TOL,
    feas_tol: float = FEAS_TOL,
) -> LpSolution:
    """Minimise (or maximise) ``p`` with the listed variables restricted to {0, 1}.

    Nodes are explored best-bound first; ties go to the node created first.
    Branching picks the most fractional binary, lowest index on ties.  The
    returned solution has its binaries rounded to exact 0/1 values.
    """
    binaries = sorted(set(binaries))
    lo0 = p.lo.copy()
    hi0 = p.hi.copy()
    for j in binaries:
        if lo0[j] < 0 or hi0[j] > 1:
            raise ValueError(f"binary variable {j} has bounds outside [0, 1]")
    sign = -1.0 if p.maximize else 1.0

    def relax(fixed: dict[int, int]) -> LpSolution:
        lo, hi = lo0.copy(), hi0.copy()
        for j, v in fixed.items():
            lo[j] = hi[j] = v
        return solve_lp(p.with_bounds(lo, hi), feas_tol=feas_tol)

    counter = itertools.count()
    nodes = 0
    iters = 0
    incumbent: LpSolution | None = None
    best = np.inf  # in minimisation sense
    heap = [BnbNode(-np.inf, next(counter))]

    while heap:
        node = heapq.heappop(heap)
        if node.bound >= best - _gap(best):
            break
        sol = relax(node.fixed)
        nodes += 1
        iters += sol.iterations
        if sol.status is LpStatus.INFEASIBLE:
            continue
        if sol.status is not LpStatus.OPTIMAL:
            if node.depth == 0 or sol.status is LpStatus.ITERATION_LIMIT:
                return LpSolution(sol.status, iterations=iters, nodes=nodes)
            continue
        z = sign * sol.objective
        if z >= best - _gap(best):
            continue
        j = _most_fractional(sol.x, binaries, int_tol)
        if j is None:
            x = sol.x.copy()
            x[binaries] = np.round(x[binaries])
            incumbent = LpSolution(LpStatus.OPTIMAL, float(p.c @ x), x)
            best = z
            continue
        for v in (0, 1):
            child = dict(node.fixed)
            child[j] = v
            heapq.heappush(heap, BnbNode(z, next(counter), child, node.depth + 1))

    if incumbent is None:
        return LpSolution(LpStatus.INFEASIBLE, iterations=iters, nodes=nodes)
    incumbent.iterations = iters
    incumbent.nodes = nodes
    return incumbent


def _gap(best: float) -> float:
    if not np.isfinite(best):
        return 0.0
    return 1e-9 * max(1.0, abs(best))
