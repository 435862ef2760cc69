"""Dense-tableau two-phase primal simplex with Bland's anti-cycling rule.

Problems are brought to standard form by shifting every variable to its
lower bound, turning finite upper bounds into explicit rows, equilibrating
each row to unit max-norm and flipping rows so the right-hand side is
non-negative.  Phase I minimises the sum of artificials; phase II the real
objective.  Entering and leaving choices always take the lowest eligible
index, so the pivot sequence is a pure function of the input.
"""
from __future__ import annotations

import numpy as np

from .model import LpProblem, LpSolution, LpStatus

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
ZERO_TOL = 1e-12


def _pivot(T: np.ndarray, basis: list[int], r: int, j: int) -> None:
    T[r] /= T[r, j]
    nz = np.flatnonzero(T[r])
    col = T[:, j].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    if rows.size:
        block = T[np.ix_(rows, nz)] - np.outer(col[rows], T[r, nz])
        block[np.abs(block) < ZERO_TOL] = 0.0
        T[np.ix_(rows, nz)] = block
    T[:, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


def _iterate(
    T: np.ndarray, basis: list[int], ncols: int, dtol: float, max_iter: int
) -> tuple[LpStatus, int]:
    """Run Bland-rule pivots until optimal/unbounded. Objective is row -1."""
    m = T.shape[0] - 1
    it = 0
    while True:
        d = T[m, :ncols]
        cand = np.flatnonzero(d < -dtol)
        if cand.size == 0:
            return LpStatus.OPTIMAL, it
        if it >= max_iter:
            return LpStatus.ITERATION_LIMIT, it
        j = int(cand[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return LpStatus.UNBOUNDED, it
        rhs = np.maximum(T[rows, -1], 0.0)
        ratios = rhs / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, r, j)
        it += 1


def solve_lp(
    p: LpProblem, *, feas_tol: float = FEAS_TOL, max_iter: int | None = None
) -> LpSolution:
    """Solve ``p`` exactly (up to tolerances) and classify its status."""
    p.check()
    n = p.num_vars
    lo, hi = p.lo, p.hi
    if np.any(lo > hi + feas_tol):
        return LpSolution(LpStatus.INFEASIBLE)

    free = hi - lo > 0
    fidx = np.flatnonzero(free)
    sign = -1.0 if p.maximize else 1.0
    A = p.A[:, fidx]
    b = p.b - p.A @ lo
    c = sign * p.c[fidx]
    u = (hi - lo)[fidx]
    senses = list(p.senses)

    fin = np.flatnonzero(np.isfinite(u))
    if fin.size:
        eye = np.zeros((fin.size, fidx.size))
        eye[np.arange(fin.size), fin] = 1.0
        A = np.vstack([A, eye])
        b = np.concatenate([b, u[fin]])
        senses += ["<="] * fin.size

    # Equilibrate rows; drop empty rows after checking them.
    scale = np.abs(A).max(axis=1) if A.size else np.zeros(A.shape[0])
    btol = feas_tol * max(1.0, float(np.abs(b).max(initial=0.0)))
    keep = []
    for i, s in enumerate(scale):
        if s > 0:
            keep.append(i)
            continue
        bi, si = b[i], senses[i]
        ok = (
            (si == "<=" and bi >= -btol)
            or (si == ">=" and bi <= btol)
            or (si == "=" and abs(bi) <= btol)
        )
        if not ok:
            return LpSolution(LpStatus.INFEASIBLE)
    A = A[keep] / scale[keep, None]
    b = b[keep] / scale[keep]
    senses = [senses[i] for i in keep]
    m, ny = A.shape

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    flip = {"<=": ">=", ">=": "<=", "=": "="}
    senses = [flip[s] if g else s for s, g in zip(senses, neg)]

    n_slack = sum(s != "=" for s in senses)
    n_art = sum(s != "<=" for s in senses)
    art0 = ny + n_slack
    ncols = art0 + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :ny] = A
    T[:m, -1] = b
    basis: list[int] = [0] * m
    k_s, k_a = ny, art0
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, k_s] = 1.0
            basis[i] = k_s
            k_s += 1
        elif s == ">=":
            T[i, k_s] = -1.0
            k_s += 1
        if s != "<=":
            T[i, k_a] = 1.0
            basis[i] = k_a
            k_a += 1

    if max_iter is None:
        max_iter = 20_000 + 50 * (m + ncols)
    iters = 0

    if n_art:
        art_rows = [i for i in range(m) if basis[i] >= art0]
        T[m, art0:ncols] = 1.0
        T[m] -= T[art_rows].sum(axis=0)
        status, it = _iterate(T, basis, ncols, OPT_TOL, max_iter)
        iters += it
        if status is LpStatus.ITERATION_LIMIT:
            return LpSolution(status, iterations=iters)
        if -T[m, -1] > feas_tol * max(1.0, float(b.max(initial=0.0))):
            return LpSolution(LpStatus.INFEASIBLE, iterations=iters)
        # Drive remaining (zero-level) artificials out of the basis.
        drop = []
        for i in range(m):
            if basis[i] < art0:
                continue
            row = np.abs(T[i, :art0])
            j = int(np.argmax(row)) if art0 else -1
            if j >= 0 and row[j] > PIVOT_TOL:
                _pivot(T, basis, i, j)
            else:
                drop.append(i)
        dropped = set(drop)
        keep_rows = [i for i in range(m) if i not in dropped]
        cols = list(range(art0)) + [ncols]
        T = T[np.ix_(keep_rows + [m], cols)]
        basis = [basis[i] for i in keep_rows]
        m = len(keep_rows)
    else:
        T = np.delete(T, np.s_[art0:ncols], axis=1)
    ncols = art0

    cost = np.zeros(ncols)
    cost[:ny] = c
    T[m, :] = 0.0
    T[m, :ncols] = cost
    cb = np.array([cost[j] for j in basis])
    if m:
        T[m] -= cb @ T[:m]
    dtol = OPT_TOL * max(1.0, float(np.abs(c).max(initial=0.0)))
    status, it = _iterate(T, basis, ncols, dtol, max_iter)
    iters += it
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, iterations=iters)

    y = np.zeros(ncols)
    for i, j in enumerate(basis):
        y[j] = max(T[i, -1], 0.0)
    x = lo.copy()
    x[fidx] += np.minimum(y[:ny], u)
    return LpSolution(LpStatus.OPTIMAL, float(p.c @ x), x, iters)
