from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch

SENSES = ("<=", "=", ">=")


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpProblem:
    """``min c.x  s.t.  A x (senses) b,  lo <= x <= hi``.

    Set ``maximize`` to flip the objective direction.  Lower bounds must be
    finite; upper bounds may be ``inf``.
    """

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    maximize: bool = False
    var_names: Sequence[str] | None = None
    row_names: Sequence[str] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        self.A = A
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.senses = tuple(self.senses)
        self.lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=float).reshape(-1)
        self.hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).reshape(-1)
        self.check()

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.b.size

    def check(self) -> None:
        n, m = self.c.size, self.b.size
        if self.A.ndim != 2 or self.A.shape != (m, n):
            raise DimensionMismatch(f"A has shape {self.A.shape}, expected {(m, n)}")
        if len(self.senses) != m:
            raise DimensionMismatch(f"{len(self.senses)} senses for {m} rows")
        if self.lo.size != n or self.hi.size != n:
            raise DimensionMismatch("bounds do not match the number of variables")
        if self.var_names is not None and len(self.var_names) != n:
            raise DimensionMismatch("var_names does not match the number of variables")
        if self.row_names is not None and len(self.row_names) != m:
            raise DimensionMismatch("row_names does not match the number of rows")
        bad = [s for s in self.senses if s not in SENSES]
        if bad:
            raise ValueError(f"unknown constraint sense {bad[0]!r}")
        if not np.all(np.isfinite(self.lo)):
            raise ValueError("lower bounds must be finite")

    def with_bounds(self, lo: np.ndarray, hi: np.ndarray) -> "LpProblem":
        return LpProblem(
            self.c, self.A, self.senses, self.b, lo, hi,
            maximize=self.maximize, var_names=self.var_names, row_names=self.row_names,
        )

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of ``x`` after row scaling."""
        x = np.asarray(x, dtype=float)
        worst = float(max(np.max(self.lo - x, initial=0.0), np.max(x - self.hi, initial=0.0)))
        if self.num_rows:
            scale = np.abs(self.A).max(axis=1)
            scale[scale == 0] = 1.0
            r = (self.A @ x - self.b) / scale
            for s, ri in zip(self.senses, r):
                v = ri if s == "<=" else (-ri if s == ">=" else abs(ri))
                worst = max(worst, float(v))
        return worst


@dataclass
class LpSolution:
    status: LpStatus
    objective: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    nodes: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL
