"""Standard-form LP containers with tagged rows.

A problem is ``min c.x + offset`` subject to ``A_eq x = b_eq``,
``A_ub x <= b_ub`` and ``lower <= x <= upper``.  Every row carries a tag so
that model duals can be looked up by meaning rather than position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..errors import ValidationError


def _as_matrix(a, n_cols: int) -> sp.csr_matrix:
    if a is None:
        return sp.csr_matrix((0, n_cols))
    m = sp.csr_matrix(a, dtype=float)
    if m.shape[1] != n_cols:
        raise ValidationError(f"matrix has {m.shape[1]} columns, expected {n_cols}")
    return m


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    arr.setflags(write=False)
    if name.startswith("b") and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class LpProblem:
    """Immutable LP with per-row tags.

    ``basis_hint`` optionally maps equality-row index -> column index of a
    variable that, together with inequality slacks, forms a primal-feasible
    starting basis.  Solvers may ignore it; a wrong hint only costs time.
    """

    c: np.ndarray
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    a_ub: sp.csr_matrix
    b_ub: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    eq_tags: tuple = ()
    ub_tags: tuple = ()
    var_tags: tuple = ()
    offset: float = 0.0
    basis_hint: Optional[dict] = None

    def __post_init__(self):
        c = _as_vector(self.c, "c")
        n = c.size
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a_eq", _as_matrix(self.a_eq, n))
        object.__setattr__(self, "a_ub", _as_matrix(self.a_ub, n))
        object.__setattr__(self, "b_eq", _as_vector(self.b_eq, "b_eq"))
        object.__setattr__(self, "b_ub", _as_vector(self.b_ub, "b_ub"))
        lower = np.asarray(self.lower, dtype=float).ravel() if self.lower is not None else np.zeros(n)
        upper = np.asarray(self.upper, dtype=float).ravel() if self.upper is not None else np.full(n, np.inf)
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

        if self.a_eq.shape[0] != self.b_eq.size:
            raise ValidationError("a_eq / b_eq row mismatch")
        if self.a_ub.shape[0] != self.b_ub.size:
            raise ValidationError("a_ub / b_ub row mismatch")
        if lower.size != n or upper.size != n:
            raise ValidationError("bound vectors must match variable count")
        if np.any(lower > upper):
            raise ValidationError("lower bound exceeds upper bound")

        eq_tags = tuple(self.eq_tags) if self.eq_tags else tuple(f"eq{i}" for i in range(self.b_eq.size))
        ub_tags = tuple(self.ub_tags) if self.ub_tags else tuple(f"ub{i}" for i in range(self.b_ub.size))
        var_tags = tuple(self.var_tags) if self.var_tags else tuple(f"x{j}" for j in range(n))
        if len(eq_tags) != self.b_eq.size or len(ub_tags) != self.b_ub.size or len(var_tags) != n:
            raise ValidationError("tag count mismatch")
        if len(set(eq_tags)) != len(eq_tags) or len(set(ub_tags)) != len(ub_tags):
            raise ValidationError("row tags must be unique")
        object.__setattr__(self, "eq_tags", eq_tags)
        object.__setattr__(self, "ub_tags", ub_tags)
        object.__setattr__(self, "var_tags", var_tags)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m_eq(self) -> int:
        return self.b_eq.size

    @property
    def m_ub(self) -> int:
        return self.b_ub.size

    def eq_row(self, tag: str) -> int:
        try:
            return self.eq_tags.index(tag)
        except ValueError:
            raise ValidationError(f"no equality row tagged {tag!r}") from None


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    """Result of one solve.

    ``duals_eq[i]`` is the sensitivity of the optimal objective to
    ``b_eq[i]`` (objective increase per unit increase of the RHS).
    ``duals_ub`` are reported nonnegative for the ``<=`` rows of a
    minimization.
    """

    status: SolveStatus
    x: Optional[np.ndarray]
    duals_eq: Optional[np.ndarray]
    duals_ub: Optional[np.ndarray]
    objective: Optional[float]
    iterations: int = 0
    backend: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


@dataclass(frozen=True)
class SolverOptions:
    backend: str = "simplex"
    max_iterations: int = 5_000_000
    feas_tol: float = 1e-7       # absolute residual tolerance
    pivot_tol: float = 1e-9
    refactor_interval: int = 100
    bland_threshold: int = 100   # consecutive degenerate pivots before Bland's rule
