"""Bundled deterministic LP solver: two-phase revised simplex with bounds.

Inequality rows receive slack columns so the working system is ``A x = b``
with per-column bounds; nonbasic variables rest on a finite bound (or at 0
when free).  The basis is held as a sparse LU factorization, refreshed
periodically, with product-form eta updates applied between refreshes.
Pricing is Dantzig (most violating reduced cost) until a run of degenerate
pivots engages Bland's rule, which then stays on for the rest of the solve
to guarantee termination.  All tie-breaks are index-based, so identical
inputs produce bit-identical outputs.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from ..errors import IterationLimitError, NumericalFailureError
from .problem import LpProblem, LpSolution, SolveStatus, SolverOptions

AT_LB, AT_UB, BASIC, FREE = 0, 1, 2, 3

_BACKEND_NAME = "simplex"


class _Basis:
    """Sparse LU of the basis plus product-form eta updates."""

    def __init__(self, a_csc: sp.csc_matrix, interval: int):
        self.a = a_csc
        self.interval = max(1, interval)
        self.etas: list = []
        self.lu = None

    def refactor(self, basis: np.ndarray):
        try:
            self.lu = sla.splu(self.a[:, basis].tocsc())
        except RuntimeError as exc:
            raise NumericalFailureError(f"singular basis ({exc})") from exc
        self.etas = []

    def ftran(self, rhs: np.ndarray) -> np.ndarray:
        z = self.lu.solve(rhs)
        for p, w in self.etas:
            t = z[p] / w[p]
            if t != 0.0:
                z = z - w * t
            z[p] = t
        return z

    def btran(self, rhs: np.ndarray) -> np.ndarray:
        z = rhs.copy()
        for p, w in reversed(self.etas):
            zp = z[p]
            z[p] = (zp - (w @ z - w[p] * zp)) / w[p]
        return self.lu.solve(z, trans="T")

    def push(self, pos: int, w: np.ndarray):
        self.etas.append((pos, w))

    @property
    def stale(self) -> bool:
        return len(self.etas) >= self.interval


class _Simplex:
    """One solve of a fixed problem; not reusable."""

    def __init__(self, problem: LpProblem, opts: SolverOptions):
        self.opts = opts
        self.problem = problem
        n = problem.n

        span = problem.upper - problem.lower
        self.fixed_mask = span <= 0.0
        self.keep = np.nonzero(~self.fixed_mask)[0]
        self.fixed_cols = np.nonzero(self.fixed_mask)[0]
        self.fixed_vals = problem.lower[self.fixed_cols]

        a_full = sp.vstack(
            [problem.a_eq, problem.a_ub], format="csc"
        ) if (problem.m_eq or problem.m_ub) else sp.csc_matrix((0, n))
        b = np.concatenate([problem.b_eq, problem.b_ub])
        if self.fixed_cols.size:
            b = b - a_full[:, self.fixed_cols] @ self.fixed_vals

        self.m_eq = problem.m_eq
        self.m = b.size
        self.n_act = self.keep.size
        self.n_slack = problem.m_ub

        slack_rows = np.arange(self.m_eq, self.m)
        slack = sp.csc_matrix(
            (np.ones(self.n_slack), (slack_rows, np.arange(self.n_slack))),
            shape=(self.m, self.n_slack),
        )
        self.a = sp.hstack([a_full[:, self.keep], slack], format="csc")
        self.b = b

        self.lb = np.concatenate([problem.lower[self.keep], np.zeros(self.n_slack)])
        self.ub = np.concatenate([problem.upper[self.keep], np.full(self.n_slack, np.inf)])
        self.cost_real = np.concatenate([problem.c[self.keep], np.zeros(self.n_slack)])

        self.iterations = 0
        self.bland = False
        self.degen_run = 0
        self.n_art = 0

    # -- setup ---------------------------------------------------------

    def _initial_values(self, ncols: int) -> tuple[np.ndarray, np.ndarray]:
        state = np.full(ncols, AT_LB, dtype=np.int8)
        x = np.zeros(ncols)
        lb, ub = self.lb, self.ub
        lb_fin = np.isfinite(lb)
        ub_fin = np.isfinite(ub)
        x[lb_fin] = lb[lb_fin]
        use_ub = ~lb_fin & ub_fin
        x[use_ub] = ub[use_ub]
        state[use_ub] = AT_UB
        state[~lb_fin & ~ub_fin] = FREE
        return x, state

    def _try_hint(self) -> bool:
        """Install the caller's basis hint if it is complete and feasible."""
        hint = self.problem.basis_hint
        if not hint or self.m == 0:
            return False
        col_of = -np.ones(self.problem.n, dtype=int)
        col_of[self.keep] = np.arange(self.n_act)
        basis = np.empty(self.m, dtype=int)
        for i in range(self.m_eq):
            j = hint.get(i, -1)
            if j < 0 or j >= self.problem.n or col_of[j] < 0:
                return False
            basis[i] = col_of[j]
        basis[self.m_eq:] = self.n_act + np.arange(self.n_slack)
        if len(np.unique(basis)) != self.m:
            return False

        x, state = self._initial_values(self.n_act + self.n_slack)
        state[basis] = BASIC
        factor = _Basis(self.a, self.opts.refactor_interval)
        try:
            factor.refactor(basis)
        except NumericalFailureError:
            return False
        xb = self._recompute_basics(factor, basis, x)
        tol = self.opts.feas_tol
        low = self.lb[basis] - tol * (1.0 + np.abs(self.lb[basis], where=np.isfinite(self.lb[basis]), out=np.zeros(self.m)))
        high = self.ub[basis] + tol * (1.0 + np.abs(self.ub[basis], where=np.isfinite(self.ub[basis]), out=np.zeros(self.m)))
        if np.any(xb < low) or np.any(xb > high):
            return False
        x[basis] = xb
        self.basis, self.state, self.x, self.factor = basis, state, x, factor
        return True

    def _canonical_start(self):
        """Slack/artificial crash basis; artificial signs match residuals."""
        x, state = self._initial_values(self.n_act + self.n_slack)
        resid = self.b - self.a @ x
        basis = np.empty(self.m, dtype=int)
        art_rows, art_signs = [], []
        for i in range(self.m):
            if i >= self.m_eq and resid[i] >= 0.0:
                basis[i] = self.n_act + (i - self.m_eq)
            else:
                art_rows.append(i)
                art_signs.append(1.0 if resid[i] >= 0.0 else -1.0)
                basis[i] = -1  # filled below

        self.n_art = len(art_rows)
        if self.n_art:
            art = sp.csc_matrix(
                (np.array(art_signs), (np.array(art_rows), np.arange(self.n_art))),
                shape=(self.m, self.n_art),
            )
            self.a = sp.hstack([self.a, art], format="csc")
            self.lb = np.concatenate([self.lb, np.zeros(self.n_art)])
            self.ub = np.concatenate([self.ub, np.full(self.n_art, np.inf)])
            self.cost_real = np.concatenate([self.cost_real, np.zeros(self.n_art)])
            x = np.concatenate([x, np.zeros(self.n_art)])
            state = np.concatenate([state, np.full(self.n_art, AT_LB, dtype=np.int8)])
            base = self.n_act + self.n_slack
            for k, i in enumerate(art_rows):
                basis[i] = base + k

        state[basis] = BASIC
        factor = _Basis(self.a, self.opts.refactor_interval)
        factor.refactor(basis)
        x[basis] = self._recompute_basics(factor, basis, x)
        self.basis, self.state, self.x, self.factor = basis, state, x, factor

    def _recompute_basics(self, factor, basis, x) -> np.ndarray:
        xn = x.copy()
        xn[basis] = 0.0
        return factor.ftran(self.b - self.a @ xn)

    # -- inner loop ----------------------------------------------------

    def _price(self, cost, at):
        y = self.factor.btran(cost[self.basis])
        d = cost - self.a.T @ y
        viol = np.zeros_like(d)
        lb_mask = self.state == AT_LB
        ub_mask = self.state == AT_UB
        fr_mask = self.state == FREE
        viol[lb_mask] = -d[lb_mask]
        viol[ub_mask] = d[ub_mask]
        viol[fr_mask] = np.abs(d[fr_mask])
        if self.excluded:
            viol[list(self.excluded)] = 0.0
        viol[viol <= at] = 0.0
        return y, d, viol

    def _run_phase(self, cost, phase: int) -> str:
        opts = self.opts
        dual_tol = max(opts.pivot_tol, 1e-12 * (1.0 + float(np.max(np.abs(cost)))))
        self.excluded = set()
        while True:
            if self.iterations >= opts.max_iterations:
                raise IterationLimitError(
                    f"iteration limit {opts.max_iterations} reached in phase {phase}"
                )
            if self.factor.stale:
                self._refresh()

            _, d, viol = self._price(cost, dual_tol)
            if not np.any(viol > 0.0):
                if self.factor.etas:
                    self._refresh()
                    _, d, viol = self._price(cost, dual_tol)
                    if not np.any(viol > 0.0):
                        return "optimal"
                else:
                    return "optimal"
            if self.bland:
                q = int(np.nonzero(viol > 0.0)[0][0])
            else:
                q = int(np.argmax(viol))

            dirn = 1.0
            if self.state[q] == AT_UB or (self.state[q] == FREE and d[q] > 0.0):
                dirn = -1.0

            col = self.a.getcol(q)
            rhs = np.zeros(self.m)
            rhs[col.indices] = col.data
            w = self.factor.ftran(rhs)
            s = dirn * w

            xb = self.x[self.basis]
            lbb = self.lb[self.basis]
            ubb = self.ub[self.basis]
            t = np.full(self.m, np.inf)
            pos = s > opts.pivot_tol
            neg = s < -opts.pivot_tol
            t[pos] = (xb[pos] - lbb[pos]) / s[pos]
            t[neg] = (xb[neg] - ubb[neg]) / s[neg]
            np.maximum(t, 0.0, out=t)

            t_rows = float(t.min()) if self.m else np.inf
            span_q = self.ub[q] - self.lb[q]
            t_flip = span_q if np.isfinite(span_q) else np.inf
            t_star = min(t_rows, t_flip)

            self.iterations += 1
            if not np.isfinite(t_star):
                if phase == 1:
                    # phase-1 objective is bounded below: this is numerical noise
                    self.excluded.add(q)
                    if len(self.excluded) > 50:
                        raise NumericalFailureError("phase-1 pricing stalled")
                    continue
                return "unbounded"

            if t_flip <= t_rows:
                self.x[self.basis] = xb - t_flip * s
                self.x[q] = self.ub[q] if self.state[q] == AT_LB else self.lb[q]
                self.state[q] = AT_UB if self.state[q] == AT_LB else AT_LB
                self.excluded.clear()
                continue

            tie = t_star + max(1e-12, 1e-9 * t_star)
            cand = np.nonzero(t <= tie)[0]
            if self.bland:
                leave_pos = int(cand[np.argmin(self.basis[cand])])
            else:
                leave_pos = int(cand[np.argmax(np.abs(s[cand]))])
            leaving = int(self.basis[leave_pos])

            self.x[self.basis] = xb - t_star * s
            start = self.x[q]
            self.x[q] = start + dirn * t_star
            self.x[leaving] = lbb[leave_pos] if s[leave_pos] > 0 else ubb[leave_pos]
            self.state[leaving] = AT_LB if s[leave_pos] > 0 else AT_UB
            self.state[q] = BASIC
            self.basis[leave_pos] = q
            self.factor.push(leave_pos, w)
            self.excluded.clear()

            if t_star <= 1e-10:
                self.degen_run += 1
                if not self.bland and self.degen_run >= opts.bland_threshold:
                    self.bland = True
            else:
                self.degen_run = 0

    def _refresh(self):
        self.factor.refactor(self.basis)
        self.x[self.basis] = self._recompute_basics(self.factor, self.basis, self.x)

    # -- driver --------------------------------------------------------

    def run(self) -> LpSolution:
        if self.m == 0:
            return self._solve_unconstrained()

        phase1_needed = not self._try_hint()
        if phase1_needed:
            self._canonical_start()
            if self.n_art:
                cost1 = np.zeros(self.a.shape[1])
                cost1[self.n_act + self.n_slack:] = 1.0
                verdict = self._run_phase(cost1, phase=1)
                if verdict != "optimal":
                    raise NumericalFailureError("phase 1 ended without verdict")
                art_sum = float(np.sum(self.x[self.n_act + self.n_slack:]))
                if art_sum > self.opts.feas_tol * (1.0 + float(np.max(np.abs(self.b), initial=0.0))):
                    return self._report(SolveStatus.INFEASIBLE)
                # lock artificials at zero for phase 2
                self.ub[self.n_act + self.n_slack:] = 0.0
                self._refresh()

        verdict = self._run_phase(self.cost_real, phase=2)
        if verdict == "unbounded":
            return self._report(SolveStatus.UNBOUNDED)
        self._refresh()
        self._verify_feasible()
        return self._report(SolveStatus.OPTIMAL)

    def _solve_unconstrained(self) -> LpSolution:
        x, _ = self._initial_values(self.n_act)
        c = self.cost_real[: self.n_act]
        down = (c > 0) & ~np.isfinite(self.lb[: self.n_act])
        up = (c < 0) & ~np.isfinite(self.ub[: self.n_act])
        if np.any(down) or np.any(up):
            return self._report(SolveStatus.UNBOUNDED)
        x = np.where(c > 0, self.lb[: self.n_act], np.where(c < 0, self.ub[: self.n_act], x))
        self.x = x
        return self._report(SolveStatus.OPTIMAL)

    def _verify_feasible(self):
        resid = np.abs(self.a @ self.x - self.b)
        tol = 50.0 * self.opts.feas_tol * (1.0 + np.abs(self.b))
        if np.any(resid > tol):
            raise NumericalFailureError(
                f"final residual {float(resid.max()):.3e} exceeds tolerance"
            )

    def _report(self, status: SolveStatus) -> LpSolution:
        if status is not SolveStatus.OPTIMAL:
            return LpSolution(status, None, None, None, None,
                              self.iterations, _BACKEND_NAME)
        x_orig = np.zeros(self.problem.n)
        x_orig[self.keep] = self.x[: self.n_act]
        x_orig[self.fixed_cols] = self.fixed_vals
        objective = float(self.problem.c @ x_orig) + self.problem.offset

        if self.m:
            y = self.factor.btran(self.cost_real[self.basis])
        else:
            y = np.zeros(0)
        duals_eq = y[: self.m_eq].copy()
        lam = -y[self.m_eq:]
        np.maximum(lam, 0.0, out=lam)
        return LpSolution(status, x_orig, duals_eq, lam, objective,
                          self.iterations, _BACKEND_NAME)


def solve_simplex(problem: LpProblem, options: SolverOptions | None = None) -> LpSolution:
    """Solve with the bundled revised simplex. Raises on iteration or
    numerical failure rather than degrading the reported status."""
    return _Simplex(problem, options or SolverOptions()).run()
