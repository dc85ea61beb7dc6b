"""Dense two-phase simplex with Bland's rule, in float or exact rational arithmetic.

Variables are nonnegative unless declared free (split internally into
differences of nonnegatives); constraints are '<=' or '=' rows.  Bland's
smallest-index pivoting makes every run deterministic and cycle-free.
Exact mode runs the same tableau algorithm over Fractions, so optimal
values and feasibility residuals are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

FLOAT_MODE = "float"
EXACT_MODE = "exact-rational"

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
MAX_PIVOTS = 200000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LE = "<="
EQ = "="


class LpError(ValueError):
    """Malformed linear program (dimension mismatch, bad relation, non-finite data)."""


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(float(v))


def _normalize_mode(mode: str) -> str:
    if mode in (EXACT_MODE, "exact", "rational"):
        return EXACT_MODE
    if mode == FLOAT_MODE:
        return FLOAT_MODE
    raise LpError(f"unknown mode {mode!r}")


@dataclass
class LinearProgram:
    """max/min objective @ x subject to rows (coeffs, '<='|'=', rhs).

    free: indices of variables with lower bound -inf (others are >= 0).
    upper: optional finite upper bounds per variable index.
    """

    objective: Sequence
    maximize: bool = True
    free: set = field(default_factory=set)
    upper: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def add_constraint(self, coeffs: Sequence, rel: str, rhs) -> None:
        if rel not in (LE, EQ):
            raise LpError(f"relation must be '<=' or '=', got {rel!r}")
        if len(coeffs) != len(self.objective):
            raise LpError(
                f"dimension mismatch: {len(coeffs)} coefficients for "
                f"{len(self.objective)} variables"
            )
        self.rows.append((list(coeffs), rel, rhs))

    def debug_dump(self) -> str:
        """Fixed-layout text form, sufficient to reproduce the program."""
        lines = [f"{'max' if self.maximize else 'min'} {len(self.objective)} vars"]
        lines.append("obj " + " ".join(repr(c) for c in self.objective))
        lines.append("free " + " ".join(str(j) for j in sorted(self.free)))
        for j in sorted(self.upper):
            lines.append(f"ub {j} {self.upper[j]!r}")
        for coeffs, rel, rhs in self.rows:
            lines.append(" ".join(repr(a) for a in coeffs) + f" {rel} {rhs!r}")
        return "\n".join(lines)


@dataclass
class LpSolution:
    status: str
    value: object = None
    x: Optional[list] = None
    duals: Optional[list] = None
    pivots: int = 0


def _validate(lp: LinearProgram, conv) -> None:
    n = len(lp.objective)
    for j in lp.free:
        if not 0 <= j < n:
            raise LpError(f"free variable index {j} out of range")
    for j in lp.upper:
        if not 0 <= j < n:
            raise LpError(f"upper bound index {j} out of range")
    for coeffs, rel, rhs in lp.rows:
        if len(coeffs) != n:
            raise LpError("dimension mismatch in constraint row")
        if rel not in (LE, EQ):
            raise LpError(f"bad relation {rel!r}")
        for v in list(coeffs) + [rhs]:
            fv = conv(v)
            if isinstance(fv, float) and not np.isfinite(fv):
                raise LpError("non-finite coefficient in constraint")
    for v in lp.objective:
        fv = conv(v)
        if isinstance(fv, float) and not np.isfinite(fv):
            raise LpError("non-finite objective coefficient")


class _Tableau:
    """Simplex tableau over float64 or Fraction entries."""

    def __init__(self, exact: bool):
        self.exact = exact
        self.zero = Fraction(0) if exact else 0.0
        self.one = Fraction(1) if exact else 1.0
        self.tol = Fraction(0) if exact else OPT_TOL
        self.pivots = 0

    def array(self, rows, width):
        dtype = object if self.exact else np.float64
        T = np.empty((len(rows), width), dtype=dtype)
        for i, row in enumerate(rows):
            T[i, :] = row
        return T

    def pivot(self, T, obj, basis, p, q):
        piv = T[p, q]
        T[p] = T[p] / piv
        if self.exact:
            for i in range(T.shape[0]):
                if i != p and T[i, q] != 0:
                    T[i] = T[i] - T[i, q] * T[p]
            if obj[q] != 0:
                obj -= obj[q] * T[p]
        else:
            col = T[:, q].copy()
            col[p] = 0.0
            T -= np.outer(col, T[p])
            if obj[q] != 0.0:
                obj -= obj[q] * T[p]
            # keep the entering column numerically exact
            T[:, q] = 0.0
            T[p, q] = 1.0
            obj[q] = 0.0
        basis[p] = q
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise RuntimeError("pivot limit exceeded")

    def run(self, T, obj, basis, allowed) -> str:
        """Maximize; obj[j] holds the reduced cost of column j, obj[-1] = -value."""
        tol = self.tol
        m = T.shape[0]
        while True:
            enter = -1
            for j in allowed:
                if obj[j] > tol:
                    enter = j
                    break
            if enter < 0:
                return OPTIMAL
            best = None
            for i in range(m):
                a = T[i, enter]
                if a > tol:
                    ratio = T[i, -1] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(T, obj, basis, best[1], enter)


def solve(lp: LinearProgram, mode: str = FLOAT_MODE) -> LpSolution:
    """Solve the program; returns optimal value, assignment, and dual prices.

    Float mode enforces a 1e-9 feasibility/optimality tolerance; exact mode
    is tolerance-free.  The optimum is verified against the original rows
    before it is returned.
    """
    mode = _normalize_mode(mode)
    exact = mode == EXACT_MODE
    conv = _as_fraction if exact else float
    _validate(lp, conv)
    n = len(lp.objective)

    # column layout: each variable gets a '+' column, free variables also a '-'
    plus = [0] * n
    minus: list[Optional[int]] = [None] * n
    nc = 0
    for j in range(n):
        plus[j] = nc
        nc += 1
        if j in lp.free:
            minus[j] = nc
            nc += 1

    tab = _Tableau(exact)
    zero, one = tab.zero, tab.one

    def expand(coeffs):
        row = [zero] * nc
        for j, a in enumerate(coeffs):
            a = conv(a)
            row[plus[j]] = a
            if minus[j] is not None:
                row[minus[j]] = -a
        return row

    sign = one if lp.maximize else -one
    cost = [sign * v for v in expand(lp.objective)]

    raw_rows = [(expand(coeffs), rel, conv(rhs)) for coeffs, rel, rhs in lp.rows]
    n_orig = len(raw_rows)
    for j in sorted(lp.upper):
        row = [zero] * nc
        row[plus[j]] = one
        if minus[j] is not None:
            row[minus[j]] = -one
        raw_rows.append((row, LE, conv(lp.upper[j])))

    if nc == 0:
        # constant program: rows must hold with empty assignment
        for coeffs, rel, rhs in raw_rows:
            ok = (rhs >= -tab.tol) if rel == LE else (abs(rhs) <= tab.tol)
            if not ok:
                return LpSolution(INFEASIBLE)
        return LpSolution(OPTIMAL, value=zero, x=[], duals=[zero] * n_orig)

    # orient rows so every rhs is nonnegative
    kinds, neg = [], []
    oriented = []
    for coeffs, rel, rhs in raw_rows:
        flipped = rhs < 0
        if flipped:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
        if rel == EQ:
            kind = "eq"
        elif flipped:
            kind = "ge"
        else:
            kind = "le"
        kinds.append(kind)
        neg.append(flipped)
        oriented.append((coeffs, rhs))

    m = len(oriented)
    slack_col = {}
    total = nc
    for i, kind in enumerate(kinds):
        if kind in ("le", "ge"):
            slack_col[i] = total
            total += 1
    art_start = total
    art_col = {}
    for i, kind in enumerate(kinds):
        if kind in ("eq", "ge"):
            art_col[i] = total
            total += 1

    rows = []
    basis = []
    for i, (coeffs, rhs) in enumerate(oriented):
        row = list(coeffs) + [zero] * (total - nc) + [rhs]
        if kinds[i] == "le":
            row[slack_col[i]] = one
            basis.append(slack_col[i])
        elif kinds[i] == "ge":
            row[slack_col[i]] = -one
            row[art_col[i]] = one
            basis.append(art_col[i])
        else:
            row[art_col[i]] = one
            basis.append(art_col[i])
        rows.append(row)
    T = tab.array(rows, total + 1)
    # standard-form copy for dual extraction (before any pivoting)
    A_std = T[:, :art_start].copy()
    b_std = [rhs for _, rhs in oriented]
    row_ids = list(range(m))

    # phase 1: drive artificial variables to zero
    if art_col:
        obj = np.array([zero] * (total + 1), dtype=object if exact else np.float64)
        for c in art_col.values():
            obj[c] = -one
        for i, b in enumerate(basis):
            if obj[b] != 0:
                obj = obj - obj[b] * T[i]
        allowed = range(total)
        status = tab.run(T, obj, basis, allowed)
        assert status == OPTIMAL  # phase-1 objective is bounded above by 0
        if -obj[-1] < -(FEAS_TOL if not exact else zero):
            return LpSolution(INFEASIBLE, pivots=tab.pivots)
        # pivot remaining artificials out, dropping redundant rows
        art_set = set(art_col.values())
        keep = []
        for i in range(len(basis)):
            if basis[i] not in art_set:
                keep.append(i)
                continue
            target = -1
            for j in range(art_start):
                cell = T[i, j]
                if (abs(cell) if not exact else abs(cell)) > (tab.tol if not exact else 0):
                    target = j
                    break
            if target >= 0:
                tab.pivot(T, obj, basis, i, target)
                keep.append(i)
        if len(keep) < len(basis):
            T = T[keep]
            basis = [basis[i] for i in keep]
            row_ids = [row_ids[i] for i in keep]
        T = np.hstack([T[:, :art_start], T[:, -1:]])

    # phase 2
    obj = np.array(cost + [zero] * (art_start - nc) + [zero],
                   dtype=object if exact else np.float64)
    for i, b in enumerate(basis):
        if obj[b] != 0:
            obj = obj - obj[b] * T[i]
    status = tab.run(T, obj, basis, range(art_start))
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)

    x_std = [zero] * art_start
    for i, b in enumerate(basis):
        x_std[b] = T[i, -1]
    x = []
    for j in range(n):
        v = x_std[plus[j]]
        if minus[j] is not None:
            v = v - x_std[minus[j]]
        x.append(v)

    value = -obj[-1]
    if not lp.maximize:
        value = -value

    _check_feasible(lp, x, conv, exact)

    duals = _dual_prices(A_std, row_ids, basis, cost, neg, n_orig, m, tab)
    if duals is not None and not lp.maximize:
        duals = [-y for y in duals]
    return LpSolution(status, value=value, x=x, duals=duals, pivots=tab.pivots)


def _check_feasible(lp: LinearProgram, x, conv, exact: bool) -> None:
    tol = Fraction(0) if exact else FEAS_TOL
    for j, v in enumerate(x):
        if j not in lp.free and v < -tol:
            raise RuntimeError("simplex returned negative value for nonnegative variable")
        if j in lp.upper and v > conv(lp.upper[j]) + tol:
            raise RuntimeError("simplex violated an upper bound")
    for coeffs, rel, rhs in lp.rows:
        lhs = sum((conv(a) * v for a, v in zip(coeffs, x)), conv(0))
        resid = lhs - conv(rhs)
        if rel == EQ:
            if abs(resid) > tol:
                raise RuntimeError(f"simplex equality residual {resid} exceeds tolerance")
        else:
            if resid > tol:
                raise RuntimeError(f"simplex inequality residual {resid} exceeds tolerance")


def _dual_prices(A_std, row_ids, basis, cost, neg, n_orig, m, tab):
    """Solve B^T y = c_B for the kept rows; dropped redundant rows price at 0."""
    k = len(basis)
    if k == 0:
        return [tab.zero] * n_orig
    try:
        if tab.exact:
            # row_ids maps kept tableau rows back to standard-form rows
            Bt = [[A_std[row_ids[i], basis[j]] for i in range(k)] for j in range(k)]
            rhs = [cost[b] if b < len(cost) else Fraction(0) for b in basis]
            y = _solve_exact(Bt, rhs)
        else:
            Bt = np.empty((k, k))
            for jj, b in enumerate(basis):
                for ii in range(k):
                    Bt[jj, ii] = A_std[row_ids[ii], b]
            rhs = np.array([cost[b] if b < len(cost) else 0.0 for b in basis])
            y = np.linalg.solve(Bt, rhs).tolist()
    except (np.linalg.LinAlgError, ZeroDivisionError, ValueError):
        return None
    if y is None:
        return None
    full = [tab.zero] * m
    for pos, rid in enumerate(row_ids):
        full[rid] = y[pos]
    out = []
    for i in range(n_orig):
        yi = full[i]
        out.append(-yi if neg[i] else yi)
    return out


def _solve_exact(M, rhs):
    """Gaussian elimination over Fractions; returns None when singular."""
    k = len(M)
    aug = [list(map(Fraction, M[i])) + [Fraction(rhs[i])] for i in range(k)]
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [a / pv for a in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][-1] for i in range(k)]
