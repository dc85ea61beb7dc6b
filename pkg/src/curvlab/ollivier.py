"""Ollivier curvature of vertex pairs on weighted measured graphs.

Two mutually verifying formulations:

* primal: maximize sum rho(x,y) * (1 - d(x,y)/d0) over couplings rho on
  B1(x0) x B1(y0) whose sphere marginals match the transition rates
  q(x0,.) and q(y0,.);
* dual: minimize (Lap f(x0) - Lap f(y0)) / d0 over functions f on
  B1(x0) u B1(y0) with f(y0) - f(x0) = d0 and f(u) - f(v) <= d(u,v)
  for every ordered pair in the domain.

Both are solved by the in-package simplex, in float or exact rational
arithmetic; the reported duality gap certifies each value against the
other.  The module also implements the optimal-plan rewrite that forces
a strict-progress neighbor of x0 to ship its mass strictly inside
distance d0, which preserves optimality and pushes a quantified amount
of mass beyond distance d0.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from curvlab import simplex
from curvlab.functions import VertexFunction
from curvlab.graphs import WeightedGraph
from curvlab.simplex import EXACT_MODE, FLOAT_MODE, LinearProgram

DUALITY_GAP_TOL = 1e-7
PLAN_FEAS_TOL = 1e-9
OPTIMALITY_TOL = 1e-7


class PairError(ValueError):
    """The requested vertex pair does not admit the operation."""


def _mode_tools(mode: str):
    mode = simplex._normalize_mode(mode)
    if mode == EXACT_MODE:
        return mode, simplex._as_fraction
    return mode, float


def _check_pair(g: WeightedGraph, x0: str, y0: str) -> int:
    x0, y0 = str(x0), str(y0)
    for z in (x0, y0):
        if z not in g:
            raise PairError(f"unknown vertex {z!r}")
    if x0 == y0:
        raise PairError("curvature needs two distinct vertices")
    d0 = g.distance(x0, y0)
    if d0 == math.inf:
        raise PairError(f"vertices {x0!r} and {y0!r} are disconnected; curvature is undefined")
    return int(d0)


@dataclass(frozen=True)
class TransportPlan:
    """Coupling on B1(x0) x B1(y0) with sphere marginal constraints."""

    x0: str
    y0: str
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.entries[key]

    def get(self, key, default=0):
        return self.entries.get(key, default)

    def support(self):
        return [(k, v) for k, v in self.entries.items() if v != 0]

    def total_mass(self):
        return sum(self.entries.values())

    def to_document(self, g: WeightedGraph) -> dict:
        check = verify_plan(g, self)
        ordered = sorted(self.entries, key=lambda p: (g.index[p[0]], g.index[p[1]]))
        return {
            "pair": [self.x0, self.y0],
            "entries": [
                {"x": x, "y": y, "rho": float(self.entries[(x, y)]),
                 "d": int(g.distance(x, y))}
                for x, y in ordered
            ],
            "value": float(plan_value(g, self)),
            "marginal_residuals": {
                "rows": {x: float(r) for x, r in check.row_residuals.items()},
                "cols": {y: float(r) for y, r in check.col_residuals.items()},
            },
        }


@dataclass(frozen=True)
class PlanCheck:
    feasible: bool
    row_residuals: dict
    col_residuals: dict

    def max_residual(self):
        residuals = list(self.row_residuals.values()) + list(self.col_residuals.values())
        return max(residuals) if residuals else 0


@dataclass(frozen=True)
class CurvatureReport:
    """Both curvature values for one pair, with the certifying witnesses."""

    x0: str
    y0: str
    distance: int
    kappa: object
    kappa_primal: object
    kappa_dual: object
    duality_gap: object
    primal_plan: TransportPlan
    dual_witness: VertexFunction


def transport_entry_order(g: WeightedGraph, x0: str, y0: str) -> list[tuple[str, str]]:
    bx = g.ball(x0, 1)
    by = g.ball(y0, 1)
    return [(x, y) for x in bx for y in by]


def curvature_primal(g: WeightedGraph, x0: str, y0: str,
                     mode: str = FLOAT_MODE):
    """Curvature via the transport linear program.

    Returns (kappa, plan) where the plan attains the optimum.  The plan
    keys run over all of B1(x0) x B1(y0); only sphere marginals are
    constrained.
    """
    d0 = _check_pair(g, x0, y0)
    x0, y0 = str(x0), str(y0)
    mode, conv = _mode_tools(mode)
    entries = transport_entry_order(g, x0, y0)
    pos = {e: i for i, e in enumerate(entries)}
    n = len(entries)

    one = conv(1)
    objective = []
    for x, y in entries:
        dxy = int(g.distance(x, y))
        if mode == EXACT_MODE:
            objective.append(Fraction(1) - Fraction(dxy, d0))
        else:
            objective.append(1.0 - dxy / d0)

    lp = LinearProgram(objective=objective, maximize=True)
    for x in g.sphere(x0, 1):
        coeffs = [0] * n
        for y in g.ball(y0, 1):
            coeffs[pos[(x, y)]] = one
        lp.add_constraint(coeffs, simplex.EQ, conv(g.transition_rate(x0, x)))
    for y in g.sphere(y0, 1):
        coeffs = [0] * n
        for x in g.ball(x0, 1):
            coeffs[pos[(x, y)]] = one
        lp.add_constraint(coeffs, simplex.EQ, conv(g.transition_rate(y0, y)))

    sol = simplex.solve(lp, mode)
    if sol.status != simplex.OPTIMAL:
        raise RuntimeError(f"transport program unexpectedly {sol.status}")
    plan = TransportPlan(x0, y0, {e: sol.x[i] for i, e in enumerate(entries)})
    return sol.value, plan


def curvature_dual(g: WeightedGraph, x0: str, y0: str,
                   mode: str = FLOAT_MODE):
    """Curvature via the Lipschitz program on B1(x0) u B1(y0).

    The witness is gauge-fixed to f(x0) = 0, so f(y0) = d0.  Pairwise
    constraints use the metric of the whole graph, which is what makes
    the value match the transport optimum exactly.
    """
    d0 = _check_pair(g, x0, y0)
    x0, y0 = str(x0), str(y0)
    mode, conv = _mode_tools(mode)

    domain = sorted(set(g.ball(x0, 1)) | set(g.ball(y0, 1)), key=g.index.__getitem__)
    fixed = {x0: conv(0), y0: conv(d0)}
    unknowns = [u for u in domain if u not in fixed]
    col = {u: i for i, u in enumerate(unknowns)}
    n = len(unknowns)

    # objective (Lap f(x0) - Lap f(y0)) / d0, constants from the gauge split off
    coeff = [conv(0)] * n
    constant = conv(0)
    inv_d0 = (Fraction(1, d0) if mode == EXACT_MODE else 1.0 / d0)

    def add_term(center, sign):
        nonlocal constant
        fc = fixed[center]
        for u in g.neighbors(center):
            q = conv(g.transition_rate(center, u)) * inv_d0 * sign
            if u in fixed:
                constant += q * (fixed[u] - fc)
            else:
                coeff[col[u]] += q
                constant += -q * fc

    add_term(x0, conv(1))
    add_term(y0, conv(-1))

    lp = LinearProgram(objective=coeff, maximize=False, free=set(range(n)))
    for u in domain:
        for v in domain:
            if u == v:
                continue
            duv = conv(int(g.distance(u, v)))
            row = [conv(0)] * n
            rhs = duv
            if u in fixed:
                rhs = rhs - fixed[u]
            else:
                row[col[u]] = conv(1)
            if v in fixed:
                rhs = rhs + fixed[v]
            else:
                row[col[v]] = row[col[v]] - conv(1)
            if all(a == 0 for a in row):
                if rhs < 0:
                    raise RuntimeError("gauge-fixed pair violates a Lipschitz constraint")
                continue
            lp.add_constraint(row, simplex.LE, rhs)

    sol = simplex.solve(lp, mode)
    if sol.status != simplex.OPTIMAL:
        raise RuntimeError(f"Lipschitz program unexpectedly {sol.status}")
    values = dict(fixed)
    for u in unknowns:
        values[u] = sol.x[col[u]]
    return sol.value + constant, VertexFunction(values)


def dual_objective(g: WeightedGraph, f: VertexFunction, x0: str, y0: str):
    """(Lap f(x0) - Lap f(y0)) / d(x0, y0) evaluated directly on f."""
    d0 = _check_pair(g, x0, y0)
    total = 0
    for u in g.neighbors(x0):
        total += g.transition_rate(x0, u) * (f[u] - f[x0])
    for u in g.neighbors(y0):
        total -= g.transition_rate(y0, u) * (f[u] - f[y0])
    return total / d0


def curvature_report(g: WeightedGraph, x0: str, y0: str,
                     mode: str = FLOAT_MODE) -> CurvatureReport:
    kp, plan = curvature_primal(g, x0, y0, mode)
    kd, witness = curvature_dual(g, x0, y0, mode)
    gap = abs(kp - kd)
    return CurvatureReport(
        x0=str(x0), y0=str(y0), distance=_check_pair(g, x0, y0),
        kappa=kp, kappa_primal=kp, kappa_dual=kd, duality_gap=gap,
        primal_plan=plan, dual_witness=witness,
    )


def verify_plan(g: WeightedGraph, plan: TransportPlan,
                tol: Optional[float] = None) -> PlanCheck:
    """Residuals of the sphere marginal constraints; feasibility verdict.

    tol defaults to 0 when graph and plan are exact rationals, 1e-9 otherwise.
    """
    x0, y0 = plan.x0, plan.y0
    _check_pair(g, x0, y0)
    bx, by = set(g.ball(x0, 1)), set(g.ball(y0, 1))
    for (x, y), v in plan.entries.items():
        if x not in bx or y not in by:
            raise PairError(f"plan entry ({x!r},{y!r}) outside B1(x0) x B1(y0)")
        if v < 0:
            raise PairError(f"negative plan entry at ({x!r},{y!r})")
    exact = all(not isinstance(v, float) for v in plan.entries.values()) and \
        all(not isinstance(g.measure(v), float) for v in g.vertices) and \
        all(not isinstance(w, float) for _, _, w in g.edges())
    if tol is None:
        tol = 0 if exact else PLAN_FEAS_TOL

    row_res, col_res = {}, {}
    for x in g.sphere(x0, 1):
        got = sum(plan.get((x, y), 0) for y in by)
        row_res[x] = abs(got - g.transition_rate(x0, x))
    for y in g.sphere(y0, 1):
        got = sum(plan.get((x, y), 0) for x in bx)
        col_res[y] = abs(got - g.transition_rate(y0, y))
    feasible = all(r <= tol for r in row_res.values()) and \
        all(r <= tol for r in col_res.values())
    return PlanCheck(feasible=feasible, row_residuals=row_res, col_residuals=col_res)


def plan_value(g: WeightedGraph, plan: TransportPlan):
    """sum rho(x,y) * (1 - d(x,y)/d0) for the plan's own pair."""
    d0 = _check_pair(g, plan.x0, plan.y0)
    exact = all(not isinstance(v, float) for v in plan.entries.values())
    total = Fraction(0) if exact else 0.0
    for (x, y), v in plan.entries.items():
        if v == 0:
            continue
        dxy = int(g.distance(x, y))
        if exact:
            total += v * (Fraction(1) - Fraction(dxy, d0))
        else:
            total += v * (1.0 - dxy / d0)
    return total


def mass_beyond(g: WeightedGraph, plan: TransportPlan, d0: int):
    """Total plan mass on entries at distance strictly greater than d0."""
    total = 0
    for (x, y), v in plan.entries.items():
        if v != 0 and g.distance(x, y) > d0:
            total += v
    return total


def strict_progress_neighbors(g: WeightedGraph, x0: str, y0: str) -> list[str]:
    """Neighbors x' of x0 with d(x', y0) = d(x0, y0) - 1, in vertex order."""
    d0 = _check_pair(g, x0, y0)
    return [u for u in g.neighbors(x0) if g.distance(u, y0) == d0 - 1]


def plan_surgery(g: WeightedGraph, x0: str, y0: str, x_prime: str,
                 rho0: TransportPlan, mode: str = FLOAT_MODE) -> TransportPlan:
    """Rewrite an optimal plan so row x' ships only strictly inside distance d0.

    x' must be a strict-progress neighbor of x0 (adjacent to x0, one step
    closer to y0) and rho0 must be optimal for the pair.  The rewrite moves
    the mass rho0 ships from x' to distance >= d0 onto the cell (x', y0)
    and compensates through the row of x0, so both marginals and the
    objective are preserved while row x' ends with no mass at distance
    >= d0 from x'.  Degenerate pairs whose ball product has no entry
    beyond distance d0 (so no plan can ship mass past d0) are rejected.
    """
    d0 = _check_pair(g, x0, y0)
    x0, y0, x_prime = str(x0), str(y0), str(x_prime)
    mode, conv = _mode_tools(mode)
    exact = mode == EXACT_MODE

    if rho0.x0 != x0 or rho0.y0 != y0:
        raise PairError("plan was built for a different pair")
    if not g.adjacent(x0, x_prime):
        raise PairError(f"{x_prime!r} is not adjacent to {x0!r}")
    if g.distance(x_prime, y0) != d0 - 1:
        raise PairError(
            f"{x_prime!r} is not a strict-progress neighbor: "
            f"d(x', y0) must be {d0 - 1}")
    room = any(g.distance(x, y) > d0 for x in g.ball(x0, 1) for y in g.ball(y0, 1))
    if not room:
        raise PairError(
            "degenerate pair: no cell of B1(x0) x B1(y0) lies beyond "
            f"distance {d0}, so no plan can ship mass past the pair distance")

    kappa, _ = curvature_primal(g, x0, y0, mode)
    value0 = plan_value(g, rho0)
    if exact:
        if value0 != kappa:
            raise PairError("plan is not optimal for the pair")
    elif abs(float(value0) - float(kappa)) > OPTIMALITY_TOL:
        raise PairError("plan is not optimal for the pair (within tolerance)")
    check0 = verify_plan(g, rho0)
    if not check0.feasible:
        raise PairError("plan does not satisfy the marginal constraints")

    zero = conv(0)
    new = {k: conv(v) for k, v in rho0.entries.items()}
    by = g.ball(y0, 1)
    absorbed = zero
    for z in by:
        if g.distance(x_prime, z) >= d0:
            absorbed += conv(rho0.get((x_prime, z), 0))
    for y in by:
        if g.distance(x_prime, y) >= d0:
            new[(x_prime, y)] = zero
            new[(x0, y)] = conv(rho0.get((x0, y), 0)) + conv(rho0.get((x_prime, y), 0))
    new[(x_prime, y0)] = conv(rho0.get((x_prime, y0), 0)) + absorbed

    out = TransportPlan(x0, y0, new)

    # the rewrite is a theorem: failures here are bugs, not inputs
    check = verify_plan(g, out)
    if not check.feasible:
        raise RuntimeError("surgery broke the marginal constraints")
    value1 = plan_value(g, out)
    if exact:
        if value1 != value0:
            raise RuntimeError("surgery changed the objective value")
    elif abs(float(value1) - float(value0)) > PLAN_FEAS_TOL:
        raise RuntimeError("surgery changed the objective value beyond tolerance")
    leaked = sum(v for (x, y), v in out.entries.items()
                 if x == x_prime and g.distance(x_prime, y) >= d0 and v != 0)
    if leaked != 0:
        raise RuntimeError("surgery left mass in the forbidden region")
    return out


def surgery_epsilon(g: WeightedGraph, x0: str, y0: str, kappa):
    """epsilon = max(0, d0 * kappa), the slack fed into the mass bound."""
    d0 = _check_pair(g, x0, y0)
    eps = d0 * kappa
    return eps if eps > 0 else type(eps)(0)


# -- sweeps ------------------------------------------------------------------


PairSelector = Union[str, Sequence[tuple[str, str]]]


@dataclass(frozen=True)
class PairFailure:
    x0: str
    y0: str
    error: str


def select_pairs(g: WeightedGraph, selector: PairSelector) -> list[tuple[str, str]]:
    if isinstance(selector, str):
        if selector == "edges":
            return [(u, v) for u, v, _ in g.edges()]
        if selector in ("all", "all-pairs"):
            verts = g.vertices
            return [(u, v) for i, u in enumerate(verts) for v in verts[i + 1:]]
        raise PairError(f"unknown pair selector {selector!r}")
    return [(str(u), str(v)) for u, v in selector]


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("CURVLAB_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def curvature_sweep(g: WeightedGraph, selector: PairSelector = "edges",
                    mode: str = FLOAT_MODE, threads: Optional[int] = None):
    """One CurvatureReport per selected pair; failures recorded, sweep continues.

    Results come back in pair order regardless of scheduling.
    """
    pairs = select_pairs(g, selector)

    def compute(pair):
        x0, y0 = pair
        try:
            return curvature_report(g, x0, y0, mode)
        except (PairError, ValueError) as exc:
            return PairFailure(x0=x0, y0=y0, error=str(exc))

    nthreads = _thread_count(threads)
    if nthreads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(p) for p in pairs]
    return results


def min_curvature(g: WeightedGraph, mode: str = FLOAT_MODE,
                  selector: PairSelector = "all"):
    """Minimum curvature over the selected pairs and its argmin pair."""
    best = None
    for x0, y0 in select_pairs(g, selector):
        value, _ = curvature_primal(g, x0, y0, mode)
        if best is None or value < best[0]:
            best = (value, (x0, y0))
    if best is None:
        raise PairError("graph has no vertex pairs")
    return best
