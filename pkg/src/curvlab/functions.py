"""Real-valued functions on vertex sets, gradients, and Lipschitz sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from curvlab.graphs import WeightedGraph


@dataclass(frozen=True)
class VertexFunction:
    """A (possibly partial) map vertex -> real with gradient accessors."""

    values: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, values: Mapping) -> "VertexFunction":
        return cls({str(k): v for k, v in values.items()})

    @property
    def domain(self) -> frozenset:
        return frozenset(self.values)

    def __getitem__(self, v):
        return self.values[str(v)]

    def __contains__(self, v) -> bool:
        return str(v) in self.values

    def is_total(self, g: WeightedGraph) -> bool:
        return all(v in self.values for v in g.vertices)

    def require_total(self, g: WeightedGraph) -> None:
        missing = [v for v in g.vertices if v not in self.values]
        if missing:
            raise ValueError(f"function undefined at {missing[0]!r} (partial domain)")

    def gradient(self, g: WeightedGraph, x: str, y: str):
        """(f(x) - f(y)) / d(x,y) for distinct x, y in the domain."""
        x, y = str(x), str(y)
        if x == y:
            raise ValueError("gradient needs two distinct vertices")
        d = g.distance(x, y)
        if d == math.inf:
            raise ValueError(f"vertices {x!r}, {y!r} are disconnected")
        return (self.values[x] - self.values[y]) / d

    def grad_inf_norm(self, g: WeightedGraph):
        """sup over adjacent ordered pairs of the gradient (= max |df| over edges)."""
        best = 0
        for u, v, _ in g.edges():
            if u in self.values and v in self.values:
                diff = abs(self.values[u] - self.values[v])
                if diff > best:
                    best = diff
        return best

    def sup_norm(self):
        return max(abs(v) for v in self.values.values()) if self.values else 0

    def mean(self, g: WeightedGraph):
        """Measure-weighted sum <f> = sum_x m(x) f(x); needs a total function."""
        self.require_total(g)
        return sum(g.measure(v) * self.values[v] for v in g.vertices)

    def shifted(self, c) -> "VertexFunction":
        return VertexFunction({k: v + c for k, v in self.values.items()})

    def scaled(self, c) -> "VertexFunction":
        return VertexFunction({k: c * v for k, v in self.values.items()})

    def centered(self, g: WeightedGraph) -> "VertexFunction":
        """Shift so the measure-weighted mean is zero."""
        avg = self.mean(g) / g.total_measure()
        return self.shifted(-avg)

    def restrict(self, verts) -> "VertexFunction":
        keep = {str(v) for v in verts}
        return VertexFunction({k: v for k, v in self.values.items() if k in keep})

    def as_floats(self) -> dict:
        return {k: float(v) for k, v in self.values.items()}


def lipschitz_project(g: WeightedGraph, f: VertexFunction) -> VertexFunction:
    """Largest 1-Lipschitz minorant h(x) = min_w f(w) + d(w,x) of a total function."""
    f.require_total(g)
    out = {}
    for x in g.vertices:
        dist = g.distances_from(x)
        out[x] = min(f[w] + dist[w] for w in g.vertices if w in dist)
    return VertexFunction(out)


def is_one_lipschitz(g: WeightedGraph, f: VertexFunction, tol=0) -> bool:
    verts = [v for v in g.vertices if v in f]
    for i, u in enumerate(verts):
        for v in verts[i + 1:]:
            d = g.distance(u, v)
            if d == math.inf:
                continue
            if abs(f[u] - f[v]) > d + tol:
                return False
    return True


def random_lipschitz_function(g: WeightedGraph, rng, center: bool = True) -> VertexFunction:
    """Draw i.i.d. values, project onto the 1-Lipschitz set, optionally mean-center."""
    diam = g.diameter()
    if diam == math.inf:
        raise ValueError("graph must be connected")
    spread = float(max(diam, 1))
    raw = VertexFunction({v: rng.uniform(-spread, spread) for v in g.vertices})
    f = lipschitz_project(g, raw)
    if center:
        f = f.centered(g)
    return f


def random_function(g: WeightedGraph, rng, scale: float = 1.0) -> VertexFunction:
    return VertexFunction({v: rng.uniform(-scale, scale) for v in g.vertices})
