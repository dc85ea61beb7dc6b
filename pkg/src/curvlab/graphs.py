"""Finite weighted measured graphs: data model, combinatorial metric, generators, JSON I/O.

A graph is a triple (V, w, m) with symmetric nonnegative edge weights w,
zero on the diagonal, and a strictly positive vertex measure m.  Derived
quantities are the transition rates q(x,y) = w(x,y)/m(x), the weighted
degrees Deg(x) = sum_y q(x,y), and the shortest-path metric d.
"""

from __future__ import annotations

import json
import math
from collections import deque
from fractions import Fraction
from typing import IO, Iterable, Mapping, Sequence, Union

Number = Union[int, float, Fraction]

INF = math.inf

FAMILIES = (
    "path",
    "cycle",
    "complete",
    "hypercube",
    "grid",
    "segment-of-integer-lattice",
)
WEIGHTINGS = ("unit", "normalized", "degree-one")


class GraphFormatError(ValueError):
    """A graph document or construction violates the data contract."""


def _store(value: Number, what: str) -> Number:
    """Keep ints and Fractions exact, floats as floats."""
    if isinstance(value, bool) or not isinstance(value, (int, float, Fraction)):
        raise GraphFormatError(f"{what} must be a number, got {type(value).__name__}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise GraphFormatError(f"{what} must be finite, got {value!r}")
        return value
    return Fraction(value)


class WeightedGraph:
    """Immutable finite graph with symmetric edge weights and positive vertex measure.

    Parameters
    ----------
    vertices : ordered iterable of vertex ids (converted to str)
    measures : mapping id -> positive number
    edges : iterable of (u, v, weight) with u != v, weight >= 0;
        each unordered pair may appear at most once.

    Integer and rational input stays exact (stored as Fraction); float input
    stays binary float.  Distances are cached after the first query.
    """

    def __init__(self, vertices: Iterable, measures: Mapping, edges: Iterable):
        verts = [str(v) for v in vertices]
        if len(set(verts)) != len(verts):
            raise GraphFormatError("duplicate vertex id")
        self._vertices = tuple(verts)
        self._index = {v: i for i, v in enumerate(verts)}

        self._m = {}
        for v in verts:
            if v not in measures:
                raise GraphFormatError(f"missing measure for vertex {v!r}")
            mv = _store(measures[v], f"measure of {v!r}")
            if mv <= 0:
                raise GraphFormatError(f"nonpositive measure at vertex {v!r}")
            self._m[v] = mv

        self._adj: dict[str, dict[str, Number]] = {v: {} for v in verts}
        self._edge_count = 0
        for u, v, wv in edges:
            u, v = str(u), str(v)
            for z in (u, v):
                if z not in self._index:
                    raise GraphFormatError(f"unknown vertex {z!r} in edge")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u!r} (weights are zero on the diagonal)")
            wv = _store(wv, f"weight of edge ({u!r},{v!r})")
            if wv < 0:
                raise GraphFormatError(f"negative weight on edge ({u!r},{v!r})")
            if v in self._adj[u]:
                if self._adj[u][v] != wv:
                    raise GraphFormatError(f"asymmetric weight entries for edge ({u!r},{v!r})")
                raise GraphFormatError(f"duplicate edge ({u!r},{v!r})")
            if wv == 0:
                continue
            self._adj[u][v] = wv
            self._adj[v][u] = wv
            self._edge_count += 1

        self._dist: dict[str, dict[str, int]] = {}

    # -- basic accessors -------------------------------------------------

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def index(self) -> dict[str, int]:
        return self._index

    def __len__(self) -> int:
        return len(self._vertices)

    def __contains__(self, v) -> bool:
        return str(v) in self._index

    def _check_vertex(self, x: str) -> str:
        x = str(x)
        if x not in self._index:
            raise GraphFormatError(f"unknown vertex {x!r}")
        return x

    def measure(self, x: str) -> Number:
        return self._m[self._check_vertex(x)]

    def total_measure(self) -> Number:
        return sum(self._m.values())

    def weight(self, x: str, y: str) -> Number:
        x, y = self._check_vertex(x), self._check_vertex(y)
        if x == y:
            return Fraction(0)
        return self._adj[x].get(y, Fraction(0))

    def adjacent(self, x: str, y: str) -> bool:
        return str(y) in self._adj[self._check_vertex(x)]

    def neighbors(self, x: str) -> tuple[str, ...]:
        x = self._check_vertex(x)
        return tuple(sorted(self._adj[x], key=self._index.__getitem__))

    def edges(self) -> list[tuple[str, str, Number]]:
        """All edges (u, v, w) with index(u) < index(v), in vertex order."""
        out = []
        for u in self._vertices:
            iu = self._index[u]
            for v, wv in self._adj[u].items():
                if self._index[v] > iu:
                    out.append((u, v, wv))
        out.sort(key=lambda e: (self._index[e[0]], self._index[e[1]]))
        return out

    def edge_count(self) -> int:
        return self._edge_count

    # -- derived rates ---------------------------------------------------

    def transition_rate(self, x: str, y: str) -> Number:
        """q(x,y) = w(x,y)/m(x); zero for non-adjacent pairs."""
        return self.weight(x, y) / self._m[self._check_vertex(x)]

    def weighted_degree(self, x: str) -> Number:
        x = self._check_vertex(x)
        mx = self._m[x]
        return sum((w / mx for w in self._adj[x].values()), Fraction(0))

    def deg_max(self) -> Number:
        return max(self.weighted_degree(x) for x in self._vertices)

    def q_min(self) -> Number:
        """Minimum transition rate over adjacent ordered pairs."""
        rates = [
            self._adj[x][y] / self._m[x]
            for x in self._vertices
            for y in self._adj[x]
        ]
        if not rates:
            raise GraphFormatError("no edges")
        return min(rates)

    # -- metric ----------------------------------------------------------

    def _bfs(self, source: str) -> dict[str, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            du = dist[u]
            for v in self._adj[u]:
                if v not in dist:
                    dist[v] = du + 1
                    queue.append(v)
        return dist

    def _distances_from(self, x: str) -> dict[str, int]:
        if x not in self._dist:
            if len(self._vertices) <= 4096:
                for v in self._vertices:
                    self._dist[v] = self._bfs(v)
            else:
                self._dist[x] = self._bfs(x)
        return self._dist[x]

    def distances_from(self, x: str) -> dict[str, int]:
        """BFS distances from x to every reachable vertex (cached)."""
        return self._distances_from(self._check_vertex(x))

    def distance(self, x: str, y: str):
        """Combinatorial graph distance; INF for disconnected pairs."""
        x, y = self._check_vertex(x), self._check_vertex(y)
        return self._distances_from(x).get(y, INF)

    def ball(self, x: str, r: int) -> tuple[str, ...]:
        x = self._check_vertex(x)
        dist = self._distances_from(x)
        return tuple(v for v in self._vertices if dist.get(v, INF) <= r)

    def sphere(self, x: str, r: int) -> tuple[str, ...]:
        x = self._check_vertex(x)
        dist = self._distances_from(x)
        return tuple(v for v in self._vertices if dist.get(v, INF) == r)

    def diameter(self) -> Number:
        return max(self.distance(x, y) for x in self._vertices for y in self._vertices)

    def components(self) -> list[tuple[str, ...]]:
        seen: set[str] = set()
        comps = []
        for v in self._vertices:
            if v in seen:
                continue
            reach = self._bfs(v)
            seen.update(reach)
            comps.append(tuple(u for u in self._vertices if u in reach))
        return comps

    def is_connected(self) -> bool:
        return len(self) == 0 or len(self._bfs(self._vertices[0])) == len(self)

    # -- derived graphs --------------------------------------------------

    def with_measure(self, measures: Mapping) -> "WeightedGraph":
        """Same vertices and weights, replaced vertex measure."""
        return WeightedGraph(self._vertices, measures, self.edges())

    def scale_measure(self, factor: Number) -> "WeightedGraph":
        return self.with_measure({v: m * factor for v, m in self._m.items()})


# -- JSON I/O --------------------------------------------------------------


def _parse_document(doc) -> WeightedGraph:
    if not isinstance(doc, dict):
        raise GraphFormatError("malformed document: top level must be an object")
    for key in ("vertices", "edges"):
        if key not in doc or not isinstance(doc[key], list):
            raise GraphFormatError(f"malformed document: missing {key!r} array")
    verts, measures = [], {}
    for item in doc["vertices"]:
        if not isinstance(item, dict) or "id" not in item or "m" not in item:
            raise GraphFormatError("malformed document: vertex entries need 'id' and 'm'")
        vid = str(item["id"])
        verts.append(vid)
        measures[vid] = item["m"]
    edges = []
    for item in doc["edges"]:
        if not isinstance(item, dict) or not {"u", "v", "w"} <= set(item):
            raise GraphFormatError("malformed document: edge entries need 'u', 'v', 'w'")
        edges.append((item["u"], item["v"], item["w"]))
    return WeightedGraph(verts, measures, edges)


def load_graph(source: Union[str, IO], exact: bool = False,
               require_connected: bool = False) -> WeightedGraph:
    """Load a graph from a .graph.json document (path, stream, or JSON text).

    With exact=True, decimal literals are parsed as exact rationals instead
    of binary floats (certificate mode).  With require_connected=True,
    disconnected graphs (isolated vertices included) are rejected.
    """
    parse_float = (lambda s: Fraction(s)) if exact else float
    try:
        if hasattr(source, "read"):
            doc = json.load(source, parse_float=parse_float)
        else:
            text = str(source)
            if text.lstrip().startswith("{"):
                doc = json.loads(text, parse_float=parse_float)
            else:
                with open(text, "r", encoding="utf-8") as fh:
                    doc = json.load(fh, parse_float=parse_float)
        g = _parse_document(doc)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"malformed document: {exc}") from exc
    if require_connected and not g.is_connected():
        raise GraphFormatError("graph is not connected")
    return g


def _number_to_json(v: Number):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    return v


def graph_to_document(g: WeightedGraph) -> dict:
    return {
        "vertices": [{"id": v, "m": _number_to_json(g.measure(v))} for v in g.vertices],
        "edges": [
            {"u": u, "v": v, "w": _number_to_json(w)} for u, v, w in g.edges()
        ],
    }


def save_graph(g: WeightedGraph, target: Union[str, IO]) -> None:
    """Write a graph as a .graph.json document."""
    doc = graph_to_document(g)
    if hasattr(target, "write"):
        json.dump(doc, target, indent=2, sort_keys=True)
        target.write("\n")
    else:
        with open(str(target), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


# -- generators ------------------------------------------------------------


def _path_structure(n: int):
    verts = [str(i) for i in range(n)]
    return verts, [(str(i), str(i + 1)) for i in range(n - 1)]


def _cycle_structure(n: int):
    verts = [str(i) for i in range(n)]
    if n == 1:
        return verts, []
    if n == 2:
        return verts, [("0", "1")]
    return verts, [(str(i), str((i + 1) % n)) for i in range(n)]


def _complete_structure(n: int):
    verts = [str(i) for i in range(n)]
    return verts, [(str(i), str(j)) for i in range(n) for j in range(i + 1, n)]


def _hypercube_structure(dim: int):
    verts = [format(i, f"0{dim}b") for i in range(2 ** dim)]
    edges = []
    for i, u in enumerate(verts):
        for b in range(dim):
            j = i ^ (1 << b)
            if j > i:
                edges.append((u, verts[j]))
    return verts, edges


def _grid_structure(rows: int, cols: int):
    verts = [f"{r}-{c}" for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((f"{r}-{c}", f"{r}-{c + 1}"))
            if r + 1 < rows:
                edges.append((f"{r}-{c}", f"{r + 1}-{c}"))
    return verts, edges


def generate(family: str, size, weighting: str = "unit") -> WeightedGraph:
    """Build a graph of a named family with one of the standard weightings.

    family: path | cycle | complete | hypercube | grid | segment-of-integer-lattice
    size: int (grid takes (rows, cols))
    weighting:
        unit        w = 1, m = 1
        normalized  w = 1, m(x) = combinatorial degree
        degree-one  w = 1/(2|E|), m(x) = deg(x)/(2|E|), so Deg = 1 and m(V) = 1
    """
    fam = str(family).lower()
    if fam in ("path", "segment-of-integer-lattice"):
        n = int(size)
        if n < 1:
            raise ValueError("size must be >= 1")
        verts, edges = _path_structure(n)
    elif fam == "cycle":
        n = int(size)
        if n < 1:
            raise ValueError("size must be >= 1")
        verts, edges = _cycle_structure(n)
    elif fam == "complete":
        n = int(size)
        if n < 1:
            raise ValueError("size must be >= 1")
        verts, edges = _complete_structure(n)
    elif fam == "hypercube":
        d = int(size)
        if d < 1:
            raise ValueError("size must be >= 1")
        verts, edges = _hypercube_structure(d)
    elif fam == "grid":
        if isinstance(size, (tuple, list)):
            rows, cols = int(size[0]), int(size[1])
        else:
            rows = cols = int(size)
        if rows < 1 or cols < 1:
            raise ValueError("size must be >= 1")
        verts, edges = _grid_structure(rows, cols)
    else:
        raise ValueError(f"unsupported family {family!r} (expected one of {FAMILIES})")

    degree = {v: 0 for v in verts}
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1

    if weighting == "unit":
        weighted = [(u, v, 1) for u, v in edges]
        measures = {v: 1 for v in verts}
    elif weighting == "normalized":
        weighted = [(u, v, 1) for u, v in edges]
        measures = {v: max(degree[v], 1) for v in verts}
    elif weighting == "degree-one":
        if not edges:
            raise ValueError("degree-one weighting needs at least one edge")
        total = 2 * len(edges)
        weighted = [(u, v, Fraction(1, total)) for u, v in edges]
        measures = {v: Fraction(degree[v], total) for v in verts}
        if any(degree[v] == 0 for v in verts):
            raise ValueError("degree-one weighting needs every vertex to have a neighbor")
    else:
        raise ValueError(f"unsupported weighting {weighting!r} (expected one of {WEIGHTINGS})")

    return WeightedGraph(verts, measures, weighted)
