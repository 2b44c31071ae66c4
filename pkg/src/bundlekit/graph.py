"""Finite connected unit-edge graphs with an exact BFS metric.

Everything downstream (bundles, sections, ladders, flaring) runs on this
substrate.  Graphs are immutable after construction and safe to share
across threads; all operations here are pure.

Conventions fixed once and used by every other module:

* vertex ids are consecutive integers from 0;
* adjacency lists are sorted;
* the canonical geodesic between u and v is obtained by walking back
  from v, at each step moving to the lowest-numbered neighbor that is
  one step closer to u.  This makes every construction that consumes
  geodesics deterministic.
"""

from __future__ import annotations

import io
import threading
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

# Full distance matrix (int16) is kept for graphs up to this many
# vertices; larger graphs answer queries with cached on-demand BFS rows.
MATRIX_THRESHOLD = 20_000


class GraphError(ValueError):
    """Invalid graph input (self-loop, disconnected, malformed, bad id)."""


class Graph:
    """Undirected, connected, unit-edge graph in CSR form."""

    __slots__ = ("n", "indptr", "indices", "labels", "_oracle", "_lock")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray, labels=None):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.labels = labels
        self._oracle = None
        self._lock = threading.Lock()
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    # -- construction -------------------------------------------------

    @staticmethod
    def from_edges(edges: Iterable[tuple[int, int]], labels=None,
                   n: int | None = None) -> "Graph":
        """Build from an iterable of (u, v) pairs.

        Duplicate edges and (u,v)/(v,u) repeats are collapsed.  Raises
        GraphError on self-loops, negative ids, or a disconnected result.
        """
        pairs = []
        maxv = -1
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if u < 0 or v < 0:
                raise GraphError(f"negative vertex id in edge ({u}, {v})")
            if u > v:
                u, v = v, u
            pairs.append((u, v))
            maxv = max(maxv, v)
        if n is None:
            n = maxv + 1
        elif maxv >= n:
            raise GraphError(f"vertex id {maxv} out of range for n={n}")
        if n <= 0:
            raise GraphError("empty graph")
        if not pairs and n > 1:
            raise GraphError("disconnected: no edges")
        arr = np.unique(np.array(pairs, dtype=np.int64).reshape(-1, 2), axis=0) \
            if pairs else np.zeros((0, 2), dtype=np.int64)
        both = np.concatenate([arr, arr[:, ::-1]]) if len(arr) else arr
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else []
        both = both[order] if len(both) else both
        counts = np.bincount(both[:, 0], minlength=n) if len(both) else np.zeros(n, int)
        indptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(counts, out=indptr[1:])
        indices = both[:, 1].astype(np.int32) if len(both) else np.zeros(0, np.int32)
        g = Graph(n, indptr, indices, labels=labels)
        if n > 1:
            seen = _kernels.bfs_row(g.indptr, g.indices, 0)
            bad = np.flatnonzero(seen < 0)
            if bad.size:
                raise GraphError(
                    f"disconnected: vertex {int(bad[0])} unreachable from 0")
        return g

    # -- basics --------------------------------------------------------

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def edges(self):
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield (u, int(v))

    def check_vertex(self, v: int) -> int:
        v = int(v)
        if not (0 <= v < self.n):
            raise GraphError(f"vertex id {v} out of range [0, {self.n})")
        return v

    # -- metric --------------------------------------------------------

    @property
    def oracle(self) -> "DistanceOracle":
        if self._oracle is None:
            with self._lock:
                if self._oracle is None:
                    self._oracle = DistanceOracle(self)
        return self._oracle

    def distance(self, u: int, v: int) -> int:
        u, v = self.check_vertex(u), self.check_vertex(v)
        return int(self.oracle.row(u)[v])

    def dist_row(self, u: int) -> np.ndarray:
        return self.oracle.row(self.check_vertex(u))

    def dmat(self, sources, targets=None) -> np.ndarray:
        """Distance sub-matrix rows(sources) x cols(targets)."""
        sources = np.asarray(sources, dtype=np.int64)
        if targets is None:
            targets = sources
        targets = np.asarray(targets, dtype=np.int64)
        out = np.empty((len(sources), len(targets)), dtype=np.int32)
        for i, s in enumerate(sources):
            out[i] = self.oracle.row(int(s))[targets]
        return out

    def geodesic(self, u: int, v: int) -> list[int]:
        """Canonical geodesic u..v (lowest-neighbor backtracking rule)."""
        u, v = self.check_vertex(u), self.check_vertex(v)
        row = self.dist_row(u)
        path = [v]
        x = v
        while x != u:
            want = row[x] - 1
            nbrs = self.neighbors(x)
            x = int(nbrs[np.flatnonzero(row[nbrs] == want)[0]])
            path.append(x)
        path.reverse()
        return path

    def ball(self, center: int, radius: int) -> np.ndarray:
        """Sorted vertex ids at distance <= radius from center."""
        center = self.check_vertex(center)
        if radius < 0:
            raise GraphError("radius must be >= 0")
        row = self.dist_row(center)
        return np.flatnonzero(row <= radius)

    def eccentricity(self, v: int) -> int:
        return int(self.dist_row(v).max())

    def diameter(self) -> int:
        # double sweep lower bound refined to exact for small graphs
        if self.n <= 2000:
            return max(self.eccentricity(v) for v in range(self.n))
        e0 = self.dist_row(0)
        far = int(e0.argmax())
        return int(self.dist_row(far).max())

    # -- induced subgraph ----------------------------------------------

    def induced(self, verts: Sequence[int]) -> tuple["Graph", np.ndarray]:
        """Induced subgraph on ``verts`` (must be connected).

        Returns (subgraph, vertex_map) with vertex_map[i] = original id of
        local vertex i; local ids follow ascending original ids.
        """
        verts = np.unique(np.asarray(verts, dtype=np.int64))
        local = -np.ones(self.n, dtype=np.int64)
        local[verts] = np.arange(len(verts))
        edges = []
        for i, v in enumerate(verts):
            nb = self.neighbors(int(v))
            for w in nb[local[nb] >= 0]:
                if v < w:
                    edges.append((i, int(local[w])))
        sub = Graph.from_edges(edges, n=len(verts))
        return sub, verts

    def is_connected_subset(self, verts) -> bool:
        verts = np.unique(np.asarray(verts, dtype=np.int64))
        if len(verts) <= 1:
            return len(verts) == 1
        mask = np.zeros(self.n, dtype=np.uint8)
        mask[verts] = 1
        row = _kernels.bfs_masked(self.indptr, self.indices,
                                  int(verts[0]), mask)
        return bool((row[verts] >= 0).all())


class DistanceOracle:
    """Exact BFS distances with cached rows.

    Graphs up to MATRIX_THRESHOLD vertices share one int16 matrix whose
    rows are filled on first use (untouched rows cost no RAM); larger
    graphs keep a per-source row cache.  Thread-safe; rows are
    read-only after being produced.
    """

    def __init__(self, g: Graph, matrix_threshold: int | None = None):
        self.g = g
        thr = MATRIX_THRESHOLD if matrix_threshold is None else matrix_threshold
        self.mode = "exact-matrix" if g.n <= thr else "on-demand-BFS"
        self._lock = threading.Lock()
        if self.mode == "exact-matrix":
            self._mat = np.zeros((g.n, g.n), dtype=np.int16)
            self._have = np.zeros(g.n, dtype=bool)
        else:
            self._rows: dict[int, np.ndarray] = {}

    def row(self, src: int) -> np.ndarray:
        if self.mode == "exact-matrix":
            if not self._have[src]:
                with self._lock:
                    if not self._have[src]:
                        self._mat[src, :] = _kernels.bfs_row(
                            self.g.indptr, self.g.indices, src)
                        self._have[src] = True
            return self._mat[src]
        r = self._rows.get(src)
        if r is None:
            r = _kernels.bfs_row(self.g.indptr, self.g.indices, src)
            r.setflags(write=False)
            with self._lock:
                self._rows[src] = r
        return r

    def all_pairs(self, threads: int = 1) -> np.ndarray:
        """Full distance matrix (int16), computed with ``threads`` workers."""
        g = self.g
        if self.mode == "exact-matrix":
            out = self._mat
            todo = np.flatnonzero(~self._have)
        else:
            out = np.zeros((g.n, g.n), dtype=np.int16)
            todo = np.arange(g.n)
        if todo.size:
            if out.dtype == np.int16 and threads <= 1:
                _kernels.bfs_many_int16(g.indptr, g.indices, todo, out)
            elif out.dtype == np.int16:
                from concurrent.futures import ThreadPoolExecutor

                chunks = [c for c in np.array_split(todo, threads) if len(c)]
                with ThreadPoolExecutor(threads) as tp:
                    list(tp.map(
                        lambda c: _kernels.bfs_many_int16(g.indptr, g.indices, c, out),
                        chunks))
            else:
                _kernels.bfs_rows_into(g.indptr, g.indices, todo, out)
            if self.mode == "exact-matrix":
                self._have[todo] = True
        return out


# -- edge-list text format ---------------------------------------------
#
# One "u v" pair per line, '#' starts a comment, ids are consecutive
# integers from 0.  A JSON sidecar may carry per-vertex labels.

def load_graph(source) -> Graph:
    """Parse the edge-list text format from a path, stream, or string."""
    if isinstance(source, str) and "\n" not in source:
        with open(source, "r", encoding="utf-8") as fh:
            return load_graph(fh)
    if isinstance(source, str):
        source = io.StringIO(source)
    edges = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"malformed line {lineno}: {raw.rstrip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise GraphError(f"malformed line {lineno}: {raw.rstrip()!r}") from exc
        edges.append((u, v))
    return Graph.from_edges(edges)


def dump_graph(g: Graph) -> str:
    lines = [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def cone_off(g: Graph, subsets: Sequence[Sequence[int]]) -> Graph:
    """Add one apex vertex per subset, joined to each member by a unit edge.

    Original edges are kept; apex i gets id g.n + i.  (Cone edges have
    length 1 here, not the 1/2 sometimes used for electrified spaces: the
    substrate is a unit-edge graph and coarse statements absorb the
    factor 2.)
    """
    edges = list(g.edges())
    for i, sub in enumerate(subsets):
        members = sorted({g.check_vertex(v) for v in sub})
        if not members:
            raise GraphError(f"cone subset {i} is empty")
        apex = g.n + i
        edges.extend((v, apex) for v in members)
    labels = None
    if g.labels is not None:
        labels = list(g.labels) + [None] * len(subsets)
    return Graph.from_edges(edges, labels=labels, n=g.n + len(subsets))


def path_length(g: Graph, path: Sequence[int]) -> int:
    """Length of an edge path; raises if consecutive vertices not adjacent."""
    length = 0
    for a, b in zip(path, path[1:]):
        if g.distance(a, b) != 1:
            raise GraphError(f"not an edge path: ({a}, {b}) not adjacent")
        length += 1
    return length


def is_edge_path(g: Graph, path: Sequence[int]) -> bool:
    return all(int(b) in set(map(int, g.neighbors(int(a))))
               for a, b in zip(path, path[1:]))
