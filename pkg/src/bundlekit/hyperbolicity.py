"""Gromov hyperbolicity toolkit for unit-edge graphs.

Measures slimness, insize and thinness at half-integer resolution: a
"point" is a vertex or an edge midpoint, encoded as a pair (u, v) of
endpoint ids with u == v for vertices.  All internal arithmetic uses
doubled distances (``d2``) so every half-integer quantity stays an exact
integer; public APIs return floats whose fractional part is exactly 0 or
0.5.

Working at this resolution is what makes the classical relations
(insize <= 4*delta, thinness <= 6*delta) hold with zero tolerance on the
computed quantities: e.g. a triangle of three unit edges has slimness
1/2 (realized at an edge midpoint) and insize 1, which a vertex-only
measurement would report as 0 and 1.

Two measurement modes:

* exact: all vertex triples, all geodesic choices.  Implemented with a
  dynamic program over shortest-path DAGs (never enumerates geodesics,
  so it does not blow up on graphs with many of them).
* sampled: canonical geodesics on sampled (or, when few, all) triples.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import Graph, GraphError


# ---------------------------------------------------------------------
# half-point helpers (doubled distances)
# ---------------------------------------------------------------------

def points_of_path(path: Sequence[int]) -> np.ndarray:
    """Vertices and edge midpoints along a path, in arc order.

    Row k is the point at doubled-arc k: even rows are vertices (u, u),
    odd rows are midpoints (min, max).
    """
    L = len(path) - 1
    pts = np.empty((2 * L + 1, 2), dtype=np.int64)
    p = np.asarray(path, dtype=np.int64)
    pts[0::2, 0] = p
    pts[0::2, 1] = p
    if L:
        a, b = p[:-1], p[1:]
        pts[1::2, 0] = np.minimum(a, b)
        pts[1::2, 1] = np.maximum(a, b)
    return pts


def d2_points(D: np.ndarray, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Doubled distances between half-point arrays, exact.

    ``D`` is a vertex-distance matrix indexed by the ids appearing in
    P, Q (full matrix or a gathered submatrix with remapped ids).
    """
    u1, v1 = P[:, 0][:, None], P[:, 1][:, None]
    u2, v2 = Q[:, 0][None, :], Q[:, 1][None, :]
    m = np.minimum(
        np.minimum(D[u1, u2], D[u1, v2]),
        np.minimum(D[v1, u2], D[v1, v2]),
    ).astype(np.int64)
    h1 = (P[:, 0] != P[:, 1]).astype(np.int64)[:, None]
    h2 = (Q[:, 0] != Q[:, 1]).astype(np.int64)[None, :]
    out = 2 * m + h1 + h2
    same = (h1 & h2).astype(bool) & (u1 == u2) & (v1 == v2)
    out[same] = 0
    return out


def d2_pairs(D: np.ndarray, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Elementwise doubled distances between aligned point arrays."""
    m = np.minimum(
        np.minimum(D[P[:, 0], Q[:, 0]], D[P[:, 0], Q[:, 1]]),
        np.minimum(D[P[:, 1], Q[:, 0]], D[P[:, 1], Q[:, 1]]),
    ).astype(np.int64)
    h1 = (P[:, 0] != P[:, 1]).astype(np.int64)
    h2 = (Q[:, 0] != Q[:, 1]).astype(np.int64)
    out = 2 * m + h1 + h2
    same = (h1 & h2).astype(bool) & (P[:, 0] == Q[:, 0]) & (P[:, 1] == Q[:, 1])
    out[same] = 0
    return out


def point_at_arc2(path: Sequence[int], t2: int) -> tuple[int, int]:
    """Half-point at doubled arc position t2 along ``path``."""
    if t2 % 2 == 0:
        v = int(path[t2 // 2])
        return (v, v)
    a, b = int(path[t2 // 2]), int(path[t2 // 2 + 1])
    return (min(a, b), max(a, b))


# ---------------------------------------------------------------------
# basic quantities
# ---------------------------------------------------------------------

def gromov_product(g: Graph, y: int, z: int, basepoint: int) -> float:
    """(y . z) with respect to ``basepoint``; exact half-integer."""
    x = g.check_vertex(basepoint)
    y, z = g.check_vertex(y), g.check_vertex(z)
    return (g.distance(x, y) + g.distance(x, z) - g.distance(y, z)) / 2


def dist_to_set(g: Graph, targets) -> np.ndarray:
    """Distance from every vertex to the nearest vertex of ``targets``."""
    targets = np.asarray(list(targets), dtype=np.int64)
    if targets.size == 0:
        raise GraphError("empty target set")
    return _kernels.bfs_multi(g.indptr, g.indices, targets)


@dataclasses.dataclass(frozen=True)
class ProjectionWitness:
    source: int
    target: tuple[int, ...]
    point: int
    distance: int

    def to_json(self):
        return {"source": self.source, "point": self.point,
                "distance": self.distance}


def nearest_point_projection(g: Graph, x: int, A) -> ProjectionWitness:
    """Nearest point of A to x, lowest-id tie-break."""
    A = np.unique(np.asarray(list(A), dtype=np.int64))
    if A.size == 0:
        raise GraphError("projection onto empty set")
    x = g.check_vertex(x)
    row = g.dist_row(x)[A]
    k = int(row.argmin())
    return ProjectionWitness(x, tuple(int(a) for a in A),
                             int(A[k]), int(row[k]))


def quasiconvexity_constant(g: Graph, A, pair_sample: int | None = None,
                            seed: int = 0) -> int:
    """Smallest K with every (sampled) canonical geodesic between points
    of A inside the K-neighborhood of A."""
    A = np.unique(np.asarray(list(A), dtype=np.int64))
    if A.size == 0:
        raise GraphError("empty set")
    dA = dist_to_set(g, A)
    m = len(A)
    if pair_sample is None or m * (m - 1) // 2 <= pair_sample:
        pairs = [(int(A[i]), int(A[j]))
                 for i in range(m) for j in range(i + 1, m)]
    else:
        rng = np.random.default_rng(seed)
        pairs = [tuple(int(v) for v in A[rng.choice(m, 2, replace=False)])
                 for _ in range(pair_sample)]
    K = 0
    for u, v in pairs:
        p = g.geodesic(u, v)
        K = max(K, int(dA[np.asarray(p)].max()))
    return K


def coboundedness(g: Graph, U, V) -> int:
    """Max over both directions of the diameter of the nearest-point
    projection image of one set on the other."""
    U = np.unique(np.asarray(list(U), dtype=np.int64))
    V = np.unique(np.asarray(list(V), dtype=np.int64))
    if U.size == 0 or V.size == 0:
        raise GraphError("empty set")

    def image_diam(src, dst):
        img = set()
        for u in src:
            row = g.dist_row(int(u))[dst]
            img.add(int(dst[int(row.argmin())]))
        img = sorted(img)
        if len(img) == 1:
            return 0
        return int(g.dmat(img, img).max())

    return max(image_diam(U, V), image_diam(V, U))


def hausdorff_distance(g: Graph, A, B) -> int:
    A = np.unique(np.asarray(list(A), dtype=np.int64))
    B = np.unique(np.asarray(list(B), dtype=np.int64))
    if A.size == 0 or B.size == 0:
        raise GraphError("empty set")
    dA = dist_to_set(g, A)
    dB = dist_to_set(g, B)
    return max(int(dB[A].max()), int(dA[B].max()))


# ---------------------------------------------------------------------
# quasigeodesic diagnostics
# ---------------------------------------------------------------------

K_GRID = tuple(1 + 0.25 * j for j in range(29))  # 1, 1.25, ..., 8
EPS_GRID = tuple(range(33))  # 0..32


@dataclasses.dataclass(frozen=True)
class QuasiGeodesicParams:
    k: float
    eps: float
    satisfied: bool
    witness: tuple[int, int] | None = None

    def to_json(self):
        return {"k": self.k, "eps": self.eps, "satisfied": self.satisfied}


def quasigeodesic_params(g: Graph, path: Sequence[int]) -> QuasiGeodesicParams:
    """Minimal grid (k, eps) such that for all index pairs s < t:
    |s-t|/k - eps <= d(path[s], path[t]) <= k|s-t| + eps."""
    if len(path) <= 1:
        return QuasiGeodesicParams(1.0, 0.0, True)
    verts = np.unique(np.asarray(path, dtype=np.int64))
    local = {int(v): i for i, v in enumerate(verts)}
    D = g.dmat(verts, verts)
    idx = np.array([local[int(v)] for v in path])
    m = len(path)
    s, t = np.triu_indices(m, k=1)
    gap = (t - s).astype(float)
    dv = D[idx[s], idx[t]].astype(float)
    for k in K_GRID:
        hi = dv - k * gap          # need <= eps
        lo = gap / k - dv          # need <= eps
        need = max(hi.max(), lo.max(), 0.0)
        if need <= EPS_GRID[-1]:
            eps = max(0.0, float(np.ceil(need - 1e-12)))
            j = int(np.argmax(np.maximum(hi, lo)))
            return QuasiGeodesicParams(float(k), eps, True,
                                       (int(s[j]), int(t[j])))
    j = int(np.argmax(dv - K_GRID[-1] * gap))
    return QuasiGeodesicParams(float(K_GRID[-1]), float(EPS_GRID[-1]), False,
                               (int(s[j]), int(t[j])))


# ---------------------------------------------------------------------
# internal points and barycenters
# ---------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class InternalPoint:
    side: tuple[int, int]        # corners of the side, in argument order
    arc2: int                    # doubled arc from side[0]
    point: tuple[int, int]       # exact half-point
    vertex: int                  # snapped toward side[0]


def internal_points(g: Graph, x1: int, x2: int, x3: int
                    ) -> tuple[InternalPoint, InternalPoint, InternalPoint]:
    """The three internal points, on sides (x2,x3), (x1,x3), (x1,x2).

    Arc positions are the Gromov products at the side corners (exact,
    possibly half-integer); ``vertex`` snaps to the nearer vertex toward
    the side's first corner (floor).
    """
    x1, x2, x3 = (g.check_vertex(v) for v in (x1, x2, x3))
    d12, d13, d23 = g.distance(x1, x2), g.distance(x1, x3), g.distance(x2, x3)
    rho1 = d12 + d13 - d23   # doubled product at x1
    rho2 = d12 + d23 - d13
    # on (x1,x2) at rho1 from x1; on (x1,x3) at rho1 from x1;
    # on (x2,x3) at rho2 from x2.
    out = []
    for (a, b), t2 in (((x2, x3), rho2), ((x1, x3), rho1), ((x1, x2), rho1)):
        path = g.geodesic(a, b)
        pt = point_at_arc2(path, t2)
        snapped = int(path[t2 // 2])
        out.append(InternalPoint((a, b), t2, pt, snapped))
    return out[0], out[1], out[2]


def barycenter(g: Graph, x1: int, x2: int, x3: int) -> int:
    """A vertex uniformly close to all three sides: the internal point on
    the side (x2,x3), snapped."""
    c1, _, _ = internal_points(g, x1, x2, x3)
    return c1.vertex


# ---------------------------------------------------------------------
# four-point delta
# ---------------------------------------------------------------------

FOUR_POINT_EXACT_CAP = 320


def delta_four_point(g: Graph, exact_cap: int = FOUR_POINT_EXACT_CAP,
                     sample_pool: int | None = None, seed: int = 0,
                     D: np.ndarray | None = None, threads: int = 1):
    """Four-point hyperbolicity constant.

    Exact O(n^4) scan up to ``exact_cap`` vertices; larger graphs scan a
    seeded sample pool of ``exact_cap`` vertices exhaustively (set
    ``sample_pool`` to override the pool size).  Returns
    (delta, witness_quadruple, mode).
    """
    n = g.n
    pool_size = exact_cap if sample_pool is None else sample_pool
    if n <= exact_cap:
        if D is None:
            D = g.oracle.all_pairs(threads=threads)
        val2, wit = _kernels.four_point_delta2(np.ascontiguousarray(D, dtype=np.int32))
        return val2 / 2, wit, "exact"
    rng = np.random.default_rng(seed)
    pool = np.sort(rng.choice(n, size=pool_size, replace=False))
    Dp = g.dmat(pool, pool)
    val2, wit = _kernels.four_point_delta2(np.ascontiguousarray(Dp, dtype=np.int32))
    return val2 / 2, tuple(int(pool[i]) for i in wit), "sampled-pool"


# ---------------------------------------------------------------------
# slim delta: sampled mode (canonical geodesics)
# ---------------------------------------------------------------------

@dataclasses.dataclass
class TrianglePolicy:
    """Sampling policy for delta_slim.

    mode "auto" uses exact enumeration up to ``exact_threshold`` vertices
    and canonical-geodesic sampling above.  When the number of triples is
    at most ``samples`` the sampler enumerates them all.
    """
    mode: str = "auto"            # auto | exact | sampled
    samples: int = 10_000
    thinness_samples: int | None = None   # defaults to samples
    seed: int = 0
    exact_threshold: int = 40


@dataclasses.dataclass
class HyperbolicityReport:
    delta_slim: float
    delta_four_point: float
    insize_max: float
    thinness_max: float
    witness_triangle: tuple[int, int, int]
    witness_quadruple: tuple[int, int, int, int]
    mode: str
    seed: int
    triangles_checked: int

    def to_json(self):
        return {
            "delta_slim": self.delta_slim,
            "delta_4pt": self.delta_four_point,
            "insize_max": self.insize_max,
            "thin_max": self.thinness_max,
            "witnesses": [list(self.witness_triangle),
                          list(self.witness_quadruple)],
            "mode": self.mode,
            "seed": self.seed,
            "triangles": self.triangles_checked,
        }


def triangle_measurements(g: Graph, a: int, b: int, c: int,
                          with_thinness: bool = True):
    """(slim2, insize2, thin2) of the canonical-geodesic triangle abc."""
    paths = {}
    for u, v in ((a, b), (a, c), (b, c)):
        paths[(u, v)] = g.geodesic(u, v)
    verts = np.unique(np.concatenate([np.asarray(p) for p in paths.values()]))
    local = {int(v): i for i, v in enumerate(verts)}
    D = g.dmat(verts, verts)

    def pts(path):
        P = points_of_path(path)
        Q = P.copy()
        Q[:, 0] = [local[int(x)] for x in P[:, 0]]
        Q[:, 1] = [local[int(x)] for x in P[:, 1]]
        return Q

    Pab, Pac, Pbc = pts(paths[(a, b)]), pts(paths[(a, c)]), pts(paths[(b, c)])
    # slimness: only target vertices matter (midpoints never reduce distance)
    slim2 = 0
    for P, others in ((Pab, (Pac, Pbc)), (Pac, (Pab, Pbc)), (Pbc, (Pab, Pac))):
        T = np.concatenate([o[0::2] for o in others])
        slim2 = max(slim2, int(d2_points(D, P, T).min(axis=1).max()))

    dab = int(D[local[a], local[b]])
    dac = int(D[local[a], local[c]])
    dbc = int(D[local[b], local[c]])
    rho_a = dab + dac - dbc
    rho_b = dab + dbc - dac
    c_ab, c_ac, c_bc = Pab[rho_a], Pac[rho_a], Pbc[rho_b]
    trip = np.stack([c_ab, c_ac, c_bc])
    insize2 = int(d2_points(D, trip, trip).max())

    thin2 = 0
    if with_thinness:
        for P, Q, rho in (
            (Pab, Pac, rho_a),                      # corner a
            (Pab[::-1], Pbc, rho_b),                # corner b
            (Pac[::-1], Pbc[::-1], dac + dbc - dab) # corner c
        ):
            if rho > 0:
                t = np.arange(rho + 1)
                thin2 = max(thin2, int(d2_pairs(D, P[t], Q[t]).max()))
    return slim2, insize2, thin2


def _sampled_slim(g: Graph, policy: TrianglePolicy):
    rng = np.random.default_rng(policy.seed)
    n = g.n
    total = n * (n - 1) * (n - 2) // 6
    if total <= policy.samples:
        triples = [(a, b, c) for a in range(n) for b in range(a + 1, n)
                   for c in range(b + 1, n)]
    else:
        seen = set()
        while len(seen) < policy.samples:
            need = policy.samples - len(seen)
            cand = rng.integers(0, n, size=(need + 16, 3))
            for row in cand:
                t = tuple(sorted(int(x) for x in row))
                if t[0] != t[1] and t[1] != t[2]:
                    seen.add(t)
                if len(seen) == policy.samples:
                    break
        triples = sorted(seen)
    thin_budget = (policy.thinness_samples if policy.thinness_samples
                   is not None else policy.samples)
    slim2 = ins2 = thn2 = 0
    wit = triples[0] if triples else (0, 0, 0)
    for i, (a, b, c) in enumerate(triples):
        s2, i2, t2 = triangle_measurements(g, a, b, c,
                                           with_thinness=i < thin_budget)
        if s2 > slim2:
            slim2, wit = s2, (a, b, c)
        ins2 = max(ins2, i2)
        thn2 = max(thn2, t2)
    return slim2, ins2, thn2, wit, len(triples)


# ---------------------------------------------------------------------
# slim delta: exact mode (all triangles, all geodesic choices)
# ---------------------------------------------------------------------

class _AllChoiceData:
    """Shortest-path interval structure for the exact measurement.

    For every vertex pair we hold the interval DAG and, via a DP over it,
    the quantity max over geodesics sigma of d2(p, sigma) for every
    half-point p of the graph.  Maximizing the slimness defect over all
    geodesic choices then never enumerates individual geodesics.
    """

    def __init__(self, g: Graph):
        self.g = g
        n = g.n
        self.D = np.asarray(g.oracle.all_pairs(), dtype=np.int64)
        edges = list(g.edges())
        self.edge_id = {e: n + i for i, e in enumerate(edges)}
        P = np.empty((n + len(edges), 2), dtype=np.int64)
        P[:n, 0] = P[:n, 1] = np.arange(n)
        for i, (u, v) in enumerate(edges):
            P[n + i] = (u, v)
        self.points = P
        self.np_all = len(P)
        self._interval: dict[tuple[int, int], dict] = {}
        self._mx: dict[tuple[int, int], np.ndarray] = {}
        # doubled distance from every half-point to every vertex
        Du = self.D[P[:, 0], :]
        Dv = self.D[P[:, 1], :]
        half = (P[:, 0] != P[:, 1]).astype(np.int64)[:, None]
        self.d2_to_vertex = 2 * np.minimum(Du, Dv) + half  # (P, n)

    def d2_to_point(self, pid_rows: np.ndarray, q: tuple[int, int]) -> np.ndarray:
        """d2 from the half-points in ``pid_rows`` to half-point q."""
        if q[0] == q[1]:
            return self.d2_to_vertex[pid_rows, q[0]]
        base = np.minimum(self.d2_to_vertex[pid_rows, q[0]],
                          self.d2_to_vertex[pid_rows, q[1]]) + 1
        # identical-midpoint correction
        qid = self.edge_id[(q[0], q[1])]
        base = base.copy()
        base[pid_rows == qid] = 0
        return base

    def interval(self, u: int, v: int) -> dict:
        key = (min(u, v), max(u, v))
        itv = self._interval.get(key)
        if itv is not None:
            return itv
        u0, v0 = key
        g, D = self.g, self.D
        L = int(D[u0, v0])
        ru, rv = D[u0], D[v0]
        nodes = np.flatnonzero(ru + rv == L)
        onit = np.zeros(g.n, dtype=bool)
        onit[nodes] = True
        dag = []   # (w, w2, edge_point_id) with ru[w2] == ru[w]+1
        for w in nodes:
            for w2 in g.neighbors(int(w)):
                w2 = int(w2)
                if onit[w2] and ru[w2] == ru[w] + 1:
                    e = (min(int(w), w2), max(int(w), w2))
                    dag.append((int(w), w2, self.edge_id[e]))
        pid = list(nodes)
        arc2 = list(2 * ru[nodes])
        for (w, w2, eid) in dag:
            pid.append(eid)
            arc2.append(2 * ru[w] + 1)
        itv = {
            "key": key, "L": L,
            "nodes": nodes, "ru": ru,
            "dag": sorted(dag, key=lambda t: (ru[t[0]], t[0], t[1])),
            "pids": np.asarray(pid, dtype=np.int64),
            "arc2": np.asarray(arc2, dtype=np.int64),
        }
        self._interval[key] = itv
        return itv

    def max_dist_to_geodesics(self, u: int, v: int) -> np.ndarray:
        """Array over all half-points p of
        max over geodesics sigma(u,v) of d2(p, sigma)."""
        key = (min(u, v), max(u, v))
        got = self._mx.get(key)
        if got is not None:
            return got
        itv = self.interval(*key)
        u0, v0 = key
        allp = np.arange(self.np_all)
        best = {int(u0): self.d2_to_vertex[:, u0].copy()}
        order = sorted(itv["nodes"], key=lambda w: (itv["ru"][w], w))
        for w in order:
            w = int(w)
            if w not in best:
                continue
            bw = best[w]
            for (a, b, eid) in itv["dag"]:
                if a != w:
                    continue
                mid = self.d2_to_point(allp, (self.points[eid][0],
                                              self.points[eid][1]))
                cand = np.minimum(np.minimum(bw, mid),
                                  self.d2_to_vertex[:, b])
                if b in best:
                    np.maximum(best[b], cand, out=best[b])
                else:
                    best[b] = cand.copy()
        out = best[int(v0)]
        self._mx[key] = out
        return out

    def slice_points(self, u: int, v: int, t2_from_u: int) -> np.ndarray:
        """Half-point ids lying at doubled arc t2 (from u) on some
        geodesic u -> v."""
        itv = self.interval(u, v)
        arc2 = itv["arc2"]
        if u > v:  # interval arcs are measured from min(u, v)
            arc2 = 2 * itv["L"] - arc2
        return itv["pids"][arc2 == t2_from_u]


def _exact_slim(g: Graph):
    data = _AllChoiceData(g)
    n = g.n
    D = data.D
    slim2 = ins2 = thn2 = 0
    wit = (0, 1, 2) if n >= 3 else (0, 0, 0)
    mx = data.max_dist_to_geodesics
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                # slimness over all choices, all three side assignments
                val = 0
                for (p1, p2), opp in (((a, b), c), ((a, c), b), ((b, c), a)):
                    pids = data.interval(p1, p2)["pids"]
                    m1 = mx(p1, opp)[pids]
                    m2 = mx(p2, opp)[pids]
                    val = max(val, int(np.minimum(m1, m2).max()))
                if val > slim2:
                    slim2, wit = val, (a, b, c)
                # insize over all choices
                dab, dac, dbc = int(D[a, b]), int(D[a, c]), int(D[b, c])
                rho_a, rho_b = dab + dac - dbc, dab + dbc - dac
                s_ab = data.slice_points(a, b, rho_a)
                s_ac = data.slice_points(a, c, rho_a)
                s_bc = data.slice_points(b, c, rho_b)
                for S, T in ((s_ab, s_ac), (s_ab, s_bc), (s_ac, s_bc)):
                    ins2 = max(ins2, _max_d2_between(data, S, T))
                # thinness over all choices, each corner
                for (x, s1, s2, rho) in (
                    (a, (a, b), (a, c), rho_a),
                    (b, (b, a), (b, c), rho_b),
                    (c, (c, a), (c, b), dac + dbc - dab),
                ):
                    for t2 in range(rho + 1):
                        S = data.slice_points(*s1, t2)
                        T = data.slice_points(*s2, t2)
                        thn2 = max(thn2, _max_d2_between(data, S, T))
    return slim2, ins2, thn2, wit, n * (n - 1) * (n - 2) // 6


def _max_d2_between(data: _AllChoiceData, S: np.ndarray, T: np.ndarray) -> int:
    if len(S) == 0 or len(T) == 0:
        return 0
    best = 0
    for q in T:
        qpt = (int(data.points[q][0]), int(data.points[q][1]))
        best = max(best, int(data.d2_to_point(S, qpt).max()))
    return best


def delta_slim(g: Graph, policy: TrianglePolicy | None = None
               ) -> HyperbolicityReport:
    """Slimness constant of the graph with the policy's triangle set;
    the report also carries the (faster) four-point constant."""
    policy = policy or TrianglePolicy()
    mode = policy.mode
    if mode == "auto":
        mode = "exact" if g.n <= policy.exact_threshold else "sampled"
    if mode == "exact":
        slim2, ins2, thn2, wit, cnt = _exact_slim(g)
    else:
        slim2, ins2, thn2, wit, cnt = _sampled_slim(g, policy)
    d4, wit4, mode4 = delta_four_point(g, seed=policy.seed)
    return HyperbolicityReport(
        delta_slim=slim2 / 2,
        delta_four_point=d4,
        insize_max=ins2 / 2,
        thinness_max=thn2 / 2,
        witness_triangle=wit,
        witness_quadruple=wit4,
        mode=f"{mode}+{mode4}",
        seed=policy.seed,
        triangles_checked=cnt,
    )
