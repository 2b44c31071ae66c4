"""Metric graph bundles: representation, axiom checking, properness.

A bundle is a simplicial surjection proj from a total graph onto a base
graph whose fibers are connected and uniformly properly embedded, with a
cross edge from every fiber vertex into each neighboring fiber.  The
constant K = f(4) extracted from the properness function controls the
fiber-to-fiber transition maps.
"""

from __future__ import annotations

import dataclasses
import json
import threading
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .graph import Graph, GraphError, dump_graph


class BundleError(ValueError):
    """A bundle axiom failed; carries the axiom name and a witness."""

    def __init__(self, axiom: str, witness, message: str):
        super().__init__(f"{axiom}: {message}")
        self.axiom = axiom
        self.witness = witness


def _neighbor_proj_segments(g: Graph, proj: np.ndarray):
    """(flat neighbor-projection array, indptr) aligned with g's CSR."""
    return proj[g.indices], g.indptr


def first_neighbor_in_fiber(g: Graph, verts: np.ndarray, proj: np.ndarray,
                            target_b: int) -> np.ndarray:
    """For each v in verts: lowest-id neighbor with proj == target_b, else -1.

    Vectorized over the CSR structure; neighbor lists are sorted so the
    first hit is the lowest id.
    """
    nproj, indptr = _neighbor_proj_segments(g, proj)
    starts = indptr[verts]
    ends = indptr[verts + 1]
    counts = (ends - starts).astype(np.int64)
    total = int(counts.sum())
    out = np.full(len(verts), -1, dtype=np.int64)
    if total == 0:
        return out
    take = np.repeat(starts.astype(np.int64), counts)
    bump = np.ones(total, dtype=np.int64)
    cuts = np.cumsum(counts)[:-1]
    bump[0] = 0
    if len(cuts):
        bump[cuts] = 1 - counts[:-1]
    take = take + np.cumsum(bump)
    hit = nproj[take] == target_b
    owner = np.repeat(np.arange(len(verts)), counts)
    idx = np.flatnonzero(hit)
    if len(idx) == 0:
        return out
    own = owner[idx]
    first = np.full(len(verts), -1, dtype=np.int64)
    # first occurrence per owner: reversed assignment keeps the earliest
    first[own[::-1]] = idx[::-1]
    got = first >= 0
    out[got] = g.indices[take[first[got]]]
    return out


class MetricGraphBundle:
    """Validated metric graph bundle. Immutable and shareable."""

    def __init__(self, total: Graph, base: Graph, proj: np.ndarray,
                 meta: dict | None = None,
                 flagged_total: np.ndarray | None = None,
                 flagged_base: np.ndarray | None = None):
        self.total = total
        self.base = base
        self.proj = np.ascontiguousarray(proj, dtype=np.int64)
        self.proj.setflags(write=False)
        self.meta = dict(meta or {})
        self.flagged_total = (np.zeros(total.n, dtype=bool)
                              if flagged_total is None else flagged_total)
        self.flagged_base = (np.zeros(base.n, dtype=bool)
                             if flagged_base is None else flagged_base)
        order = np.argsort(self.proj, kind="stable")
        splits = np.searchsorted(self.proj[order], np.arange(base.n + 1))
        self.fibers = [np.sort(order[splits[b]:splits[b + 1]])
                       for b in range(base.n)]
        self._fiber_graphs: dict[int, tuple[Graph, np.ndarray]] = {}
        self._transitions: dict[tuple[int, int], np.ndarray] = {}
        self._lock = threading.Lock()

    # -- fibers ---------------------------------------------------------

    def fiber(self, b: int) -> np.ndarray:
        return self.fibers[self.base.check_vertex(b)]

    def fiber_graph(self, b: int) -> tuple[Graph, np.ndarray]:
        """(fiber as a Graph with local ids, local->total vertex map)."""
        b = self.base.check_vertex(b)
        got = self._fiber_graphs.get(b)
        if got is None:
            with self._lock:
                got = self._fiber_graphs.get(b)
                if got is None:
                    got = self.total.induced(self.fibers[b])
                    self._fiber_graphs[b] = got
        return got

    def to_local(self, b: int, total_vertex: int) -> int:
        verts = self.fibers[b]
        i = int(np.searchsorted(verts, total_vertex))
        if i >= len(verts) or verts[i] != total_vertex:
            raise BundleError("fiber-membership", total_vertex,
                              f"vertex {total_vertex} not in fiber over {b}")
        return i

    def fiber_distance(self, b: int, x: int, y: int) -> int:
        """Intrinsic fiber distance between total vertices x, y in F_b."""
        fg, _ = self.fiber_graph(b)
        return fg.distance(self.to_local(b, x), self.to_local(b, y))

    def fiber_geodesic(self, b: int, x: int, y: int) -> list[int]:
        """Canonical fiber geodesic between total vertices, as total ids."""
        fg, verts = self.fiber_graph(b)
        lp = fg.geodesic(self.to_local(b, x), self.to_local(b, y))
        return [int(verts[i]) for i in lp]

    # -- transitions -----------------------------------------------------

    def transition(self, b1: int, b2: int) -> np.ndarray:
        """Fiber map F_b1 -> F_b2 (arrays of total ids, aligned with
        fibers[b1]): each vertex goes to its lowest-id neighbor in F_b2."""
        key = (int(b1), int(b2))
        got = self._transitions.get(key)
        if got is not None:
            return got
        if self.base.distance(b1, b2) != 1:
            raise BundleError("transition", key,
                              f"base vertices {b1},{b2} not adjacent")
        img = first_neighbor_in_fiber(self.total, self.fibers[b1],
                                      self.proj, int(b2))
        if (img < 0).any():
            w = int(self.fibers[b1][int(np.flatnonzero(img < 0)[0])])
            raise BundleError("2(i)", w,
                              f"vertex {w} has no neighbor in fiber {b2}")
        img.setflags(write=False)
        with self._lock:
            self._transitions[key] = img
        return img

    def transition_along_geodesic(self, w: int, z: int) -> np.ndarray:
        """Composition of transitions along the canonical base geodesic
        w -> z; array over fibers[w] of total ids in F_z.

        The composed map moves every vertex at most d_base(w, z) in the
        total graph: each hop crosses exactly one edge.
        """
        path = self.base.geodesic(w, z)
        cur = self.fibers[path[0]].copy()
        for b1, b2 in zip(path, path[1:]):
            tr = self.transition(b1, b2)
            pos = np.searchsorted(self.fibers[b1], cur)
            cur = tr[pos]
        return cur

    # -- serialization ----------------------------------------------------

    def save(self, path: str, sidecar: bool = True) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# bundlekit bundle file\n")
            fh.write(dump_graph(self.total))
            fh.write("FIBER\n")
            for x in range(self.total.n):
                fh.write(f"{x} {int(self.proj[x])}\n")
            fh.write("BASE\n")
            fh.write(dump_graph(self.base))
        if sidecar:
            side = {
                "meta": self.meta,
                "flags_total": [int(i) for i in
                                np.flatnonzero(self.flagged_total)],
                "flags_base": [int(i) for i in
                               np.flatnonzero(self.flagged_base)],
                "labels_total": _labels_json(self.total.labels),
                "labels_base": _labels_json(self.base.labels),
            }
            with open(path + ".json", "w", encoding="utf-8") as fh:
                json.dump(side, fh, sort_keys=True)
                fh.write("\n")


def _labels_json(labels):
    if labels is None:
        return None
    return [list(l) if isinstance(l, tuple) else l for l in labels]


def load_bundle(path: str) -> MetricGraphBundle:
    sections = {"EDGES": [], "FIBER": [], "BASE": []}
    current = "EDGES"
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line in ("FIBER", "BASE"):
                current = line
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"malformed bundle line: {raw.rstrip()!r}")
            sections[current].append((int(parts[0]), int(parts[1])))
    total = Graph.from_edges(sections["EDGES"])
    base = Graph.from_edges(sections["BASE"])
    proj = np.full(total.n, -1, dtype=np.int64)
    for x, b in sections["FIBER"]:
        proj[x] = b
    if (proj < 0).any():
        x = int(np.flatnonzero(proj < 0)[0])
        raise BundleError("projection", x, f"vertex {x} missing FIBER entry")
    meta, ft, fb = {}, None, None
    try:
        with open(path + ".json", "r", encoding="utf-8") as fh:
            side = json.load(fh)
        meta = side.get("meta", {})
        ft = np.zeros(total.n, dtype=bool)
        ft[side.get("flags_total", [])] = True
        fb = np.zeros(base.n, dtype=bool)
        fb[side.get("flags_base", [])] = True
        if side.get("labels_total") is not None:
            total.labels = [tuple(l) if isinstance(l, list) else l
                            for l in side["labels_total"]]
        if side.get("labels_base") is not None:
            base.labels = [tuple(l) if isinstance(l, list) else l
                           for l in side["labels_base"]]
    except FileNotFoundError:
        pass
    return verify_bundle(total, base, proj, meta=meta,
                         flagged_total=ft, flagged_base=fb)


# ---------------------------------------------------------------------
# axiom verification
# ---------------------------------------------------------------------

def verify_bundle(total: Graph, base: Graph, proj, meta: dict | None = None,
                  flagged_total=None, flagged_base=None) -> MetricGraphBundle:
    """Check the bundle axioms; raise BundleError with a witness on failure.

    Axioms: proj surjective and simplicial; every fiber nonempty and
    connected; over every base edge, every fiber vertex has a cross edge
    into the opposite fiber (both directions).
    """
    proj = np.ascontiguousarray(proj, dtype=np.int64)
    if len(proj) != total.n:
        raise BundleError("projection", None,
                          f"proj has {len(proj)} entries for {total.n} vertices")
    if proj.min(initial=0) < 0 or proj.max(initial=-1) >= base.n:
        x = int(np.flatnonzero((proj < 0) | (proj >= base.n))[0])
        raise BundleError("projection", x,
                          f"proj[{x}]={proj[x]} outside base vertex range")
    present = np.zeros(base.n, dtype=bool)
    present[proj] = True
    if not present.all():
        b = int(np.flatnonzero(~present)[0])
        raise BundleError("fiber-empty", b, f"no vertex over base vertex {b}")
    # simplicial: total edges map to base edges or collapse
    pu = proj[np.repeat(np.arange(total.n), np.diff(total.indptr))]
    pv = proj[total.indices]
    differ = pu != pv
    if differ.any():
        du = pu[differ]
        dv = pv[differ]
        bm = base.dmat(np.unique(np.concatenate([du, dv])))
        lookup = {int(v): i for i, v in
                  enumerate(np.unique(np.concatenate([du, dv])))}
        for a, b in zip(du, dv):
            if bm[lookup[int(a)], lookup[int(b)]] != 1:
                bad = np.flatnonzero((pu == a) & (pv == b) & differ)[0]
                x = int(np.searchsorted(total.indptr, bad, side="right") - 1)
                raise BundleError(
                    "simplicial", (x, int(total.indices[bad])),
                    f"edge maps to non-edge ({int(a)}, {int(b)}) in base")
    bundle = MetricGraphBundle(total, base, proj, meta=meta,
                               flagged_total=flagged_total,
                               flagged_base=flagged_base)
    for b in range(base.n):
        verts = bundle.fibers[b]
        if not total.is_connected_subset(verts):
            raise BundleError("fiber-connected", b,
                              f"fiber over {b} induces a disconnected subgraph")
    for b1 in range(base.n):
        for b2 in base.neighbors(b1):
            img = first_neighbor_in_fiber(total, bundle.fibers[b1], proj,
                                          int(b2))
            if (img < 0).any():
                w = int(bundle.fibers[b1][int(np.flatnonzero(img < 0)[0])])
                raise BundleError(
                    "2(i)", w,
                    f"vertex {w} over {b1} has no edge into fiber over {int(b2)}")
    return bundle


# ---------------------------------------------------------------------
# properness
# ---------------------------------------------------------------------

@dataclasses.dataclass
class PropernessProfile:
    """Table f with: same-fiber pairs at total distance <= N are at fiber
    distance <= f(N).  K = f(4) is the transition quasi-isometry constant."""
    f: np.ndarray            # f[N] for N = 0..cap
    exact: bool
    pairs_seen: int

    @property
    def K(self) -> int:
        return self.f_of(4)

    def f_of(self, N) -> int:
        N = int(np.ceil(N))
        if N < 0:
            return 0
        if N >= len(self.f):
            return int(self.f[-1])  # monotone extension past observed range
        return int(self.f[N])

    def g_of(self, C) -> int:
        """Quasi-isometry constant for fiber maps displacing at most C in
        the total space: K + 2 f(C + 2)."""
        return self.K + 2 * self.f_of(C + 2)

    def mu_of(self, k, N) -> float:
        """Bounded-flaring ceiling g(2k)^N."""
        return float(self.g_of(2 * k)) ** int(N)

    def to_json(self):
        return {"f": [int(v) for v in self.f], "K": self.K,
                "exact": self.exact, "pairs": self.pairs_seen}


def measure_properness(bundle: MetricGraphBundle,
                       exact_fiber_cap: int = 500,
                       sample_pairs: int = 2000,
                       seed: int = 0) -> PropernessProfile:
    """Empirical properness function of the bundle.

    Exhausts all same-fiber pairs on fibers up to ``exact_fiber_cap``
    vertices, samples pairs on larger ones.  f(N) is the running max of
    fiber distance over pairs with total distance <= N, so the defining
    implication holds exactly on every scanned pair by construction.
    """
    g = bundle.total
    rng = np.random.default_rng(seed)
    buckets: dict[int, int] = {}
    pairs_seen = 0
    exact = True
    for b in range(bundle.base.n):
        verts = bundle.fibers[b]
        m = len(verts)
        if m <= 1:
            continue
        fg, _ = bundle.fiber_graph(b)
        if m <= exact_fiber_cap:
            sources = np.arange(m)
        else:
            exact = False
            nsrc = max(2, min(m, sample_pairs // 8))
            sources = np.sort(rng.choice(m, size=nsrc, replace=False))
        for i in sources:
            trow = _kernels.bfs_row(g.indptr, g.indices, int(verts[i]))
            frow = fg.dist_row(int(i))
            dt = trow[verts]
            for j in range(m):
                if j == int(i):
                    continue
                key = int(dt[j])
                fv = int(frow[j])
                if fv > buckets.get(key, -1):
                    buckets[key] = fv
                pairs_seen += 1
    cap = max(buckets.keys(), default=0)
    f = np.zeros(cap + 1, dtype=np.int64)
    run = 0
    for N in range(cap + 1):
        run = max(run, buckets.get(N, 0))
        f[N] = run
    return PropernessProfile(f=f, exact=exact, pairs_seen=pairs_seen)


# ---------------------------------------------------------------------
# fiber transitions with measured constants
# ---------------------------------------------------------------------

@dataclasses.dataclass
class FiberTransition:
    b1: int
    b2: int
    image: np.ndarray        # total ids, aligned with fibers[b1]
    k: float                 # measured qi constant, grid value
    eps: float

    def to_json(self):
        return {"b1": self.b1, "b2": self.b2, "k": self.k, "eps": self.eps}


def fiber_transition(bundle: MetricGraphBundle, b1: int, b2: int,
                     pair_cap: int = 400, seed: int = 0) -> FiberTransition:
    """Lowest-id-neighbor fiber map with measured quasi-isometry constants.

    The measured (k, eps) is the minimal grid pair with
    d2(phi x, phi y) <= k d1(x, y) + eps and d1(x, y) <= k d2 + eps over
    the scanned pairs (all pairs on small fibers, sampled above pair_cap
    sources).
    """
    from .hyperbolicity import EPS_GRID, K_GRID

    img = bundle.transition(b1, b2)
    f1, v1 = bundle.fiber_graph(b1)
    f2, _ = bundle.fiber_graph(b2)
    m = len(v1)
    rng = np.random.default_rng(seed)
    sources = (np.arange(m) if m <= pair_cap
               else np.sort(rng.choice(m, size=pair_cap, replace=False)))
    img_local = np.array([bundle.to_local(b2, int(t)) for t in img],
                         dtype=np.int64)
    worst_hi = 0.0
    worst_lo = 0.0
    kbest, ebest = K_GRID[-1], float(EPS_GRID[-1])
    d1_rows = {int(i): f1.dist_row(int(i)) for i in sources}
    d2_rows = {int(i): f2.dist_row(int(img_local[i])) for i in sources}
    for k in K_GRID:
        need = 0.0
        ok = True
        for i in sources:
            d1 = d1_rows[int(i)].astype(float)
            d2v = d2_rows[int(i)][img_local].astype(float)
            need = max(need, float((d2v - k * d1).max()),
                       float((d1 - k * d2v).max()))
            if need > EPS_GRID[-1]:
                ok = False
                break
        if ok:
            kbest, ebest = float(k), float(np.ceil(max(0.0, need) - 1e-12))
            break
    return FiberTransition(int(b1), int(b2), img, kbest, max(0.0, ebest))


# ---------------------------------------------------------------------
# net approximation of a sampled metric bundle
# ---------------------------------------------------------------------

@dataclasses.dataclass
class MetricSample:
    """Finite sample of a metric bundle, ready for net approximation.

    d_total is the ambient metric; base_val[i] is the projection of point
    i into a base metric space with metric d_base; d_fiber gives the
    intrinsic fiber metric between points with equal base_val (defaults
    to d_total).  Optional fast-path hints:

    * fiber_coord: 1-D intrinsic coordinate within each fiber (points of
      a fiber sorted by it), enabling O(m) fiber nets and windowed edges;
    * cross_window(bv1, bv2, thr): pair (scale, width) such that any
      cross pair within d_total <= thr satisfies
      |coord2 - coord1 * scale| <= width (target-fiber coordinates).
    """
    d_total: Callable[[int, int], float]
    base_val: Sequence[float]
    d_base: Callable[[float, float], float]
    d_fiber: Callable[[int, int], float] | None = None
    labels: Sequence | None = None
    fiber_coord: Sequence[float] | None = None
    cross_window: Callable[[float, float, float], float] | None = None

    def fiber_dist(self, i: int, j: int) -> float:
        if self.d_fiber is not None:
            return self.d_fiber(i, j)
        return self.d_total(i, j)


def net_approximation(sample: MetricSample, c: float,
                      meta: dict | None = None) -> MetricGraphBundle:
    """Turn a sampled metric bundle into a metric graph bundle.

    Base net: greedy maximal 1-separated subset of the base values (in
    point order), joined when d_base <= 3.  Fiber nets: greedy maximal
    1-separated (intrinsic metric) per fiber, same-fiber edges when the
    intrinsic distance is <= 6c+3, cross edges between adjacent fibers
    when d_total <= 6c+3.  Raises BundleError when a fiber is empty or
    the result violates a bundle axiom (input too sparse).
    """
    if c < 1:
        raise BundleError("net-c", c, "bundle constant c must be >= 1")
    thr = 6.0 * c + 3.0
    base_val = list(sample.base_val)
    m = len(base_val)
    # base net, greedy in point order over distinct base values
    net_vals: list[float] = []
    for i in range(m):
        bv = base_val[i]
        if all(sample.d_base(bv, w) >= 1.0 - 1e-9 for w in net_vals):
            net_vals.append(bv)
    nb = len(net_vals)
    base_edges = [(i, j) for i in range(nb) for j in range(i + 1, nb)
                  if sample.d_base(net_vals[i], net_vals[j]) <= 3.0 + 1e-9]
    try:
        base = Graph.from_edges(base_edges, n=nb,
                                labels=[("base", v) for v in net_vals])
    except GraphError as exc:
        raise BundleError("net-base", None,
                          f"base net disconnected: {exc}") from exc
    # assign points to nearest net value
    assign = np.empty(m, dtype=np.int64)
    for i in range(m):
        dists = [sample.d_base(base_val[i], w) for w in net_vals]
        assign[i] = int(np.argmin(dists))
    # fiber nets, greedy per fiber in point order
    fiber_points: list[list[int]] = [[] for _ in range(nb)]
    for b in range(nb):
        members = np.flatnonzero(assign == b)
        if len(members) == 0:
            raise BundleError("net-fiber-empty", b,
                              f"no sample point assigned to net vertex {b}")
        if sample.fiber_coord is not None:
            coord = np.asarray(sample.fiber_coord, dtype=float)[members]
            order = np.argsort(coord, kind="stable")
            last = None
            for i in order:
                if last is None or coord[i] - last >= 1.0 - 1e-9:
                    fiber_points[b].append(int(members[i]))
                    last = coord[i]
        else:
            for i in members:
                i = int(i)
                if all(sample.fiber_dist(i, j) >= 1.0 - 1e-9
                       for j in fiber_points[b]):
                    fiber_points[b].append(i)
    # vertex numbering: fibers in base order, points in chosen order
    vid = {}
    labels = []
    proj = []
    for b in range(nb):
        for i in fiber_points[b]:
            vid[i] = len(labels)
            labels.append(sample.labels[i] if sample.labels is not None else i)
            proj.append(b)
    edges = []
    # same-fiber edges (intrinsic metric)
    for b in range(nb):
        pts = fiber_points[b]
        if sample.fiber_coord is not None:
            coord = np.asarray(sample.fiber_coord, dtype=float)
            for ii in range(len(pts)):
                for jj in range(ii + 1, len(pts)):
                    if coord[pts[jj]] - coord[pts[ii]] > thr + 1e-9:
                        break
                    if sample.fiber_dist(pts[ii], pts[jj]) <= thr + 1e-9:
                        edges.append((vid[pts[ii]], vid[pts[jj]]))
        else:
            for ii in range(len(pts)):
                for jj in range(ii + 1, len(pts)):
                    if sample.fiber_dist(pts[ii], pts[jj]) <= thr + 1e-9:
                        edges.append((vid[pts[ii]], vid[pts[jj]]))
    # cross edges between adjacent fibers (ambient metric)
    for b1, b2 in base.edges():
        p1, p2 = fiber_points[b1], fiber_points[b2]
        if sample.fiber_coord is not None and sample.cross_window is not None:
            coord = np.asarray(sample.fiber_coord, dtype=float)
            scale, width = sample.cross_window(net_vals[b1], net_vals[b2], thr)
            c2 = coord[np.asarray(p2)]
            for i in p1:
                center = coord[i] * scale
                lo = np.searchsorted(c2, center - width)
                hi = np.searchsorted(c2, center + width, side="right")
                for jj in range(int(lo), int(hi)):
                    if sample.d_total(i, p2[jj]) <= thr + 1e-9:
                        edges.append((vid[i], vid[p2[jj]]))
        else:
            for i in p1:
                for j in p2:
                    if sample.d_total(i, j) <= thr + 1e-9:
                        edges.append((vid[i], vid[j]))
    try:
        total = Graph.from_edges(edges, n=len(labels), labels=labels)
    except GraphError as exc:
        raise BundleError("net-sparse", None,
                          f"net graph invalid (input too sparse?): {exc}") from exc
    meta = dict(meta or {})
    meta.update({"net_c": c, "net_threshold_fiber": thr,
                 "net_threshold_base": 3.0})
    return verify_bundle(total, base, np.asarray(proj), meta=meta)
