"""Ladders between qi-sections, coarse retractions, tripods, path
families, and the discrete path-family hyperbolicity criterion.

A ladder is the union over base vertices of the canonical fiber geodesic
("rung") joining two section values.  Its L-neighborhood is the connected
carrier on which geodesics and retractions live.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import _kernels
from .bundle import BundleError, MetricGraphBundle
from .graph import Graph
from .hyperbolicity import dist_to_set
from .sections import (Section, barycenter_flow_section,
                       measure_section_quality, project_section_into_ladder)


# ---------------------------------------------------------------------
# ladders
# ---------------------------------------------------------------------

class Ladder:
    def __init__(self, bundle: MetricGraphBundle, s1: Section, s2: Section,
                 L: int, rungs: list[list[int]], meta: dict):
        self.bundle = bundle
        self.s1 = s1
        self.s2 = s2
        self.L = L
        self.rungs = rungs
        self.meta = meta
        self.vertex_set = np.unique(np.concatenate(
            [np.asarray(r, dtype=np.int64) for r in rungs]))
        row = dist_to_set(bundle.total, self.vertex_set)
        self.cl_set = np.flatnonzero((row >= 0) & (row <= L))
        self._rung_pos = None
        self._retraction = None
        self._cl_graph = None

    def rung_position(self, b: int, total_vertex: int) -> int:
        if self._rung_pos is None:
            self._rung_pos = [
                {int(v): i for i, v in enumerate(r)} for r in self.rungs]
        pos = self._rung_pos[b].get(int(total_vertex))
        if pos is None:
            raise BundleError("ladder", total_vertex,
                              f"vertex {total_vertex} not on the rung over {b}")
        return pos

    def girth(self) -> int:
        return min(len(r) - 1 for r in self.rungs)

    def girth_witness(self) -> tuple[int, int]:
        vals = [len(r) - 1 for r in self.rungs]
        b = int(np.argmin(vals))
        return vals[b], b

    def cl_graph(self) -> tuple[Graph, np.ndarray]:
        if self._cl_graph is None:
            self._cl_graph = self.bundle.total.induced(self.cl_set)
        return self._cl_graph

    def geodesic_in_cl(self, x: int, y: int) -> list[int]:
        """Canonical geodesic from x to y inside the L-neighborhood
        (masked BFS; same lowest-neighbor backtracking rule)."""
        g = self.bundle.total
        mask = np.zeros(g.n, dtype=np.uint8)
        mask[self.cl_set] = 1
        row = _kernels.bfs_masked(g.indptr, g.indices, int(x), mask)
        if row[y] < 0:
            raise BundleError("ladder", (x, y),
                              "endpoints not connected inside the carrier")
        path = [int(y)]
        cur = int(y)
        while cur != x:
            want = row[cur] - 1
            nbrs = g.neighbors(cur)
            cand = nbrs[(mask[nbrs] == 1) & (row[nbrs] == want)]
            cur = int(cand[0])
            path.append(cur)
        path.reverse()
        return path

    # -- coarse Lipschitz retraction ----------------------------------

    def retraction_all(self) -> np.ndarray:
        """Fiberwise nearest-rung-point (lowest-id tie) for every total
        vertex; idempotent on ladder points by construction."""
        if self._retraction is not None:
            return self._retraction
        bundle = self.bundle
        out = np.full(bundle.total.n, -1, dtype=np.int64)
        for b in range(bundle.base.n):
            fg, verts = bundle.fiber_graph(b)
            targets = np.searchsorted(verts,
                                      np.asarray(self.rungs[b], dtype=np.int64))
            labels = _nearest_source_labels(fg, np.sort(targets))
            out[verts] = verts[labels]
        self._retraction = out
        return out

    def retraction(self, x: int) -> int:
        return int(self.retraction_all()[self.bundle.total.check_vertex(x)])


def _nearest_source_labels(fg: Graph, sources: np.ndarray) -> np.ndarray:
    """For every vertex, the lowest-id source among its nearest sources."""
    dist = dist_to_set(fg, sources)
    labels = np.full(fg.n, fg.n + 1, dtype=np.int64)
    labels[sources] = sources
    order = np.argsort(dist, kind="stable")
    for v in order:
        v = int(v)
        if dist[v] == 0:
            continue
        nbrs = fg.neighbors(v)
        closer = nbrs[dist[nbrs] == dist[v] - 1]
        labels[v] = labels[closer].min()
    return labels


def build_ladder(bundle: MetricGraphBundle, s1: Section, s2: Section,
                 L: int) -> Ladder:
    """Ladder between two sections with a connected L-neighborhood.

    L is raised to the smallest value making the neighborhood connected
    (a disconnected carrier cannot hold geodesics); raises are logged in
    meta["l_raised_from"].
    """
    s1.validate(bundle)
    s2.validate(bundle)
    rungs = [bundle.fiber_geodesic(b, int(s1.values[b]), int(s2.values[b]))
             for b in range(bundle.base.n)]
    meta: dict = {}
    L0 = L
    while True:
        lad = Ladder(bundle, s1, s2, L, rungs, meta)
        if bundle.total.is_connected_subset(lad.cl_set):
            break
        L += 1
    if L != L0:
        meta["l_raised_from"] = L0
        lad.meta = meta
    return lad


def retraction_lipschitz(ladder: Ladder, sample_edges: int = 4000,
                         seed: int = 0) -> dict:
    """Measured coarse-Lipschitz constant of the retraction: max over
    (sampled) total-graph edges of the distance between the images."""
    g = ladder.bundle.total
    pi = ladder.retraction_all()
    heads = np.repeat(np.arange(g.n), np.diff(g.indptr))
    tails = g.indices
    keep = heads < tails
    heads, tails = heads[keep], tails[keep]
    m = len(heads)
    if m > sample_edges:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(m, size=sample_edges, replace=False))
        heads, tails = heads[idx], tails[idx]
    worst = 0
    witness = None
    rows: dict[int, np.ndarray] = {}
    for u, v in zip(heads, tails):
        a, b = int(pi[u]), int(pi[v])
        if a == b:
            continue
        row = rows.get(a)
        if row is None:
            row = g.dist_row(a)
            rows[a] = row
        d = int(row[b])
        if d > worst:
            worst, witness = d, (int(u), int(v))
    return {"lipschitz": worst, "witness": witness,
            "edges_checked": int(len(heads)), "exact": m <= sample_edges}


# ---------------------------------------------------------------------
# in-ladder section factory
# ---------------------------------------------------------------------

def in_ladder_section(bundle: MetricGraphBundle, ladder: Ladder,
                      x: int) -> Section:
    """The one factory used for every "qi section through a point inside a
    ladder": barycenter flow through x, projected fiberwise onto the
    rungs, with the value over proj(x) patched back to x when x is on the
    ladder."""
    s = project_section_into_ladder(
        bundle, ladder, barycenter_flow_section(bundle, x))
    b = int(bundle.proj[x])
    if int(x) in (int(v) for v in ladder.rungs[b]):
        s.values[b] = int(x)
    s.meta["through"] = int(x)
    return s


def section_girth(bundle: MetricGraphBundle, s1: Section, s2: Section
                  ) -> tuple[int, int]:
    """(min over base vertices of fiberwise distance, witness vertex)."""
    best, wb = None, -1
    for b in range(bundle.base.n):
        d = bundle.fiber_distance(b, int(s1.values[b]), int(s2.values[b]))
        if best is None or d < best:
            best, wb = d, b
    return int(best), wb


# ---------------------------------------------------------------------
# ladder decomposition
# ---------------------------------------------------------------------

@dataclasses.dataclass
class DecompositionRecord:
    sections: list[Section]
    footpoints: list[int]           # anchor-rung arc positions
    girths: list[int]               # d_h between consecutive sections
    threshold: int
    anchor: int                     # anchor base vertex
    type2: list[dict]
    monotone_scan: dict | None = None

    def to_json(self):
        return {"footpoints": self.footpoints, "girths": self.girths,
                "threshold": self.threshold, "anchor": self.anchor,
                "type2": [{k: v for k, v in t.items() if k != "section"}
                          for t in self.type2]}


def decompose_ladder(ladder: Ladder, A: int | None = None,
                     flare_threshold: int | None = None,
                     factory=None) -> DecompositionRecord:
    """Split the ladder into subladders of girth about A by sections
    through anchor-rung points.

    The anchor is the longest rung (lowest base vertex on ties).  From
    each section the next footpoint is the largest rung position whose
    through-section stays A-close (girth) to the current one; when the
    next section is strictly farther than A a type-2 step is recorded
    with the intermediate witness section.  Advancement uses binary
    search on the footpoint (girth along the rung is coarsely monotone;
    any observed non-monotonicity is logged and corrected to the true
    maximum among evaluated points).

    Default threshold: max(girth + 2, M + 1) with M = ``flare_threshold``
    (the flaring girth scale when available, else the girth).
    """
    bundle = ladder.bundle
    g0 = ladder.girth()
    if A is None:
        M = g0 if flare_threshold is None else int(flare_threshold)
        A = max(g0 + 2, M + 1)
    A = int(A)
    if factory is None:
        factory = lambda x: in_ladder_section(bundle, ladder, x)
    lengths = [len(r) - 1 for r in ladder.rungs]
    anchor = int(np.argmax(lengths))
    rung = ladder.rungs[anchor]
    l = len(rung) - 1
    secs = [ladder.s1]
    feet = [0]
    girths: list[int] = []
    type2: list[dict] = []
    monolog: list = []
    memo: dict[int, Section] = {}

    def sec_at(t: int) -> Section:
        if t not in memo:
            memo[t] = factory(int(rung[t]))
        return memo[t]

    evals: dict[int, int] = {}

    def E(t: int, ref: Section) -> int:
        if t not in evals:
            evals[t] = section_girth(bundle, sec_at(t), ref)[0]
        return evals[t]

    while True:
        cur = secs[-1]
        s_i = feet[-1]
        d_end, _ = section_girth(bundle, cur, ladder.s2)
        if d_end <= A or s_i >= l:
            secs.append(ladder.s2)
            feet.append(l)
            girths.append(d_end)
            break
        evals = {}
        lo, hi = s_i + 1, l
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if E(mid, cur) <= A:
                lo = mid
            else:
                hi = mid - 1
        u = lo
        late = [t for t, v in evals.items() if t > u and v <= A]
        if late:
            monolog.append({"step": len(secs) - 1, "u": u,
                            "late": sorted(late)})
            u = max(late)
        if E(u, cur) == A or u == l:
            nxt_foot = u
        else:
            nxt_foot = min(l, u + 1)
        nxt = sec_at(nxt_foot)
        gh = section_girth(bundle, nxt, cur)[0]
        if gh > A:
            type2.append({"step": len(secs) - 1, "witness_foot": u,
                          "witness_girth": E(u, cur),
                          "section": sec_at(u)})
        secs.append(nxt)
        feet.append(nxt_foot)
        girths.append(gh)
    return DecompositionRecord(secs, feet, girths, A, anchor, type2,
                               {"non_monotone": monolog} if monolog else None)


def check_rung_monotonicity(ladder: Ladder, record: DecompositionRecord
                            ) -> dict:
    """Footpoint order along every rung versus the anchor order.

    Reports the worst inversion (in rung-arc units) and the allowed slack
    4 k^2 from the measured section constants.
    """
    bundle = ladder.bundle
    worst = 0
    witness = None
    for b in range(bundle.base.n):
        pos = [ladder.rung_position(b, int(s.values[b]))
               for s in record.sections]
        for i in range(len(pos) - 1):
            inv = pos[i] - pos[i + 1]
            if inv > worst:
                worst, witness = inv, (b, i)
    kmax = 1.0
    for s in record.sections:
        q = measure_section_quality(bundle, s)
        kmax = max(kmax, q.k, q.eps)
    return {"max_inversion": int(worst), "witness": witness,
            "k": kmax, "slack": 4.0 * kmax * kmax,
            "ok": worst <= 4.0 * kmax * kmax}


# ---------------------------------------------------------------------
# path families
# ---------------------------------------------------------------------

class PathFamily:
    """Base class: memoized discrete paths c(x, y) with segment records."""

    tag = "abstract"

    def __init__(self, domain: np.ndarray):
        self.domain = np.asarray(domain, dtype=np.int64)
        self._memo: dict[tuple[int, int], tuple[list[int], dict]] = {}

    def path(self, x: int, y: int) -> list[int]:
        p, _ = self.path_with_segments(x, y)
        return p

    def path_with_segments(self, x: int, y: int):
        x, y = int(x), int(y)
        if x == y:
            return [x], {"trivial": True}
        key = (min(x, y), max(x, y))
        got = self._memo.get(key)
        if got is None:
            got = self._build(*key)
            self._memo[key] = got
        p, seg = got
        if (x, y) != key:
            p = list(reversed(p))
        return p, seg

    def _build(self, x: int, y: int):
        raise NotImplementedError

    def dump_jsonl(self, pairs) -> str:
        import json
        lines = []
        for x, y in pairs:
            p, seg = self.path_with_segments(int(x), int(y))
            lines.append(json.dumps(
                {"x": int(x), "y": int(y), "path": [int(v) for v in p],
                 "segments": {k: ([int(q) for q in v]
                                  if isinstance(v, (list, tuple)) else v)
                              for k, v in seg.items()}},
                sort_keys=True))
        return "\n".join(lines) + "\n"


def _dedupe(seq):
    out = [seq[0]]
    for v in seq[1:]:
        if v != out[-1]:
            out.append(v)
    return out


class SmallGirthPaths(PathFamily):
    """Paths inside a ladder: climb the section through x to the level
    set where the two through-sections meet, cross the rung there, climb
    back down to y."""

    tag = "small-girth"

    def __init__(self, ladder: Ladder, A: int, factory=None):
        super().__init__(ladder.vertex_set)
        self.ladder = ladder
        self.A = int(A)
        self.bundle = ladder.bundle
        self.factory = factory or (
            lambda x: in_ladder_section(self.bundle, ladder, x))
        self._sections: dict[int, Section] = {}
        self.threshold_log: list[dict] = []

    def section_through(self, x: int) -> Section:
        s = self._sections.get(x)
        if s is None:
            s = self.factory(x)
            self._sections[x] = s
        return s

    def _build(self, x: int, y: int):
        from .sections import level_set

        bundle = self.bundle
        s3 = self.section_through(x)
        s4 = self.section_through(y)
        A = self.A
        U = level_set(bundle, s3, s4, A)
        while len(U) == 0:
            A = max(A + 1, 2 * A)
            self.threshold_log.append({"x": x, "y": y, "raised_to": A})
            U = level_set(bundle, s3, s4, A)
        base = bundle.base
        px, py = int(bundle.proj[x]), int(bundle.proj[y])
        dU = base.dist_row(px)[U]
        b_xy = int(U[int(dU.argmin())])
        lift1 = [int(s3.values[b]) for b in base.geodesic(px, b_xy)]
        lift2 = [int(s4.values[b]) for b in base.geodesic(b_xy, py)]
        p1 = self.ladder.rung_position(b_xy, lift1[-1]) \
            if lift1[-1] in map(int, self.ladder.rungs[b_xy]) else None
        p2 = self.ladder.rung_position(b_xy, lift2[0]) \
            if lift2[0] in map(int, self.ladder.rungs[b_xy]) else None
        if p1 is not None and p2 is not None:
            step = 1 if p2 >= p1 else -1
            rungseg = [int(self.ladder.rungs[b_xy][i])
                       for i in range(p1, p2 + step, step)]
        else:
            rungseg = bundle.fiber_geodesic(b_xy, lift1[-1], lift2[0])
        path = _dedupe(lift1 + rungseg[1:] + lift2[1:]) \
            if len(rungseg) > 1 else _dedupe(lift1 + lift2[1:])
        seg = {"lift1": lift1, "rung": rungseg, "lift2": lift2,
               "meeting_base": b_xy, "A_used": A}
        return path, seg


class GlobalPaths(PathFamily):
    """Paths between arbitrary total vertices: geodesics inside the
    connected neighborhood of the ladder between the barycenter-flow
    sections through the endpoints."""

    tag = "global"

    def __init__(self, bundle: MetricGraphBundle, L: int):
        super().__init__(np.arange(bundle.total.n))
        self.bundle = bundle
        self.L = int(L)
        self._sections: dict[int, Section] = {}

    def section_through(self, x: int) -> Section:
        s = self._sections.get(x)
        if s is None:
            s = barycenter_flow_section(self.bundle, x)
            self._sections[x] = s
        return s

    def _build(self, x: int, y: int):
        lad = build_ladder(self.bundle, self.section_through(x),
                           self.section_through(y), self.L)
        p = lad.geodesic_in_cl(x, y)
        return p, {"ladder_girth": lad.girth(), "L": lad.L}


# ---------------------------------------------------------------------
# tripods
# ---------------------------------------------------------------------

@dataclasses.dataclass
class Tripod:
    bundle: MetricGraphBundle
    s1: Section
    s2: Section
    s3: Section
    s4: Section                      # s3 projected onto the (s1,s2) rungs
    ladder12: Ladder
    ladder34: Ladder

    def domain(self) -> np.ndarray:
        return np.unique(np.concatenate([self.ladder12.cl_set,
                                         self.ladder34.cl_set]))

    def union_rung(self, b: int) -> list[int]:
        seen = list(dict.fromkeys(
            list(self.ladder12.rungs[b]) + list(self.ladder34.rungs[b])))
        return seen


def build_tripod(bundle: MetricGraphBundle, s1: Section, s2: Section,
                 s3: Section, L: int) -> Tripod:
    ladder12 = build_ladder(bundle, s1, s2, L)
    s4 = project_section_into_ladder(bundle, ladder12, s3)
    ladder34 = build_ladder(bundle, s3, s4, L)
    return Tripod(bundle, s1, s2, s3, s4, ladder12, ladder34)


def tripod_project(tripod: Tripod, x: int) -> int:
    """Fiberwise nearest point on the tripod union (lowest-id tie)."""
    bundle = tripod.bundle
    b = int(bundle.proj[x])
    fg, verts = bundle.fiber_graph(b)
    targets = np.asarray(sorted(set(tripod.union_rung(b))), dtype=np.int64)
    tl = np.searchsorted(verts, targets)
    row = fg.dist_row(int(np.searchsorted(verts, x)))[tl]
    best = int(row.min())
    return int(targets[np.flatnonzero(row == best)[0]])


def tripod_project_to_base_ladder(tripod: Tripod, x: int) -> int:
    """Fiberwise nearest point on the (s1, s2) rung only."""
    bundle = tripod.bundle
    b = int(bundle.proj[x])
    fg, verts = bundle.fiber_graph(b)
    targets = np.asarray(sorted(set(map(int, tripod.ladder12.rungs[b]))),
                         dtype=np.int64)
    tl = np.searchsorted(verts, targets)
    row = fg.dist_row(int(np.searchsorted(verts, x)))[tl]
    best = int(row.min())
    return int(targets[np.flatnonzero(row == best)[0]])


def tripod_fiber_hausdorff(tripod: Tripod) -> dict:
    """Per-fiber Hausdorff distance (fiber metric) between the geodesic
    triangle on the three section values and the tripod union of rungs."""
    bundle = tripod.bundle
    worst, wb = 0, -1
    for b in range(bundle.base.n):
        fg, verts = bundle.fiber_graph(b)
        tri_pts = set()
        for sa, sb in ((tripod.s1, tripod.s2), (tripod.s1, tripod.s3),
                       (tripod.s2, tripod.s3)):
            tri_pts.update(bundle.fiber_geodesic(
                b, int(sa.values[b]), int(sb.values[b])))
        un_pts = set(map(int, tripod.union_rung(b)))
        A = np.searchsorted(verts, np.asarray(sorted(tri_pts)))
        B = np.searchsorted(verts, np.asarray(sorted(un_pts)))
        dA = dist_to_set(fg, A)
        dB = dist_to_set(fg, B)
        hd = max(int(dB[A].max()), int(dA[B].max()))
        if hd > worst:
            worst, wb = hd, b
    return {"hausdorff": worst, "witness_fiber": wb}


def tripod_lipschitz(tripod: Tripod, sample_edges: int = 3000,
                     seed: int = 0) -> dict:
    """Measured per-adjacent-pair displacement of the tripod projection
    over edges inside its domain."""
    g = tripod.bundle.total
    dom = tripod.domain()
    inset = np.zeros(g.n, dtype=bool)
    inset[dom] = True
    edges = [(int(u), int(v)) for u in dom for v in g.neighbors(int(u))
             if u < v and inset[v]]
    rng = np.random.default_rng(seed)
    if len(edges) > sample_edges:
        idx = rng.choice(len(edges), size=sample_edges, replace=False)
        edges = [edges[i] for i in sorted(idx)]
    worst, witness = 0, None
    cache: dict[int, int] = {}

    def proj(v):
        if v not in cache:
            cache[v] = tripod_project(tripod, v)
        return cache[v]

    rows: dict[int, np.ndarray] = {}
    for u, v in edges:
        a, b = proj(u), proj(v)
        if a == b:
            continue
        row = rows.get(a)
        if row is None:
            row = g.dist_row(a)
            rows[a] = row
        d = int(row[b])
        if d > worst:
            worst, witness = d, (u, v)
    return {"lipschitz": worst, "witness": witness,
            "edges_checked": len(edges)}


# ---------------------------------------------------------------------
# path-family hyperbolicity criterion
# ---------------------------------------------------------------------

@dataclasses.dataclass
class HamenstadtConfig:
    """Caps and sampling for the four path-family properties.

    Default caps are calibrated on the corpus so that one config
    separates hyperbolic instances from flat controls at desk scale:
    global-path families on horocycle bundles measure D4 = 1 across
    scales while canonical geodesics on an 8x8 grid measure D4 >= 3.
    """
    d1_cap: float = 8.0        # max gap between successive points
    d2: float = 4.0            # "close pair" scale
    d3_cap: float = 48.0       # max length of close-pair paths
    d4_cap: float = 2.5        # subpath stability + triangle slimness
    n_pairs: int = 40
    n_triples: int = 25
    seed: int = 0

    def to_json(self):
        return dataclasses.asdict(self)


@dataclasses.dataclass
class HamenstadtReport:
    d1: float
    d2: float
    d3: float
    d4: float
    verdict: str
    witness: dict
    config: HamenstadtConfig
    pairs_checked: int
    triples_checked: int

    def to_json(self):
        return {"D1": self.d1, "D2": self.d2, "D3": self.d3, "D4": self.d4,
                "verdict": self.verdict, "witnesses": self.witness,
                "config": self.config.to_json(),
                "pairs": self.pairs_checked, "triples": self.triples_checked}


def hamenstadt_check(family: PathFamily, g: Graph,
                     config: HamenstadtConfig | None = None
                     ) -> HamenstadtReport:
    """Measure the four discrete path-family properties over a seeded
    sample and compare against the caps: (1) successive-point gaps,
    (2) lengths of paths between close pairs, (3) Hausdorff stability of
    subpaths, (4) slimness of path triangles.  FAIL carries a witness.
    """
    cfg = config or HamenstadtConfig()
    rng = np.random.default_rng(cfg.seed)
    dom = family.domain
    witness: dict = {}

    def dmat_pts(ps, qs):
        ps = np.asarray(ps, dtype=np.int64)
        qs = np.asarray(qs, dtype=np.int64)
        return g.dmat(ps, qs)

    # pairs: random plus deliberately close ones
    pairs = []
    for _ in range(cfg.n_pairs):
        x, y = rng.choice(dom, 2, replace=False)
        pairs.append((int(x), int(y)))
    close_pairs = []
    for _ in range(cfg.n_pairs):
        x = int(rng.choice(dom))
        ball = g.ball(x, int(cfg.d2))
        ball = ball[np.isin(ball, dom) & (ball != x)]
        if len(ball):
            close_pairs.append((x, int(rng.choice(ball))))
    d1 = 0.0
    d3 = 0.0
    d4 = 0.0
    for x, y in pairs + close_pairs:
        p = family.path(x, y)
        if len(p) > 1:
            gaps = dmat_pts(p[:-1], p[1:]).diagonal()
            gmax = float(gaps.max())
            if gmax > d1:
                d1 = gmax
                witness.setdefault("d1", {"pair": [x, y], "gap": gmax})
            length = float(gaps.sum())
        else:
            length = 0.0
        if g.distance(x, y) <= cfg.d2 and length > d3:
            d3 = length
            witness["d3"] = {"pair": [x, y], "length": length}
    # subpath stability on the sampled paths
    for x, y in pairs:
        p = family.path(x, y)
        if len(p) < 4:
            continue
        i, j = sorted(rng.choice(np.arange(1, len(p) - 1), 2, replace=False)) \
            if len(p) > 5 else (1, len(p) - 2)
        i, j = int(i), int(j)
        if p[i] == p[j]:
            continue
        sub = p[i:j + 1]
        q = family.path(p[i], p[j])
        M = dmat_pts(sub, q)
        hd = float(max(M.min(axis=1).max(), M.min(axis=0).max()))
        if hd > d4:
            d4 = hd
            witness["d4"] = {"kind": "subpath", "pair": [x, y],
                             "inner": [int(p[i]), int(p[j])], "hd": hd}
    # triangle slimness: seeded random triples plus the extremal triple
    # (mutually farthest domain points), which realizes the worst
    # slimness on flat controls
    triples = []
    u = int(dom[int(np.argmax([g.eccentricity(int(v))
                               for v in dom[:min(len(dom), 32)]]))])
    ru = g.dist_row(u)[dom]
    v = int(dom[int(ru.argmax())])
    rv = g.dist_row(v)[dom]
    w = int(dom[int(np.minimum(ru, rv).argmax())])
    if len({u, v, w}) == 3:
        triples.append((u, v, w))
    for _ in range(cfg.n_triples):
        x, y, z = (int(q) for q in rng.choice(dom, 3, replace=False))
        if len({x, y, z}) == 3:
            triples.append((x, y, z))
    tchecked = 0
    for x, y, z in triples:
        pxy, pyz, pxz = (family.path(x, y), family.path(y, z),
                         family.path(x, z))
        tchecked += 1
        for side, oth1, oth2 in ((pxy, pyz, pxz), (pyz, pxy, pxz),
                                 (pxz, pxy, pyz)):
            T = np.asarray(sorted(set(oth1) | set(oth2)), dtype=np.int64)
            dT = dist_to_set(g, T)
            defect = float(dT[np.asarray(side)].max())
            if defect > d4:
                d4 = defect
                witness["d4"] = {"kind": "triangle",
                                 "triple": [x, y, z], "slim": defect}
    verdict = ("PASS" if (d1 <= cfg.d1_cap and d3 <= cfg.d3_cap
                          and d4 <= cfg.d4_cap) else "FAIL")
    return HamenstadtReport(d1, cfg.d2, d3, d4, verdict, witness, cfg,
                            len(pairs) + len(close_pairs), tchecked)
