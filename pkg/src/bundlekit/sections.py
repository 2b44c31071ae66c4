"""Quasi-isometric sections of metric graph bundles.

The central construction flows a maximally separated triple of fiber
vertices along the fiber-transition maps and takes fiberwise barycenters
("barycenter flow").  Separated triples play the role of triples of
boundary directions, which have no exact finite analogue; the achieved
separation is recorded rather than guessed at.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .bundle import BundleError, MetricGraphBundle
from .graph import Graph
from .hyperbolicity import EPS_GRID, K_GRID, barycenter, dist_to_set


@dataclasses.dataclass
class Section:
    """A choice of one total vertex over every base vertex."""
    values: np.ndarray            # total ids, indexed by base vertex
    provenance: str               # barycenter-flow | projection | constant | user
    meta: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.int64)

    def __call__(self, b: int) -> int:
        return int(self.values[b])

    def validate(self, bundle: MetricGraphBundle) -> None:
        if len(self.values) != bundle.base.n:
            raise BundleError("section", None,
                              "section must assign every base vertex")
        bad = bundle.proj[self.values] != np.arange(bundle.base.n)
        if bad.any():
            b = int(np.flatnonzero(bad)[0])
            raise BundleError("section", b,
                              f"value over {b} lands in fiber "
                              f"{int(bundle.proj[self.values[b]])}")

    def to_lines(self) -> str:
        return "".join(f"{b} {int(v)}\n" for b, v in enumerate(self.values))


def section_from_lines(text: str) -> Section:
    vals = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        b, v = line.split()
        vals[int(b)] = int(v)
    values = np.array([vals[b] for b in sorted(vals)], dtype=np.int64)
    return Section(values, "user")


@dataclasses.dataclass(frozen=True)
class FarTriple:
    vertices: tuple[int, int, int]   # total ids, lexicographic
    min_pairwise: int                # fiber metric
    separation: int                  # the requested separation

    def to_json(self):
        return {"vertices": list(self.vertices),
                "min_pairwise": self.min_pairwise,
                "separation": self.separation}


FAR_TRIPLE_EXACT_CAP = 600


def far_triple(bundle: MetricGraphBundle, b: int,
               separation: int | None = None) -> FarTriple | None:
    """Triple in the fiber over b maximizing the minimum pairwise fiber
    distance (exact up to FAR_TRIPLE_EXACT_CAP fiber vertices, greedy
    farthest-point above), requiring pairwise >= separation.

    Returns None when no triple meets the separation (fiber too small).
    """
    fg, verts = bundle.fiber_graph(b)
    m = fg.n
    if m < 3:
        return None
    diam = fg.diameter()
    sep = int(np.ceil(diam / 3)) if separation is None else int(separation)
    sep = max(sep, 1)
    if m <= FAR_TRIPLE_EXACT_CAP:
        D = np.asarray(fg.oracle.all_pairs(), dtype=np.int32)
        best = -1
        tri = None
        for i in range(m - 2):
            mi = D[i]
            for j in range(i + 1, m - 1):
                dij = int(D[i, j])
                if dij <= best:
                    continue
                mn = np.minimum(mi[j + 1:], D[j, j + 1:])
                k = int(mn.argmax())
                val = min(dij, int(mn[k]))
                if val > best:
                    best = val
                    tri = (i, j, j + 1 + k)
        if tri is None or best < sep:
            return None
        t = tuple(int(verts[i]) for i in tri)
        return FarTriple(t, best, sep)
    # farthest-point greedy: diameter pair then the max-min third
    r0 = fg.dist_row(0)
    u = int(r0.argmax())
    ru = fg.dist_row(u)
    v = int(ru.argmax())
    rv = fg.dist_row(v)
    mn = np.minimum(ru, rv)
    mn[u] = mn[v] = -1
    w = int(mn.argmax())
    tri_local = sorted((u, v, w))
    best = min(int(ru[v]), int(ru[w]) if w != u else 0, int(rv[w]))
    if best < sep:
        return None
    t = tuple(int(verts[i]) for i in tri_local)
    return FarTriple(t, best, sep)


def _nearest_in_fiber(bundle: MetricGraphBundle, b: int, x: int) -> int:
    """Lowest-id vertex of the fiber over b nearest to x in the total graph."""
    row = bundle.total.dist_row(x)[bundle.fibers[b]]
    return int(bundle.fibers[b][int(row.argmin())])


def constant_nearest_section(bundle: MetricGraphBundle, x: int) -> Section:
    vals = np.array([_nearest_in_fiber(bundle, b, x)
                     for b in range(bundle.base.n)], dtype=np.int64)
    return Section(vals, "constant", {"through": int(x)})


def barycenter_flow_section(bundle: MetricGraphBundle, x: int,
                            separation: int | None = None) -> Section:
    """Qi-section through x: flow a far triple from x's fiber along the
    canonical transition maps, take the fiberwise barycenter, and patch
    the value over proj(x) to x itself.

    Falls back to the constant-nearest section (with a warning flag in
    meta) when x's fiber has no sufficiently separated triple.  Triples
    whose separation collapses below half the target during the flow are
    re-anchored to the nearest vertices restoring it; every re-anchoring
    is logged in meta["reanchored"].
    """
    x = bundle.total.check_vertex(x)
    v0 = int(bundle.proj[x])
    tri0 = far_triple(bundle, v0, separation)
    if tri0 is None:
        s = constant_nearest_section(bundle, x)
        s.values[v0] = x
        s.meta["warning"] = "no-separated-triple"
        s.provenance = "constant"
        return s
    base = bundle.base
    order = np.argsort(base.dist_row(v0), kind="stable")
    parent_row = base.dist_row(v0)
    triples = {v0: np.array(tri0.vertices, dtype=np.int64)}
    reanchored = []
    sep = tri0.separation
    values = np.full(base.n, -1, dtype=np.int64)
    for b in order:
        b = int(b)
        if b != v0:
            nbrs = base.neighbors(b)
            par = int(nbrs[np.flatnonzero(parent_row[nbrs]
                                          == parent_row[b] - 1)[0]])
            tr = bundle.transition(par, b)
            pos = np.searchsorted(bundle.fibers[par], triples[par])
            cur = tr[pos]
            fg, verts = bundle.fiber_graph(b)
            loc = np.searchsorted(verts, cur)
            d12 = fg.distance(int(loc[0]), int(loc[1]))
            d13 = fg.distance(int(loc[0]), int(loc[2]))
            d23 = fg.distance(int(loc[1]), int(loc[2]))
            if min(d12, d13, d23) < sep / 2:
                newloc = _reanchor(fg, loc, sep)
                if newloc is not None:
                    reanchored.append(int(b))
                    loc = newloc
                    cur = verts[loc]
            triples[b] = np.asarray(cur, dtype=np.int64)
        t = triples[b]
        fg, verts = bundle.fiber_graph(b)
        loc = np.searchsorted(verts, t)
        c = barycenter(fg, int(loc[0]), int(loc[1]), int(loc[2]))
        values[b] = int(verts[c])
    values[v0] = x
    meta = {
        "through": int(x),
        "triple": [int(t) for t in tri0.vertices],
        "separation": sep,
        "min_pairwise": tri0.min_pairwise,
        "reanchored": reanchored,
        "triples": {int(b): [int(t) for t in tt] for b, tt in triples.items()},
    }
    return Section(values, "barycenter-flow", meta)


def _reanchor(fg: Graph, loc: np.ndarray, sep: int):
    """Nearest vertices to the collapsed triple restoring pairwise
    separation >= ceil(sep/2); None when impossible."""
    need = int(np.ceil(sep / 2))
    chosen: list[int] = []
    for i in range(3):
        row = fg.dist_row(int(loc[i]))
        ok = np.ones(fg.n, dtype=bool)
        for c in chosen:
            ok &= fg.dist_row(c) >= need
        cand = np.flatnonzero(ok)
        if len(cand) == 0:
            return None
        chosen.append(int(cand[int(row[cand].argmin())]))
    return np.array(sorted(chosen), dtype=np.int64)


# ---------------------------------------------------------------------
# quality
# ---------------------------------------------------------------------

@dataclasses.dataclass
class SectionQuality:
    k: float
    eps: float
    max_hop: int
    satisfied: bool
    witness: tuple[int, int] | None = None

    def to_json(self):
        return {"k": self.k, "eps": self.eps, "max_hop": self.max_hop,
                "satisfied": self.satisfied}


def measure_section_quality(bundle: MetricGraphBundle, s: Section,
                            pair_cap: int = 400, seed: int = 0
                            ) -> SectionQuality:
    """Minimal grid (k, eps) with d_total(s(w), s(z)) <= k d_base(w,z) + eps
    over all base pairs (exhaustive up to pair_cap base vertices, sampled
    above).  The lower bound d_base <= d_total holds identically because
    the projection is simplicial, and is asserted.
    """
    s.validate(bundle)
    base, total = bundle.base, bundle.total
    nb = base.n
    if nb == 1:
        return SectionQuality(1.0, 0.0, 0, True)
    if nb <= pair_cap:
        wz = [(w, z) for w in range(nb) for z in range(w + 1, nb)]
    else:
        rng = np.random.default_rng(seed)
        wz = [tuple(int(q) for q in rng.choice(nb, 2, replace=False))
              for _ in range(pair_cap * 8)]
    db = np.array([base.distance(w, z) for w, z in wz], dtype=float)
    dt = np.array([total.distance(int(s.values[w]), int(s.values[z]))
                   for w, z in wz], dtype=float)
    if (db > dt).any():
        j = int(np.flatnonzero(db > dt)[0])
        raise BundleError("section-lower-bound", wz[j],
                          "d_base exceeds d_total between section values")
    hops = dt[db == 1]
    max_hop = int(hops.max()) if len(hops) else 0
    for k in K_GRID:
        need = float((dt - k * db).max())
        if need <= EPS_GRID[-1]:
            eps = max(0.0, float(np.ceil(need - 1e-12)))
            j = int(np.argmax(dt - k * db))
            return SectionQuality(float(k), eps, max_hop, True, wz[j])
    j = int(np.argmax(dt - K_GRID[-1] * db))
    return SectionQuality(float(K_GRID[-1]), float(EPS_GRID[-1]), max_hop,
                          False, wz[j])


def flow_coherence(bundle: MetricGraphBundle, s: Section) -> int:
    """Max over base edges (w,z) of the fiber distance between the section
    value at z and the transition image of the value at w: the measured
    coherence of the barycenter flow."""
    worst = 0
    for w, z in bundle.base.edges():
        img = bundle.transition(w, z)
        pos = int(np.searchsorted(bundle.fibers[w], s.values[w]))
        worst = max(worst,
                    bundle.fiber_distance(z, int(img[pos]), int(s.values[z])))
    return worst


# ---------------------------------------------------------------------
# projections into ladders; level sets
# ---------------------------------------------------------------------

def project_section_into_ladder(bundle: MetricGraphBundle, ladder,
                                s: Section) -> Section:
    """Fiberwise nearest-point projection of the section onto the
    ladder's rungs (lowest-id tie-break in each fiber)."""
    vals = np.empty(bundle.base.n, dtype=np.int64)
    for b in range(bundle.base.n):
        rung = ladder.rungs[b]
        fg, verts = bundle.fiber_graph(b)
        src = int(np.searchsorted(verts, s.values[b]))
        rl = np.searchsorted(verts, np.asarray(rung, dtype=np.int64))
        row = fg.dist_row(src)[rl]
        best = int(row.min())
        vals[b] = min(rung[i] for i in range(len(rung)) if row[i] == best)
    out = Section(vals, "projection",
                  {"source": s.provenance, "ladder_girth": None})
    out.validate(bundle)
    return out


def level_set(bundle: MetricGraphBundle, s1: Section, s2: Section,
              A: int) -> np.ndarray:
    """Base vertices where the two sections are fiberwise A-close."""
    if A < 0:
        raise BundleError("level-set", A, "threshold must be >= 0")
    out = [b for b in range(bundle.base.n)
           if bundle.fiber_distance(b, int(s1.values[b]), int(s2.values[b])) <= A]
    return np.array(out, dtype=np.int64)


def level_set_report(bundle: MetricGraphBundle, s1: Section, s2: Section,
                     A: int) -> dict:
    """Quasiconvexity and diameter of the level set, plus how far the
    fiberwise-far base vertices are from it."""
    from .hyperbolicity import quasiconvexity_constant

    U = level_set(bundle, s1, s2, A)
    base = bundle.base
    rep: dict = {"A": int(A), "size": int(len(U)),
                 "U": [int(b) for b in U], "empty": len(U) == 0}
    if len(U) == 0:
        return rep
    rep["quasiconvexity"] = int(quasiconvexity_constant(base, U))
    rep["diameter"] = int(base.dmat(U, U).max()) if len(U) > 1 else 0
    dU = dist_to_set(base, U)
    far = []
    for b in range(base.n):
        C = bundle.fiber_distance(b, int(s1.values[b]), int(s2.values[b]))
        if C >= A and dU[b] > 0:
            far.append({"b": int(b), "separation": int(C),
                        "dist_to_U": int(dU[b])})
    rep["far_vertices"] = far
    rep["max_dist_to_U"] = max((f["dist_to_U"] for f in far), default=0)
    return rep


# ---------------------------------------------------------------------
# barycenter surjectivity
# ---------------------------------------------------------------------

def barycenter_surjectivity_report(bundle: MetricGraphBundle,
                                   samples: int = 200,
                                   separation: int | None = None,
                                   seed: int = 0,
                                   exhaustive_cap: int = 40) -> dict:
    """Covering radius of the barycenter image per fiber.

    Small fibers are exhausted over all separated triples; larger ones
    use seeded sampling.  A fiber is flagged weak when the covering
    radius exceeds a quarter of its diameter (barycenters cluster too
    centrally to cover it).
    """
    rng = np.random.default_rng(seed)
    fibers = []
    for b in range(bundle.base.n):
        fg, verts = bundle.fiber_graph(b)
        m = fg.n
        diam = fg.diameter()
        sep = (max(1, int(np.ceil(diam / 3)))
               if separation is None else separation)
        if m == 1:
            fibers.append({"b": b, "radius": 0, "weak": False,
                           "image_size": 1, "mode": "trivial"})
            continue
        image = set()
        mode = "exhaustive" if m <= exhaustive_cap else "sampled"
        if mode == "exhaustive":
            D = fg.oracle.all_pairs()
            for i in range(m - 2):
                for j in range(i + 1, m - 1):
                    if D[i, j] < sep:
                        continue
                    for k in range(j + 1, m):
                        if D[i, k] >= sep and D[j, k] >= sep:
                            image.add(barycenter(fg, i, j, k))
        else:
            tries = 0
            found = 0
            while found < samples and tries < samples * 30:
                tries += 1
                i, j, k = (int(q) for q in rng.choice(m, 3, replace=False))
                if (fg.distance(i, j) >= sep and fg.distance(i, k) >= sep
                        and fg.distance(j, k) >= sep):
                    image.add(barycenter(fg, *sorted((i, j, k))))
                    found += 1
        if not image:
            fibers.append({"b": b, "radius": None, "weak": True,
                           "image_size": 0, "mode": mode})
            continue
        radius = int(dist_to_set(fg, sorted(image)).max())
        fibers.append({"b": b, "radius": radius,
                       "weak": radius > diam / 4,
                       "image_size": len(image), "mode": mode,
                       "diameter": diam})
    rad = [f["radius"] for f in fibers if f["radius"] is not None]
    return {"fibers": fibers,
            "max_radius": max(rad, default=0),
            "weak_fibers": [f["b"] for f in fibers if f["weak"]]}
