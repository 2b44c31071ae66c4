"""Example bundle generators.

* product bundles (the canonical non-flaring control),
* hyperbolic-plane horocycle bundles sampled over an upper-half-plane
  wedge and fed through the net approximation,
* Cayley-graph bundles of free-group-by-abelian extensions, truncated to
  word balls.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .bundle import BundleError, MetricGraphBundle, MetricSample, \
    net_approximation, verify_bundle
from .graph import Graph, GraphError


# ---------------------------------------------------------------------
# product bundles
# ---------------------------------------------------------------------

def generate_product_bundle(base: Graph, fiber: Graph) -> MetricGraphBundle:
    """Cartesian product with first-factor projection; fibers carry
    identity transitions, so fiber distances never flare."""
    nb, nf = base.n, fiber.n
    edges = []
    for b in range(nb):
        off = b * nf
        edges.extend((off + u, off + v) for u, v in fiber.edges())
    for b1, b2 in base.edges():
        o1, o2 = b1 * nf, b2 * nf
        edges.extend((o1 + x, o2 + x) for x in range(nf))
    labels = [(b, x) for b in range(nb) for x in range(nf)]
    total = Graph.from_edges(edges, n=nb * nf, labels=labels)
    proj = np.repeat(np.arange(nb), nf)
    return verify_bundle(total, base, proj,
                         meta={"generator": "product", "base_n": nb,
                               "fiber_n": nf})


def path_graph(n: int) -> Graph:
    if n == 1:
        raise GraphError("path graph needs >= 2 vertices")
    return Graph.from_edges([(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges([(i, (i + 1) % n) for i in range(n)])


def grid_graph(rows: int, cols: int) -> Graph:
    edges = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j
            if j + 1 < cols:
                edges.append((v, v + 1))
            if i + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(edges)


# ---------------------------------------------------------------------
# horocycle bundle over a hyperbolic-plane wedge
# ---------------------------------------------------------------------

def _h2_dist(x1, y1, x2, y2):
    q = 1.0 + ((x1 - x2) ** 2 + (y1 - y2) ** 2) / (2.0 * y1 * y2)
    return math.acosh(max(1.0, q))


def generate_horocycle_bundle(T: float, W: float, h: float = 1.0,
                              c: float = 1.0) -> MetricGraphBundle:
    """Horocycle bundle of the hyperbolic plane, sampled and netted.

    Upper-half-plane model: the base is the vertical geodesic x = 0
    parametrized by t (point i e^t), the fiber over t is the horocycle
    y = e^t with intrinsic metric |dx| e^{-t}.  The sampled wedge covers
    flow lines x in [0, W] for t in [-T, T]; each fiber is sampled at
    intrinsic mesh h.  Fiber distances shrink by e^{-1} per unit of base
    travel toward +t, which is what flaring tests detect.

    ``c`` is the connection constant recorded into the net thresholds
    (the continuous bundle connects adjacent fibers by unit flow lines,
    so the default is the smallest legal value 1).
    """
    if T <= 0 or W <= 0 or not 0 < h <= 1:
        raise BundleError("horocycle-params", (T, W, h),
                          "need T, W > 0 and 0 < h <= 1")
    tvals = [round(-T + i * h, 9) for i in range(int(round(2 * T / h)) + 1)]
    xs, ts, coords, labels = [], [], [], []
    for t in tvals:
        step = h * math.exp(t)          # x step giving intrinsic mesh h
        count = int(math.floor(W / step + 1e-9)) + 1
        for j in range(count):
            xs.append(j * step)
            ts.append(t)
            coords.append(j * h)        # intrinsic coordinate in the fiber
            labels.append((round(j * step, 12), t))
    xs = np.asarray(xs)
    ts = np.asarray(ts)
    ys = np.exp(ts)
    coords = np.asarray(coords)

    def d_total(i, j):
        return _h2_dist(xs[i], ys[i], xs[j], ys[j])

    def d_fiber(i, j):
        return abs(coords[i] - coords[j])

    def cross_window(t1, t2, thr):
        # source coord j maps to x = j h e^{t1}, i.e. target coord
        # j e^{t1-t2}; |dx| <= sqrt(2 y1 y2 (cosh thr - 1)) for pairs
        # within hyperbolic distance thr.
        y1, y2 = math.exp(t1), math.exp(t2)
        dx = math.sqrt(max(0.0, 2.0 * y1 * y2 * (math.cosh(thr) - 1.0)))
        return y1 / y2, dx / (h * y2) + 2.0

    sample = MetricSample(
        d_total=d_total,
        base_val=list(ts),
        d_base=lambda a, b: abs(a - b),
        d_fiber=d_fiber,
        labels=labels,
        fiber_coord=coords,
        cross_window=cross_window,
    )
    # no truncation flags: the wedge carries exact geometry everywhere
    # (flags are reserved for genuinely faked structure such as clipped
    # word images in extension bundles)
    return net_approximation(
        sample, c,
        meta={"generator": "horocycle", "T": T, "W": W, "mesh": h})


# ---------------------------------------------------------------------
# free group ball + extension bundles
# ---------------------------------------------------------------------

GENS = "aAbB"
INverse = {"a": "A", "A": "a", "b": "B", "B": "b"}


def reduce_word(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if out and out[-1] == INverse[ch]:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def apply_endo(images: dict[str, str], w: str) -> str:
    return reduce_word("".join(images[ch] for ch in w))


def parse_monodromy(spec: str) -> dict[str, str]:
    """Parse "a->ab,b->a" into a full image table on a, b, A, B."""
    images: dict[str, str] = {}
    for part in spec.split(","):
        m = re.fullmatch(r"\s*([ab])\s*->\s*([aAbB]+)\s*", part)
        if not m:
            raise GraphError(f"bad monodromy component: {part!r}")
        images[m.group(1)] = reduce_word(m.group(2))
    if set(images) != {"a", "b"}:
        raise GraphError(f"monodromy must map exactly a and b: {spec!r}")
    for g in ("a", "b"):
        images[INverse[g]] = "".join(INverse[ch] for ch in reversed(images[g]))
    return images


def invert_monodromy(images: dict[str, str], max_len: int = 10) -> dict[str, str]:
    """Search for the inverse automorphism on generators (word length
    bounded by max_len); raises if none is found."""
    inv: dict[str, str] = {}
    targets = {"a", "b"}
    frontier = [""]
    seen = {""}
    while frontier and targets:
        nxt = []
        for w in frontier:
            for g in GENS:
                w2 = reduce_word(w + g)
                if w2 in seen or len(w2) > max_len:
                    continue
                seen.add(w2)
                nxt.append(w2)
                img = apply_endo(images, w2)
                for t in list(targets):
                    if img == t:
                        inv[t] = w2
                        targets.discard(t)
        frontier = nxt
    if targets:
        raise GraphError(
            f"monodromy has no inverse on generators within length {max_len}")
    for g in ("a", "b"):
        inv[INverse[g]] = "".join(INverse[ch] for ch in reversed(inv[g]))
    return inv


def free_group_ball(radius: int) -> tuple[Graph, list[str]]:
    """Ball of the rank-2 free group Cayley graph; vertices are reduced
    words ordered by (length, lexicographic)."""
    words = [""]
    index = {"": 0}
    frontier = [""]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for g in GENS:
                w2 = reduce_word(w + g)
                if len(w2) > len(w) and w2 not in index:
                    index[w2] = len(words)
                    words.append(w2)
                    nxt.append(w2)
        frontier = nxt
    edges = []
    for w in words:
        for g in GENS:
            w2 = reduce_word(w + g)
            if w2 in index and index[w] < index[w2]:
                edges.append((index[w], index[w2]))
    return Graph.from_edges(edges, n=len(words), labels=list(words)), words


def generate_extension_bundle(radius: int, base_kind: str, base_size: int,
                              monodromy: str | dict[str, str] = "a->a,b->b",
                              monodromy2: str | dict[str, str] | None = None,
                              ) -> MetricGraphBundle:
    """Cayley-graph bundle of a free-by-abelian extension, truncated to a
    word ball of the given radius in the fiber.

    base_kind "interval": base is a path 0..base_size with the monodromy
    applied per step; "box": a (base_size+1)^2 grid with one monodromy per
    coordinate direction (they must commute on the generators).

    Cross edges follow the flow (w, b) -> (phi^{-1}(w), b + e); images
    longer than the radius are clipped to their length-``radius`` prefix
    and the source vertex is flagged as truncation-affected.
    """
    phi1 = parse_monodromy(monodromy) if isinstance(monodromy, str) else monodromy
    fiber, words = free_group_ball(radius)
    windex = {w: i for i, w in enumerate(words)}
    nf = len(words)

    if base_kind == "interval":
        base = path_graph(base_size + 1)
        base_coord = [(i,) for i in range(base_size + 1)]
        steps = {(+1,): phi1}
    elif base_kind == "box":
        phi2 = (parse_monodromy(monodromy2) if isinstance(monodromy2, str)
                else monodromy2) if monodromy2 is not None else phi1
        for g in ("a", "b"):
            if apply_endo(phi1, phi2[g]) != apply_endo(phi2, phi1[g]):
                raise GraphError(
                    "box monodromies must commute on the generators")
        base = grid_graph(base_size + 1, base_size + 1)
        base_coord = [(i, j) for i in range(base_size + 1)
                      for j in range(base_size + 1)]
        steps = {(+1, 0): phi1, (0, +1): phi2}
    else:
        raise GraphError(f"unknown base kind {base_kind!r}")
    base.labels = base_coord
    coord_index = {cc: b for b, cc in enumerate(base_coord)}

    inverses = {d: invert_monodromy(p) for d, p in steps.items()}

    def truncate(w: str) -> tuple[str, bool]:
        if len(w) <= radius:
            return w, False
        return w[:radius], True

    nb = base.n
    labels = [(w, cc) for cc in base_coord for w in words]
    proj = np.repeat(np.arange(nb), nf)
    vid = lambda b, wi: b * nf + wi
    edges = []
    flagged = np.zeros(nb * nf, dtype=bool)
    for b, cc in enumerate(base_coord):
        off = b * nf
        edges.extend((off + u, off + v) for u, v in fiber.edges())
        for d, phi in steps.items():
            cc2 = tuple(x + dx for x, dx in zip(cc, d))
            b2 = coord_index.get(cc2)
            phin = inverses[d]
            if b2 is not None:
                for wi, w in enumerate(words):
                    img, clipped = truncate(apply_endo(phin, w))
                    edges.append((vid(b, wi), vid(b2, windex[img])))
                    if clipped:
                        flagged[vid(b, wi)] = True
                # downward flow from b2 back to b
                for wi, w in enumerate(words):
                    img, clipped = truncate(apply_endo(phi, w))
                    edges.append((vid(b2, wi), vid(b, windex[img])))
                    if clipped:
                        flagged[vid(b2, wi)] = True
    total = Graph.from_edges(edges, n=nb * nf, labels=labels)
    return verify_bundle(
        total, base, proj,
        meta={"generator": "extension", "radius": radius,
              "base_kind": base_kind, "base_size": base_size,
              "monodromy": monodromy if isinstance(monodromy, str) else "custom"},
        flagged_total=flagged)
