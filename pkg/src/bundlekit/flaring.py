"""Empirical flaring estimation.

Flaring: for lifts of a base geodesic through a window [-n, n], once the
central fiber distance exceeds a girth threshold M, one of the two window
endpoints beats it by a factor lambda > 1.  Product bundles fail this
with ratio exactly 1; hyperbolic-plane horocycle bundles pass with
lambda growing like e per unit of base travel.

Also here: the bounded-flaring ceiling (fiber distances between k-qi
lifts can grow at most like g(2k)^N over base distance N with
g(C) = K + 2 f(C+2)), exponential-divergence fitting, per-ladder flaring
checks, and the joint hyperbolicity/flaring consistency report.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .bundle import MetricGraphBundle, PropernessProfile, measure_properness
from .graph import GraphError
from .sections import Section, barycenter_flow_section, \
    measure_section_quality

LAMBDA_GRID = (1.05, 1.1, 1.25, 1.5, 2.0, float(np.e))
BUCKETS = {"1-2": (1, 2), "3-4": (3, 4), "5-8": (5, 8)}


# ---------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------

def qi_lift(bundle: MetricGraphBundle, base_path: list[int],
            s: Section) -> list[int]:
    """Lift of a base geodesic in a section (index-wise section values).

    Asserts the lift-length bound: total length <= 2 k l(gamma) with
    k the section's measured constant (max of grid k and eps).
    """
    lift = [int(s.values[b]) for b in base_path]
    if len(lift) > 1:
        length = sum(bundle.total.distance(a, b)
                     for a, b in zip(lift, lift[1:]))
        q = _quality(bundle, s)
        k_eff = max(q.k, q.eps, 1.0)
        if length > 2 * k_eff * (len(base_path) - 1):
            raise AssertionError(
                f"lift length {length} exceeds 2k l(gamma) = "
                f"{2 * k_eff * (len(base_path) - 1)}")
    return lift


def _quality(bundle, s: Section):
    q = s.meta.get("_quality")
    if q is None:
        q = measure_section_quality(bundle, s)
        s.meta["_quality"] = q
    return q


@dataclasses.dataclass
class LiftPair:
    base_path: list[int]
    lift1: list[int]
    lift2: list[int]
    fiber_dists: np.ndarray
    flagged: bool

    def to_json(self):
        return {"gamma": [int(b) for b in self.base_path],
                "pair": [[int(v) for v in self.lift1],
                         [int(v) for v in self.lift2]],
                "distances": [int(d) for d in self.fiber_dists],
                "flagged": self.flagged}


def lift_pair(bundle: MetricGraphBundle, base_path: list[int],
              s1: Section, s2: Section) -> LiftPair:
    l1 = [int(s1.values[b]) for b in base_path]
    l2 = [int(s2.values[b]) for b in base_path]
    d = np.array([bundle.fiber_distance(b, a, c)
                  for b, a, c in zip(base_path, l1, l2)], dtype=np.int64)
    flagged = bool(bundle.flagged_total[l1].any()
                   or bundle.flagged_total[l2].any()
                   or bundle.flagged_base[base_path].any())
    return LiftPair(list(base_path), l1, l2, d, flagged)


# ---------------------------------------------------------------------
# the flaring test
# ---------------------------------------------------------------------

@dataclasses.dataclass
class FlaringPolicy:
    """Lifts come from two generators: barycenter-flow sections (bucketed
    by measured max-hop) and random 1-hop lifts per geodesic; whether this
    mix is adversarially sufficient is an open point, so the policy is
    always echoed in reports."""
    num_geodesics: int = 200
    num_sections: int = 20
    num_pairs: int = 50
    random_lifts: int = 4
    seed: int = 0
    min_support: int = 3
    exclude_flagged: bool = True
    lambda_grid: tuple = LAMBDA_GRID

    def to_json(self):
        return dataclasses.asdict(self)


@dataclasses.dataclass
class FlaringEstimate:
    bucket: str
    M: float | None
    lam: float | None
    n: int
    verdict: str                      # PASS | FAIL | NO-SAMPLES
    samples_used: int
    flattest_ratio: float | None     # most violating endpoint/center ratio
    max_ratio: float | None          # largest observed growth; exactly 1
                                     # on products (nothing ever grows)
    witnesses: list
    policy: FlaringPolicy
    m_table: list = dataclasses.field(default_factory=list)
    # (M, lambda-or-None) per supported grid value; on a fixed sample the
    # attainable lambda is monotone in M since raising M filters samples

    def to_json(self):
        return {"bucket": self.bucket, "M": self.M, "lambda": self.lam,
                "n": self.n, "verdict": self.verdict,
                "samples": self.samples_used,
                "flattest_ratio": self.flattest_ratio,
                "max_ratio": self.max_ratio,
                "m_table": self.m_table,
                "witnesses": self.witnesses,
                "policy": self.policy.to_json()}


def sample_base_geodesics(bundle: MetricGraphBundle, length: int,
                          count: int, rng, exclude_flagged: bool
                          ) -> list[list[int]]:
    """Seeded sample of canonical base geodesics of the given length."""
    base = bundle.base
    cands = []
    ecc = max(base.eccentricity(v) for v in range(min(base.n, 64)))
    if base.diameter() < length:
        raise GraphError(
            f"no base geodesics of length {length}: instance too small")
    tries = 0
    while len(cands) < count and tries < count * 60:
        tries += 1
        u = int(rng.integers(0, base.n))
        row = base.dist_row(u)
        far = np.flatnonzero(row == length)
        if len(far) == 0:
            continue
        v = int(far[rng.integers(0, len(far))])
        p = base.geodesic(u, v)
        if exclude_flagged and bundle.flagged_base[p].any():
            continue
        cands.append(p)
    if not cands:
        raise GraphError(
            f"could not sample unflagged base geodesics of length {length}")
    return cands


def sample_sections(bundle: MetricGraphBundle, count: int, rng
                    ) -> list[Section]:
    out = []
    seen = set()
    tries = 0
    while len(out) < count and tries < count * 20:
        tries += 1
        x = int(rng.integers(0, bundle.total.n))
        if x in seen:
            continue
        seen.add(x)
        out.append(barycenter_flow_section(bundle, x))
    return out


def random_lift(bundle: MetricGraphBundle, base_path: list[int],
                rng) -> list[int]:
    """A 1-hop lift of the base path: start anywhere in the first fiber,
    cross a uniformly chosen edge into each next fiber."""
    f0 = bundle.fibers[base_path[0]]
    cur = int(f0[rng.integers(0, len(f0))])
    lift = [cur]
    for b1, b2 in zip(base_path, base_path[1:]):
        nbrs = bundle.total.neighbors(cur)
        into = nbrs[bundle.proj[nbrs] == b2]
        cur = int(into[rng.integers(0, len(into))])
        lift.append(cur)
    return lift


def _lift_pair_dists(bundle, base_path, l1, l2) -> LiftPair:
    d = np.array([bundle.fiber_distance(b, a, c)
                  for b, a, c in zip(base_path, l1, l2)], dtype=np.int64)
    flagged = bool(bundle.flagged_total[l1].any()
                   or bundle.flagged_total[l2].any()
                   or bundle.flagged_base[base_path].any())
    return LiftPair(list(base_path), list(l1), list(l2), d, flagged)


def flare_test(bundle: MetricGraphBundle, bucket: str, n: int,
               policy: FlaringPolicy | None = None,
               sections: list[Section] | None = None) -> FlaringEstimate:
    """Empirical flaring verdict for lifts in a max-hop bucket.

    Samples base geodesics of length 2n and section pairs whose measured
    max-hop lies in the bucket; scans a girth grid M (quantiles of the
    central distances) and reports the best (M, lambda-grid) value such
    that every sample with central distance >= M flares by lambda at one
    window endpoint.  FAIL carries the flattest witness; ratios are exact
    rationals of integer distances.
    """
    policy = policy or FlaringPolicy()
    if bucket not in BUCKETS:
        raise GraphError(f"unknown bucket {bucket!r}; use one of "
                         f"{sorted(BUCKETS)}")
    lo, hi = BUCKETS[bucket]
    rng = np.random.default_rng(policy.seed)
    if sections is None:
        sections = sample_sections(bundle, policy.num_sections, rng)
    eligible = []
    for s in sections:
        q = _quality(bundle, s)
        if lo <= max(1, q.max_hop) <= hi:
            eligible.append(s)
    pairs = [(i, j) for i in range(len(eligible))
             for j in range(i + 1, len(eligible))]
    if len(pairs) > policy.num_pairs:
        idx = rng.choice(len(pairs), size=policy.num_pairs, replace=False)
        pairs = [pairs[i] for i in sorted(idx)]
    geos = sample_base_geodesics(bundle, 2 * n, policy.num_geodesics, rng,
                                 policy.exclude_flagged)
    samples = []
    for gpath in geos:
        lifts = []
        for (i, j) in pairs:
            l1 = [int(eligible[i].values[b]) for b in gpath]
            l2 = [int(eligible[j].values[b]) for b in gpath]
            lifts.append((l1, l2))
        rnd = [random_lift(bundle, gpath, rng)
               for _ in range(policy.random_lifts)]
        lifts.extend((rnd[i], rnd[j]) for i in range(len(rnd))
                     for j in range(i + 1, len(rnd)))
        for l1, l2 in lifts:
            lp = _lift_pair_dists(bundle, gpath, l1, l2)
            if policy.exclude_flagged and lp.flagged:
                continue
            d0 = int(lp.fiber_dists[n])
            dend = max(int(lp.fiber_dists[0]), int(lp.fiber_dists[-1]))
            samples.append((d0, dend, lp))
    positive = [s for s in samples if s[0] > 0]
    if not positive:
        return FlaringEstimate(bucket, None, None, n, "NO-SAMPLES",
                               len(samples), None, None, [], policy, [])
    grid = sorted({float(s[0]) for s in positive})
    best: tuple[float, float] | None = None
    m_table = []
    for M in grid:
        sel = [(d0, dend, lp) for d0, dend, lp in positive if d0 >= M]
        if len(sel) < policy.min_support:
            continue
        ratios = [dend / d0 for d0, dend, lp in sel]
        rmin = min(ratios)
        lam = None
        for cand in sorted(policy.lambda_grid):
            if rmin >= cand:
                lam = cand
        m_table.append((M, lam))
        if lam is not None and (best is None or lam > best[1]):
            best = (M, lam)
    flattest = min(((dend / d0, lp) for d0, dend, lp in positive),
                   key=lambda t: t[0])
    max_ratio = max(dend / d0 for d0, dend, lp in positive)
    if best is not None:
        return FlaringEstimate(bucket, best[0], best[1], n, "PASS",
                               len(samples), float(flattest[0]),
                               float(max_ratio),
                               [flattest[1].to_json()], policy, m_table)
    return FlaringEstimate(bucket, None, None, n, "FAIL", len(samples),
                           float(flattest[0]), float(max_ratio),
                           [flattest[1].to_json()], policy, m_table)


# ---------------------------------------------------------------------
# bounded flaring
# ---------------------------------------------------------------------

@dataclasses.dataclass
class BoundedFlaringProfile:
    k: int
    g_table: np.ndarray          # g(C) = K + 2 f(C+2) for C = 0..cap
    mu_table: np.ndarray         # mu_k(N) = g(2k)^N for N = 0..ncap
    empirical_mu: np.ndarray     # measured max ratio per base distance N
    dominated: bool

    def to_json(self):
        return {"k": self.k,
                "g": [int(v) for v in self.g_table],
                "mu": [float(v) for v in self.mu_table],
                "empirical_mu": [float(v) for v in self.empirical_mu],
                "dominated": self.dominated}


def bounded_flaring_profile(bundle: MetricGraphBundle, bucket: str,
                            profile: PropernessProfile | None = None,
                            n_window: int = 3,
                            policy: FlaringPolicy | None = None,
                            sections: list[Section] | None = None
                            ) -> BoundedFlaringProfile:
    """Closed-form ceiling tables plus the measured per-N growth maxima.

    ``dominated`` records that every measured ratio sits under the
    ceiling mu_k(N) = g(2k)^N, with k the bucket's upper hop bound.
    """
    policy = policy or FlaringPolicy()
    if profile is None:
        profile = measure_properness(bundle)
    k = BUCKETS[bucket][1]
    ncap = max(1, n_window * 2)
    ccap = 2 * k + 3
    g_table = np.array([profile.g_of(C) for C in range(ccap + 1)],
                       dtype=np.int64)
    mu_table = np.array([float(profile.g_of(2 * k)) ** N
                         for N in range(ncap + 1)])
    rng = np.random.default_rng(policy.seed)
    if sections is None:
        sections = sample_sections(bundle, policy.num_sections, rng)
    emp = np.ones(ncap + 1)
    try:
        geos = sample_base_geodesics(bundle, min(ncap, bundle.base.diameter()),
                                     max(8, policy.num_geodesics // 8), rng,
                                     policy.exclude_flagged)
    except GraphError:
        geos = []
    for gpath in geos:
        lifts = [[int(s.values[b]) for b in gpath] for s in sections]
        lifts += [random_lift(bundle, gpath, rng)
                  for _ in range(policy.random_lifts)]
        for i in range(len(lifts)):
            for j in range(i + 1, len(lifts)):
                lp = _lift_pair_dists(bundle, gpath, lifts[i], lifts[j])
                if policy.exclude_flagged and lp.flagged:
                    continue
                d = lp.fiber_dists
                for a in range(len(d)):
                    for b in range(len(d)):
                        N = abs(a - b)
                        if N <= ncap:
                            r = d[a] / max(int(d[b]), 1)
                            if r > emp[N]:
                                emp[N] = r
    dominated = bool((emp <= mu_table + 1e-9).all())
    return BoundedFlaringProfile(k, g_table, mu_table, emp, dominated)


# ---------------------------------------------------------------------
# exponential divergence
# ---------------------------------------------------------------------

def divergence_test(lp: LiftPair, C_grid=(32, 16, 8, 4, 2)) -> dict:
    """Fit d(T + t) ~ A b^t beyond the first index T where the fiber
    distance crosses a grid level C; least-squares on the log."""
    d = np.asarray(lp.fiber_dists, dtype=float)
    for C in sorted(C_grid, reverse=True):
        cross = np.flatnonzero(d >= C)
        if len(cross) == 0:
            continue
        T = int(cross[0])
        tail = d[T:]
        if len(tail) < 3 or (tail <= 0).any():
            continue
        t = np.arange(len(tail), dtype=float)
        slope, intercept = np.polyfit(t, np.log(tail), 1)
        return {"verdict": "divergence", "C": float(C), "T": T,
                "A": float(np.exp(intercept)), "b": float(np.exp(slope)),
                "monotone": bool((np.diff(tail) >= 0).all()),
                "points": int(len(tail))}
    return {"verdict": "no divergence", "C": None,
            "max_distance": float(d.max(initial=0.0))}


# ---------------------------------------------------------------------
# per-ladder flaring
# ---------------------------------------------------------------------

def ladder_flare_check(ladder, M: float, n: int,
                       gamma: list[int] | None = None,
                       factor: float = 2.0,
                       decompose_threshold: int | None = None) -> dict:
    """Doubling check for the ladder restricted over a base geodesic.

    Windows [c-n, c+n] along gamma with central rung length >= M must
    satisfy max(end rungs) >= factor * central rung.  Vacuous PASS when
    no window qualifies (girth everywhere below M).  When the direct
    check fails and a decomposition threshold is given, the ladder is
    split first and the subladders are checked instead.
    """
    bundle = ladder.bundle
    base = bundle.base
    if gamma is None:
        g0, b0 = ladder.girth_witness()
        u = int(base.dist_row(b0).argmax())
        v = int(base.dist_row(u).argmax())
        gamma = base.geodesic(u, v)
    lens = [len(ladder.rungs[b]) - 1 for b in gamma]
    verdict, witnesses = _doubling_windows(lens, M, n, factor)
    out = {"verdict": verdict, "gamma": [int(b) for b in gamma],
           "rung_lengths": lens, "M": M, "n": n, "factor": factor,
           "witnesses": witnesses, "mode": "direct",
           "girth": ladder.girth()}
    if verdict == "FAIL" and decompose_threshold is not None:
        from .ladders import decompose_ladder

        rec = decompose_ladder(ladder, A=decompose_threshold)
        sub_verdicts = []
        for i in range(len(rec.sections) - 1):
            s1, s2 = rec.sections[i], rec.sections[i + 1]
            sub = [bundle.fiber_distance(b, int(s1.values[b]),
                                         int(s2.values[b])) for b in gamma]
            v2, w2 = _doubling_windows(sub, M, n, factor)
            sub_verdicts.append(v2)
        agg = ("PASS" if all(v in ("PASS", "VACUOUS-PASS")
                             for v in sub_verdicts) else "FAIL")
        out.update({"mode": "decomposed", "verdict": agg,
                    "subladder_verdicts": sub_verdicts,
                    "threshold": rec.threshold})
    return out


def _doubling_windows(lens, M, n, factor):
    witnesses = []
    qualified = 0
    for c in range(n, len(lens) - n):
        d0 = lens[c]
        if d0 < M or d0 == 0:
            continue
        qualified += 1
        dend = max(lens[c - n], lens[c + n])
        if dend < factor * d0:
            witnesses.append({"center": c, "d0": d0, "dend": dend,
                              "ratio": dend / d0})
    if qualified == 0:
        return "VACUOUS-PASS", []
    return ("PASS" if not witnesses else "FAIL"), witnesses[:5]


# ---------------------------------------------------------------------
# necessity consistency
# ---------------------------------------------------------------------

def necessity_report(bundle: MetricGraphBundle, n: int = 3,
                     bucket: str = "1-2",
                     policy: FlaringPolicy | None = None) -> dict:
    """Joint hyperbolicity/flaring report: when the total space is
    uniformly hyperbolic with hyperbolic fibers, flaring must pass; a
    flaring failure should come with total-space hyperbolicity degrading
    at scale (checked across instances by check_necessity)."""
    from .hyperbolicity import delta_four_point

    d_total, wit, mode = delta_four_point(bundle.total,
                                          seed=policy.seed if policy else 0)
    d_fib = 0.0
    for b in range(bundle.base.n):
        fg, _ = bundle.fiber_graph(b)
        if fg.n >= 4:
            d, _, _ = delta_four_point(fg)
            d_fib = max(d_fib, d)
    try:
        est = flare_test(bundle, bucket, n, policy)
        flare = est.to_json()
        flare_verdict = est.verdict
    except GraphError as exc:
        flare = {"error": str(exc)}
        flare_verdict = "VACUOUS-PASS"
    return {"delta_total_4pt": d_total, "delta_fiber_max_4pt": d_fib,
            "flare": flare, "flare_verdict": flare_verdict,
            "total_mode": mode}


def check_necessity(reports: list[dict]) -> dict:
    """Cross-scale consistency: a family that fails flaring must show its
    total-space delta strictly growing with scale, and a family whose
    delta is scale-stable must pass flaring everywhere.

    ``reports`` is ordered by increasing instance scale for one family.
    """
    deltas = [r["delta_total_4pt"] for r in reports]
    verdicts = [r["flare_verdict"] for r in reports]
    growing = all(b > a for a, b in zip(deltas, deltas[1:]))
    stable = (max(deltas) <= 1.5 * max(min(deltas), 0.5))
    any_fail = any(v == "FAIL" for v in verdicts)
    consistent = growing if any_fail else stable
    return {"deltas": deltas, "verdicts": verdicts, "delta_growing": growing,
            "delta_stable": stable, "consistent": consistent}
