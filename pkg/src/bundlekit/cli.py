"""Batch CLI: generate instances, verify, analyze, emit reports.

One process, batch mode only.  Reports are machine-parseable JSON with
the full run configuration echoed; progress goes to stderr.  Identical
config + seed produces byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bundle import BundleError, load_bundle, measure_properness
from .flaring import (FlaringPolicy, bounded_flaring_profile, flare_test,
                      necessity_report)
from .generators import (cycle_graph, generate_extension_bundle,
                         generate_horocycle_bundle, generate_product_bundle,
                         grid_graph, path_graph)
from .graph import Graph, GraphError, load_graph
from .hyperbolicity import TrianglePolicy, delta_slim
from .ladders import (GlobalPaths, HamenstadtConfig, build_ladder,
                      decompose_ladder, check_rung_monotonicity,
                      hamenstadt_check, retraction_lipschitz)
from .sections import (barycenter_flow_section,
                       barycenter_surjectivity_report,
                       measure_section_quality, section_from_lines)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _runconfig(args: argparse.Namespace) -> dict:
    # output destinations do not affect results; keeping them out of the
    # echo preserves byte-identical reports across output locations
    skip = {"func", "out", "dump", "csv"}
    cfg = {k: v for k, v in vars(args).items()
           if k not in skip and v is not None}
    cfg["version"] = __version__
    return cfg


def parse_graph_spec(spec: str) -> Graph:
    """path:N | cycle:N | grid:RxC | a file path with an edge list."""
    if ":" in spec:
        kind, _, arg = spec.partition(":")
        if kind == "path":
            return path_graph(int(arg))
        if kind == "cycle":
            return cycle_graph(int(arg))
        if kind == "grid":
            r, _, c = arg.partition("x")
            return grid_graph(int(r), int(c))
        raise GraphError(f"unknown graph spec {spec!r}")
    return load_graph(spec)


# ---------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.kind == "product":
        bundle = generate_product_bundle(parse_graph_spec(args.base),
                                         parse_graph_spec(args.fiber))
    elif args.kind == "horocycle":
        bundle = generate_horocycle_bundle(T=args.T, W=args.W, h=args.mesh,
                                           c=args.c)
    elif args.kind == "extension":
        bundle = generate_extension_bundle(
            args.radius, args.base_kind, args.base_size,
            monodromy=args.monodromy,
            monodromy2=args.monodromy2)
    else:
        raise GraphError(f"unknown generator {args.kind!r}")
    bundle.save(args.out)
    _emit({"config": _runconfig(args), "total_vertices": bundle.total.n,
           "total_edges": bundle.total.num_edges,
           "base_vertices": bundle.base.n,
           "fiber_sizes": [len(f) for f in bundle.fibers],
           "meta": bundle.meta},
          args.out + ".provenance.json")
    _log(f"wrote {args.out} ({bundle.total.n} vertices)")
    return 0


def cmd_verify(args) -> int:
    try:
        bundle = load_bundle(args.bundle)
    except (BundleError, GraphError) as exc:
        payload = {"config": _runconfig(args), "valid": False,
                   "error": str(exc)}
        if isinstance(exc, BundleError):
            payload["axiom"] = exc.axiom
            payload["witness"] = exc.witness
        _emit(payload, args.out)
        return 1
    _emit({"config": _runconfig(args), "valid": True,
           "total_vertices": bundle.total.n,
           "base_vertices": bundle.base.n}, args.out)
    return 0


def _analysis_hyperbolicity(bundle, args) -> dict:
    # prefill the distance matrix with the requested worker count; the
    # measurements then read cached rows
    if bundle.total.oracle.mode == "exact-matrix" and args.threads > 1:
        bundle.total.oracle.all_pairs(threads=args.threads)
    policy = TrianglePolicy(samples=args.samples, seed=args.seed)
    rep = delta_slim(bundle.total, policy)
    fib = 0.0
    for b in range(bundle.base.n):
        fg, _ = bundle.fiber_graph(b)
        if fg.n >= 3:
            fr = delta_slim(fg, TrianglePolicy(samples=min(args.samples, 2000),
                                               seed=args.seed))
            fib = max(fib, fr.delta_slim)
    return {"total": rep.to_json(), "fiber_delta_slim_max": fib}


def _analysis_sections(bundle, args) -> dict:
    rng = np.random.default_rng(args.seed)
    count = min(args.sections, bundle.total.n)
    xs = sorted(int(v) for v in
                rng.choice(bundle.total.n, size=count, replace=False))
    rows = []
    for x in xs:
        s = barycenter_flow_section(bundle, x)
        q = measure_section_quality(bundle, s)
        rows.append({"through": x, "provenance": s.provenance,
                     **q.to_json()})
    surj = barycenter_surjectivity_report(bundle, seed=args.seed)
    return {"sections": rows,
            "k_max": max((r["k"] for r in rows), default=None),
            "hop_max": max((r["max_hop"] for r in rows), default=None),
            "surjectivity": surj}


def _analysis_ladder(bundle, args) -> dict:
    rng = np.random.default_rng(args.seed)
    x, y = (int(v) for v in rng.choice(bundle.total.n, size=2, replace=False))
    s1 = barycenter_flow_section(bundle, x)
    s2 = barycenter_flow_section(bundle, y)
    lad = build_ladder(bundle, s1, s2, args.L)
    rec = decompose_ladder(lad)
    mono = check_rung_monotonicity(lad, rec)
    return {"through": [x, y], "girth": lad.girth(), "L": lad.L,
            "meta": lad.meta,
            "retraction": retraction_lipschitz(lad, seed=args.seed),
            "decomposition": rec.to_json(),
            "monotonicity": {k: v for k, v in mono.items()
                             if k != "witness"}}


def _analysis_flaring(bundle, args) -> dict:
    policy = FlaringPolicy(num_geodesics=args.geodesics,
                           num_sections=args.sections, seed=args.seed)
    out: dict = {"buckets": {}}
    for bucket in ("1-2", "3-4"):
        try:
            est = flare_test(bundle, bucket, args.n, policy)
            out["buckets"][bucket] = est.to_json()
        except GraphError as exc:
            out["buckets"][bucket] = {"error": str(exc)}
    prof = measure_properness(bundle)
    out["properness"] = prof.to_json()
    out["bounded"] = bounded_flaring_profile(
        bundle, "1-2", profile=prof, policy=policy).to_json()
    return out


def cmd_analyze(args) -> int:
    bundle = load_bundle(args.bundle)
    which = args.which
    payload: dict = {"config": _runconfig(args)}
    if which in ("hyperbolicity", "full"):
        _log("analyzing hyperbolicity ...")
        payload["hyperbolicity"] = _analysis_hyperbolicity(bundle, args)
    if which in ("sections", "full"):
        _log("analyzing sections ...")
        payload["sections"] = _analysis_sections(bundle, args)
    if which in ("ladder", "full"):
        _log("analyzing ladders ...")
        payload["ladder"] = _analysis_ladder(bundle, args)
    if which in ("flaring", "full"):
        _log("analyzing flaring ...")
        payload["flaring"] = _analysis_flaring(bundle, args)
    if which == "necessity":
        payload["necessity"] = necessity_report(
            bundle, n=args.n,
            policy=FlaringPolicy(num_geodesics=args.geodesics,
                                 num_sections=args.sections, seed=args.seed))
    _emit(payload, args.out)
    return 0


def cmd_section(args) -> int:
    bundle = load_bundle(args.bundle)
    s = barycenter_flow_section(bundle, args.through)
    q = measure_section_quality(bundle, s)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(s.to_lines())
    _emit({"config": _runconfig(args), "quality": q.to_json(),
           "provenance": s.provenance,
           "warnings": s.meta.get("warning"),
           "reanchored": s.meta.get("reanchored", [])},
          (args.out + ".json") if args.out else None)
    return 0


def cmd_ladder(args) -> int:
    bundle = load_bundle(args.bundle)
    with open(args.s1, encoding="utf-8") as fh:
        s1 = section_from_lines(fh.read())
    with open(args.s2, encoding="utf-8") as fh:
        s2 = section_from_lines(fh.read())
    lad = build_ladder(bundle, s1, s2, args.L)
    rec = decompose_ladder(lad, A=args.A)
    mono = check_rung_monotonicity(lad, rec)
    _emit({"config": _runconfig(args), "girth": lad.girth(), "L": lad.L,
           "retraction": retraction_lipschitz(lad, seed=args.seed),
           "decomposition": rec.to_json(),
           "monotonicity": {k: v for k, v in mono.items() if k != "witness"}},
          args.out)
    return 0 if mono["ok"] else 1


def cmd_flare(args) -> int:
    bundle = load_bundle(args.bundle)
    policy = FlaringPolicy(num_geodesics=args.geodesics,
                           num_sections=args.sections, seed=args.seed)
    est = flare_test(bundle, args.bucket, args.n, policy)
    payload = {"config": _runconfig(args), **est.to_json()}
    _emit(payload, args.out)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("witness,index,distance\n")
            for wi, w in enumerate(est.witnesses):
                for i, d in enumerate(w["distances"]):
                    fh.write(f"{wi},{i},{d}\n")
    return 0


def cmd_paths(args) -> int:
    bundle = load_bundle(args.bundle)
    fam = GlobalPaths(bundle, args.L)
    pairs = []
    with open(args.pairs, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            x, y = (int(v) for v in line.split())
            bundle.total.check_vertex(x)
            bundle.total.check_vertex(y)
            pairs.append((x, y))
    dump = fam.dump_jsonl(pairs)
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            fh.write(dump)
    else:
        sys.stdout.write(dump)
    rep = hamenstadt_check(fam, bundle.total,
                           HamenstadtConfig(seed=args.seed))
    _emit({"config": _runconfig(args), "hamenstadt": rep.to_json()},
          args.out)
    return 0


def cmd_report(args) -> int:
    for path in args.reports:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        print(f"== {path}")
        for key in sorted(data):
            if key == "config":
                continue
            val = data[key]
            if isinstance(val, dict):
                brief = {k: val[k] for k in sorted(val)
                         if not isinstance(val[k], (dict, list))}
                print(f"  {key}: {brief}")
            else:
                print(f"  {key}: {val}")
    return 0


# ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bundlekit",
        description="coarse geometry of metric graph bundles")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None)

    g = sub.add_parser("generate", help="generate a bundle instance")
    g.add_argument("--kind", required=True,
                   choices=["product", "horocycle", "extension"])
    g.add_argument("--base", default="path:4",
                   help="product base graph spec (path:N|cycle:N|grid:RxC|file)")
    g.add_argument("--fiber", default="path:4")
    g.add_argument("--T", type=float, default=4.0)
    g.add_argument("--W", type=float, default=16.0)
    g.add_argument("--mesh", type=float, default=1.0)
    g.add_argument("--c", type=float, default=1.0)
    g.add_argument("--radius", type=int, default=3)
    g.add_argument("--base-kind", default="interval",
                   choices=["interval", "box"])
    g.add_argument("--base-size", type=int, default=4)
    g.add_argument("--monodromy", default="a->a,b->b",
                   help='e.g. "a->ab,b->a"')
    g.add_argument("--monodromy2", default=None)
    common(g)
    g.set_defaults(func=cmd_generate)
    v = sub.add_parser("verify", help="check the bundle axioms")
    v.add_argument("bundle")
    common(v)
    v.set_defaults(func=cmd_verify)
    a = sub.add_parser("analyze", help="run analyses, emit a JSON report")
    a.add_argument("bundle")
    a.add_argument("--which", default="full",
                   choices=["hyperbolicity", "sections", "ladder",
                            "flaring", "necessity", "full"])
    a.add_argument("--samples", type=int, default=2000)
    a.add_argument("--sections", type=int, default=8)
    a.add_argument("--geodesics", type=int, default=60)
    a.add_argument("--n", type=int, default=1)
    a.add_argument("--L", type=int, default=4)
    common(a)
    a.set_defaults(func=cmd_analyze)
    s = sub.add_parser("section", help="build a barycenter-flow section")
    s.add_argument("bundle")
    s.add_argument("--through", type=int, required=True)
    common(s)
    s.set_defaults(func=cmd_section)
    l = sub.add_parser("ladder", help="ladder between two section files")
    l.add_argument("bundle")
    l.add_argument("--s1", required=True)
    l.add_argument("--s2", required=True)
    l.add_argument("--L", type=int, default=4)
    l.add_argument("--A", type=int, default=None)
    common(l)
    l.set_defaults(func=cmd_ladder)
    f = sub.add_parser("flare", help="empirical flaring estimate")
    f.add_argument("bundle")
    f.add_argument("--bucket", default="1-2", choices=["1-2", "3-4", "5-8"])
    f.add_argument("--n", type=int, default=1)
    f.add_argument("--geodesics", type=int, default=60)
    f.add_argument("--sections", type=int, default=8)
    f.add_argument("--csv", default=None)
    common(f)
    f.set_defaults(func=cmd_flare)
    p = sub.add_parser("paths", help="global path family + criterion check")
    p.add_argument("bundle")
    p.add_argument("--pairs", required=True)
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--dump", default=None)
    common(p)
    p.set_defaults(func=cmd_paths)
    r = sub.add_parser("report", help="summarize saved reports")
    r.add_argument("reports", nargs="+")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (BundleError, GraphError) as exc:
        _log(f"error: {exc}")
        return 1
    except AssertionError as exc:
        _log(f"invariant violated: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
