"""Command-line entry point.

Exit codes: 0 analysis completed (pass, or results emitted), 2 verdict fail
with a witness or counterexample, 1 usage or input error.  Errors go to
stderr as JSON with a machine-readable ``code``.

CSV columns:

* ``skeleton --emit-csv``: ``vertex,param``
* ``urysohn --csv``: ``vertex,value``
* ``curvature scan``: ``r,F,err``
* ``volume-growth --csv``: ``t,count``
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import __version__
from .curvature import tangent_hypothesis_scan
from .curvature.l14 import DEFAULT_C1, DEFAULT_EPS_PRIME, l14_search
from .curvature.manifolds import from_name
from .errors import InputError, ThinspaceError
from .growth import volume_growth
from .io import (
    dumps_report,
    load_graph,
    load_points,
    read_json,
    resolve_vertex,
    write_csv,
)
from .skeleton import extract_skeleton, skeleton_from_dict
from .thinness import ThinnessReport, replay_witness, thin_check, thinness_profile
from .urysohn import build_urysohn_map, edge_defect

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(InputError):
    code = "E_USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    """Comma list of numbers.

    ``a,b,...,z`` (also with ``…``) continues the step ``b - a`` up to ``z``;
    ``a,b,c,...,z`` with a constant ratio continues geometrically.
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        if not any(p in ("...", "…") for p in parts):
            return [float(p) for p in parts]
        k = parts.index("..." if "..." in parts else "…")
        if k < 2 or k != len(parts) - 2:
            raise UsageError(f"cannot expand {text!r}: use a,b,...,z")
        head = [float(p) for p in parts[:k]]
        last = float(parts[-1])
    except ValueError:
        raise UsageError(f"not a list of numbers: {text!r}") from None
    a, b = head[0], head[1]
    ratio = b / a if a else 0.0
    geometric = (len(head) >= 3 and a > 0 and ratio > 1
                 and all(math.isclose(y / x, ratio) for x, y in zip(head, head[1:])))
    out = []
    i = 0
    while True:
        v = a * ratio**i if geometric else a + i * (b - a)
        if b <= a or v > last * (1 + 1e-12) + 1e-12:
            break
        out.append(v)
        i += 1
    if not out or not math.isclose(out[-1], last) or not all(
            math.isclose(x, y) for x, y in zip(out, head)):
        raise UsageError(f"{text!r} is not a progression ending at {last}")
    out[-1] = last
    return out


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("THINSPACE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"THINSPACE_THREADS must be an integer, got {env!r}") from None
    return 1


def _space(args):
    if args.graph and args.points:
        raise UsageError("give either --graph or --points")
    if args.graph:
        return load_graph(args.graph), {"graph": args.graph}
    if args.points:
        return load_points(args.points, args.k), {"points": args.points, "k": args.k}
    raise UsageError("an input is required: --graph g.json or --points cloud.csv")


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report(args, command: str, source: dict | None, body: dict) -> str:
    doc = {"command": command, "seed": args.seed, **body}
    if source is not None:
        doc["input"] = source
    return dumps_report(doc)


# -- commands -------------------------------------------------------------------

def cmd_thin_check(args) -> int:
    space, src = _space(args)
    rep = thin_check(space, args.R, args.D, t_step=args.t_step, tol=args.tol,
                     segment_budget=args.budget, sample=not args.exhaustive,
                     workers=_threads(args))
    _emit(args, _report(args, "thin-check", src, {"report": rep.to_dict()}))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_profile(args) -> int:
    space, src = _space(args)
    prof = thinness_profile(space, _floats(args.R_grid), _floats(args.D_grid),
                            tol=args.tol, segment_budget=args.budget,
                            sample=not args.exhaustive, workers=_threads(args))
    _emit(args, _report(args, "profile", src, {"profile": prof.to_dict()}))
    return EXIT_OK


def cmd_skeleton(args) -> int:
    space, src = _space(args)
    if args.evidence:
        evidence = read_json(args.evidence)
        evidence = evidence.get("report", evidence)
    else:
        rep = thin_check(space, args.R, args.D, tol=args.tol, segment_budget=args.budget,
                         workers=_threads(args))
        if not rep.passed:
            _emit(args, _report(args, "skeleton", src, {"report": rep.to_dict(),
                                                        "skeleton": None}))
            return EXIT_FAIL
        evidence = rep
    sk = extract_skeleton(space, args.R, args.D, evidence, mode=args.mode)
    if args.emit_csv:
        write_csv(args.emit_csv, ["vertex", "param"], zip(sk.support.path, sk.support.params))
    _emit(args, _report(args, "skeleton", src, {"skeleton": sk.to_dict()}))
    return EXIT_OK


def cmd_urysohn(args) -> int:
    space, src = _space(args)
    doc = read_json(args.skeleton)
    sk = skeleton_from_dict(space, doc.get("skeleton", doc))
    umap = build_urysohn_map(space, sk, args.R, args.bin)
    if args.csv:
        write_csv(args.csv, ["vertex", "value"],
                  zip(space.vertices, (float(v) for v in umap.values)))
    body = {"urysohn": umap.summary(), "edge_defect": edge_defect(space, umap)}
    _emit(args, _report(args, "urysohn", src, body))
    return EXIT_OK


def _manifold(args):
    kw = {}
    for name in ("n", "rho", "d", "h"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    try:
        return from_name(args.family, **kw)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {args.family}: {exc}") from None


def cmd_curvature_scan(args) -> int:
    m = _manifold(args)
    scan = tangent_hypothesis_scan(m, None, args.k, args.alpha, args.L, _floats(args.r),
                                   method=args.method,
                                   seed=args.seed if args.method == "monte_carlo" else None)
    if args.format == "json":
        _emit(args, _report(args, "curvature scan", None,
                            {"manifold": m.describe(), "scan": scan.to_dict()}))
    else:
        out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
        try:
            write_csv(out, ["r", "F", "err"], scan.rows)
        finally:
            if args.out:
                out.close()
    return EXIT_OK


def cmd_curvature_l14(args) -> int:
    res = l14_search(args.n, args.k, args.eps, args.c, args.trials, args.seed,
                     c1=args.c1, eps_prime=args.eps_prime)
    verdict = "violation" if res.found else "no violation"
    _emit(args, _report(args, "curvature l14", None, {"verdict": verdict, "search": res.to_dict()}))
    return EXIT_FAIL if res.found else EXIT_OK


def cmd_volume_growth(args) -> int:
    space, src = _space(args)
    base = resolve_vertex(space, args.base)
    vg = volume_growth(space, base, _floats(args.t))
    if args.csv:
        write_csv(args.csv, ["t", "count"], zip(vg.t, vg.counts))
    _emit(args, _report(args, "volume-growth", src, {"growth": vg.to_dict()}))
    return EXIT_OK


def cmd_replay(args) -> int:
    doc = read_json(args.witness)
    report = doc.get("report", doc)
    src = doc.get("input", {})
    graph = args.graph or src.get("graph")
    if args.graph or "graph" in src:
        space = load_graph(graph)
    elif "points" in src:
        space = load_points(src["points"], src.get("k", 8))
    else:
        raise UsageError("the witness file names no input; pass --graph")
    ThinnessReport(report["R"], report["D"], report["verdict"])  # validates R, D
    ok = replay_witness(space, report)
    _emit(args, _report(args, "replay", None, {"replayed": ok, "witness": report.get("witness")}))
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ------------------------------------------------------------------------

def _common(p, graph_input: bool = True) -> None:
    if graph_input:
        p.add_argument("--graph", help="graph JSON file")
        p.add_argument("--points", help="point-cloud CSV file")
        p.add_argument("--k", type=int, default=8, help="neighbours for --points (default 8)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", help="write the report here instead of stdout")


def _thin_opts(p) -> None:
    p.add_argument("--tol", type=float, default=None, help="fiber slack (default: min(edge scale, R/4))")
    p.add_argument("--budget", type=int, default=None, help="segment budget")
    p.add_argument("--exhaustive", action="store_true", help="check every segment")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="thinspace", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"thinspace {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("thin-check", help="certify (R, D)-thinness or produce a witness")
    _common(p)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--t-step", default="auto")
    _thin_opts(p)
    p.set_defaults(func=cmd_thin_check)

    p = sub.add_parser("profile", help="least passing D for each R")
    _common(p)
    p.add_argument("--R-grid", required=True)
    p.add_argument("--D-grid", required=True)
    _thin_opts(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("skeleton", help="extract a segment or circle skeleton")
    _common(p)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--evidence", help="passing thin-check report JSON")
    p.add_argument("--emit-csv", help="write the support as vertex,param")
    p.add_argument("--mode", default="auto", choices=["auto", "exhaustive", "double_sweep"])
    _thin_opts(p)
    p.set_defaults(func=cmd_skeleton)

    p = sub.add_parser("urysohn", help="explicit Urysohn map and fiber diameters")
    _common(p)
    p.add_argument("--skeleton", required=True, help="skeleton JSON")
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--bin", type=float, default=None, help="bin width (default R/10)")
    p.add_argument("--csv", help="write vertex,value")
    p.set_defaults(func=cmd_urysohn)

    p = sub.add_parser("curvature", help="curvature probes")
    csub = p.add_subparsers(dest="curvature_command", parser_class=_Parser)
    q = csub.add_parser("scan", help="tangent-cone hypothesis functional along r")
    _common(q, graph_input=False)
    q.add_argument("--family", required=True)
    q.add_argument("--n", type=int)
    q.add_argument("--rho", type=float)
    q.add_argument("--d", type=int)
    q.add_argument("--h", type=float)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--L", type=float, required=True)
    q.add_argument("--r", required=True, help="radii, e.g. 1,2,4,...,512")
    q.add_argument("--method", default="quadrature", choices=["quadrature", "monte_carlo"])
    q.add_argument("--format", default="csv", choices=["csv", "json"])
    q.set_defaults(func=cmd_curvature_scan)
    q = csub.add_parser("l14", help="random search for violations of the eigenvalue inequality")
    _common(q, graph_input=False)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--eps", type=float, default=1.0)
    q.add_argument("--c", type=float, default=4.0)
    q.add_argument("--c1", type=float, default=DEFAULT_C1)
    q.add_argument("--eps-prime", type=float, default=DEFAULT_EPS_PRIME)
    q.add_argument("--trials", type=int, default=10**6)
    q.set_defaults(func=cmd_curvature_l14)

    p = sub.add_parser("volume-growth", help="ball counts and a linear fit")
    _common(p)
    p.add_argument("--base", required=True)
    p.add_argument("--t", required=True, help="radii, e.g. 10,20,...,1000")
    p.add_argument("--csv", help="write t,count")
    p.set_defaults(func=cmd_volume_growth)

    p = sub.add_parser("replay", help="re-verify a thin-check witness")
    p.add_argument("witness")
    p.add_argument("--graph", help="override the graph named in the witness file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)
    return ap


def _error(exc: ThinspaceError) -> int:
    sys.stderr.write(dumps_report({"error": {"code": exc.code, "message": str(exc)}}))
    return EXIT_ERROR


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("a command is required")
        if getattr(args, "t_step", None) is not None:
            args.t_step = None if args.t_step == "auto" else _float_arg(args.t_step, "--t-step")
        return args.func(args)
    except ThinspaceError as exc:
        return _error(exc)


def _float_arg(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{name} must be a number or 'auto'") from None


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
