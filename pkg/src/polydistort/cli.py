"""polydistort command line: generate, analyze, certify, report.

Exit codes: 0 success, 1 I/O error, 2 config or input error, 3 hypothesis rejected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .complex import SkeletonSquareComplex
from .generators import EmbeddingError, make_replacement_surface
from .geometry import MeshError, TriangleFan, TriangleMesh, extrinsic_diameter, minimal_enclosing_ball
from .packing import jung_constant
from .predicates import validate_embedding
from .search import (
    SeparationError,
    ball_area_sup,
    certify_volume_hypothesis,
    count_separated_pairs,
    find_distorted_pair,
    greedy_net,
)
from .spaces import space_for
from .triangular import InconsistencyError, Rejection, rtriangular_reduce, skeleton_transfer, theorem2_certify

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_REJECT = 0, 1, 2, 3
DEFAULT_R = jung_constant(3) / 3

log = logging.getLogger("polydistort")


class CliError(Exception):
    def __init__(self, msg: str, code: int):
        super().__init__(msg)
        self.code = code


def _read(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    try:
        return io.loads(text)
    except (io.FormatError, MeshError, ValueError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_CONFIG) from None


def _write(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _kind(obj) -> str:
    if isinstance(obj, TriangleFan):
        return "fan"
    if isinstance(obj, SkeletonSquareComplex):
        return "complex"
    return "mesh"


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    src = " ".join(args.spec)
    if args.config:
        try:
            src = Path(args.config).read_text()
        except OSError as exc:
            raise CliError(f"cannot read {args.config}: {exc.strerror or exc}", EXIT_IO) from None
    if not src.strip():
        raise CliError("nothing to generate: give a spec or --config", EXIT_CONFIG)
    try:
        obj = io.build_from_config(src, check=args.check)
    except (io.ConfigError, ValueError, EmbeddingError) as exc:
        raise CliError(f"generation failed: {exc}", EXIT_CONFIG) from None
    _write(args.out, io.dumps(obj))
    sp = space_for(obj)
    if isinstance(obj, SkeletonSquareComplex):
        print(f"complex N={obj.N} vertices={obj.n_vertices} edges={len(obj.edges)} squares={obj.n_vertices}")
        status = "embedded (disjoint grid squares)"
    else:
        mesh = obj.mesh if isinstance(obj, TriangleFan) else obj
        print(f"vertices={mesh.n_vertices} faces={mesh.n_faces}")
        status = "embedded" if validate_embedding(mesh).embedded else "SELF-INTERSECTING"
    print(f"area={sp.area!r}")
    print(f"embedding check: {status}")
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _sampled_K(sp, pts, samples: int, seed: int) -> float:
    n = len(pts)
    if n < 2:
        return 1.0
    xyz = sp.positions(pts)
    total = n * (n - 1) // 2
    if total <= samples:
        best = 1.0
        for i in range(n - 1):
            d = sp.distances_from(pts[i], pts[i + 1 :])
            e = np.linalg.norm(xyz[i + 1 :] - xyz[i], axis=1)
            ok = e > 0
            if ok.any():
                best = max(best, float((d[ok] / e[ok]).max()))
        return best
    rng = np.random.default_rng(seed)
    I = rng.integers(0, n, samples)
    J = rng.integers(0, n, samples)
    best = 1.0
    for i in np.unique(I):
        js = J[I == i]
        d = sp.distances_from(pts[i], [pts[j] for j in js])
        e = np.linalg.norm(xyz[js] - xyz[i], axis=1)
        ok = e > 0
        if ok.any():
            best = max(best, float((d[ok] / e[ok]).max()))
    return best


def _a_X(sp, r: float, subdiv: int) -> float | None:
    cand = sp.candidates()
    n = 1
    while cand.h >= r and n < 16:
        n += 1
        cand = sp.sample(n)
    if cand.h >= r:
        return None
    return ball_area_sup(sp, r, cand.points, cand.h, subdiv)


def analyze_one(path: str, rs, deltas, level: int, samples: int, seed: int, model: str, subdiv: int) -> tuple[list[str], list[dict]]:
    obj = _read(path)
    sp = space_for(obj, level=level, model=model)
    corners = sp.positions(sp.area_pieces(1)[0])
    ball = minimal_enclosing_ball(corners)
    diam = extrinsic_diameter(corners)
    kind = _kind(obj)
    N = obj.N if kind == "complex" else (obj.k if kind == "fan" else None)
    cand = sp.candidates()
    Kmax = _sampled_K(sp, cand.points, samples, seed)
    lines = [
        f"{path}: {kind} ({sp.method}, exact={sp.exact})",
        f"  area = {sp.area!r}",
        f"  MEB center = {np.array2string(ball.center, precision=6)}, radius = {ball.radius!r}",
        f"  normalized copy: radius 1, extrinsic diameter {diam / ball.radius:.9f} (Jung bound {jung_constant(3):.9f})",
        f"  candidates = {len(cand.points)}, density h = {cand.h:.6g}",
        f"  sampled K max = {Kmax!r}",
    ]
    rows = []
    for r in rs:
        net = greedy_net(sp, r)
        ax = _a_X(sp, r, subdiv)
        lines.append(f"  r = {r:.6g}: net size {net.size}, a_X estimate {'n/a' if ax is None else f'{ax:.6g}'}")
        for d in deltas:
            cert = find_distorted_pair(sp, r, d, net=net)
            K = None if cert is None else cert.K_lower
            lines.append(f"    delta = {d:.6g}: K_lower {'none (no pair within delta)' if K is None else f'{K:.6g}'}")
            rows.append(
                {
                    "source": Path(path).name,
                    "kind": kind,
                    "N": N,
                    "area": sp.area,
                    "meb_radius": ball.radius,
                    "normalized_diameter": diam / ball.radius,
                    "r": r,
                    "delta": d,
                    "net_size": net.size,
                    "K_sampled_max": Kmax,
                    "a_X": ax,
                    "K_lower": K,
                    "method": sp.method,
                }
            )
    return lines, rows


def cmd_analyze(args) -> int:
    rs = args.r or [DEFAULT_R]
    deltas = args.delta or [0.5]
    if any(not x > 0 for x in rs + deltas):
        raise CliError("--r and --delta must be positive", EXIT_CONFIG)
    job = (rs, deltas, args.level, args.samples, args.seed, args.model, args.subdiv)
    if args.jobs > 1 and len(args.paths) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            futures = [pool.submit(analyze_one, p, *job) for p in args.paths]
            results = [f.result() for f in futures]
    else:
        results = [analyze_one(p, *job) for p in args.paths]
    rows = []
    for lines, rr in results:
        print("\n".join(lines))
        rows += rr
    if args.csv:
        try:
            io.write_csv(args.csv, rows)
        except OSError as exc:
            raise CliError(f"cannot write {args.csv}: {exc.strerror or exc}", EXIT_IO) from None
        print(f"wrote {len(rows)} rows to {args.csv}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------


def _need_fan(obj, mode):
    if not isinstance(obj, TriangleFan):
        raise CliError(f"mode {mode} needs a fan file (DMESH with a FAN line)", EXIT_CONFIG)
    return obj


def _show(cert) -> str:
    return (
        f"{cert.provenance}: K_lower = {cert.K_lower:.9g} (intrinsic {cert.intrinsic:.9g} [{cert.method}], "
        f"extrinsic {cert.extrinsic:.9g}, certified={cert.certified})"
    )


def cmd_certify(args) -> int:
    obj = _read(args.path)
    delta = args.delta
    if not delta > 0:
        raise CliError("--delta must be positive", EXIT_CONFIG)
    mode = args.mode
    extra: dict = {"mode": mode, "input": str(args.path)}
    try:
        if mode == "lemma1":
            r = args.r[0] if args.r else DEFAULT_R
            sp = space_for(obj, level=args.level, model=args.model)
            verdict = certify_volume_hypothesis(sp.area, 3, 2, delta)
            extra["volume_hypothesis"] = verdict.to_dict()
            print(
                f"volume hypothesis: area {verdict.area:.6g} {'>' if verdict.holds else '<='} "
                f"C*beta = {verdict.C:.6g}*{verdict.beta_upper} = {verdict.threshold:.6g}"
            )
            if args.count is not None:
                certs = count_separated_pairs(sp, r, delta, args.count, epsilon=args.epsilon)
            else:
                cert = find_distorted_pair(sp, r, delta)
                if cert is None:
                    if verdict.holds:
                        raise InconsistencyError("volume hypothesis holds but no net pair is within delta")
                    print(f"rejected: no net pair within delta; deficit {verdict.deficit:.6g}")
                    return EXIT_REJECT
                certs = [cert]
        elif mode == "theorem2":
            certs = [theorem2_certify(_need_fan(obj, mode), delta).certificate]
        elif mode == "rtriangular":
            certs = [rtriangular_reduce(_need_fan(obj, mode), delta).certificate]
        else:
            fan = _need_fan(obj, mode)
            base = theorem2_certify(fan, delta).certificate
            reps = [(f"lift {h:g}", make_replacement_surface(fan, h)) for h in args.lift]
            for p in args.replacement:
                rep = _read(p)
                if not isinstance(rep, TriangleMesh):
                    raise CliError(f"{p}: replacement must be a plain DMESH surface", EXIT_CONFIG)
                reps.append((p, rep))
            if not reps:
                raise CliError("transfer needs --lift or --replacement", EXIT_CONFIG)
            certs = [base]
            for name, rep in reps:
                c = skeleton_transfer(base, fan, rep)
                print(f"  {name}: area {c.params['replacement_area']:.9g}, skeleton deviation {c.params['skeleton_deviation']:.3g}")
                certs.append(c)
    except Rejection as exc:
        print(f"rejected: {exc}; deficit {exc.deficit:.6g}")
        return EXIT_REJECT
    except SeparationError as exc:
        print(f"rejected: {exc}; achieved {exc.achieved}")
        return EXIT_REJECT
    except EmbeddingError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from None
    except InconsistencyError as exc:
        raise CliError(f"inconsistency: {exc}", EXIT_CONFIG) from None
    for c in certs:
        print(_show(c))
    if args.out:
        try:
            io.write_certificates(args.out, certs, extra)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc.strerror or exc}", EXIT_IO) from None
        print(f"wrote {len(certs)} certificate(s) to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def cmd_report(args) -> int:
    from .report import render

    rows = []
    for p in args.csv:
        try:
            rows += io.read_csv(p)
        except OSError as exc:
            raise CliError(f"cannot read {p}: {exc.strerror or exc}", EXIT_IO) from None
        except io.FormatError as exc:
            raise CliError(f"{p}: malformed CSV: {exc}", EXIT_CONFIG) from None
    if not rows:
        print("warning: no data rows; writing an empty plot", file=sys.stderr)
    _write(args.out, render(rows))
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polydistort", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a fan, X_N complex or tent surface from a config")
    g.add_argument("spec", nargs="*", help="inline config, e.g. 'fan k=24 theta=pi/6 R=1'")
    g.add_argument("--config", help="config file (one generator per line)")
    g.add_argument("-o", "--out", required=True)
    g.add_argument("--check", choices=["auto", "full", "sectors"], default="auto")
    g.set_defaults(func=cmd_generate)

    def common(p):
        p.add_argument("--r", type=float, action="append", help="net radius (repeatable)")
        p.add_argument("--delta", type=float, action="append", help="extrinsic closeness (repeatable)")
        p.add_argument("--level", type=int, default=3, help="graph refinement level for general meshes")
        p.add_argument("--model", choices=["exact", "center"], default="exact", help="X_N distance model")
        p.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("analyze", help="area, enclosing ball, sampled distortion, nets")
    a.add_argument("paths", nargs="+")
    common(a)
    a.add_argument("--samples", type=int, default=10_000, help="random candidate pairs when not exhaustive")
    a.add_argument("--subdiv", type=int, default=4, help="tiling refinement for ball areas")
    a.add_argument("--csv")
    a.add_argument("--jobs", type=int, default=1)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("certify", help="emit distortion certificates")
    c.add_argument("path")
    c.add_argument("--mode", choices=["lemma1", "theorem2", "rtriangular", "transfer"], required=True)
    common(c)
    c.add_argument("--epsilon", type=float)
    c.add_argument("--count", type=int, metavar="N", help="lemma1: find N+1 separated pairs")
    c.add_argument("--lift", type=float, action="append", default=[], help="transfer: tent lift (repeatable)")
    c.add_argument("--replacement", action="append", default=[], help="transfer: replacement DMESH (repeatable)")
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("report", help="SVG plots from analysis CSV files")
    r.add_argument("csv", nargs="+")
    r.add_argument("-o", "--out", required=True)
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "delta", None) is not None and args.command == "certify":
        args.delta = args.delta[0]
    elif args.command == "certify":
        args.delta = 0.5
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
