"""Text formats: DMESH meshes (with optional fan side-car), X_N complexes,
point strings, certificate JSON, versioned CSV, and generator configs."""

from __future__ import annotations

import ast
import csv
import json
import math
import operator
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .complex import EdgePoint, SkeletonSquareComplex, SquarePoint
from .geometry import TriangleFan, TriangleMesh, build_mesh
from .intrinsic import SurfacePoint

CSV_VERSION = "polydistort-csv v1"


class FormatError(ValueError):
    pass


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# meshes and complexes
# ---------------------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def dumps_mesh(mesh: TriangleMesh, fan: TriangleFan | None = None) -> str:
    lines = [f"DMESH {mesh.n_vertices} {mesh.n_faces}"]
    lines += [" ".join(_num(c) for c in v) for v in mesh.vertices]
    lines += [" ".join(str(int(i)) for i in f) for f in mesh.faces]
    if fan is not None:
        lines.append(f"FAN apex=0 closed={int(fan.closed)}")
    return "\n".join(lines) + "\n"


def dumps_fan(fan: TriangleFan) -> str:
    return dumps_mesh(fan.mesh, fan)


def dumps_complex(X: SkeletonSquareComplex) -> str:
    return f"XCOMPLEX {X.N}\nPLANES {''.join(str(int(a)) for a in X.normals)}\n"


def _data_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def loads(text: str):
    """Parse DMESH or XCOMPLEX text into a TriangleFan, TriangleMesh or complex."""
    lines = _data_lines(text)
    if not lines:
        raise FormatError("empty file")
    head = lines[0].split()
    if head[0] == "XCOMPLEX":
        return _loads_complex(head, lines)
    if head[0] != "DMESH" or len(head) != 3:
        raise FormatError(f"unknown header {lines[0]!r}")
    try:
        nv, nf = int(head[1]), int(head[2])
        V = np.array([[float(x) for x in ln.split()] for ln in lines[1 : 1 + nv]], dtype=float)
        F = np.array([[int(x) for x in ln.split()] for ln in lines[1 + nv : 1 + nv + nf]], dtype=np.int64)
    except ValueError as exc:
        raise FormatError(f"bad number: {exc}") from None
    if V.shape != (nv, 3) or F.shape != (nf, 3):
        raise FormatError(f"expected {nv} vertices and {nf} faces of 3 entries each")
    mesh = build_mesh(V, F)
    rest = lines[1 + nv + nf :]
    if not rest:
        return mesh
    m = re.fullmatch(r"FAN\s+apex=(\d+)\s+closed=([01])", rest[0])
    if not m or len(rest) > 1:
        raise FormatError(f"unexpected trailing lines {rest!r}")
    apex = int(m.group(1))
    if not 0 <= apex < nv:
        raise FormatError(f"apex index {apex} out of range")
    others = [i for i in range(nv) if i != apex]
    fan = TriangleFan(V[apex], V[others], bool(int(m.group(2))))
    # the fan's own faces must be the file's faces
    if sorted(map(sorted, fan.mesh.faces.tolist())) != sorted(map(sorted, _reindex(F, apex, nv).tolist())):
        raise FormatError("FAN side-car does not match the faces")
    return fan


def _reindex(F: np.ndarray, apex: int, nv: int) -> np.ndarray:
    # map file indices to fan.mesh indices (apex first, others in order)
    order = [apex] + [i for i in range(nv) if i != apex]
    inv = np.empty(nv, dtype=np.int64)
    inv[order] = np.arange(nv)
    return inv[F]


def _loads_complex(head, lines):
    if len(head) != 2 or len(lines) != 2:
        raise FormatError("XCOMPLEX needs a header and a PLANES line")
    try:
        N = int(head[1])
    except ValueError:
        raise FormatError(f"bad N {head[1]!r}") from None
    parts = lines[1].split()
    if parts[0] != "PLANES" or len(parts) != 2 or not set(parts[1]) <= set("012"):
        raise FormatError("PLANES line must list one axis digit per vertex")
    try:
        return SkeletonSquareComplex(N, np.array([int(c) for c in parts[1]]))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def read_space(path) -> object:
    return loads(Path(path).read_text())


def write_space(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def dumps(obj) -> str:
    if isinstance(obj, TriangleFan):
        return dumps_fan(obj)
    if isinstance(obj, TriangleMesh):
        return dumps_mesh(obj)
    if isinstance(obj, SkeletonSquareComplex):
        return dumps_complex(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


def format_point(p) -> str:
    if isinstance(p, SurfacePoint):
        return f"face:{p.face} bary:{' '.join(_num(b) for b in p.bary)}"
    if isinstance(p, EdgePoint):
        return f"edge:{p.v1} {p.v2} t:{_num(p.t)}"
    if isinstance(p, SquarePoint):
        return f"square:{p.vertex} u:{_num(p.u)} v:{_num(p.v)}"
    raise TypeError(f"not a space point: {p!r}")


_FLOAT = r"[-+0-9.eEinfa]+"


def parse_point(s: str):
    s = s.strip()
    if m := re.fullmatch(rf"face:(\d+)\s+bary:({_FLOAT})\s+({_FLOAT})\s+({_FLOAT})", s):
        return SurfacePoint(int(m.group(1)), tuple(float(m.group(i)) for i in (2, 3, 4)))
    if m := re.fullmatch(rf"edge:(\d+)\s+(\d+)\s+t:({_FLOAT})", s):
        return EdgePoint(int(m.group(1)), int(m.group(2)), float(m.group(3)))
    if m := re.fullmatch(rf"square:(\d+)\s+u:({_FLOAT})\s+v:({_FLOAT})", s):
        return SquarePoint(int(m.group(1)), float(m.group(2)), float(m.group(3)))
    raise FormatError(f"cannot parse point {s!r}")


# ---------------------------------------------------------------------------
# certificates and CSV
# ---------------------------------------------------------------------------


def write_certificates(path, certs: Iterable, extra: dict | None = None) -> None:
    rec = {"certificates": [c.to_dict() for c in certs]}
    if extra:
        rec.update(extra)
    Path(path).write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n")


def read_certificates(path) -> list:
    from .search import DistortionCertificate

    data = json.loads(Path(path).read_text())
    return [DistortionCertificate.from_dict(d) for d in data["certificates"]]


CSV_FIELDS = [
    "source",
    "kind",
    "N",
    "area",
    "meb_radius",
    "normalized_diameter",
    "r",
    "delta",
    "net_size",
    "K_sampled_max",
    "a_X",
    "K_lower",
    "method",
]


def write_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_VERSION}\n")
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in CSV_FIELDS})


def read_csv(path) -> list[dict]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        return []
    if not lines[0].startswith("# polydistort-csv"):
        raise FormatError("missing CSV version header")
    if lines[0][2:].strip() != CSV_VERSION:
        raise FormatError(f"unsupported CSV version {lines[0][2:].strip()!r}")
    body = lines[1:]
    if not body:
        return []
    reader = csv.DictReader(body)
    if reader.fieldnames is None or not set(CSV_FIELDS) <= set(reader.fieldnames):
        raise FormatError(f"CSV columns {reader.fieldnames} do not match {CSV_FIELDS}")
    rows = []
    for n, row in enumerate(reader, start=2):
        out = {}
        for k in CSV_FIELDS:
            v = row.get(k)
            if v is None:
                raise FormatError(f"line {n}: too few columns")
            out[k] = _cell(k, v, n)
        rows.append(out)
    return rows


def _cell(k: str, v: str, line: int):
    if k in ("source", "kind", "method"):
        return v
    if v == "":
        return None
    try:
        return float(v)
    except ValueError:
        raise FormatError(f"line {line}: column {k} is not a number: {v!r}") from None


# ---------------------------------------------------------------------------
# generator configs
# ---------------------------------------------------------------------------

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt}


def eval_expr(s: str) -> float:
    """Arithmetic on numbers, ``pi``, ``e`` and ``sqrt``; nothing else."""
    try:
        tree = ast.parse(s.strip(), mode="eval")
    except SyntaxError:
        raise ConfigError(f"bad expression {s!r}") from None

    def ev(n):
        if isinstance(n, ast.Expression):
            return ev(n.body)
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, float)) and not isinstance(n.value, bool):
            return float(n.value)
        if isinstance(n, ast.Name) and n.id in _NAMES:
            return _NAMES[n.id]
        if isinstance(n, ast.BinOp) and type(n.op) in _OPS:
            return _OPS[type(n.op)](ev(n.left), ev(n.right))
        if isinstance(n, ast.UnaryOp) and type(n.op) in _OPS:
            return _OPS[type(n.op)](ev(n.operand))
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id in _FUNCS and len(n.args) == 1:
            return _FUNCS[n.func.id](ev(n.args[0]))
        raise ConfigError(f"unsupported expression element in {s!r}")

    try:
        return float(ev(tree))
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise ConfigError(f"cannot evaluate {s!r}: {exc}") from None


def _values(s: str) -> list[float]:
    s = s.strip()
    if s.startswith("[") and s.endswith("]"):
        s = s[1:-1]
    return [eval_expr(x) for x in s.split(",") if x.strip()]


_KEYS = {
    "fan": {"k", "theta", "R", "radii", "closed"},
    "xn": {"N", "plane"},
    "replace": {"h"},
}


def parse_config(text: str) -> list[tuple[str, dict]]:
    """Lines ``fan k= theta= R= [radii=] [closed=]``, ``xn N= [plane=]``, ``replace h=``."""
    out = []
    for ln in _data_lines(text):
        parts = ln.split()
        kind = parts[0]
        if kind not in _KEYS:
            raise ConfigError(f"unknown generator {kind!r}")
        args = {}
        for tok in parts[1:]:
            if "=" not in tok:
                raise ConfigError(f"expected key=value, got {tok!r}")
            k, v = tok.split("=", 1)
            if k not in _KEYS[kind]:
                raise ConfigError(f"unknown key {k!r} for {kind}")
            args[k] = v
        out.append((kind, args))
    if not out:
        raise ConfigError("empty config")
    return out


def build_from_config(text: str, check: str = "auto"):
    """Run the generators named by a config; returns the last object built."""
    from .generators import make_fan, make_replacement_surface, make_xn

    obj = None
    for kind, a in parse_config(text):
        if kind == "fan":
            theta = _values(a.get("theta", ""))
            if not theta:
                raise ConfigError("fan needs theta=")
            closed = bool(int(eval_expr(a.get("closed", "1"))))
            if "k" in a:
                k = int(eval_expr(a["k"]))
                if len(theta) == 1:
                    theta = theta * k
                elif len(theta) != k:
                    raise ConfigError(f"k={k} but {len(theta)} angles given")
            nb = len(theta) if closed else len(theta) + 1
            if "radii" in a:
                radii = _values(a["radii"])
                # a shorter list repeats cyclically
                if nb % len(radii):
                    raise ConfigError(f"{len(radii)} radii do not divide {nb} boundary vertices")
                radii = radii * (nb // len(radii))
            else:
                radii = [eval_expr(a.get("R", "1"))] * nb
            obj = make_fan(theta, radii, closed=closed, check=check)
        elif kind == "xn":
            if "N" not in a:
                raise ConfigError("xn needs N=")
            plane = a.get("plane")
            obj = make_xn(int(eval_expr(a["N"])), None if plane is None else int(eval_expr(plane)))
        else:
            if not isinstance(obj, TriangleFan):
                raise ConfigError("replace must follow a fan line")
            obj = make_replacement_surface(obj, eval_expr(a.get("h", "0")))
    return obj
