"""Dependency-free SVG plots of analysis CSV rows."""

from __future__ import annotations

import math
from html import escape

W, H = 360, 260
PAD_L, PAD_R, PAD_T, PAD_B = 56, 16, 30, 40
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 12))
        t += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def panel(title: str, xlabel: str, ylabel: str, series: list[tuple[str, list[tuple[float, float]], str]], x0: float, y0: float) -> str:
    """One scatter/line panel at offset (x0, y0).  ``series`` items are (label, points, style)
    with style "line", "points" or "dash"."""
    out = [f'<g transform="translate({x0},{y0})">']
    out.append(f'<rect x="0" y="0" width="{W}" height="{H}" fill="white" stroke="#ccc"/>')
    out.append(f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    pts = [p for _, s, _ in series for p in s if all(map(math.isfinite, p))]
    pw, ph = W - PAD_L - PAD_R, H - PAD_T - PAD_B
    if not pts:
        out.append(f'<text x="{W / 2}" y="{H / 2}" text-anchor="middle" fill="#888">no data</text></g>')
        return "\n".join(out)
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(min(ys), 0.0), max(ys)
    if xhi == xlo:
        xlo, xhi = xlo - 1, xhi + 1
    if yhi == ylo:
        yhi = ylo + 1
    yhi += 0.05 * (yhi - ylo)

    def sx(x):
        return PAD_L + (x - xlo) / (xhi - xlo) * pw

    def sy(y):
        return PAD_T + ph - (y - ylo) / (yhi - ylo) * ph

    out.append(f'<line x1="{PAD_L}" y1="{PAD_T + ph}" x2="{PAD_L + pw}" y2="{PAD_T + ph}" stroke="black"/>')
    out.append(f'<line x1="{PAD_L}" y1="{PAD_T}" x2="{PAD_L}" y2="{PAD_T + ph}" stroke="black"/>')
    for t in _ticks(xlo, xhi):
        out.append(f'<text x="{sx(t):.1f}" y="{PAD_T + ph + 14}" text-anchor="middle" font-size="10">{_fmt(t)}</text>')
    for t in _ticks(ylo, yhi):
        out.append(f'<text x="{PAD_L - 4}" y="{sy(t) + 3:.1f}" text-anchor="end" font-size="10">{_fmt(t)}</text>')
        out.append(f'<line x1="{PAD_L}" y1="{sy(t):.1f}" x2="{PAD_L + pw}" y2="{sy(t):.1f}" stroke="#eee"/>')
    out.append(f'<text x="{PAD_L + pw / 2}" y="{H - 6}" text-anchor="middle" font-size="11">{escape(xlabel)}</text>')
    out.append(
        f'<text x="12" y="{PAD_T + ph / 2}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 12 {PAD_T + ph / 2})">{escape(ylabel)}</text>'
    )
    for n, (label, s, style) in enumerate(series):
        s = sorted(p for p in s if all(map(math.isfinite, p)))
        if not s:
            continue
        col = COLORS[n % len(COLORS)]
        path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in s)
        if style in ("line", "dash"):
            dash = ' stroke-dasharray="4 3"' if style == "dash" else ""
            out.append(f'<polyline points="{path}" fill="none" stroke="{col}"{dash}/>')
        if style in ("line", "points"):
            out += [f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="2.5" fill="{col}"/>' for x, y in s]
        out.append(f'<text x="{PAD_L + 6}" y="{PAD_T + 12 + 12 * n}" font-size="10" fill="{col}">{escape(label)}</text>')
    out.append("</g>")
    return "\n".join(out)


def _group(rows, key):
    groups: dict = {}
    for r in rows:
        groups.setdefault(key(r), []).append(r)
    return groups


def render(rows: list[dict]) -> str:
    """Three panels (area vs N, sampled K vs N, K_lower vs delta) and a summary table."""
    byN = [r for r in rows if r["N"] is not None]
    area_s, k_s = [], []
    for kind, rs in sorted(_group(byN, lambda r: r["kind"]).items()):
        area_s.append((f"{kind} area", [(r["N"], r["area"]) for r in rs if r["area"] is not None], "line"))
        k_s.append((f"{kind} sampled K", [(r["N"], r["K_sampled_max"]) for r in rs if r["K_sampled_max"] is not None], "line"))
    if any(r["kind"] == "complex" for r in byN):
        Ns = sorted({r["N"] for r in byN if r["kind"] == "complex"})
        area_s.append(("sqrt(N)", [(n, math.sqrt(n)) for n in _dense(Ns)], "dash"))
        k_s.append(("K = 2", [(Ns[0], 2.0), (Ns[-1], 2.0)], "dash"))
    kl_s = []
    for (src, r), rs in sorted(_group([r for r in rows if r["K_lower"] is not None], lambda r: (r["source"], r["r"])).items()):
        kl_s.append((f"{src} r={_fmt(r)}", [(x["delta"], x["K_lower"]) for x in rs], "points"))
        ds = sorted(x["delta"] for x in rs)
        kl_s.append((f"r/delta, r={_fmt(r)}", [(d, r / d) for d in _dense(ds)], "dash"))

    panels = [
        panel("area vs N", "N", "area", area_s, 0, 0),
        panel("sampled K vs N", "N", "max sampled K", k_s, W + 10, 0),
        panel("K_lower vs delta", "delta", "K_lower", kl_s, 2 * (W + 10), 0),
    ]
    table = _table(rows, 0, H + 20)
    height = H + 40 + 16 * (len(rows) + 1)
    width = 3 * W + 20
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif">\n' + "\n".join(panels) + "\n" + table + "\n</svg>\n"
    )


def _dense(xs: list[float], n: int = 60) -> list[float]:
    if len(xs) < 2:
        return xs
    lo, hi = xs[0], xs[-1]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


_COLS = ["source", "kind", "N", "area", "r", "delta", "net_size", "K_sampled_max", "a_X", "K_lower"]


def _table(rows, x0, y0) -> str:
    out = [f'<g transform="translate({x0},{y0})" font-size="10" font-family="monospace">']
    cw = (3 * W + 20) / len(_COLS)
    for c, name in enumerate(_COLS):
        out.append(f'<text x="{c * cw + 4:.0f}" y="0" font-weight="bold">{escape(name)}</text>')
    for n, r in enumerate(rows, start=1):
        for c, name in enumerate(_COLS):
            v = r[name]
            s = "" if v is None else (v if isinstance(v, str) else _fmt(v))
            out.append(f'<text x="{c * cw + 4:.0f}" y="{16 * n}">{escape(str(s)[-22:])}</text>')
    out.append("</g>")
    return "\n".join(out)
