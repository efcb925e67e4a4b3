"""Deterministic log-log SVG plots for stability and rate reports.

The SVG is written by hand (no plotting backend) so identical reports give
byte-identical files.
"""
from __future__ import annotations

import math
import warnings
from pathlib import Path

W, H = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def loglog_svg(x, y, slope: float | None = None, intercept: float | None = None, title: str = "",
               xlabel: str = "", ylabel: str = "", reference_slope: float | None = None) -> str:
    """Scatter of ``(x, y)`` on log axes with the fitted line and an optional reference-slope guide.

    The fitted line is ``log y = slope log x + intercept``.  The guide has
    slope ``reference_slope`` and passes through the centroid of the points
    in log coordinates.
    """
    pts = [(float(a), float(b)) for a, b in zip(x, y) if a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)]
    if not pts:
        raise ValueError("no positive points to plot")
    lx = [math.log10(a) for a, _ in pts]
    ly = [math.log10(b) for _, b in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if slope is not None and intercept is not None:
        for xx in (x0, x1):
            yy = (slope * xx * math.log(10) + intercept) / math.log(10)
            y0, y1 = min(y0, yy), max(y1, yy)
    padx = max(0.1 * (x1 - x0), 0.05)
    pady = max(0.1 * (y1 - y0), 0.05)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady

    def px(v):
        return LEFT + (v - x0) / (x1 - x0) * (W - LEFT - RIGHT)

    def py(v):
        return H - BOTTOM - (v - y0) / (y1 - y0) * (H - TOP - BOTTOM)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{LEFT}" y="{TOP}" width="{W - LEFT - RIGHT}" height="{H - TOP - BOTTOM}" '
           'fill="none" stroke="black"/>']
    # decade ticks (or the end values when the range is below one decade)
    for lo, hi, axis in ((x0, x1, "x"), (y0, y1, "y")):
        ticks = list(range(math.ceil(lo), math.floor(hi) + 1))
        labels = [f"1e{t}" for t in ticks]
        if len(ticks) < 2:
            ticks = [lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)]
            labels = [f"{10 ** t:.3g}" for t in ticks]
        for t, lab in zip(ticks, labels):
            if axis == "x":
                X = px(t)
                out.append(f'<line x1="{_fmt(X)}" y1="{H - BOTTOM}" x2="{_fmt(X)}" y2="{H - BOTTOM + 5}" stroke="black"/>')
                out.append(f'<text x="{_fmt(X)}" y="{H - BOTTOM + 18}" font-size="11" text-anchor="middle">{lab}</text>')
            else:
                Y = py(t)
                out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(Y)}" x2="{LEFT}" y2="{_fmt(Y)}" stroke="black"/>')
                out.append(f'<text x="{LEFT - 8}" y="{_fmt(Y + 4)}" font-size="11" text-anchor="end">{lab}</text>')
    if slope is not None and intercept is not None and math.isfinite(slope):
        a, b = min(lx), max(lx)
        ya = (slope * a * math.log(10) + intercept) / math.log(10)
        yb = (slope * b * math.log(10) + intercept) / math.log(10)
        out.append(f'<line x1="{_fmt(px(a))}" y1="{_fmt(py(ya))}" x2="{_fmt(px(b))}" y2="{_fmt(py(yb))}" '
                   'stroke="#1f5fbf" stroke-width="2"/>')
    if reference_slope is not None:
        cx, cy = sum(lx) / len(lx), sum(ly) / len(ly)
        a, b = min(lx), max(lx)
        out.append(f'<line x1="{_fmt(px(a))}" y1="{_fmt(py(cy + reference_slope * (a - cx)))}" '
                   f'x2="{_fmt(px(b))}" y2="{_fmt(py(cy + reference_slope * (b - cx)))}" '
                   'stroke="#888888" stroke-dasharray="6,4"/>')
    for a, b in zip(lx, ly):
        out.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="4" fill="#c0392b"/>')
    legend = []
    if slope is not None and math.isfinite(slope):
        legend.append(f"fitted slope {slope:.4f}")
    if reference_slope is not None:
        legend.append(f"reference slope {reference_slope:g} (dashed)")
    out.append(f'<text x="{W / 2:.0f}" y="22" font-size="14" text-anchor="middle">{_esc(title)}</text>')
    if legend:
        out.append(f'<text x="{LEFT + 8}" y="{TOP + 16}" font-size="11">{_esc("; ".join(legend))}</text>')
    out.append(f'<text x="{W / 2:.0f}" y="{H - 10}" font-size="12" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{H / 2:.0f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {H / 2:.0f})">{_esc(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _stability_plots(report: dict):
    rows = [r for r in report.get("rows", []) if r.get("epsilon", 0) > 0]
    if not rows:
        return []
    dn = [r["dn_norm"] for r in rows]
    fits = report.get("fits", {})
    specs = [("kappa", "dV_l2", "||V1 - V2||_L2", None), ("mu", "recovered_sum", "recovered H^-1 norms", 0.5),
             ("mu_dalpha", "dalpha_hm1", "recovered ||d alpha||_H^-1", 0.5),
             ("mu_q", "q_hm1", "recovered ||q||_H^-1", 0.5)]
    out = []
    for name, key, label, ref in specs:
        if name in fits:
            f = fits[name]
            out.append((f"stability_{name}.svg", loglog_svg(dn, [r[key] for r in rows], f["slope"], f["intercept"],
                                                            f"{name} fit", "dn_norm", label, ref)))
    for name, nkey in (("kappa_1", "q_l2"), ("kappa_2", "V_prime_l2"), ("kappa_3", "dn_phi_gamma0_l2")):
        if name in fits:
            f = fits[name]
            ys = [r["chain"]["norms"][nkey] for r in rows]
            out.append((f"stability_{name}.svg", loglog_svg(dn, ys, f["slope"], f["intercept"], f"{name} fit",
                                                            "dn_norm", nkey)))
    return out


def _rate_plots(report: dict):
    out = []
    moll = report.get("mollifier")
    if moll and moll.get("lambdas"):
        for key, fkey, target in (("sup_error", "sup_error_fit", None), ("second_difference", "second_difference_fit", None)):
            f = moll[fkey]
            out.append((f"rates_mollifier_{key}.svg", loglog_svg(moll["lambdas"], moll[key], f["slope"], f["intercept"],
                                                                 f"mollifier {key}", "lambda", key, target)))
    rows = report.get("go_rows", [])
    fits = report.get("go_fits", {})
    for sign in ("forward", "backward"):
        rs = [r for r in rows if r["sign"] == sign]
        if not rs:
            continue
        lam = [r["lambda"] for r in rs]
        for key, fkey in (("r_l2", "r_fit"), ("grad_r_l2", "grad_r_fit")):
            f = fits[sign][fkey]
            out.append((f"rates_go_{sign}_{key}.svg", loglog_svg(lam, [r[key] for r in rs], f["slope"], f["intercept"],
                                                                 f"GO {sign} {key}", "lambda", key)))
    return out


def emit_plots(report: dict, out_dir) -> list[Path]:
    """Write one SVG per fitted exponent of a stability or rate report.

    An empty report (no rows) is a no-op with a warning.
    """
    kind = report.get("kind") if report else None
    plots = []
    if kind == "stability":
        plots = _stability_plots(report)
    elif kind == "rates":
        plots = _rate_plots(report)
    if not plots:
        warnings.warn("report has no rows to plot; nothing written", RuntimeWarning, stacklevel=2)
        return []
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, svg in plots:
        p = out / name
        p.write_text(svg)
        paths.append(p)
    return paths


__all__ = ["emit_plots", "loglog_svg"]
