"""Report serialization: JSON, CSV tables and SVG plots.

Everything written here is deterministic. The only time-dependent value,
``generated_at``, goes to a separate ``run.json`` so report files can be
compared byte for byte.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema

from .inferstat.anova import COLUMNS as ANOVA_COLUMNS

SCHEMA_NAME = "report.schema.json"


def load_schema() -> dict:
    return json.loads(resources.files("voltacal").joinpath(SCHEMA_NAME).read_text("utf-8"))


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` breaks the schema."""
    jsonschema.validate(report, load_schema())


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


# ---- CSV ---------------------------------------------------------------------

def _cell(v):
    if v is None:
        return "N/A"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def anova_csv(entry: dict) -> str:
    """One ANOVA table in Source, SS, df, MS, F, P-Value, F-Critical order."""
    rows = []
    for rec in entry["rows"]:
        cells = [rec[c] for c in ANOVA_COLUMNS]
        if rec["Source"] in ("Within", "Total"):
            # blanks, not N/A, for cells that never exist in these rows
            cells = [c if c is not None else "" for c in cells]
        rows.append(cells)
    return _write_rows(ANOVA_COLUMNS, rows)


def curves_csv(curves) -> str:
    header = ("name", "axis", "n", "slope", "slope_se", "slope_ci95", "intercept",
              "intercept_se", "intercept_ci95", "r2", "adj_r2", "se")
    rows = [(c.get("name", ""), c["axis"], c["n"], c["slope"], c["slope_err"], c["slope_ci95"],
             c["intercept"], c["intercept_err"], c["intercept_ci95"], c["r2"], c["adj_r2"],
             c["se"]) for c in curves]
    return _write_rows(header, rows)


def lod_csv(lods) -> str:
    header = ("name", "lod_current_magnitude_ua", "lod_mg_p_l", "lod_err", "printed")
    rows = [(d.get("name", ""), d["lod_current_magnitude"], d["lod_concentration"]["value"],
             d["lod_concentration"]["error"], d["printed"]) for d in lods]
    return _write_rows(header, rows)


def inversions_csv(inversions) -> str:
    header = ("sample_id", "peak_ua", "peak_sd_ua", "conc_mg_p_l", "conc_err", "in_range",
              "printed")
    rows = [(d["sample_id"], d["peak"]["value"], d["peak"]["error"],
             d["concentration"]["value"], d["concentration"]["error"], d["in_range"],
             d["concentration"]["printed"] if d["in_range"] else "Out of Range")
            for d in inversions]
    return _write_rows(header, rows)


def ttests_csv(ttests) -> str:
    header = ("sample_id", "t", "df", "t_critical", "p_value", "reject_null")
    rows = [(d.get("sample_id", ""), d["t"], d["df"], d["t_critical"], d["p_value"],
             d["reject_null"]) for d in ttests]
    return _write_rows(header, rows)


# ---- SVG ---------------------------------------------------------------------

W, H = 480, 360
MARGIN = (60, 20, 30, 50)  # left, right, top, bottom


def _nice_range(values, pad=0.05):
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    return lo - pad * span, hi + pad * span


def _ticks(lo, hi, n=5):
    step = (hi - lo) / (n - 1)
    return [lo + k * step for k in range(n)]


def _f(v):
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, xr, yr, title, xlabel, ylabel):
        self.xr, self.yr = xr, yr
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
            f'<rect width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
        ]
        l, r, t, b = MARGIN
        self.box = (l, t, W - r, H - b)
        x0, y0, x1, y1 = self.box
        self.parts.append(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
                          'fill="none" stroke="black"/>')
        for v in _ticks(*xr):
            px = self.px(v)
            self.parts.append(f'<line x1="{_f(px)}" y1="{y1}" x2="{_f(px)}" y2="{y1 + 4}" stroke="black"/>')
            self.parts.append(f'<text x="{_f(px)}" y="{y1 + 16}" text-anchor="middle">{v:.3g}</text>')
        for v in _ticks(*yr):
            py = self.py(v)
            self.parts.append(f'<line x1="{x0 - 4}" y1="{_f(py)}" x2="{x0}" y2="{_f(py)}" stroke="black"/>')
            self.parts.append(f'<text x="{x0 - 6}" y="{_f(py + 4)}" text-anchor="end">{v:.3g}</text>')
        self.parts.append(f'<text x="{(x0 + x1) / 2}" y="{H - 8}" text-anchor="middle">{_esc(xlabel)}</text>')
        self.parts.append(f'<text x="14" y="{(y0 + y1) / 2}" text-anchor="middle" '
                          f'transform="rotate(-90 14 {(y0 + y1) / 2})">{_esc(ylabel)}</text>')

    def px(self, x):
        x0, _, x1, _ = self.box
        return x0 + (x - self.xr[0]) / (self.xr[1] - self.xr[0]) * (x1 - x0)

    def py(self, y):
        _, y0, _, y1 = self.box
        return y1 - (y - self.yr[0]) / (self.yr[1] - self.yr[0]) * (y1 - y0)

    def line(self, xa, ya, xb, yb, **style):
        attrs = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in style.items())
        self.parts.append(f'<line x1="{_f(self.px(xa))}" y1="{_f(self.py(ya))}" '
                          f'x2="{_f(self.px(xb))}" y2="{_f(self.py(yb))}" {attrs}/>')

    def dot(self, x, y):
        self.parts.append(f'<circle cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" r="3" fill="black"/>')

    def render(self):
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def calibration_svg(entry: dict) -> str:
    """Points with +-1 SD error bars and the fitted line."""
    pts = entry["points"]
    xs = [p["conc_mg_p_l"] for p in pts]
    if entry["axis"] == "potential_vs_log10conc":
        xs = [math.log10(x) for x in xs]
        xlabel = "log10 [P] (mg P/L)"
        ylabel = "peak potential (V)"
    else:
        xlabel = "[P] (mg P/L)"
        ylabel = "peak current (uA)"
    ys = [p["response"] for p in pts]
    lows = [y - p["response_sd"] for y, p in zip(ys, pts)]
    highs = [y + p["response_sd"] for y, p in zip(ys, pts)]
    fit = [entry["intercept"] + entry["slope"] * x for x in (min(xs), max(xs))]
    c = _Canvas(_nice_range(xs), _nice_range(lows + highs + fit),
                f"{entry.get('label', entry.get('name', ''))}  R2 = {entry['r2']:.3f}",
                xlabel, ylabel)
    c.line(min(xs), fit[0], max(xs), fit[1], stroke="steelblue", stroke_width="1.5")
    for x, y, lo, hi in zip(xs, ys, lows, highs):
        if hi > lo:
            c.line(x, lo, x, hi, stroke="black")
        c.dot(x, y)
    return c.render()


def residuals_svg(entry: dict) -> str:
    xs = [p["conc_mg_p_l"] for p in entry["points"]]
    if entry["axis"] == "potential_vs_log10conc":
        xs = [math.log10(x) for x in xs]
    rs = entry["residuals"]
    bound = max(max(abs(r) for r in rs), 1e-12)
    c = _Canvas(_nice_range(xs), (-1.1 * bound, 1.1 * bound),
                f"{entry.get('label', entry.get('name', ''))} residuals",
                "[P] (mg P/L)" if entry["axis"] == "current_vs_conc" else "log10 [P]",
                "residual")
    c.line(c.xr[0], 0.0, c.xr[1], 0.0, stroke="gray", stroke_dasharray="4 3")
    for x, r in zip(xs, rs):
        c.dot(x, r)
    return c.render()


# ---- writer ------------------------------------------------------------------

def write_report(report: dict, out_dir) -> list[Path]:
    """Write report JSON, CSV tables and SVG plots under ``out_dir``.

    Returns the written paths in order.
    """
    validate_report(report)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, text):
        p = out / name
        p.write_text(text, encoding="utf-8")
        written.append(p)

    study = report["study"]
    put(f"{study}_report.json", dumps(report))
    if report["curves"]:
        put(f"{study}_curves.csv", curves_csv(report["curves"]))
    if report["lod"]:
        put(f"{study}_lod.csv", lod_csv(report["lod"]))
    for a in report["anova"]:
        put(f"{study}_anova_{a['name']}.csv", anova_csv(a))
    if report["inversions"]:
        put(f"{study}_inversions.csv", inversions_csv(report["inversions"]))
    if report["ttests"]:
        put(f"{study}_ttests.csv", ttests_csv(report["ttests"]))
    for entry in report["curves"]:
        if entry.get("points"):
            put(f"{study}_{entry['name']}_calibration.svg", calibration_svg(entry))
            put(f"{study}_{entry['name']}_residuals.svg", residuals_svg(entry))
    stamp = {"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    put("run.json", json.dumps(stamp, indent=2) + "\n")
    return written
