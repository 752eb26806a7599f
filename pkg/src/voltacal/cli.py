"""Command-line front end.

Exit status: 0 on success, 2 for bad input (including unknown flags), 3 when
a computation is numerically undefined.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .calib import (CalibrationCurve, compute_lod, fit_line, fit_nernst, invert_concentration,
                    parse_calibration_points)
from .cvdata import (DEFAULT_WINDOW, detect_peak, read_manifest, read_voltammogram,
                     serialize_voltammogram, summarize_replicates)
from .datasets import ANOVA_DESIGNS, design_from_levels, factorial_design
from .errors import InputError, NumericalError, OutOfRange
from .inferstat import one_sample_t, two_way_anova
from .quantity import MeasuredQuantity, format_printed
from .report import anova_csv, dumps, write_report
from .simulate import SensorModel, synth_voltammogram
from .studies import CURVES, STUDIES, calibration_points, lod_inputs, run_study

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
MODES = {"full": "full_precision", "paper": "paper_rounded"}


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _window(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("window LO must be below HI")
    return lo, hi


def _alpha(text):
    a = float(text)
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def _table_list(text):
    """``A-5`` or ``B-10:100,B-11:100`` -> [(table, level or None), ...]."""
    parts = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        table, _, level = item.partition(":")
        parts.append((table, level or None))
    if not parts:
        raise argparse.ArgumentTypeError("no tables given")
    return parts


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", type=Path, help="output directory (or file for simulate)")

    p = _Parser(prog="voltacal", description="Voltammetric sensor calibration toolkit.")
    p.add_argument("--version", action="version", version=f"voltacal {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("peaks", parents=[common], help="extract cathodic peaks from CSV files")
    s.add_argument("files", nargs="*", type=Path)
    s.add_argument("--manifest", type=Path, help="replicate manifest CSV")
    s.add_argument("--window", type=_window, default=DEFAULT_WINDOW)

    s = sub.add_parser("calibrate", parents=[common], help="fit a calibration line")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--curve", choices=sorted(CURVES))
    src.add_argument("--points", type=Path, help="conc_mg_p_l,response,response_sd CSV")
    s.add_argument("--nernst", action="store_true", help="fit response vs log10 concentration")

    s = sub.add_parser("lod", parents=[common], help="detection limit of a bundled curve")
    s.add_argument("--curve", choices=sorted(CURVES), default="ph8")

    s = sub.add_parser("anova", parents=[common], help="two-way ANOVA over bundled tables")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--tables", type=_table_list, help="A-5 or B-10:100,B-11:100")
    src.add_argument("--design", choices=sorted(ANOVA_DESIGNS))
    s.add_argument("--alpha", type=_alpha, default=0.05)

    s = sub.add_parser("ttest", parents=[common], help="one-sample t test from summary statistics")
    s.add_argument("--mean", type=float, required=True)
    s.add_argument("--mu0", type=float, required=True)
    s.add_argument("--sd", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--df", type=int)
    s.add_argument("--alpha", type=_alpha, default=0.05)

    s = sub.add_parser("invert", parents=[common], help="concentration from a peak current")
    s.add_argument("--peak", type=float, required=True)
    s.add_argument("--peak-sd", type=float, default=0.0)
    src = s.add_mutually_exclusive_group()
    src.add_argument("--curve", choices=sorted(CURVES), default="ph8")
    src.add_argument("--curve-json", type=Path, help="curve saved by calibrate --format json")
    s.add_argument("--mode", choices=sorted(MODES), default="full")

    s = sub.add_parser("simulate", parents=[common], help="write a synthetic voltammogram")
    s.add_argument("--conc", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--model", type=Path, help="SensorModel JSON")

    s = sub.add_parser("reproduce", parents=[common], help="run one bundled study end to end")
    s.add_argument("study", choices=STUDIES)
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--mode", choices=sorted(MODES), default="paper")
    s.add_argument("--seed", type=int, default=0, help="accepted for symmetry; studies are deterministic")
    return p


def _emit(obj, text, args):
    if args.format == "json":
        print(dumps(obj), end="")
    else:
        print(text)


def _cmd_peaks(args):
    items = []
    if args.manifest:
        for meta, rep, path in read_manifest(args.manifest):
            items.append((meta.sample_id, rep, read_voltammogram(path, meta)))
    for path in args.files:
        items.append((path.stem, 1, read_voltammogram(path)))
    if not items:
        raise _UsageError("peaks: give files or --manifest")
    peaks = [(sid, rep, detect_peak(v, args.window)) for sid, rep, v in items]
    rows = [{"sample_id": sid, "replicate": rep, "peak_potential_v": pk.peak_potential,
             "peak_current_ua": pk.peak_current} for sid, rep, pk in peaks]
    groups = {}
    for sid, _, pk in peaks:
        groups.setdefault(sid, []).append(pk)
    summaries = {}
    for sid, pks in groups.items():
        if len(pks) >= 2:
            s = summarize_replicates(pks)
            summaries[sid] = {"n": s.n, "current": s.mean_current.to_dict(),
                              "potential": s.mean_potential.to_dict()}
    if args.format == "csv":
        print("sample_id,replicate,peak_potential_v,peak_current_ua")
        for r in rows:
            print(f"{r['sample_id']},{r['replicate']},{r['peak_potential_v']!r},"
                  f"{r['peak_current_ua']!r}")
        return
    lines = [f"{r['sample_id']}\t{r['replicate']}\t{r['peak_potential_v']:.4f} V\t"
             f"{r['peak_current_ua']:.3f} uA" for r in rows]
    for sid, s in summaries.items():
        lines.append(f"{sid}: n={s['n']} mean current {s['current']['value']:.3f} "
                     f"+- {s['current']['error']:.3f} uA")
    _emit({"peaks": rows, "summaries": summaries}, "\n".join(lines), args)


def _load_points(args):
    if args.points:
        return parse_calibration_points(args.points.read_text(encoding="utf-8"),
                                        source=str(args.points))
    return calibration_points(args.curve)


def _curve_text(c):
    d = c.to_dict()
    return (f"slope {d['slope']:.6g} (se {d['slope_err']:.3g})  printed {d['printed']['slope']}\n"
            f"intercept {d['intercept']:.6g} (se {d['intercept_err']:.3g})  "
            f"printed {d['printed']['intercept']}\n"
            f"R2 {d['r2']:.4f}  adj R2 {d['adj_r2']:.4f}  s {d['se']:.4g}  n {d['n']}")


def _cmd_calibrate(args):
    pts = _load_points(args)
    c = fit_nernst(pts) if args.nernst else fit_line(pts)
    if args.format == "csv":
        print("slope,slope_se,intercept,intercept_se,r2,adj_r2,se,n")
        print(f"{c.slope.value!r},{c.slope.error!r},{c.intercept.value!r},"
              f"{c.intercept.error!r},{c.r2!r},{c.adj_r2!r},{c.se_regression!r},{c.n}")
        return
    _emit(c.to_dict(), _curve_text(c), args)


def _cmd_lod(args):
    blank, lowest = lod_inputs(args.curve)
    res = compute_lod(fit_line(calibration_points(args.curve)), blank, lowest)
    d = res.to_dict()
    if args.format == "csv":
        print("lod_current_magnitude_ua,lod_mg_p_l,lod_err")
        print(f"{res.lod_current_magnitude!r},{res.lod_concentration.value!r},"
              f"{res.lod_concentration.error!r}")
        return
    _emit(d, f"LOD current {res.lod_current_magnitude:.3f} uA -> "
             f"{res.lod_concentration.value:.3f} +- {res.lod_concentration.error:.3f} mg P/L "
             f"({d['printed']})", args)


def _cmd_anova(args):
    data = factorial_design(args.design) if args.design else design_from_levels(args.tables)
    table = two_way_anova(data, args.alpha)
    d = table.to_dict()
    d["name"] = args.design or ",".join(f"{t}:{l}" if l else t for t, l in args.tables)
    if args.format == "csv":
        print(anova_csv(d), end="")
        return
    text = table.format()
    if table.notes:
        text += "\n" + "\n".join(f"note: {n}" for n in table.notes)
    _emit(d, text, args)


def _cmd_ttest(args):
    res = one_sample_t(args.mean, args.mu0, args.sd, args.n, args.df, args.alpha)
    if args.format == "csv":
        print("t,df,t_critical,p_value,reject_null")
        print(f"{res.t!r},{res.df},{res.t_critical!r},{res.p_value!r},{res.reject_null}")
        return
    verdict = "reject H0" if res.reject_null else "fail to reject H0"
    _emit(res.to_dict(), f"t = {res.t:.4f}, df = {res.df}, t_crit = {res.t_critical:.4f}, "
                         f"p = {res.p_value:.4g}: {verdict}", args)


def _cmd_invert(args):
    if args.curve_json:
        curve = CalibrationCurve.from_dict(json.loads(args.curve_json.read_text(encoding="utf-8")))
    else:
        curve = fit_line(calibration_points(args.curve))
    peak = MeasuredQuantity(args.peak, args.peak_sd)
    q = invert_concentration(curve, peak, MODES[args.mode])
    if args.format == "csv":
        print("conc_mg_p_l,conc_err")
        print(f"{q.value!r},{q.error!r}")
        return
    _emit({"concentration": q.to_dict(), "mode": MODES[args.mode]},
          format_printed(q.value, q.error, "mg P/L"), args)


def _cmd_simulate(args):
    model = SensorModel()
    if args.model:
        model = SensorModel.from_dict(json.loads(args.model.read_text(encoding="utf-8")))
    if args.noise:
        model = SensorModel.from_dict({**json.loads(model.to_json()), "noise_sd": args.noise})
    v = synth_voltammogram(model, args.conc, args.seed)
    text = serialize_voltammogram(v)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    else:
        print(text, end="")


def _cmd_reproduce(args):
    report = run_study(args.study, args.alpha, MODES[args.mode]).to_dict()
    if args.out:
        for p in write_report(report, args.out):
            print(p)
    elif args.format == "csv":
        raise _UsageError("reproduce --format csv needs --out")
    else:
        print(dumps(report), end="")


COMMANDS = {
    "peaks": _cmd_peaks, "calibrate": _cmd_calibrate, "lod": _cmd_lod, "anova": _cmd_anova,
    "ttest": _cmd_ttest, "invert": _cmd_invert, "simulate": _cmd_simulate,
    "reproduce": _cmd_reproduce,
}


def run(argv=None) -> int:
    """Parse ``argv``, dispatch, and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except OutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        q = exc.quantity
        print(f"out of range: {format_printed(q.value, q.error, 'mg P/L')}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (_UsageError, InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
