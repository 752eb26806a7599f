"""End-to-end pipelines over the bundled tables."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import __version__
from .calib import (CalibrationPoint, compute_lod, fit_line, fit_nernst, invert_concentration,
                    predict_fill_in)
from .cvdata import summarize_currents
from .datasets import ANOVA_DESIGNS, factorial_design, load_table
from .errors import OutOfRange
from .inferstat import one_sample_t, two_way_anova

STUDIES = ("ph_effect", "interference", "dissolved_oxygen", "wastewater")

# curve name -> how its points are built
CURVES = {
    "ph8": {"table": "A-5", "level": "8.00", "label": "pH 8.00"},
    "ph4": {"table": "A-1", "label": "pH 4.00"},
    "cl": {"table": "B-9", "level": "100", "label": "100 mg Cl-/L"},
    "so4": {"table": "B-10", "level": "100", "exclude": (1.0, 10.0), "label": "100 mg SO4 2-/L"},
    "no3": {"table": "B-11", "level": "100", "exclude": (10.0,), "label": "100 mg NO3-/L"},
    "do_low": {"table": "C-3", "level": "1.00", "label": "1.00 mg O2/L"},
}

STUDY_ANOVAS = {
    "ph_effect": ("A-6",),
    "interference": ("B-12", "B-13", "B-14", "B-15", "B-16", "B-17", "B-18"),
    "dissolved_oxygen": ("C-4",),
    "wastewater": (),
}

# summary statistics the published t-tests were run with
PUBLISHED_TTESTS = {
    "mixed_liquors": {"mean": 10.8, "mu0": 0.210, "sd": 8.57, "n": 3, "df": 3},
    "effluent": {"mean": 57.6, "mu0": 0.160, "sd": 12.1, "n": 3, "df": 3},
}


def replicate_summaries(table_id, level, root=None):
    """Per-concentration summaries of the measured replicates of one level."""
    t = load_table(table_id, root)
    block = t.matrix.measured(table_id, level)
    return t.matrix.concentrations, [summarize_currents(row) for row in block]


def replicate_points(table_id, level, root=None):
    conc, summaries = replicate_summaries(table_id, level, root)
    return [CalibrationPoint(c, s.mean_current) for c, s in zip(conc, summaries)]


def averaged_points(table_id, use="current", root=None):
    t = load_table(table_id, root)
    return [CalibrationPoint(r.concentration, r.current if use == "current" else r.potential)
            for r in t.rows]


def calibration_points(name, root=None, fill_in=True):
    cfg = CURVES[name]
    if "level" in cfg:
        pts = replicate_points(cfg["table"], cfg["level"], root)
    else:
        pts = averaged_points(cfg["table"], root=root)
    excluded = cfg.get("exclude", ())
    if excluded:
        pts = [p for p in pts if p.concentration not in excluded]
        if fill_in:
            pts = predict_fill_in(pts, excluded)
    return pts


def curve(name, root=None):
    return fit_line(calibration_points(name, root))


def lod_inputs(name, root=None):
    """(blank, lowest nonzero) replicate summaries used for a detection limit."""
    table, level = {"ph8": ("A-5", "8.00"), "ph4": ("A-5", "4.00"),
                    "cl": ("B-9", "100"), "so4": ("B-10", "100"),
                    "no3": ("B-11", "100"), "do_low": ("C-3", "1.00")}[name]
    _, summaries = replicate_summaries(table, level, root)
    return summaries[0], summaries[1]


def lod(name, root=None, error_basis="ci95"):
    blank, lowest = lod_inputs(name, root)
    return compute_lod(curve(name, root), blank, lowest, error_basis)


@dataclass
class AnalysisReport:
    study: str
    curves: list = field(default_factory=list)
    lod: list = field(default_factory=list)
    anova: list = field(default_factory=list)
    inversions: list = field(default_factory=list)
    ttests: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "study": self.study,
            "curves": self.curves,
            "lod": self.lod,
            "anova": self.anova,
            "inversions": self.inversions,
            "ttests": self.ttests,
            "provenance": {"tool": "voltacal", "version": __version__,
                           "inputs": sorted(self.inputs, key=lambda d: d["table_id"])},
            "notes": self.notes,
        }


def _track(report, *table_ids, root=None):
    seen = {d["table_id"] for d in report.inputs}
    for tid in table_ids:
        if tid not in seen:
            t = load_table(tid, root)
            report.inputs.append({"table_id": tid, "sha256": t.checksum,
                                  "file": f"tables/{tid}.csv"})
            seen.add(tid)


def _curve_entry(name, c, points, role="calibration"):
    d = c.to_dict()
    d.update(name=name, label=CURVES.get(name, {}).get("label", name), role=role,
             points=[{"conc_mg_p_l": p.concentration, "response": p.response.value,
                      "response_sd": p.response.error} for p in points])
    return d


def _anova_entry(name, alpha, root):
    table = two_way_anova(factorial_design(name, root), alpha)
    d = table.to_dict()
    d["name"] = name
    d["design"] = [f"{t}:{l}" for t, l in ANOVA_DESIGNS[name]]
    return d


def run_study(study, alpha=0.05, mode="paper_rounded", root=None) -> AnalysisReport:
    if study not in STUDIES:
        raise ValueError(f"unknown study {study!r}; choose from {', '.join(STUDIES)}")
    report = AnalysisReport(study)
    if study == "ph_effect":
        for name in ("ph8", "ph4"):
            pts = calibration_points(name, root)
            report.curves.append(_curve_entry(name, fit_line(pts), pts))
            _track(report, CURVES[name]["table"], root=root)
            res = lod(name, root)
            report.lod.append({"name": name, **res.to_dict()})
        _track(report, "A-5", "A-3", root=root)
        for name, table in (("ph4_potential", "A-1"), ("ph8_potential", "A-3")):
            pts = [p for p in averaged_points(table, use="potential", root=root)
                   if p.concentration > 0]
            report.curves.append(_curve_entry(name, fit_nernst(pts), pts, role="potential"))
        report.notes.append("pH 4.00 current calibration uses the averaged table A-1; "
                            "pH 8.00 uses replicate means from A-5")
    elif study == "interference":
        for name in ("cl", "so4", "no3"):
            cfg = CURVES[name]
            if cfg.get("exclude"):
                partial = calibration_points(name, root, fill_in=False)
                report.curves.append(_curve_entry(name + "_partial", fit_line(partial), partial,
                                                  role="fill_in_source"))
            pts = calibration_points(name, root)
            report.curves.append(_curve_entry(name, fit_line(pts), pts))
            _track(report, cfg["table"], root=root)
    elif study == "dissolved_oxygen":
        pts = calibration_points("do_low", root)
        report.curves.append(_curve_entry("do_low", fit_line(pts), pts))
        _track(report, "C-3", root=root)
        report.notes.append("1.00 mg O2/L replicates were duplicated to balance the ANOVA design")
    elif study == "wastewater":
        pts = calibration_points("ph8", root)
        c = fit_line(pts)
        report.curves.append(_curve_entry("ph8", c, pts))
        _track(report, "A-5", "WW", "3-1", root=root)
        for row in load_table("WW", root).rows:
            entry = {"sample_id": row.sample_id, "peak": row.current.to_dict(), "mode": mode}
            try:
                q = invert_concentration(c, row.current, mode)
                entry.update(concentration=q.to_dict(), in_range=True)
            except OutOfRange as exc:
                entry.update(concentration=exc.quantity.to_dict(), in_range=False)
            report.inversions.append(entry)
        for sample, args in PUBLISHED_TTESTS.items():
            res = one_sample_t(alpha=alpha, **args)
            report.ttests.append({"sample_id": sample, "inputs": args, **res.to_dict()})
    for name in STUDY_ANOVAS[study]:
        for tid, _ in ANOVA_DESIGNS[name]:
            _track(report, tid, root=root)
        report.anova.append(_anova_entry(name, alpha, root))
    return report
