"""Calibration fitting, detection limits, inversion and the Nernst model.

Coefficient errors used in propagation default to the 95 % confidence
half-width ``t(0.975, n-2) * SE``: that is what reproduces the published
error bars (e.g. the 1.94 uA intercept error at pH 8). Pass
``error_basis="se"`` to propagate plain standard errors instead.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .cvdata import ReplicateSummary
from .errors import (DegenerateDesign, MalformedRow, NonpositiveConcentration,
                     OutOfRange, SlopeTooFlat, TooFewPoints)
from .inferstat.distributions import t_critical_two_tailed
from .quantity import MeasuredQuantity, propagate_ratio, propagate_sum, round_to_error

CURRENT_VS_CONC = "current_vs_conc"
POTENTIAL_VS_LOG10CONC = "potential_vs_log10conc"

GAS_CONSTANT = 8.31  # J/(K mol), as printed
FARADAY = 96500.0  # C/mol, as printed
LN10_APPROX = 2.303
LOD_Z = 1.645
SLOPE_TOL = 1e-12
CALIB_POINT_HEADER = ("conc_mg_p_l", "response", "response_sd")


@dataclass(frozen=True)
class PhysicalConstants:
    R: float = GAS_CONSTANT
    F: float = FARADAY


@dataclass(frozen=True)
class CalibrationPoint:
    concentration: float
    response: MeasuredQuantity

    def __post_init__(self):
        if self.concentration < 0:
            raise ValueError("concentration must be >= 0")
        if not isinstance(self.response, MeasuredQuantity):
            object.__setattr__(self, "response", MeasuredQuantity(float(self.response)))


@dataclass(frozen=True)
class CalibrationCurve:
    axis: str
    slope: MeasuredQuantity
    intercept: MeasuredQuantity
    r2: float
    adj_r2: float
    se_regression: float
    n: int
    residuals: tuple
    x_range: tuple = (0.0, 0.0)

    @property
    def dof(self):
        return self.n - 2

    def coefficient_errors(self, basis="ci95"):
        """(slope error, intercept error) as SE or as 95 % CI half-widths."""
        if basis == "se":
            return self.slope.error, self.intercept.error
        if basis == "ci95":
            if self.dof < 1:
                raise TooFewPoints("confidence intervals need n >= 3")
            t = t_critical_two_tailed(0.05, self.dof)
            return t * self.slope.error, t * self.intercept.error
        raise ValueError(f"unknown error basis {basis!r}")

    def predict(self, x):
        if self.axis == POTENTIAL_VS_LOG10CONC:
            x = math.log10(x)
        return self.intercept.value + self.slope.value * x

    def to_dict(self):
        slope_ci, intercept_ci = self.coefficient_errors("ci95")
        return {
            "axis": self.axis,
            "slope": self.slope.value, "slope_err": self.slope.error,
            "intercept": self.intercept.value, "intercept_err": self.intercept.error,
            "r2": self.r2, "adj_r2": self.adj_r2, "se": self.se_regression, "n": self.n,
            "slope_ci95": slope_ci, "intercept_ci95": intercept_ci,
            "residuals": list(self.residuals),
            "x_range": list(self.x_range),
            "printed": {
                "slope": _printed(self.slope.value, slope_ci),
                "intercept": _printed(self.intercept.value, intercept_ci),
                "r2": f"{self.r2:.3f}",
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(d["axis"], MeasuredQuantity(d["slope"], d["slope_err"]),
                   MeasuredQuantity(d["intercept"], d["intercept_err"]), d["r2"],
                   d["adj_r2"], d["se"], d["n"], tuple(d.get("residuals", ())),
                   tuple(d.get("x_range", (0.0, 0.0))))


def _printed(value, error):
    v, e, dec = round_to_error(value, error)
    d = max(dec, 0)
    sign = "-" if v < 0 else ""
    return f"{sign}({abs(v):.{d}f} ± {e:.{d}f})"


@dataclass(frozen=True)
class LodResult:
    lod_current_magnitude: float
    lod_concentration: MeasuredQuantity
    blank_mean: float = 0.0

    def to_dict(self):
        return {"lod_current_magnitude": self.lod_current_magnitude,
                "lod_concentration": self.lod_concentration.to_dict(),
                "printed": f"{self.lod_concentration} mg P/L"}


def ols(x, y):
    """Ordinary least squares with intercept via the centred normal equations.

    Returns (slope, intercept, se_slope, se_intercept, r2, adj_r2, s, residuals).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx <= 0 or np.ptp(x) == 0:
        raise DegenerateDesign("all abscissae are equal")
    slope = float(dx @ (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    sse = float(resid @ resid)
    dy = y - ym
    sst = float(dy @ dy)
    dof = n - 2
    s2 = sse / dof
    se_slope = math.sqrt(s2 / sxx)
    se_intercept = math.sqrt(s2 * (1.0 / n + xm * xm / sxx))
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof
    return slope, intercept, se_slope, se_intercept, r2, adj, math.sqrt(s2), resid


def _curve(axis, x, y, x_range):
    slope, intercept, se_s, se_i, r2, adj, s, resid = ols(x, y)
    return CalibrationCurve(axis, MeasuredQuantity(slope, se_s),
                            MeasuredQuantity(intercept, se_i), r2, adj, s, len(x),
                            tuple(resid.tolist()), x_range)


def fit_line(points) -> CalibrationCurve:
    """Response vs raw concentration, one point per condition."""
    points = list(points)
    if len(points) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(points)}")
    x = [p.concentration for p in points]
    y = [p.response.value for p in points]
    return _curve(CURRENT_VS_CONC, x, y, (min(x), max(x)))


def fit_nernst(points, drop_blank=True) -> CalibrationCurve:
    """Peak potential vs log10(concentration).

    Zero-concentration points are dropped with a warning unless
    ``drop_blank`` is false, in which case they are an error.
    """
    points = list(points)
    keep = [p for p in points if p.concentration > 0]
    if len(keep) != len(points):
        if not drop_blank:
            raise NonpositiveConcentration("log10 axis needs concentrations > 0")
        warnings.warn(f"dropped {len(points) - len(keep)} zero-concentration point(s) "
                      "from the log-axis fit", stacklevel=2)
    if len(keep) < 3:
        raise TooFewPoints(f"need at least 3 positive-concentration points, got {len(keep)}")
    c = [p.concentration for p in keep]
    x = [math.log10(v) for v in c]
    y = [p.response.value for p in keep]
    return _curve(POTENTIAL_VS_LOG10CONC, x, y, (min(c), max(c)))


def nernst_slope(temperature: float, constants: PhysicalConstants = PhysicalConstants()) -> float:
    """2.303 R T / F in volts per decade."""
    if not temperature > 0:
        raise ValueError("temperature must be positive (kelvin)")
    return LN10_APPROX * constants.R * temperature / constants.F


def nernst_potential(e_zero: float, concentration: float, temperature: float,
                     constants: PhysicalConstants = PhysicalConstants()) -> float:
    """E = E0 - (2.303 R T / F) log10[P]."""
    if not concentration > 0:
        raise NonpositiveConcentration("concentration must be > 0")
    return e_zero - nernst_slope(temperature, constants) * math.log10(concentration)


def _require_current_axis(curve):
    if curve.axis != CURRENT_VS_CONC:
        raise ValueError(f"needs a {CURRENT_VS_CONC} curve, got {curve.axis}")
    if abs(curve.slope.value) < SLOPE_TOL:
        raise SlopeTooFlat(f"|slope| = {abs(curve.slope.value):g} is below {SLOPE_TOL:g}")


def compute_lod(curve: CalibrationCurve, blank: ReplicateSummary, lowest: ReplicateSummary,
                error_basis: str = "ci95") -> LodResult:
    """Detection limit: |blank mean| + 1.645 (sd_blank + sd_lowest), inverted.

    Arithmetic runs on current magnitudes and is re-signed with the blank's
    sign before inversion. Concentration error: intercept error and blank SD
    in quadrature on the numerator, then ratio propagation against the slope.
    """
    _require_current_axis(curve)
    mu = blank.mean_current.value
    sd_blank = blank.mean_current.error
    sd_low = lowest.mean_current.error
    magnitude = abs(mu) + LOD_Z * sd_blank + LOD_Z * sd_low
    signed = math.copysign(magnitude, mu) if mu != 0 else -magnitude
    slope_err, intercept_err = curve.coefficient_errors(error_basis)
    numerator = propagate_sum([MeasuredQuantity(signed, sd_blank),
                               MeasuredQuantity(-curve.intercept.value, intercept_err)])
    conc = propagate_ratio(numerator, MeasuredQuantity(curve.slope.value, slope_err))
    return LodResult(magnitude, conc, mu)


def paper_rounded(curve: CalibrationCurve, error_basis: str = "ci95") -> CalibrationCurve:
    """Coefficients rounded to printed precision (errors kept at full precision)."""
    slope_err, intercept_err = curve.coefficient_errors(error_basis)
    slope = round_to_error(curve.slope.value, slope_err)[0]
    intercept = round_to_error(curve.intercept.value, intercept_err)[0]
    return replace(curve, slope=MeasuredQuantity(slope, curve.slope.error),
                   intercept=MeasuredQuantity(intercept, curve.intercept.error))


def invert_concentration(curve: CalibrationCurve, peak: MeasuredQuantity,
                         mode: str = "full_precision", error_basis: str = "ci95",
                         bounds=None) -> MeasuredQuantity:
    """[P] = (peak - intercept) / slope with propagated error.

    ``mode="paper_rounded"`` first rounds slope and intercept the way they
    were printed, which is how the published wastewater numbers were
    obtained. Raises :class:`OutOfRange` (carrying the result) when the
    concentration falls outside ``bounds`` (default: [0, max calibrated]).
    """
    _require_current_axis(curve)
    if mode in ("paper", "paper_rounded"):
        slope_err, intercept_err = curve.coefficient_errors(error_basis)
        used = paper_rounded(curve, error_basis)
    elif mode in ("full", "full_precision"):
        slope_err, intercept_err = curve.coefficient_errors(error_basis)
        used = curve
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if abs(used.slope.value) < SLOPE_TOL:
        raise SlopeTooFlat("rounded slope is zero")
    numerator = propagate_sum([peak, MeasuredQuantity(-used.intercept.value, intercept_err)])
    result = propagate_ratio(numerator, MeasuredQuantity(used.slope.value, slope_err))
    lo, hi = bounds if bounds is not None else (0.0, curve.x_range[1])
    if not lo <= result.value <= hi:
        raise OutOfRange(f"concentration {result.value:.4g} mg P/L outside the calibrated "
                         f"range [{lo:g}, {hi:g}]", quantity=result, bounds=(lo, hi))
    return result


def predict_fill_in(points, excluded_concs, error_basis: str = "ci95"):
    """Replace excluded conditions with predictions from a fit on the rest.

    Prediction error: sqrt((slope_err * c)^2 + intercept_err^2). Returns the
    completed point set ordered by concentration.
    """
    points = list(points)
    excluded = [float(c) for c in excluded_concs]
    if not excluded:
        return points

    def is_excluded(c):
        return any(math.isclose(c, e, rel_tol=1e-9, abs_tol=1e-12) for e in excluded)

    kept = [p for p in points if not is_excluded(p.concentration)]
    if len(kept) < 3:
        raise TooFewPoints(f"only {len(kept)} points remain after exclusion")
    curve = fit_line(kept)
    slope_err, intercept_err = curve.coefficient_errors(error_basis)
    predicted = [
        CalibrationPoint(c, MeasuredQuantity(curve.predict(c),
                                             math.hypot(slope_err * c, intercept_err)))
        for c in excluded
    ]
    return sorted(kept + predicted, key=lambda p: p.concentration)


def points_from_summaries(concentrations, summaries, use="current"):
    """Pair concentrations with replicate summaries as calibration points."""
    out = []
    for c, s in zip(concentrations, summaries):
        q = s.mean_current if use == "current" else s.mean_potential
        out.append(CalibrationPoint(float(c), q))
    return out


def parse_calibration_points(csv_text: str, source=None):
    """Read ``conc_mg_p_l,response,response_sd`` CSV text."""
    reader = csv.reader(io.StringIO(csv_text))
    rows = [(n, r) for n, r in enumerate(reader, start=1) if r]
    if not rows or tuple(c.strip() for c in rows[0][1]) != CALIB_POINT_HEADER:
        raise MalformedRow(f"expected header {','.join(CALIB_POINT_HEADER)}",
                           line=1, source=source)
    out = []
    for line, row in rows[1:]:
        if len(row) != 3:
            raise MalformedRow(f"expected 3 columns, got {len(row)}", line=line, source=source)
        try:
            c, v, sd = (float(x) for x in row)
            out.append(CalibrationPoint(c, MeasuredQuantity(v, sd)))
        except ValueError as exc:
            raise MalformedRow(str(exc), line=line, source=source) from None
    return out


def format_calibration_points(points):
    lines = [",".join(CALIB_POINT_HEADER)]
    lines += [f"{p.concentration!r},{p.response.value!r},{p.response.error!r}" for p in points]
    return "\n".join(lines) + "\n"
