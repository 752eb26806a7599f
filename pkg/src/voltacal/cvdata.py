"""Voltammogram parsing, cathodic peak extraction and replicate aggregation."""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (EmptyFile, MalformedRow, NoInteriorMinimum, TooFewReplicates,
                     WindowNotCovered)
from .quantity import MeasuredQuantity

HEADER = ("potential_v", "current_ua")
DEFAULT_WINDOW = (-1.15, -0.45)
SOURCES = ("synthetic", "influent", "mixed_liquors", "effluent")
MANIFEST_HEADER = ("sample_id", "replicate", "ph", "do_mg_l", "p_mg_l", "cl_mg_l",
                   "so4_mg_l", "no3_mg_l", "source", "file")


@dataclass(frozen=True)
class SampleMeta:
    sample_id: str = ""
    ph: float = 8.0
    dissolved_oxygen: float = 8.54
    phosphate_nominal: float | None = None
    interferents: dict = field(default_factory=dict)
    source: str = "synthetic"

    def __post_init__(self):
        if not 0.0 <= self.ph <= 14.0:
            raise ValueError(f"pH must lie in [0, 14], got {self.ph}")
        if self.dissolved_oxygen < 0:
            raise ValueError("dissolved oxygen must be >= 0")
        if any(v < 0 for v in self.interferents.values()):
            raise ValueError("interferent concentrations must be >= 0")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, got {self.source!r}")


@dataclass(frozen=True)
class Voltammogram:
    potentials: np.ndarray
    currents: np.ndarray
    scan_rate: float = 50.0
    meta: SampleMeta = field(default_factory=SampleMeta)

    def __post_init__(self):
        e = np.array(self.potentials, dtype=float)
        i = np.array(self.currents, dtype=float)
        if e.ndim != 1 or e.shape != i.shape:
            raise ValueError("potentials and currents must be 1-D arrays of equal length")
        if e.size == 0:
            raise ValueError("a voltammogram needs at least one point")
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(i))):
            raise ValueError("potentials and currents must be finite")
        e.setflags(write=False)
        i.setflags(write=False)
        object.__setattr__(self, "potentials", e)
        object.__setattr__(self, "currents", i)

    @property
    def points(self):
        return list(zip(self.potentials.tolist(), self.currents.tolist()))

    def __len__(self):
        return self.potentials.size

    def __eq__(self, other):
        if not isinstance(other, Voltammogram):
            return NotImplemented
        return (np.array_equal(self.potentials, other.potentials)
                and np.array_equal(self.currents, other.currents)
                and self.scan_rate == other.scan_rate and self.meta == other.meta)

    __hash__ = None

    def reversed(self):
        return Voltammogram(self.potentials[::-1], self.currents[::-1],
                            self.scan_rate, self.meta)

    def shifted(self, offset):
        return Voltammogram(self.potentials, self.currents + offset,
                            self.scan_rate, self.meta)


@dataclass(frozen=True)
class PeakFeature:
    peak_potential: float
    peak_current: float
    window: tuple = DEFAULT_WINDOW


@dataclass(frozen=True)
class ReplicateSummary:
    n: int
    mean_current: MeasuredQuantity
    mean_potential: MeasuredQuantity | None = None


def parse_voltammogram(csv_text: str, meta: SampleMeta | None = None,
                       scan_rate: float = 50.0, source: str | None = None) -> Voltammogram:
    """Parse ``potential_v,current_ua`` CSV text (header required, >= 2 rows)."""
    if not csv_text.strip():
        raise EmptyFile(f"{source or 'input'} is empty")
    reader = csv.reader(io.StringIO(csv_text))
    rows = [(n, row) for n, row in enumerate(reader, start=1) if row]
    header = tuple(c.strip() for c in rows[0][1])
    if header != HEADER:
        raise MalformedRow(f"expected header {','.join(HEADER)}, got {','.join(header)}",
                           line=rows[0][0], source=source)
    potentials, currents = [], []
    for line, row in rows[1:]:
        if len(row) != 2:
            raise MalformedRow(f"expected 2 columns, got {len(row)}", line=line, source=source)
        try:
            e, i = float(row[0]), float(row[1])
        except ValueError:
            raise MalformedRow(f"non-numeric cell in {row!r}", line=line,
                               source=source) from None
        if not (math.isfinite(e) and math.isfinite(i)):
            raise MalformedRow(f"non-finite value in {row!r}", line=line, source=source)
        potentials.append(e)
        currents.append(i)
    if len(potentials) < 2:
        raise EmptyFile(f"{source or 'input'} has fewer than 2 data rows")
    return Voltammogram(potentials, currents, scan_rate, meta or SampleMeta())


def read_voltammogram(path, meta=None, scan_rate=50.0) -> Voltammogram:
    path = Path(path)
    return parse_voltammogram(path.read_text(encoding="utf-8"), meta, scan_rate,
                              source=str(path))


def serialize_voltammogram(v: Voltammogram) -> str:
    # repr() round-trips floats exactly
    lines = [",".join(HEADER)]
    lines += [f"{e!r},{i!r}" for e, i in zip(v.potentials.tolist(), v.currents.tolist())]
    return "\n".join(lines) + "\n"


def detect_peak(v: Voltammogram, window=DEFAULT_WINDOW) -> PeakFeature:
    """Most negative current among samples with potential inside ``window``.

    Ties go to the more negative potential, which makes the result
    independent of sweep direction. A minimum sitting on the window edge
    means the peak is truncated and is rejected.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError(f"window low must be below high, got {window}")
    e, i = v.potentials, v.currents
    if e.min() > lo or e.max() < hi:
        raise WindowNotCovered(
            f"sweep spans [{e.min():g}, {e.max():g}] V, window is [{lo:g}, {hi:g}] V")
    inside = (e >= lo) & (e <= hi)
    ei, ii = e[inside], i[inside]
    order = np.lexsort((ei, ii))  # by current, then potential
    k = order[0]
    peak_e, peak_i = float(ei[k]), float(ii[k])
    if peak_e in (ei.min(), ei.max()):
        raise NoInteriorMinimum(
            f"minimum current {peak_i:g} uA lies on the window edge at {peak_e:g} V")
    return PeakFeature(peak_e, peak_i, (lo, hi))


def summarize_replicates(peaks) -> ReplicateSummary:
    """Mean and n-1 standard deviation of peak currents and potentials."""
    peaks = list(peaks)
    if len(peaks) < 2:
        raise TooFewReplicates(f"need at least 2 replicates, got {len(peaks)}")
    currents = [p.peak_current for p in peaks]
    potentials = [p.peak_potential for p in peaks]
    return ReplicateSummary(
        len(peaks),
        MeasuredQuantity(statistics.fmean(currents), statistics.stdev(currents)),
        MeasuredQuantity(statistics.fmean(potentials), statistics.stdev(potentials)),
    )


def summarize_currents(currents) -> ReplicateSummary:
    """Like :func:`summarize_replicates` for bare peak currents (no potentials)."""
    currents = [float(c) for c in currents]
    if len(currents) < 2:
        raise TooFewReplicates(f"need at least 2 replicates, got {len(currents)}")
    return ReplicateSummary(len(currents), MeasuredQuantity(statistics.fmean(currents),
                                                            statistics.stdev(currents)))


def read_manifest(path):
    """Replicate manifest rows as ``(SampleMeta, replicate, file path)``."""
    path = Path(path)
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != MANIFEST_HEADER:
            raise MalformedRow(f"expected header {','.join(MANIFEST_HEADER)}",
                               line=1, source=str(path))
        for line, row in enumerate(reader, start=2):
            try:
                p = row["p_mg_l"].strip()
                meta = SampleMeta(
                    sample_id=row["sample_id"], ph=float(row["ph"]),
                    dissolved_oxygen=float(row["do_mg_l"]),
                    phosphate_nominal=float(p) if p else None,
                    interferents={k: float(row[f"{k}_mg_l"]) for k in ("cl", "so4", "no3")},
                    source=row["source"])
                rep = int(row["replicate"])
            except (TypeError, ValueError) as exc:
                raise MalformedRow(str(exc), line=line, source=str(path)) from None
            out.append((meta, rep, path.parent / row["file"]))
    return out
