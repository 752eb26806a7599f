"""Balanced two-way ANOVA with replication."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import NonIntegerMultiple, SingleReplicate, UnbalancedDesign
from .distributions import FISHER_F, dist_tail, f_critical

SOURCES = ("Sample", "Columns", "Interaction", "Within", "Total")
COLUMNS = ("Source", "SS", "df", "MS", "F", "P-Value", "F-Critical")


@dataclass(frozen=True)
class FactorialData:
    """Observations laid out as ``cells[a, b, r]``.

    Factor A (rows, e.g. pH or interferent level) is the Excel "Sample"
    source; factor B (e.g. phosphate concentration) is "Columns".
    """

    cells: np.ndarray
    a_labels: tuple = ()
    b_labels: tuple = ()
    duplicated: bool = False

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=float)
        if cells.ndim != 3:
            raise UnbalancedDesign(
                f"cells must be a rectangular a x b x r array, got shape {cells.shape}")
        if not np.all(np.isfinite(cells)):
            raise ValueError("cells must be finite")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        a, b, _ = cells.shape
        if not self.a_labels:
            object.__setattr__(self, "a_labels", tuple(range(a)))
        if not self.b_labels:
            object.__setattr__(self, "b_labels", tuple(range(b)))
        if len(self.a_labels) != a or len(self.b_labels) != b:
            raise ValueError("label counts do not match cell shape")

    @classmethod
    def from_nested(cls, groups, **kwargs):
        """Build from ``groups[a][b] -> list of replicates``; rejects ragged input."""
        sizes = {len(reps) for row in groups for reps in row}
        widths = {len(row) for row in groups}
        if len(sizes) != 1 or len(widths) != 1:
            raise UnbalancedDesign(
                f"every cell needs the same replicate count (got {sorted(sizes)})")
        return cls(np.array(groups, dtype=float), **kwargs)

    @classmethod
    def stack(cls, parts, a_labels=None):
        """Concatenate along factor A; replicate counts and B levels must agree."""
        shapes = {p.cells.shape[1:] for p in parts}
        if len(shapes) != 1:
            raise UnbalancedDesign(f"cannot stack designs with shapes {sorted(shapes)}")
        labels = a_labels or tuple(l for p in parts for l in p.a_labels)
        return cls(np.concatenate([p.cells for p in parts], axis=0),
                   a_labels=tuple(labels), b_labels=parts[0].b_labels,
                   duplicated=any(p.duplicated for p in parts))

    @property
    def shape(self):
        return self.cells.shape

    @property
    def replicates(self):
        return self.cells.shape[2]


def balance_by_duplication(data: FactorialData, target_r: int) -> FactorialData:
    """Tile replicates verbatim up to ``target_r`` (r -> k*r).

    Duplicated copies carry no new information; the result is flagged so
    reports can say so.
    """
    r = data.replicates
    if target_r < r or target_r % r:
        raise NonIntegerMultiple(f"target_r={target_r} is not a multiple of r={r}")
    if target_r == r:
        return data
    cells = np.concatenate([data.cells] * (target_r // r), axis=2)
    return replace(data, cells=cells, duplicated=True)


@dataclass(frozen=True)
class AnovaRow:
    source: str
    ss: float
    df: int
    ms: float | None = None
    f: float | None = None
    p_value: float | None = None
    f_critical: float | None = None

    def cells(self):
        return [self.source, self.ss, self.df, self.ms, self.f, self.p_value, self.f_critical]


@dataclass(frozen=True)
class AnovaTable:
    rows: tuple
    alpha: float = 0.05
    duplicated: bool = False
    notes: tuple = field(default_factory=tuple)

    def __getitem__(self, source) -> AnovaRow:
        for row in self.rows:
            if row.source.lower() == source.lower():
                return row
        raise KeyError(source)

    def to_records(self):
        return [dict(zip(COLUMNS, row.cells())) for row in self.rows]

    def to_dict(self):
        return {"alpha": self.alpha, "duplicated": self.duplicated,
                "notes": list(self.notes), "columns": list(COLUMNS),
                "rows": self.to_records()}

    def format(self, digits=3):
        """Fixed-width text rendering in the Excel column order."""
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, str):
                return v
            if isinstance(v, int):
                return str(v)
            return f"{v:.{digits}g}" if abs(v) < 1e4 else f"{v:.0f}"
        lines = ["\t".join(COLUMNS)]
        for row in self.rows:
            cells = row.cells()
            if row.source in ("Sample", "Columns", "Interaction") and row.f is None:
                cells[4] = "N/A"
                cells[5] = "N/A"
            lines.append("\t".join(fmt(c) for c in cells))
        return "\n".join(lines)


def sums_of_squares(cells):
    """(SS_a, SS_b, SS_ab, SS_within, SS_total) from cell-mean decomposition."""
    y = np.asarray(cells, dtype=float)
    a, b, r = y.shape
    if np.ptp(y) == 0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    grand = y.mean()
    row_means = y.mean(axis=(1, 2))
    col_means = y.mean(axis=(0, 2))
    cell_means = y.mean(axis=2)
    ss_a = b * r * float(np.sum((row_means - grand) ** 2))
    ss_b = a * r * float(np.sum((col_means - grand) ** 2))
    inter = cell_means - row_means[:, None] - col_means[None, :] + grand
    ss_ab = r * float(np.sum(inter ** 2))
    ss_w = float(np.sum((y - cell_means[:, :, None]) ** 2))
    ss_t = float(np.sum((y - grand) ** 2))
    return ss_a, ss_b, ss_ab, ss_w, ss_t


def two_way_anova(data: FactorialData, alpha: float = 0.05) -> AnovaTable:
    """Fixed-effects two-way ANOVA with replication (Excel layout).

    F is undefined when the within-cell mean square is zero; those rows carry
    ``f=None`` and ``p_value=None``.
    """
    if not isinstance(data, FactorialData):
        data = FactorialData(data)
    a, b, r = data.shape
    if r < 2:
        raise SingleReplicate("interaction needs at least 2 replicates per cell")
    if a < 2 or b < 2:
        raise UnbalancedDesign("both factors need at least 2 levels")
    ss_a, ss_b, ss_ab, ss_w, ss_t = sums_of_squares(data.cells)
    df_a, df_b = a - 1, b - 1
    df_ab = df_a * df_b
    df_w = a * b * (r - 1)
    ms_w = ss_w / df_w
    rows = []
    for name, ss, df in (("Sample", ss_a, df_a), ("Columns", ss_b, df_b),
                         ("Interaction", ss_ab, df_ab)):
        ms = ss / df
        if ss_t == 0 or ss_w <= 1e-13 * ss_t:
            f = p = None
        else:
            f = ms / ms_w
            p = dist_tail(FISHER_F, f, df, df_w)
        rows.append(AnovaRow(name, ss, df, ms, f, p, f_critical(alpha, df, df_w)))
    rows.append(AnovaRow("Within", ss_w, df_w, ms_w))
    rows.append(AnovaRow("Total", ss_t, a * b * r - 1))
    notes = ()
    if data.duplicated:
        notes = ("replicates were duplicated to balance the design; "
                 "within-cell variance and F are not independent estimates",)
    if any(row.f is None for row in rows[:3]):
        notes += ("within-cell variance is zero: F and P are not applicable",)
    return AnovaTable(tuple(rows), alpha, data.duplicated, notes)
