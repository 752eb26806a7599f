"""Bundled data tables with typed loaders.

Each table lives in ``<data dir>/tables/<id>.csv`` next to a ``<id>.json``
manifest holding schema, units, provenance, known anomalies and the CSV's
SHA-256. ``VOLTACAL_DATA_DIR`` overrides the data directory.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ChecksumMismatch, UnknownTable
from .inferstat.anova import FactorialData, balance_by_duplication
from .quantity import MeasuredQuantity

REPLICATE_MATRIX = "replicate_matrix"
AVERAGED_SUMMARY = "averaged_summary"
CHARACTERIZATION = "characterization"

TABLE_IDS = ("A-1", "A-3", "A-5", "B-1", "B-3", "B-6", "B-9", "B-10", "B-11",
             "C-1", "C-3", "3-1", "D-1", "WW")

# averaged table -> (replicate table, level)
AVERAGED_SOURCES = {
    "A-1": ("A-5", "4.00"),
    "A-3": ("A-5", "8.00"),
    "B-1": ("B-9", "100"),
    "B-3": ("B-10", "100"),
    "B-6": ("B-11", "100"),
    "C-1": ("C-3", "1.00"),
}

# published ANOVA table -> stacked (replicate table, level) pairs
ANOVA_DESIGNS = {
    "A-6": [("A-5", "4.00"), ("A-5", "8.00")],
    "B-12": [("B-9", "100"), ("B-9", "0.00")],
    "B-13": [("B-10", "100"), ("B-10", "0.00")],
    "B-14": [("B-11", "100"), ("B-11", "0.00")],
    "B-15": [("B-9", "100"), ("B-10", "100"), ("B-11", "100")],
    "B-16": [("B-10", "100"), ("B-11", "100")],
    "B-17": [("B-10", "100"), ("B-9", "100")],
    "B-18": [("B-11", "100"), ("B-9", "100")],
    "C-4": [("C-3", "1.00"), ("C-3", "8.54")],
}

# levels whose stored replicates are verbatim copies: (table, level) -> measured count
DUPLICATED_LEVELS = {("C-3", "1.00"): 2}


def data_dir() -> Path:
    env = os.environ.get("VOLTACAL_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "data"


@dataclass(frozen=True)
class AveragedRow:
    concentration: float
    current: MeasuredQuantity
    potential: MeasuredQuantity | None
    printed: dict


@dataclass(frozen=True)
class Reading:
    value: float | None
    qualifier: str  # "", "<" or "text"
    text: str


@dataclass(frozen=True)
class CharacterizationRow:
    component: str
    readings: dict
    units: str


@dataclass(frozen=True)
class PeakRow:
    sample_id: str
    source: str
    n: int
    current: MeasuredQuantity


@dataclass(frozen=True)
class ReplicateMatrix:
    levels: tuple
    concentrations: tuple
    cells: np.ndarray  # levels x concentrations x replicates
    concentration_labels: tuple = ()

    def level(self, label) -> np.ndarray:
        """concentrations x replicates array for one factor level."""
        return self.cells[self.levels.index(str(label))]

    def measured(self, table_id, label) -> np.ndarray:
        """Like :meth:`level` but without verbatim duplicate replicates."""
        block = self.level(label)
        n = DUPLICATED_LEVELS.get((table_id, str(label)))
        return block[:, :n] if n else block


@dataclass(frozen=True)
class TableFixture:
    table_id: str
    schema: str
    rows: tuple
    checksum: str
    manifest: dict = field(default_factory=dict)
    matrix: ReplicateMatrix | None = None

    @property
    def anomalies(self):
        return self.manifest.get("anomalies", [])


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _parse_reading(text):
    t = text.strip()
    if t.startswith("<"):
        return Reading(float(t[1:]), "<", t)
    try:
        return Reading(float(t), "", t)
    except ValueError:
        return Reading(None, "text", t)


def _decimals(text):
    return len(text.split(".")[1]) if "." in text else 0


def load_table(table_id: str, root: Path | None = None) -> TableFixture:
    """Load, checksum-verify and parse one bundled table."""
    if table_id not in TABLE_IDS:
        raise UnknownTable(f"unknown table {table_id!r}; known: {', '.join(TABLE_IDS)}")
    base = Path(root) if root is not None else data_dir()
    csv_path = base / "tables" / f"{table_id}.csv"
    json_path = base / "tables" / f"{table_id}.json"
    if not csv_path.exists() or not json_path.exists():
        raise UnknownTable(f"table {table_id!r} has no fixture under {base / 'tables'}")
    raw = csv_path.read_bytes()
    manifest = json.loads(json_path.read_text(encoding="utf-8"))
    digest = _sha256(raw)
    if digest != manifest.get("sha256"):
        raise ChecksumMismatch(f"{csv_path}: sha256 {digest} does not match manifest")
    records = list(csv.reader(io.StringIO(raw.decode("utf-8"))))
    header, body = records[0], [r for r in records[1:] if r]
    schema = manifest["schema"]
    matrix = None
    if schema == REPLICATE_MATRIX:
        rows, matrix = _parse_matrix(header, body, csv_path)
    elif schema == AVERAGED_SUMMARY and header[0] == "sample_id":
        rows = tuple(PeakRow(r[0], r[1], int(r[2]),
                             MeasuredQuantity(float(r[3]), float(r[4]))) for r in body)
    elif schema == AVERAGED_SUMMARY:
        rows = tuple(
            AveragedRow(float(r[0]), MeasuredQuantity(float(r[1]), float(r[2])),
                        MeasuredQuantity(float(r[3]), float(r[4])),
                        dict(zip(header, r)))
            for r in body)
    elif schema == CHARACTERIZATION:
        sites = header[1:-1]
        rows = tuple(CharacterizationRow(r[0], {s: _parse_reading(v) for s, v in zip(sites, r[1:-1])},
                                         r[-1]) for r in body)
    else:
        raise ValueError(f"{json_path}: unknown schema {schema!r}")
    return TableFixture(table_id, schema, rows, digest, manifest, matrix)


def _parse_matrix(header, body, path):
    conc_labels = tuple(header[2:])
    levels = []
    blocks = {}
    for r in body:
        if len(r) != len(header):
            raise ValueError(f"{path}: replicate matrix is not rectangular")
        level = r[0]
        if level not in blocks:
            levels.append(level)
            blocks[level] = []
        blocks[level].append([float(v) for v in r[2:]])
    sizes = {len(b) for b in blocks.values()}
    if len(sizes) != 1:
        raise ValueError(f"{path}: levels have different replicate counts")
    # levels x reps x conc -> levels x conc x reps
    cells = np.array([blocks[l] for l in levels]).transpose(0, 2, 1)
    cells.setflags(write=False)
    matrix = ReplicateMatrix(tuple(levels), tuple(float(c) for c in conc_labels), cells,
                             conc_labels)
    rows = tuple(tuple(r) for r in body)
    return rows, matrix


def factorial_design(name: str, root=None) -> FactorialData:
    """Stacked design that reproduces one of the published ANOVA tables."""
    try:
        parts = ANOVA_DESIGNS[name]
    except KeyError:
        raise UnknownTable(f"no ANOVA design {name!r}; known: {', '.join(ANOVA_DESIGNS)}") from None
    return design_from_levels(parts, root)


def design_from_levels(parts, root=None) -> FactorialData:
    """Stack ``(table, level)`` blocks; duplicated levels are rebuilt by tiling.

    A single ``(table, None)`` entry expands to all of that table's levels.
    """
    expanded = []
    for table_id, level in parts:
        if level is None:
            m = load_table(table_id, root).matrix
            expanded += [(table_id, l) for l in m.levels]
        else:
            expanded.append((table_id, level))
    blocks = []
    target = 0
    for table_id, level in expanded:
        m = load_table(table_id, root).matrix
        if m is None:
            raise UnknownTable(f"{table_id} is not a replicate matrix")
        if str(level) not in m.levels:
            raise UnknownTable(f"{table_id} has no level {level!r}; levels: {m.levels}")
        block = m.measured(table_id, level)
        target = max(target, m.level(level).shape[1])
        blocks.append((f"{table_id}:{level}", block, m.concentration_labels))
    parts_fd = []
    for label, block, conc in blocks:
        fd = FactorialData(block[None, :, :], a_labels=(label,), b_labels=conc)
        if fd.replicates != target:
            fd = balance_by_duplication(fd, target)
        parts_fd.append(fd)
    return FactorialData.stack(parts_fd)


def characterization(table_id="3-1", root=None) -> dict:
    """``{component: {site: Reading}}`` from a characterization table."""
    t = load_table(table_id, root)
    return {row.component: row.readings for row in t.rows}


def voltammogram_manifest(root=None) -> Path:
    base = Path(root) if root is not None else data_dir()
    return base / "voltammograms" / "manifest.csv"
