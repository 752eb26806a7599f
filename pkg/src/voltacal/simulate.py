"""Synthetic voltammograms and a phosphate speciation helper."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .calib import nernst_slope
from .cvdata import SampleMeta, Voltammogram

SWEEP_START = -1.4
SWEEP_STOP = 1.4
STEP = 0.005
SCAN_RATE = 50.0

# standard literature values, not derived from any measured data here
DEFAULT_PKA = (2.15, 7.20, 12.35)


@dataclass(frozen=True)
class SensorModel:
    """Peak amplitude is linear in concentration; peak position is Nernstian.

    ``potential_direction`` sets the sign of the log-concentration shift of
    the peak: +1 moves it toward less negative potentials as concentration
    rises, -1 follows E = E0 - s log10[P].
    """

    response_slope: float = -0.2773
    response_intercept: float = -30.40
    e_zero: float = -0.99
    temperature: float = 298.15
    peak_width: float = 0.15
    baseline_slope: float = 0.0
    baseline_offset: float = 0.0
    noise_sd: float = 0.0
    potential_direction: int = 1

    def __post_init__(self):
        if not self.peak_width > 0:
            raise ValueError("peak_width must be positive")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.potential_direction not in (1, -1):
            raise ValueError("potential_direction must be +1 or -1")

    def amplitude(self, conc):
        return self.response_intercept + self.response_slope * conc

    def peak_center(self, conc):
        if conc == 0:
            return self.e_zero
        return self.e_zero + self.potential_direction * nernst_slope(self.temperature) * math.log10(conc)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown SensorModel fields: {sorted(unknown)}")
        return cls(**d)


def sweep_potentials(center=None):
    """-1.4 .. 1.4 V in 5 mV steps, plus ``center`` if it falls between samples.

    Sampling the exact peak center keeps the extracted extremum equal to the
    model's peak, so zero-noise round trips are exact.
    """
    n = int(round((SWEEP_STOP - SWEEP_START) / STEP)) + 1
    grid = np.round(SWEEP_START + STEP * np.arange(n), 10)
    if center is not None and SWEEP_START < center < SWEEP_STOP:
        if not np.any(np.abs(grid - center) < 1e-12):
            grid = np.sort(np.append(grid, center))
    return grid


def synth_voltammogram(model: SensorModel, conc: float, seed: int = 0,
                       meta: SampleMeta | None = None) -> Voltammogram:
    """Gaussian cathodic peak on a linear baseline with seeded white noise.

    Noise comes from numpy's PCG64 generator, so a given seed reproduces the
    same trace bit for bit.
    """
    if conc < 0:
        raise ValueError("concentration must be >= 0")
    center = model.peak_center(conc)
    e = sweep_potentials(center)
    i = (model.baseline_offset + model.baseline_slope * e
         + model.amplitude(conc) * np.exp(-((e - center) ** 2) / (2.0 * model.peak_width ** 2)))
    if model.noise_sd > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        i = i + rng.normal(0.0, model.noise_sd, size=e.size)
    if meta is None:
        meta = SampleMeta(sample_id=f"sim-{conc:g}-{seed}", phosphate_nominal=conc)
    return Voltammogram(e, i, SCAN_RATE, meta)


@dataclass(frozen=True)
class SpeciationFractions:
    h3po4: float
    h2po4: float
    hpo4: float
    po4: float

    def as_tuple(self):
        return (self.h3po4, self.h2po4, self.hpo4, self.po4)


def phosphate_speciation(ph: float, pka=DEFAULT_PKA) -> SpeciationFractions:
    """Triprotic acid distribution at ``ph``."""
    if not 0.0 <= ph <= 14.0:
        raise ValueError(f"pH must lie in [0, 14], got {ph}")
    k1, k2, k3 = (10.0 ** -p for p in pka)
    h = 10.0 ** -ph
    terms = (h ** 3, h ** 2 * k1, h * k1 * k2, k1 * k2 * k3)
    total = math.fsum(terms)
    return SpeciationFractions(*(t / total for t in terms))
