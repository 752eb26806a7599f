from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import TooFewReplicates, ZeroVariance
from .distributions import STUDENT_T, dist_tail, t_critical_two_tailed


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    t_critical: float
    reject_null: bool
    alpha: float
    p_value: float

    def to_dict(self):
        return {"t": self.t, "df": self.df, "t_critical": self.t_critical,
                "reject_null": self.reject_null, "alpha": self.alpha,
                "p_value": self.p_value}


def one_sample_t(mean: float, mu0: float, sd: float, n: int, df: int | None = None,
                 alpha: float = 0.05) -> TTestResult:
    """Two-tailed one-sample t test from summary statistics.

    ``df`` defaults to ``n - 1`` but is explicit so a published analysis that
    used a different value can be replayed.
    """
    if not sd > 0:
        raise ZeroVariance("standard deviation must be positive")
    if n < 2:
        raise TooFewReplicates("need n >= 2")
    if df is None:
        df = n - 1
    t = (mean - mu0) / (sd / math.sqrt(n))
    crit = t_critical_two_tailed(alpha, df)
    p = min(1.0, 2.0 * dist_tail(STUDENT_T, abs(t), df))
    return TTestResult(t, df, crit, abs(t) > crit, alpha, p)
