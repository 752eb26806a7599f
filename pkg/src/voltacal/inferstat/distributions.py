"""Student t and Fisher F tails via the regularized incomplete beta function."""

from __future__ import annotations

import math

from ..errors import NonConvergence

STUDENT_T = "student_t"
FISHER_F = "fisher_f"

_MAX_ITER = 500
_EPS = 1e-15
_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NonConvergence(
        f"incomplete beta continued fraction did not converge in {_MAX_ITER} "
        f"iterations (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, xc: float | None = None) -> float:
    """Regularized incomplete beta function I_x(a, b).

    ``xc`` is 1 - x when the caller can form it without cancellation.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if xc is None:
        xc = 1.0 - x
    if x == 0.0 or xc == 0.0:
        return 0.0 if x == 0.0 else 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log(xc))
    front = math.exp(log_front)
    # the fraction converges fast only below the mean; use symmetry above it
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, xc) / b


def _check_df(df):
    if not df >= 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")


def t_tail(t: float, df: float) -> float:
    """Upper tail P(T > t) for Student's t with ``df`` degrees of freedom."""
    _check_df(df)
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    t2 = t * t
    half = 0.5 * betainc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))
    return half if t >= 0 else 1.0 - half


def f_tail(f: float, df1: float, df2: float) -> float:
    """Upper tail P(F > f) for Fisher's F(df1, df2)."""
    _check_df(df1)
    _check_df(df2)
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    u = df1 * f
    return betainc(0.5 * df2, 0.5 * df1, df2 / (df2 + u), u / (df2 + u))


def dist_tail(kind: str, stat: float, df1: float, df2: float | None = None) -> float:
    """Upper-tail probability of ``stat``.

    For ``student_t`` only ``df1`` is used. Two-tailed conversions are left to
    the caller.
    """
    if math.isnan(stat):
        raise ValueError("stat must not be NaN")
    if kind == STUDENT_T:
        return t_tail(stat, df1)
    if kind == FISHER_F:
        if df2 is None:
            raise ValueError("fisher_f needs df2")
        return f_tail(stat, df1, df2)
    raise ValueError(f"unknown distribution kind {kind!r}")


def dist_quantile(kind: str, p: float, df1: float, df2: float | None = None,
                  tol: float = 1e-12, max_iter: int = 400) -> float:
    """Inverse of :func:`dist_tail`: the ``q`` with upper tail ``p``.

    Brackets the root by geometric growth, then bisects. The tail is
    monotone in ``q`` so bisection cannot stall.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")

    def g(q):
        return dist_tail(kind, q, df1, df2) - p

    if kind == FISHER_F:
        lo, hi = 0.0, 1.0
    elif kind == STUDENT_T:
        if p == 0.5:
            return 0.0
        lo, hi = (0.0, 1.0) if p < 0.5 else (-1.0, 0.0)
    else:
        raise ValueError(f"unknown distribution kind {kind!r}")

    # g is decreasing: need g(lo) >= 0 >= g(hi)
    grow = 0
    while g(hi) > 0:
        lo, hi = hi, hi * 2.0 if hi > 0 else 1.0
        grow += 1
        if grow > 2000:
            raise NonConvergence("could not bracket quantile")
    while g(lo) < 0:
        hi, lo = lo, lo * 2.0 if lo < 0 else -1.0
        grow += 1
        if grow > 2000:
            raise NonConvergence("could not bracket quantile")

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            return 0.5 * (lo + hi)
    raise NonConvergence(f"quantile bisection did not converge in {max_iter} steps")


def t_critical_two_tailed(alpha: float, df: float) -> float:
    return dist_quantile(STUDENT_T, alpha / 2.0, df)


def f_critical(alpha: float, df1: float, df2: float) -> float:
    return dist_quantile(FISHER_F, alpha, df1, df2)
