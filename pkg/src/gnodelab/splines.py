"""Natural cubic splines for filling irregularly sampled series.

The interpolant matches values at the knots, has zero second derivative at
both ends, and extrapolates linearly outside the knot range using the
boundary slopes. With exactly two knots it degenerates to the straight line
through them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InsufficientDataError

__all__ = ["Spline", "fit_natural_spline", "eval_spline"]


@dataclass(frozen=True)
class Spline:
    """Fitted natural cubic spline.

    knot_times are strictly increasing; second_derivs holds the spline's
    second derivative at each knot, zero at both ends by construction.
    """

    knot_times: np.ndarray
    knot_values: np.ndarray
    second_derivs: np.ndarray


def fit_natural_spline(times: np.ndarray, values: np.ndarray) -> Spline:
    """Fit a natural cubic spline through (times, values).

    Requires at least two knots and strictly increasing times. The interior
    second derivatives solve the standard tridiagonal system; the boundary
    ones are pinned to zero.
    """
    t = np.asarray(times, dtype=np.float64).ravel()
    y = np.asarray(values, dtype=np.float64).ravel()
    if t.shape != y.shape:
        raise DimensionError(f"times {t.shape} and values {y.shape} differ in length")
    n = t.size
    if n < 2:
        raise InsufficientDataError(f"need at least 2 knots, got {n}")
    if not np.all(np.diff(t) > 0):
        raise ValueError("knot times must be strictly increasing")

    m = np.zeros(n)
    if n > 2:
        h = np.diff(t)
        rhs = 6.0 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1])
        diag = 2.0 * (h[:-1] + h[1:])
        lower = h[:-1].copy()
        upper = h[1:].copy()
        # Thomas algorithm on the (n-2)-row interior system.
        k = n - 2
        cp = np.zeros(k)
        dp = np.zeros(k)
        cp[0] = upper[0] / diag[0]
        dp[0] = rhs[0] / diag[0]
        for i in range(1, k):
            denom = diag[i] - lower[i] * cp[i - 1]
            cp[i] = upper[i] / denom if i < k - 1 else 0.0
            dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
        m[k] = dp[k - 1]
        for i in range(k - 2, -1, -1):
            m[i + 1] = dp[i] - cp[i] * m[i + 2]
    return Spline(knot_times=t, knot_values=y, second_derivs=m)


def eval_spline(spline: Spline, t) -> np.ndarray:
    """Evaluate the spline at t (scalar or array).

    Points beyond the knot range are extrapolated linearly with the slope of
    the spline at the nearest boundary knot.
    """
    tq = np.asarray(t, dtype=np.float64)
    scalar = tq.ndim == 0
    tq = np.atleast_1d(tq)

    kt, ky, m = spline.knot_times, spline.knot_values, spline.second_derivs
    n = kt.size
    idx = np.clip(np.searchsorted(kt, tq, side="right") - 1, 0, n - 2)
    t0, t1 = kt[idx], kt[idx + 1]
    y0, y1 = ky[idx], ky[idx + 1]
    m0, m1 = m[idx], m[idx + 1]
    h = t1 - t0
    a = (t1 - tq) / h
    b = (tq - t0) / h
    out = (
        a * y0
        + b * y1
        + ((a**3 - a) * m0 + (b**3 - b) * m1) * h**2 / 6.0
    )

    lo = tq < kt[0]
    if np.any(lo):
        h0 = kt[1] - kt[0]
        slope0 = (ky[1] - ky[0]) / h0 - m[1] * h0 / 6.0
        out[lo] = ky[0] + slope0 * (tq[lo] - kt[0])
    hi = tq > kt[-1]
    if np.any(hi):
        h1 = kt[-1] - kt[-2]
        slope1 = (ky[-1] - ky[-2]) / h1 + m[-2] * h1 / 6.0
        out[hi] = ky[-1] + slope1 * (tq[hi] - kt[-1])

    return out[0] if scalar else out
