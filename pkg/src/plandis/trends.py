"""Trend detection on per-radius traces.

A finite ball cannot witness ``sup < ∞`` or ``liminf = 0``; these helpers
turn per-radius sups and mins into the evidence the checkers report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SLOPE_TOL = 0.02
MIN_ANNULI = 8
MIN_GOODNESS = 0.9
OUTER = 3


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    goodness: float
    residual: float


def line_fit(x, y) -> LineFit:
    """Least squares ``y ≈ a + s x`` with coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = intercept + slope * x
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y ** 2))):
        goodness = 1.0
    else:
        goodness = 1.0 - ss_res / ss_tot
    return LineFit(float(slope), float(intercept), goodness,
                   float(np.sqrt(ss_res / len(x))))


def is_bounded(radii, sups, slope_tol: float = SLOPE_TOL) -> bool:
    """Bounded iff every sup is finite and ``log sup`` does not grow faster
    than ``slope_tol`` per radius step.  Zero sups carry no growth."""
    radii = np.asarray(radii, dtype=float)
    sups = np.asarray(sups, dtype=float)
    if np.any(~np.isfinite(sups)):
        return False
    pos = sups > 0
    if pos.sum() < 2:
        return True
    return line_fit(radii[pos], np.log(sups[pos])).slope <= slope_tol


def to_zero_trend(radii, minima, slope_tol: float = SLOPE_TOL,
                  min_annuli: int = MIN_ANNULI,
                  min_goodness: float = MIN_GOODNESS,
                  outer: int = OUTER) -> tuple[str, dict]:
    """Classify per-annulus minima as ``decreasing_to_zero``,
    ``bounded_away_from_zero`` or ``inconclusive``.

    Exact zeros on the outermost annuli count as a witnessed zero liminf.
    Otherwise decay must be fitted, geometric in ``r`` or power-law in
    ``log r``, with goodness at least ``min_goodness``.
    """
    radii = np.asarray(radii, dtype=float)
    minima = np.asarray(minima, dtype=float)
    info: dict = {"annuli": int(len(radii))}
    if len(radii) < min_annuli:
        info["reason"] = f"fewer than {min_annuli} annuli"
        return "inconclusive", info
    if np.any(np.isnan(minima)):
        info["reason"] = "undefined minima"
        return "inconclusive", info
    tail = minima[-outer:]
    info["surrogate"] = float(tail.min())
    if np.all(tail == 0):
        info["reason"] = "minima vanish on the outer annuli"
        return "decreasing_to_zero", info
    pos = (minima > 0) & np.isfinite(minima)
    if pos.sum() < min_annuli:
        info["reason"] = "too few positive minima to fit"
        return "inconclusive", info
    r, y = radii[pos], np.log(minima[pos])
    geo = line_fit(r, y)
    info["geometric"] = {"slope": geo.slope, "goodness": geo.goodness}
    decaying = geo.slope < -slope_tol and geo.goodness >= min_goodness
    if np.all(r > 0):
        pw = line_fit(np.log(r), y)
        info["power"] = {"slope": pw.slope, "goodness": pw.goodness}
        decaying |= pw.slope < -slope_tol and pw.goodness >= min_goodness
    if decaying:
        return "decreasing_to_zero", info
    if geo.slope >= -slope_tol:
        return "bounded_away_from_zero", info
    info["reason"] = "decay fit below goodness threshold"
    return "inconclusive", info


def flag_from_trend(trend: str):
    return {"decreasing_to_zero": True,
            "bounded_away_from_zero": False}.get(trend)


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj
