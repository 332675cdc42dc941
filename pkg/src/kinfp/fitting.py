"""Least-squares exponent and rate fits with mandatory residual reporting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_POINTS = 8


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual_rms: float
    window: tuple
    npoints: int


def fit_linear(u, w, window=None) -> FitResult:
    """Least squares w = slope*u + intercept over u in window."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if window is not None:
        lo, hi = window
        keep = (u >= lo) & (u <= hi)
        u, w = u[keep], w[keep]
    else:
        window = (float(u.min()), float(u.max())) if u.size else (np.nan, np.nan)
    if u.size < MIN_POINTS:
        raise ValueError(f"fit needs at least {MIN_POINTS} points, got {u.size}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(w))):
        raise ValueError("fit data must be finite")
    slope, intercept = np.polyfit(u, w, 1)
    resid = w - (slope * u + intercept)
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        window=(float(window[0]), float(window[1])),
        npoints=int(u.size),
    )


def fit_exponent(coords, values, window=None) -> FitResult:
    """Power-law fit value ~ C * coord^slope on a log-log scale.

    Both coordinates and values must be positive inside the window.
    """
    coords = np.asarray(coords, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        lo, hi = window
        keep = (coords >= lo) & (coords <= hi)
        coords, values = coords[keep], values[keep]
    if np.any(coords <= 0) or np.any(values <= 0):
        raise ValueError("power-law fit needs positive coordinates and values")
    res = fit_linear(np.log(coords), np.log(values))
    win = (
        (float(coords.min()), float(coords.max()))
        if window is None
        else (float(window[0]), float(window[1]))
    )
    return FitResult(res.slope, res.intercept, res.residual_rms, win, res.npoints)
