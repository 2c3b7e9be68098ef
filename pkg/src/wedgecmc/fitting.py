"""Convergence-rate fitting for lambda-ladder measurements.

Quantities produced by the ladder are modeled as value = limit + C * lambda**-p.
The limit is obtained by a Richardson-style two-parameter fit (scan over the
rate with the limit and constant solved by linear least squares), after which
(C, p) are re-measured by log-log regression of |value - limit|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, InsufficientLadder

_P_LO, _P_HI = 0.05, 8.0


@dataclass(frozen=True)
class ConvergenceFit:
    """Fitted limit, decay rate and prefactor of a ladder quantity."""

    limit: float
    rate: float
    constant: float
    residual_rms: float
    points: int
    degenerate: bool = False


def _linear_fit(lams, values, p):
    """Least-squares (limit, C) for value = limit + C lam^-p; returns fit and rms."""
    basis = np.vstack([np.ones_like(lams), lams**-p]).T
    coef, *_ = np.linalg.lstsq(basis, values, rcond=None)
    resid = values - basis @ coef
    return coef[0], coef[1], math.sqrt(float(np.mean(resid**2)))


def fit_convergence(samples):
    """Fit (limit, rate, constant) to ladder samples [(lambda, value), ...].

    Requires at least 4 strictly increasing lambda values.  Constant data
    raises DegenerateFit carrying the limit (rate reported as infinity by the
    caller that chooses to catch it); use fit_or_degenerate for the tagged
    variant.
    """
    lams = np.asarray([s[0] for s in samples], dtype=float)
    values = np.asarray([s[1] for s in samples], dtype=float)
    if len(lams) < 4:
        raise InsufficientLadder(f"need >= 4 ladder points, got {len(lams)}")
    if not np.all(np.diff(lams) > 0):
        raise ValueError("ladder values must be strictly increasing")

    scale = max(np.max(np.abs(values)), 1.0)
    if np.max(values) - np.min(values) <= 1e-14 * scale:
        raise DegenerateFit(f"constant samples at value {values[0]!r}")

    # stage 1: scan the rate on a log grid, refine by golden section
    grid = np.exp(np.linspace(math.log(_P_LO), math.log(_P_HI), 161))
    rms = np.array([_linear_fit(lams, values, p)[2] for p in grid])
    k = int(np.argmin(rms))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = _linear_fit(lams, values, c)[2]
    fd = _linear_fit(lams, values, d)[2]
    for _ in range(200):
        if b - a < 1e-12 * max(1.0, b):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = _linear_fit(lams, values, c)[2]
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = _linear_fit(lams, values, d)[2]
    p1 = 0.5 * (a + b)
    limit, _, _ = _linear_fit(lams, values, p1)

    # stage 2: log-log regression of |value - limit| for the reported (C, p)
    dev = np.abs(values - limit)
    good = dev > 1e-15 * scale
    if good.sum() >= 2:
        slope, intercept = np.polyfit(np.log(lams[good]), np.log(dev[good]), 1)
        p2 = -slope
        c2 = math.exp(intercept)
    else:
        p2, c2 = p1, 0.0
    _, _, final_rms = _linear_fit(lams, values, p2 if good.sum() >= 2 else p1)
    return ConvergenceFit(
        limit=float(limit),
        rate=float(p2),
        constant=float(c2),
        residual_rms=final_rms,
        points=len(lams),
    )


def fit_or_degenerate(samples):
    """Like fit_convergence but returns a tagged fit for constant data."""
    try:
        return fit_convergence(samples)
    except DegenerateFit:
        values = [s[1] for s in samples]
        return ConvergenceFit(
            limit=float(values[-1]),
            rate=math.inf,
            constant=0.0,
            residual_rms=0.0,
            points=len(values),
            degenerate=True,
        )
