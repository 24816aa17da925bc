"""Deterministic multistart Nelder-Mead for the 2D center searches.

Neither the asymmetry nor the gamma objective is guaranteed convex in the
center y, so every search runs a fixed fan of simplex descents (seed point
plus eight compass offsets) and reduces by minimum.  The reduction is
order-independent: candidates are compared by (value, y1, y2)
lexicographically, so concurrent execution of the starts would return the
identical witness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

_COMPASS = np.array([[np.cos(k * np.pi / 4.0), np.sin(k * np.pi / 4.0)]
                     for k in range(8)])


@dataclass(frozen=True)
class SearchResult:
    x: np.ndarray
    fun: float
    nfev: int
    converged: bool
    starts: int


def compass_seeds(center, radius: float) -> np.ndarray:
    """The fixed 9-start fan: the seed itself plus 8 offsets at ``radius``."""
    center = np.asarray(center, dtype=float)
    return np.vstack([center[None, :], center[None, :] + radius * _COMPASS])


def multistart_minimize(fun, seeds, xatol: float, fatol: float = 1e-14,
                        maxiter: int = 400) -> SearchResult:
    """Run Nelder-Mead from every seed and keep the lexicographic best."""
    best = None
    nfev = 0
    converged = False
    for seed in np.asarray(seeds, dtype=float):
        res = minimize(fun, seed, method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": fatol,
                                "maxiter": maxiter, "maxfev": 4 * maxiter})
        nfev += res.nfev
        converged = converged or bool(res.success)
        cand = (float(res.fun), float(res.x[0]), float(res.x[1]))
        if best is None or cand < best:
            best = cand
    return SearchResult(x=np.array(best[1:]), fun=best[0], nfev=nfev,
                        converged=converged, starts=len(seeds))
