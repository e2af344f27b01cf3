"""Least-squares fits of sweep fidelities to F(N) = a + b/N + c/N^2.

The basis is tiny and well scaled after the 1/N transform, so the fits
are solved directly from the 3x3 normal equations (LU with partial
pivoting).  Fits are unweighted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Point = tuple[float, float]


@dataclass(frozen=True)
class FitModel:
    """Coefficients of F ~ a + b/N + c/N^2 over a fit window."""

    a: float
    b: float
    c: float
    window: tuple[int, int]
    rms_residual: float

    def predict(self, N: float) -> float:
        return self.a + self.b / N + self.c / (N * N)


def _design(Ns: np.ndarray) -> np.ndarray:
    inv = 1.0 / Ns
    return np.column_stack([np.ones_like(inv), inv, inv * inv])


def fit_inverse_poly(points: Iterable[Point], n0: int) -> FitModel:
    """Ordinary least squares on {1, 1/N, 1/N^2}, restricted to N >= n0.

    Needs at least three distinct N values in the window; fewer make the
    normal equations singular and are rejected.
    """
    pts = sorted((float(N), float(F)) for N, F in points if N >= n0)
    if len({N for N, _ in pts}) < 3:
        raise ValueError("fit needs at least 3 distinct N values with N >= n0")
    Ns = np.array([N for N, _ in pts])
    Fs = np.array([F for _, F in pts])
    X = _design(Ns)
    coeffs = np.linalg.solve(X.T @ X, X.T @ Fs)
    resid = Fs - X @ coeffs
    rms = math.sqrt(float(np.mean(resid * resid)))
    return FitModel(
        a=float(coeffs[0]),
        b=float(coeffs[1]),
        c=float(coeffs[2]),
        window=(int(n0), int(max(Ns))),
        rms_residual=rms,
    )


@dataclass(frozen=True)
class SensitivityScan:
    """Fits across a range of window starts, with per-coefficient spread."""

    models: tuple[FitModel, ...]

    def _spread(self, pick) -> float:
        vals = [pick(m) for m in self.models]
        return max(vals) - min(vals)

    @property
    def spread_a(self) -> float:
        return self._spread(lambda m: m.a)

    @property
    def spread_b(self) -> float:
        return self._spread(lambda m: m.b)

    @property
    def spread_c(self) -> float:
        return self._spread(lambda m: m.c)


def sensitivity_scan(points: Sequence[Point], n0_range: Iterable[int]) -> SensitivityScan:
    """One fit per window start N0; exposes the coefficient spreads."""
    models = tuple(fit_inverse_poly(points, n0) for n0 in sorted(set(n0_range)))
    if not models:
        raise ValueError("need at least one window start")
    return SensitivityScan(models=models)


def crossover(fit_a: FitModel, fit_b: FitModel) -> float | None:
    """Largest N beyond both fit windows where the two models intersect.

    Solves (a_A - a_B) + (b_A - b_B)/N + (c_A - c_B)/N^2 = 0 as a
    quadratic in N.  Returns None for identical fits or when no real root
    lies beyond the windows.
    """
    da = fit_a.a - fit_b.a
    db = fit_a.b - fit_b.b
    dc = fit_a.c - fit_b.c
    if da == 0.0 and db == 0.0 and dc == 0.0:
        return None
    n_max = max(fit_a.window[1], fit_b.window[1])
    roots: list[float] = []
    if da != 0.0:
        disc = db * db - 4.0 * da * dc
        if disc >= 0.0:
            sq = math.sqrt(disc)
            roots = [(-db + sq) / (2.0 * da), (-db - sq) / (2.0 * da)]
    elif db != 0.0:
        roots = [-dc / db]
    beyond = [r for r in roots if r > n_max]
    return max(beyond) if beyond else None
