"""Compensated (Neumaier) accumulation kernels.

Normalization constants and overlap sums here routinely add 10^8..10^10
terms spanning many orders of magnitude; naive accumulation loses ~n*eps
relative accuracy, which is the dominant error source in this problem.
All long-running sums therefore go through the kernels below, which keep
a running compensation term.  The carried error is O(eps) relative,
comfortably inside the contract of <= 10*eps*log2(n).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def kahan_sum(values, total, comp):
    """Add every element of ``values`` to (total, comp); returns the pair."""
    for i in range(values.shape[0]):
        v = values[i]
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total, comp


@njit(cache=True)
def kahan_dot(a, b, total, comp):
    """Add sum(a[i]*b[i]) to (total, comp) in index order; returns the pair."""
    for i in range(a.shape[0]):
        v = a[i] * b[i]
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total, comp


@njit(cache=True)
def kahan_weighted_dot(a, wa, b, total, comp):
    """Add sum(wa[i]*a[i]*b[i]) to (total, comp); returns the pair."""
    for i in range(a.shape[0]):
        v = wa[i] * a[i] * b[i]
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total, comp


class RunningSum:
    """Tiny convenience wrapper carrying (total, comp) across array chunks."""

    __slots__ = ("total", "comp")

    def __init__(self) -> None:
        self.total = 0.0
        self.comp = 0.0

    def add_array(self, values: np.ndarray) -> None:
        self.total, self.comp = kahan_sum(
            np.ascontiguousarray(values, dtype=np.float64), self.total, self.comp
        )

    def add(self, v: float) -> None:
        t = self.total + v
        if abs(self.total) >= abs(v):
            self.comp += (self.total - t) + v
        else:
            self.comp += (v - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp
