"""Schmidt coefficient vectors of the states being embezzled."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

NORM_TOL = 1e-12


@dataclass(frozen=True)
class TargetState:
    """Schmidt coefficients of the state to embezzle.

    Coefficients must be strictly positive, non-increasing, and have unit
    2-norm (within 1e-12).
    """

    coeffs: tuple[float, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.coeffs) < 1:
            raise ValueError("target needs at least one Schmidt coefficient")
        if any(c <= 0.0 for c in self.coeffs):
            raise ValueError("target coefficients must be strictly positive")
        if any(a < b for a, b in zip(self.coeffs, self.coeffs[1:])):
            raise ValueError("target coefficients must be non-increasing")
        norm = math.fsum(c * c for c in self.coeffs)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"target coefficients have squared norm {norm!r}, not 1")

    @classmethod
    def normalized(cls, weights, name: str | None = None) -> "TargetState":
        """Build a target from positive weights, dividing out the 2-norm."""
        scale = math.sqrt(math.fsum(w * w for w in weights))
        return cls(tuple(w / scale for w in weights), name=name)

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return "r%d(%s)" % (self.rank, ",".join("%.6g" % c for c in self.coeffs))


PHI_PLUS = TargetState.normalized((2.0, 1.0), name="phi+")
PHI_STAR = TargetState.normalized((math.sqrt(math.pi - 1.0), 1.0), name="phi*")
PHI_CIRC = TargetState.normalized((1.0, 1.0), name="phio")

BUILTIN_TARGETS = {t.name: t for t in (PHI_PLUS, PHI_STAR, PHI_CIRC)}
