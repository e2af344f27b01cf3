"""Entropy and normalization-growth diagnostics for the families.

These are the numeric counterparts of the asymptotic estimates: entropy
leading terms, the lambda^{r+1} order of the h-class normalizations, the
divergence of successive g-class orders, the n/m prefix ratio, and the
decay of the leading Schmidt coefficient.  Estimates are leading-term
only, so comparisons are reported as measured/predicted ratios and the
tolerance bands live with the tests that consume them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .families import (
    FamilyKind,
    FamilySpec,
    SpectrumSource,
    build_spectrum,
    g,
    gh_prefix_norms,
    h,
    lambda_eval,
    regular_prefix_norms,
    regular_value,
    spectrum_prefix_norms,
)
from .summation import RunningSum

LN2 = math.log(2.0)


def entanglement_entropy(mu: SpectrumSource) -> float:
    """Entanglement entropy in bits, -sum p log2 p with p = value^2 / norm.

    Run-length aware: a run of multiplicity c contributes one term
    weighted by c, so the sine family costs O(N).  Accumulation is
    compensated and done in natural log, converted to bits once.
    """
    acc = RunningSum()
    for values, counts in mu.blocks():
        sq = values * values
        term = sq * np.log(sq)
        if counts is not None:
            term = term * counts
        acc.add_array(term)
    C = mu.norm_sq
    return (math.log(C) - acc.value / C) / LN2


def entropy_prediction(spec: FamilySpec, n: int) -> float:
    """Leading-term entropy estimate (bits) for fdh, g(1), or h(1)."""
    if n < 16:
        raise ValueError("estimates need n >= 16")
    log2n = math.log2(n)
    if spec.kind is FamilyKind.FDH:
        return log2n / 2.0
    if spec.kind is FamilyKind.G and spec.r == 1:
        return 2.0 / 3.0 * log2n
    if spec.kind is FamilyKind.H and spec.r == 1:
        return log2n / math.log(math.log(n))
    raise ValueError(f"no entropy estimate for family {spec.label}")


@dataclass(frozen=True)
class OrderEstimate:
    """Measured normalization against its predicted order at one n."""

    family: FamilySpec
    n: int
    measured: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.measured / self.predicted


def h_order_estimate(r: int, n: int) -> OrderEstimate:
    """C(h_r, n) against its predicted order lambda^{r+1}(n)."""
    spec = h(r)
    measured = regular_prefix_norms(spec, [n])[0]
    return OrderEstimate(spec, n, measured, lambda_eval(r + 1, n))


def g1_order_estimate(n: int) -> OrderEstimate:
    """C(g_1, n) against its predicted order (ln n)^2 / 2."""
    spec = g(1)
    measured = regular_prefix_norms(spec, [n])[0]
    return OrderEstimate(spec, n, measured, math.log(n) ** 2 / 2.0)


def order_ratio(spec: FamilySpec, m: int, n: int) -> float:
    """C(f, floor(n/m)) / C(f, n), from one prefix-sum pass."""
    if m < 1:
        raise ValueError("need m >= 1")
    if m == 1:
        return 1.0
    if n < m:
        raise ValueError("need n >= m")
    c_part, c_full = spectrum_prefix_norms(spec, [n // m, n])
    return c_part / c_full


@dataclass(frozen=True)
class OrderDivergenceReport:
    """Ratios C(g_{r+1}, n) / C(g_r, n) along increasing samples."""

    r: int
    samples: tuple[int, ...]
    ratios: tuple[float, ...]

    @property
    def all_at_least_one(self) -> bool:
        return all(x >= 1.0 for x in self.ratios)

    @property
    def increasing(self) -> bool:
        return all(a < b for a, b in zip(self.ratios, self.ratios[1:]))


def order_divergence_check(r: int, n_samples: Sequence[int]) -> OrderDivergenceReport:
    """Ratio of successive g-class normalizations at each sample size.

    The ratios are >= 1 pointwise and, since the two orders genuinely
    diverge, grow along increasing samples.
    """
    samples = sorted(int(n) for n in n_samples)
    if not samples:
        raise ValueError("need at least one sample")
    lo = regular_prefix_norms(g(r), samples)
    hi = regular_prefix_norms(g(r + 1), samples)
    ratios = tuple(b / a for a, b in zip(lo, hi))
    return OrderDivergenceReport(r=r, samples=tuple(samples), ratios=ratios)


def mu1_decay(
    spec: FamilySpec, N_range: Iterable[int], check: bool = True
) -> list[tuple[int, float]]:
    """Normalized leading coefficient mu_1 at n = 2^N for each N.

    With ``check`` the sequence is required to be strictly decreasing
    (it must be, for any universal family); the sine family is reported
    without the check since its leading run follows a different law.
    """
    Ns = sorted(set(int(N) for N in N_range))
    out: list[tuple[int, float]] = []
    for N in Ns:
        n = 2**N
        if spec.kind in (FamilyKind.FDH, FamilyKind.G, FamilyKind.H):
            norm = regular_prefix_norms(spec, [n])[0]
            mu1 = regular_value(spec, 1) / math.sqrt(norm)
        elif spec.kind is FamilyKind.GH:
            norm = gh_prefix_norms([n])[0]
            src = build_spectrum(spec, n, norm_method="ln_approx")
            mu1 = src.first_value() / math.sqrt(norm)
        else:
            src = build_spectrum(spec, n)
            mu1 = src.first_value() / math.sqrt(src.norm_sq)
        out.append((N, mu1))
    if check and spec.kind is not FamilyKind.SINE:
        values = [v for _, v in out]
        if any(a <= b for a, b in zip(values, values[1:])):
            raise ValueError(f"mu_1 not strictly decreasing for {spec.label}: {out}")
    return out


@dataclass(frozen=True)
class LnDeviationRow:
    """C(gh, n) against ln n with its step-size bound."""

    n: int
    norm: float
    deviation: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.deviation <= self.bound


def gh_ln_deviation(N_values: Iterable[int]) -> list[LnDeviationRow]:
    """|C(gh, n) - ln n| at n = 2^N, against max(g1(n)^2, h1(n)^2).

    The adaptive branch rule keeps the running normalization within one
    step of ln n, so the deviation is bounded by the larger of the two
    candidate squared values at n.
    """
    Ns = sorted(set(int(N) for N in N_values))
    ns = [2**N for N in Ns]
    norms = gh_prefix_norms(ns)
    rows = []
    for n, c in zip(ns, norms):
        bound = max(regular_value(g(1), n) ** 2, regular_value(h(1), n) ** 2)
        rows.append(
            LnDeviationRow(n=n, norm=c, deviation=abs(c - math.log(n)), bound=bound)
        )
    return rows


def h_ratio_condition(r: int, x_values: Iterable[int], k: int = 2, c: int = 1) -> list[float]:
    """h(kx + c)/h(x) for h = prod_s 1/sqrt(lambda^s), the slow-variation check.

    The ratio tends to one; sampling at growing x should give values
    monotonically closer to one.
    """
    out = []
    for x in sorted(int(v) for v in x_values):
        ratio = 1.0
        for s in range(1, r + 1):
            ratio *= math.sqrt(lambda_eval(s, x) / lambda_eval(s, k * x + c))
        out.append(ratio)
    return out
