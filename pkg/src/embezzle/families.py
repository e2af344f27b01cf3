"""Schmidt-coefficient spectra of the embezzling families.

Every family is exposed as a :class:`SpectrumSource`: a lazily generated,
run-length-encoded, non-increasing stream of unnormalized coefficients
plus the normalization constant.  Generators are pure and deterministic,
so independent consumers simply create fresh streams.

Families:

* ``fdh``     -- f(x) = 1/sqrt(x)
* ``g(r)``    -- f(x) = sqrt(prod_{s=1..r} lambda^s(x) / x)
* ``h(r)``    -- f(x) = 1/sqrt(x * prod_{s=1..r} lambda^s(x))
* ``gh``      -- adaptive hybrid: index x takes the h(1) value while the
  running normalization stays >= ln(x), else the g(1) value; the spectrum
  is the multiset sorted non-increasing
* ``sine(phi)`` -- the pre-normalized sine-weighted family over nested
  tensor powers of an equal-coefficient state ``phi``

where lambda(x) = ln(x + e) and lambda^s is its s-fold composition.

The gh branch decision at x depends on the running sum over 1..x-1, so
the sequence is inherently sequential; the scan is a compiled kernel with
compensated accumulation (the branch flag is sensitive to the running
sum, and at n = 2^33 a naive sum is ~1e-6 off relative).  Sorted output
is produced in O(1) memory by merging the h-selected and g-selected
subsequences, each of which is non-increasing on its own; each consumer
of a subsequence runs an independent forward pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

import numpy as np
from numba import njit

from .streams import Block, merge_sorted
from .summation import RunningSum
from .targets import TargetState, PHI_CIRC

E = math.e

BLOCK_ELEMS = 1 << 20
SCAN_CHUNK = 1 << 20

MATERIALIZE_LIMIT = 1 << 16


class FamilyKind(str, Enum):
    FDH = "fdh"
    G = "g"
    H = "h"
    GH = "gh"
    SINE = "sine"


@dataclass(frozen=True)
class FamilySpec:
    """Declarative description of a family from which spectra are generated."""

    kind: FamilyKind
    r: int = 0
    phi: TargetState | None = field(default=None)

    def __post_init__(self) -> None:
        if self.kind in (FamilyKind.G, FamilyKind.H):
            if self.r < 1:
                raise ValueError(f"{self.kind.value} family needs class index r >= 1")
        elif self.r != 0:
            raise ValueError(f"{self.kind.value} family takes no class index")
        if self.kind is FamilyKind.SINE:
            phi = self.phi if self.phi is not None else PHI_CIRC
            first = phi.coeffs[0]
            if any(abs(c - first) > 1e-12 for c in phi.coeffs):
                raise ValueError(
                    "sine family supports equal-coefficient phi only"
                )
            object.__setattr__(self, "phi", phi)
        elif self.phi is not None:
            raise ValueError(f"{self.kind.value} family takes no phi")

    @property
    def label(self) -> str:
        if self.kind in (FamilyKind.G, FamilyKind.H):
            return f"{self.kind.value}{self.r}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        t = text.strip().lower()
        if t == "fdh":
            return fdh()
        if t == "gh":
            return gh()
        if t == "sine":
            return sine()
        if t and t[0] in "gh" and t[1:].isdigit():
            r = int(t[1:])
            return g(r) if t[0] == "g" else h(r)
        raise ValueError(f"unknown family {text!r}")


def fdh() -> FamilySpec:
    return FamilySpec(FamilyKind.FDH)


def g(r: int) -> FamilySpec:
    return FamilySpec(FamilyKind.G, r=r)


def h(r: int) -> FamilySpec:
    return FamilySpec(FamilyKind.H, r=r)


def gh() -> FamilySpec:
    return FamilySpec(FamilyKind.GH)


def sine(phi: TargetState | None = None) -> FamilySpec:
    return FamilySpec(FamilyKind.SINE, phi=phi)


# --------------------------------------------------------------------------
# value generators


def lambda_eval(s: int, x: float) -> float:
    """s-fold composition of lambda(x) = ln(x + e); lambda^0 is identity."""
    if s < 0:
        raise ValueError("composition depth must be >= 0")
    if x < 0:
        raise ValueError("lambda is evaluated on x >= 0")
    v = float(x)
    for _ in range(s):
        v = math.log(v + E)
    return v


def _family_sq(spec: FamilySpec, x: np.ndarray) -> np.ndarray:
    """f(x)^2 for the regular families, vectorized over an index array."""
    acc = 1.0 / x
    if spec.kind is FamilyKind.FDH:
        return acc
    v = x
    for _ in range(spec.r):
        v = np.log(v + E)
        if spec.kind is FamilyKind.G:
            acc = acc * v
        else:
            acc = acc / v
    return acc


def _family_values(spec: FamilySpec, x: np.ndarray) -> np.ndarray:
    return np.sqrt(_family_sq(spec, x))


def regular_value(spec: FamilySpec, i: int) -> float:
    """f(i), unnormalized, for the fdh/g/h families."""
    if spec.kind not in (FamilyKind.FDH, FamilyKind.G, FamilyKind.H):
        raise ValueError("regular_value applies to the fdh/g/h families")
    if i < 1:
        raise ValueError("index must be >= 1")
    return float(_family_values(spec, np.array([i], dtype=np.float64))[0])


# --------------------------------------------------------------------------
# gh scan kernels


@njit(cache=True)
def _gh_branch_chunk(x_start, count, total, comp, out_h, out_g):
    """Advance the gh scan by ``count`` indices, splitting values by branch.

    Returns (n_h, n_g, total, comp) where the outputs hold the h-selected
    and g-selected values of this index window in index order.
    """
    nh = 0
    ng = 0
    for k in range(count):
        x = float(x_start + k)
        lam = math.log(x + E)
        if total + comp >= math.log(x):
            v2 = 1.0 / (x * lam)
            out_h[nh] = math.sqrt(v2)
            nh += 1
        else:
            v2 = lam / x
            out_g[ng] = math.sqrt(v2)
            ng += 1
        t = total + v2
        if abs(total) >= abs(v2):
            comp += (total - t) + v2
        else:
            comp += (v2 - t) + total
        total = t
    return nh, ng, total, comp


@njit(cache=True)
def _gh_raw_chunk(x_start, count, total, comp, out):
    """Advance the gh scan, emitting values in raw index order."""
    for k in range(count):
        x = float(x_start + k)
        lam = math.log(x + E)
        if total + comp >= math.log(x):
            v2 = 1.0 / (x * lam)
        else:
            v2 = lam / x
        out[k] = math.sqrt(v2)
        t = total + v2
        if abs(total) >= abs(v2):
            comp += (total - t) + v2
        else:
            comp += (v2 - t) + total
        total = t
    return total, comp


@njit(cache=True)
def _gh_prefix_scan(points):
    """C(gh, p) for every p in the ascending int64 array ``points``."""
    out = np.empty(points.shape[0])
    total = 0.0
    comp = 0.0
    pi = 0
    for x_int in range(1, points[points.shape[0] - 1] + 1):
        x = float(x_int)
        lam = math.log(x + E)
        if total + comp >= math.log(x):
            v2 = 1.0 / (x * lam)
        else:
            v2 = lam / x
        t = total + v2
        if abs(total) >= abs(v2):
            comp += (total - t) + v2
        else:
            comp += (v2 - t) + total
        total = t
        if x_int == points[pi]:
            out[pi] = total + comp
            pi += 1
    return out


_gh_norm_cache: dict[int, float] = {}


def gh_prefix_norms(points: list[int]) -> list[float]:
    """C(gh, p) at each requested prefix length, one compiled scan."""
    pts = sorted(set(int(p) for p in points))
    if not pts or pts[0] < 1:
        raise ValueError("prefix points must be >= 1")
    missing = [p for p in pts if p not in _gh_norm_cache]
    if missing:
        vals = _gh_prefix_scan(np.array(missing, dtype=np.int64))
        for p, v in zip(missing, vals):
            _gh_norm_cache[p] = float(v)
    return [_gh_norm_cache[int(p)] for p in points]


def _gh_branch_blocks(n: int, want_h: bool) -> Iterator[Block]:
    out_h = np.empty(SCAN_CHUNK)
    out_g = np.empty(SCAN_CHUNK)
    total = 0.0
    comp = 0.0
    x = 1
    while x <= n:
        cnt = min(SCAN_CHUNK, n - x + 1)
        nh, ng, total, comp = _gh_branch_chunk(x, cnt, total, comp, out_h, out_g)
        x += cnt
        picked = out_h[:nh] if want_h else out_g[:ng]
        if picked.shape[0]:
            yield picked.copy(), None


def gh_materialize(n: int) -> tuple[np.ndarray, float]:
    """Single-pass gh construction: (sorted values, exact normalization).

    Cached-scale reference for the streamed two-pass merge; capped so the
    dense array stays small.
    """
    if not 1 <= n <= MATERIALIZE_LIMIT:
        raise ValueError(f"materialization supports 1 <= n <= {MATERIALIZE_LIMIT}")
    out = np.empty(n)
    total, comp = _gh_raw_chunk(1, n, 0.0, 0.0, out)
    return np.sort(out)[::-1], total + comp


def gh_raw_values(n: int) -> np.ndarray:
    """gh(1..n) in index order (dense; capped like gh_materialize)."""
    if not 1 <= n <= MATERIALIZE_LIMIT:
        raise ValueError(f"materialization supports 1 <= n <= {MATERIALIZE_LIMIT}")
    out = np.empty(n)
    _gh_raw_chunk(1, n, 0.0, 0.0, out)
    return out


def gh_raw_monotone(n: int) -> bool:
    """Whether the raw (pre-sort) gh sequence is non-increasing."""
    total = 0.0
    comp = 0.0
    out = np.empty(SCAN_CHUNK)
    x = 1
    last = np.inf
    while x <= n:
        cnt = min(SCAN_CHUNK, n - x + 1)
        total, comp = _gh_raw_chunk(x, cnt, total, comp, out)
        vals = out[:cnt]
        if vals[0] > last or (cnt > 1 and not np.all(vals[1:] <= vals[:-1])):
            return False
        last = float(vals[-1])
        x += cnt
    return True


# --------------------------------------------------------------------------
# spectrum sources


@dataclass
class SpectrumSource:
    """Run-length-encoded non-increasing spectrum with its normalization.

    ``norm_sq`` is sum(value^2 * multiplicity) accumulated with compensated
    summation, except in the explicit ``ln_approx`` mode of the gh family
    where it is ln(n).  ``components`` are factories of sorted block
    streams whose merge is the spectrum; every call produces a fresh,
    independently consumable stream.
    """

    family: FamilySpec | None
    total_count: int
    norm_sq: float
    norm_method: str = "exact"
    dense: bool = True
    components: tuple[Callable[[], Iterator[Block]], ...] = ()

    def blocks(self) -> Iterator[Block]:
        """Fresh stream of (values, counts) blocks, non-increasing."""
        if len(self.components) == 1:
            return self.components[0]()
        return merge_sorted([f() for f in self.components])

    def component_sources(self) -> list[Iterator[Block]]:
        return [f() for f in self.components]

    def runs(self) -> Iterator[tuple[float, int]]:
        """(value, multiplicity) runs, coalescing equal adjacent values."""
        pend_v: float | None = None
        pend_c = 0
        for values, counts in self.blocks():
            for i in range(values.shape[0]):
                v = float(values[i])
                c = 1 if counts is None else int(counts[i])
                if pend_v is not None and v == pend_v:
                    pend_c += c
                    continue
                if pend_v is not None:
                    yield pend_v, pend_c
                pend_v, pend_c = v, c
        if pend_v is not None:
            yield pend_v, pend_c

    def first_runs(self, k: int) -> list[tuple[float, int]]:
        out = []
        for run in self.runs():
            out.append(run)
            if len(out) >= k:
                break
        return out

    def first_value(self) -> float:
        """Largest coefficient, without streaming past the first blocks."""
        best = 0.0
        for factory in self.components:
            for values, _counts in factory():
                if values.shape[0]:
                    best = max(best, float(values[0]))
                    break
        return best

    def dense_values(self, limit: int = MATERIALIZE_LIMIT) -> np.ndarray:
        """Materialize the whole spectrum (refused beyond ``limit``)."""
        if self.total_count > limit:
            raise ValueError(
                f"spectrum has {self.total_count} elements, over the cap {limit}"
            )
        parts = []
        for values, counts in self.blocks():
            parts.append(values if counts is None else np.repeat(values, counts))
        return np.concatenate(parts) if parts else np.empty(0)


def _regular_blocks(spec: FamilySpec, n: int) -> Callable[[], Iterator[Block]]:
    def factory() -> Iterator[Block]:
        x = 1
        while x <= n:
            hi = min(n + 1, x + BLOCK_ELEMS)
            yield _family_values(spec, np.arange(x, hi, dtype=np.float64)), None
            x = hi

    return factory


_regular_norm_cache: dict[tuple[FamilySpec, int], float] = {}


def regular_prefix_norms(spec: FamilySpec, points: list[int]) -> list[float]:
    """C(f, p) at each prefix length for the fdh/g/h families, one pass."""
    pts = sorted(set(int(p) for p in points))
    if not pts or pts[0] < 1:
        raise ValueError("prefix points must be >= 1")
    missing = [p for p in pts if (spec, p) not in _regular_norm_cache]
    if missing:
        acc = RunningSum()
        x = 1
        for p in missing:
            while x <= p:
                hi = min(p + 1, x + BLOCK_ELEMS)
                acc.add_array(_family_sq(spec, np.arange(x, hi, dtype=np.float64)))
                x = hi
            _regular_norm_cache[(spec, p)] = acc.value
    return [_regular_norm_cache[(spec, int(p))] for p in points]


def _sine_runs(spec: FamilySpec, N: int) -> list[tuple[float, int]]:
    phi = spec.phi if spec.phi is not None else PHI_CIRC
    m = phi.rank
    raw = []
    for k in range(1, N + 1):
        c_k = math.sqrt(2.0 / (N + 1)) * math.sin(k * math.pi / (N + 1))
        raw.append((c_k * float(m) ** (-(N - k + 1) / 2.0), m ** (N - k + 1)))
    raw.sort(key=lambda run: -run[0])
    runs: list[tuple[float, int]] = []
    for v, c in raw:
        if runs and runs[-1][0] == v:
            runs[-1] = (v, runs[-1][1] + c)
        else:
            runs.append((v, c))
    return runs


def sine_spectrum(N: int, phi: TargetState | None = None) -> SpectrumSource:
    """Run-length spectrum of the sine family at parameter N (n = m^N).

    Values c_k * m^{-(N-k+1)/2} with multiplicity m^{N-k+1}, where
    c_k = sqrt(2/(N+1)) * sin(k*pi/(N+1)) and m is the rank of the
    equal-coefficient building-block state (rank-2 maximally entangled by
    default).  Pre-normalized: the squared values sum to one.
    """
    if N < 1:
        raise ValueError("sine family needs N >= 1")
    spec = sine(phi)
    runs = _sine_runs(spec, N)
    norm = RunningSum()
    for v, c in runs:
        norm.add(v * v * c)
    values = np.array([v for v, _ in runs])
    counts = np.array([c for _, c in runs], dtype=np.int64)
    total = int(counts.sum())

    def factory() -> Iterator[Block]:
        yield values.copy(), counts.copy()

    return SpectrumSource(
        family=spec,
        total_count=total,
        norm_sq=norm.value,
        norm_method="exact",
        dense=False,
        components=(factory,),
    )


def gh_spectrum(n: int, norm_method: str = "exact") -> SpectrumSource:
    """Sorted gh spectrum with exact or ln(n)-approximated normalization.

    The exact mode runs a full compensated scan for C(gh, n); the
    ln_approx mode substitutes ln(n), which tracks the exact value to
    within max(g1(n)^2, h1(n)^2).
    """
    if n < 1:
        raise ValueError("spectrum needs n >= 1")
    if norm_method == "exact":
        norm = gh_prefix_norms([n])[0]
    elif norm_method == "ln_approx":
        norm = math.log(n)
    else:
        raise ValueError(f"unknown norm method {norm_method!r}")
    return SpectrumSource(
        family=gh(),
        total_count=n,
        norm_sq=norm,
        norm_method=norm_method,
        dense=True,
        components=(
            lambda: _gh_branch_blocks(n, want_h=True),
            lambda: _gh_branch_blocks(n, want_h=False),
        ),
    )


def build_spectrum(
    spec: FamilySpec, n: int, norm_method: str = "exact"
) -> SpectrumSource:
    """SpectrumSource for any family at Schmidt rank n.

    For the sine family n must be m^N for the family's rank-m block state;
    the spectrum then has 2(m^N - 1) coefficients for m = 2.  ln_approx
    normalization is specific to the gh family.
    """
    if n < 1:
        raise ValueError("spectrum needs n >= 1")
    if spec.kind is FamilyKind.GH:
        return gh_spectrum(n, norm_method=norm_method)
    if norm_method != "exact":
        raise ValueError("ln_approx normalization applies to the gh family only")
    if spec.kind is FamilyKind.SINE:
        m = (spec.phi or PHI_CIRC).rank
        N = round(math.log(n, m))
        if m**N != n:
            raise ValueError(f"sine family needs n to be a power of {m}")
        return sine_spectrum(N, phi=spec.phi)
    norm = regular_prefix_norms(spec, [n])[0]
    return SpectrumSource(
        family=spec,
        total_count=n,
        norm_sq=norm,
        norm_method="exact",
        dense=True,
        components=(_regular_blocks(spec, n),),
    )


def spectrum_prefix_norms(spec: FamilySpec, points: list[int]) -> list[float]:
    """Normalization prefix sums C(f, p) in the family's own index order.

    Defined for the families generated by a single decreasing function
    (fdh/g/h) and for gh, whose raw running sum is the quantity its own
    branch rule tracks.  The sine family is pre-normalized and has no
    divergent normalization to measure.
    """
    if spec.kind is FamilyKind.GH:
        return gh_prefix_norms(points)
    if spec.kind in (FamilyKind.FDH, FamilyKind.G, FamilyKind.H):
        return regular_prefix_norms(spec, points)
    raise ValueError("prefix normalizations apply to the fdh/g/h/gh families")


def spectrum_from_runs(
    runs, family: FamilySpec | None = None
) -> SpectrumSource:
    """SpectrumSource over explicit (value, multiplicity) runs.

    Rejects runs that are not strictly positive, non-increasing in value,
    with multiplicities >= 1.
    """
    run_list = [(float(v), int(c)) for v, c in runs]
    if not run_list:
        raise ValueError("need at least one run")
    if any(c < 1 for _, c in run_list):
        raise ValueError("multiplicities must be >= 1")
    if any(v <= 0.0 for v, _ in run_list):
        raise ValueError("values must be strictly positive")
    if any(nxt > prev for (prev, _), (nxt, _) in zip(run_list, run_list[1:])):
        raise ValueError("values must be non-increasing")
    values = np.array([v for v, _ in run_list])
    counts = np.array([c for _, c in run_list], dtype=np.int64)
    norm = RunningSum()
    norm.add_array(values * values * counts)
    dense = bool(np.all(counts == 1))

    def factory() -> Iterator[Block]:
        yield values.copy(), None if dense else counts.copy()

    return SpectrumSource(
        family=family,
        total_count=int(counts.sum()),
        norm_sq=norm.value,
        norm_method="exact",
        dense=dense,
        components=(factory,),
    )


def check_monotone(spec: FamilySpec, n: int) -> bool:
    """Whether the generated spectrum is non-increasing and positive.

    For gh this checks the post-sort stream (non-increasing by
    construction); the raw pre-sort sequence is reported separately by
    :func:`gh_raw_monotone`.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if spec.kind is FamilyKind.GH:
        stream = gh_spectrum(n, norm_method="ln_approx").blocks()
    elif spec.kind is FamilyKind.SINE:
        stream = build_spectrum(spec, n).blocks()
    else:
        stream = _regular_blocks(spec, n)()
    last = np.inf
    for values, _counts in stream:
        if values.shape[0] == 0:
            continue
        if values[-1] <= 0.0 or values[0] > last:
            return False
        if values.shape[0] > 1 and not np.all(values[1:] <= values[:-1]):
            return False
        last = float(values[-1])
    return True
