"""Explicit small-scale simulation of embezzlement protocols.

Protocols here are permutation isometries acting on Schmidt coefficient
vectors.  Since every isometry is applied identically on both sides of a
bipartite state in canonical form, coefficients are all that is needed;
full amplitudes would square the state size for no information.

Three constructions are simulated:

* the optimal single-target protocol (sort the product multiset);
* block-superposed embezzlement, one isometry per superposed branch,
  assembled block-diagonally with the m(j-1)+l index layout;
* recursive rank-m embezzlement: pair adjacent target coefficients into a
  rank-m/2 spine, embezzle the spine, then fix up each pair with a rank-2
  block step, composing the permutation maps.

The recursion also tracks the worst rank-2 fidelity it performed, which
feeds the quadratic-in-depth error bound that the construction promises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .targets import TargetState

NORM_TOL = 1e-12
DENSE_SIM_LIMIT = 1 << 16


@dataclass(frozen=True, eq=False)
class SchmidtVector:
    """Dense Schmidt coefficient vector, unit 2-norm, not necessarily sorted."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.coeffs, dtype=np.float64)
        object.__setattr__(self, "coeffs", arr)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise ValueError("need a one-dimensional coefficient vector")
        if np.any(arr < 0.0):
            raise ValueError("Schmidt coefficients are non-negative")
        norm = math.fsum((arr * arr).tolist())
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"squared norm {norm!r} is not 1")

    @property
    def dim(self) -> int:
        return int(self.coeffs.shape[0])

    @property
    def is_sorted(self) -> bool:
        return bool(np.all(self.coeffs[1:] <= self.coeffs[:-1]))


@dataclass(frozen=True, eq=False)
class PermutationIsometry:
    """Injective basis map from a source space into a target space."""

    mapping: np.ndarray
    target_dim: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.mapping, dtype=np.int64)
        object.__setattr__(self, "mapping", arr)
        if np.unique(arr).shape[0] != arr.shape[0]:
            raise ValueError("isometry mapping must be injective")
        if arr.shape[0] and (arr.min() < 0 or arr.max() >= self.target_dim):
            raise ValueError("mapping leaves the target space")

    @property
    def source_dim(self) -> int:
        return int(self.mapping.shape[0])


def optimal_isometry(mu: SchmidtVector, target: TargetState) -> PermutationIsometry:
    """Permutation placing the product multiset in non-increasing order.

    Maps source basis index t (the t-th largest coefficient of mu) to the
    flattened product pair (i, j) = divmod(index, rank) holding the t-th
    largest product mu_i * phi_j.  Applying it reproduces the streaming
    optimal fidelity.
    """
    if not mu.is_sorted:
        raise ValueError("mu must be sorted non-increasing")
    m = target.rank
    products = np.outer(mu.coeffs, np.array(target.coeffs)).ravel()
    order = np.argsort(-products, kind="stable")
    return PermutationIsometry(mapping=order[: mu.dim], target_dim=mu.dim * m)


def isometry_overlap(
    iso: PermutationIsometry, mu: SchmidtVector, target: TargetState
) -> float:
    """Overlap of the permuted output with mu tensor target."""
    products = np.outer(mu.coeffs, np.array(target.coeffs)).ravel()
    t = iso.source_dim
    return float(np.dot(mu.coeffs[:t], products[iso.mapping]))


def block_fidelity(mu: SchmidtVector, target: TargetState) -> float:
    """Optimal single-target fidelity via the explicit isometry."""
    return isometry_overlap(optimal_isometry(mu, target), mu, target)


def superposed_embezzlement(
    mu: SchmidtVector, blocks: Sequence[tuple[float, TargetState]]
) -> float:
    """Fidelity of embezzling several targets in superposition.

    ``blocks`` are (weight, target) pairs with unit squared-weight sum and
    a common target rank m.  Per-block optimal isometries are assembled
    into one block-diagonal isometry over the m(j-1)+l indexed output
    space, and the overlap with the superposed target is returned.  The
    result is a weight-squared average of per-block fidelities, hence at
    least their minimum.
    """
    if not blocks:
        raise ValueError("need at least one block")
    weights = np.array([w for w, _ in blocks], dtype=np.float64)
    wnorm = math.fsum((weights * weights).tolist())
    if abs(wnorm - 1.0) > NORM_TOL:
        raise ValueError(f"block weights have squared norm {wnorm!r}, not 1")
    ranks = {t.rank for _, t in blocks}
    if len(ranks) != 1:
        raise ValueError("all blocks must share one target rank")
    m = ranks.pop()
    k = len(blocks)
    n = mu.dim
    if n * k * m > DENSE_SIM_LIMIT:
        raise ValueError("superposition exceeds the dense simulation budget")
    out = np.zeros((n, k * m))
    reference = np.zeros((n, k * m))
    for j, (w, phi) in enumerate(blocks):
        iso = optimal_isometry(mu, phi)
        i2, l2 = np.divmod(iso.mapping, m)
        out[i2, j * m + l2] = w * mu.coeffs
        reference[:, j * m : (j + 1) * m] = w * np.outer(
            mu.coeffs, np.array(phi.coeffs)
        )
    return float(np.sum(out * reference))


class RankRecursionOutcome(NamedTuple):
    achieved: float
    bound: float
    worst_rank2: float


def _recurse(mu: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, float]:
    """Composed permutation map for rank-len(phi) embezzlement and the
    worst rank-2 fidelity performed anywhere in the recursion."""
    n = mu.shape[0]
    m = phi.shape[0]
    if m == 2:
        products = np.outer(mu, phi).ravel()
        order = np.argsort(-products, kind="stable")
        mapping = order[:n]
        return mapping, float(np.dot(mu, products[mapping]))
    half = m // 2
    alpha = np.sqrt(phi[0::2] ** 2 + phi[1::2] ** 2)
    spine_map, worst = _recurse(mu, alpha)
    block_maps = np.empty((half, n), dtype=np.int64)
    for j in range(half):
        pair = phi[2 * j : 2 * j + 2] / alpha[j]
        products = np.outer(mu, pair).ravel()
        order = np.argsort(-products, kind="stable")
        block_maps[j] = order[:n]
        worst = min(worst, float(np.dot(mu, products[block_maps[j]])))
    i_mid, j_mid = np.divmod(spine_map, half)
    flat2 = block_maps[j_mid, i_mid]
    i2, l2 = np.divmod(flat2, 2)
    return i2 * m + (2 * j_mid + l2), worst


def recursive_rank_m(mu: SchmidtVector, target: TargetState) -> RankRecursionOutcome:
    """Recursive rank-m embezzlement with its quadratic-in-depth bound.

    Requires a power-of-two rank.  Returns the achieved fidelity F_m, the
    bound ceil(log2 m)^2 * (1 - F^2) for F the worst rank-2 fidelity the
    recursion performed, and F itself.  The construction guarantees
    1 - F_m^2 <= bound, which is re-checked here.
    """
    m = target.rank
    if m < 2 or m & (m - 1):
        raise ValueError("target rank must be a power of two, >= 2")
    if mu.dim * m > DENSE_SIM_LIMIT:
        raise ValueError("instance exceeds the dense simulation budget")
    if not mu.is_sorted:
        raise ValueError("mu must be sorted non-increasing")
    phi = np.array(target.coeffs)
    mapping, worst = _recurse(mu.coeffs, phi)
    products = np.outer(mu.coeffs, phi).ravel()
    achieved = float(np.dot(mu.coeffs, products[mapping]))
    depth = math.ceil(math.log2(m))
    bound = depth**2 * (1.0 - worst**2)
    if 1.0 - achieved**2 > bound + 1e-12:
        raise RuntimeError(
            f"recursion bound violated: 1-F^2={1 - achieved**2!r} > {bound!r}"
        )
    return RankRecursionOutcome(achieved=achieved, bound=bound, worst_rank2=worst)


def compose_bound(F1: float, F2: float) -> float:
    """Fidelity lower bound after substituting one near-copy for another.

    For pure states trace distance and fidelity satisfy T^2 + F^2 = 1 and
    T is subadditive under composition, so the composite fidelity is at
    least sqrt(1 - (sqrt(1-F1^2) + sqrt(1-F2^2))^2), clamped at zero when
    the summed distances pass one.
    """
    for F in (F1, F2):
        if not 0.0 <= F <= 1.0:
            raise ValueError("fidelities live in [0, 1]")
    t = math.sqrt(1.0 - F1**2) + math.sqrt(1.0 - F2**2)
    return math.sqrt(max(0.0, 1.0 - t * t))


# --------------------------------------------------------------------------
# randomized property suites


@dataclass(frozen=True)
class ProtocolReport:
    lemma: str
    trials: int
    violations: int
    worst_margin: float


def _trial_rng(seed: int, stream: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, trial)))


def random_sorted_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    w = np.sort(rng.uniform(0.1, 1.0, dim))[::-1]
    return w / math.sqrt(math.fsum((w * w).tolist()))


def random_target(rng: np.random.Generator, rank: int) -> TargetState:
    return TargetState(tuple(random_sorted_state(rng, rank)))


def superposition_suite(trials: int = 100, seed: int = 0) -> ProtocolReport:
    """Randomized check: superposed fidelity >= min per-block fidelity."""
    violations = 0
    worst = math.inf
    for t in range(trials):
        rng = _trial_rng(seed, 1, t)
        dim = int(rng.integers(8, 128))
        k = int(rng.integers(2, 5))
        m = int(rng.integers(2, 5))
        mu = SchmidtVector(random_sorted_state(rng, dim))
        blocks = [
            (float(w), random_target(rng, m))
            for w in random_sorted_state(rng, k)
        ]
        achieved = superposed_embezzlement(mu, blocks)
        floor = min(block_fidelity(mu, phi) for _, phi in blocks)
        margin = achieved - floor
        worst = min(worst, margin)
        if margin < -1e-12:
            violations += 1
    return ProtocolReport("superposition", trials, violations, worst)


def rank_recursion_suite(
    trials: int = 100, seed: int = 0, ranks: Sequence[int] = (2, 4, 8)
) -> ProtocolReport:
    """Randomized check of the quadratic-in-depth recursion bound."""
    violations = 0
    worst = math.inf
    for t in range(trials):
        rng = _trial_rng(seed, 2, t)
        m = int(rng.choice(np.array(ranks)))
        dim = int(rng.integers(16, 1 << 10))
        mu = SchmidtVector(random_sorted_state(rng, dim))
        target = random_target(rng, m)
        outcome = recursive_rank_m(mu, target)
        margin = outcome.bound - (1.0 - outcome.achieved**2)
        worst = min(worst, margin)
        if margin < -1e-12:
            violations += 1
    return ProtocolReport("rank-recursion", trials, violations, worst)
