"""Explicit permutation-isometry simulation of the protocol constructions."""

import math

import numpy as np
import pytest

from conftest import random_target, seeded_rng
from embezzle import (
    PHI_CIRC,
    PermutationIsometry,
    SchmidtVector,
    TargetState,
    block_fidelity,
    build_spectrum,
    compose_bound,
    fdh,
    g,
    gh_spectrum,
    isometry_overlap,
    optimal_fidelity,
    optimal_isometry,
    rank_recursion_suite,
    recursive_rank_m,
    spectrum_from_runs,
    superposed_embezzlement,
    superposition_suite,
)


def schmidt_from_spectrum(src) -> SchmidtVector:
    dense = src.dense_values()
    return SchmidtVector(dense / math.sqrt(src.norm_sq))


# ---------------------------------------------------------------- types

def test_schmidt_vector_validation():
    with pytest.raises(ValueError):
        SchmidtVector(np.array([0.5, 0.5]))  # squared norm 0.5
    with pytest.raises(ValueError):
        SchmidtVector(np.array([-1.0]))
    v = SchmidtVector(np.array([0.8, 0.6]))
    assert v.dim == 2 and v.is_sorted


def test_isometry_validation():
    with pytest.raises(ValueError):
        PermutationIsometry(mapping=np.array([0, 0]), target_dim=4)
    with pytest.raises(ValueError):
        PermutationIsometry(mapping=np.array([0, 5]), target_dim=4)
    iso = PermutationIsometry(mapping=np.array([2, 0, 1]), target_dim=6)
    assert iso.source_dim == 3


# ---------------------------------------------------------------- optimal isometry

def test_optimal_isometry_reproduces_fidelity():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 2))
    overlap = isometry_overlap(optimal_isometry(mu, PHI_CIRC), mu, PHI_CIRC)
    assert overlap == pytest.approx(0.8047378541243649, abs=1e-13)


def test_optimal_isometry_rank1_identity():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 8))
    iso = optimal_isometry(mu, TargetState((1.0,)))
    assert np.array_equal(iso.mapping, np.arange(8))
    assert isometry_overlap(iso, mu, TargetState((1.0,))) == pytest.approx(
        1.0, abs=1e-13
    )


def test_optimal_isometry_uniform_pair():
    mu = SchmidtVector(np.array([1.0, 1.0]) / math.sqrt(2))
    F = block_fidelity(mu, PHI_CIRC)
    assert F == pytest.approx(1 / math.sqrt(2), abs=1e-14)


def test_optimal_isometry_requires_sorted_mu():
    with pytest.raises(ValueError):
        optimal_isometry(SchmidtVector(np.array([0.6, 0.8])), PHI_CIRC)


def test_simulation_agrees_with_streaming():
    # dense isometry overlap == streaming fidelity, dims up to 2^10, ranks to 8
    for fi, (spec, n) in enumerate([(fdh(), 1 << 10), (g(2), 512)]):
        src = build_spectrum(spec, n)
        mu = schmidt_from_spectrum(src)
        for t in range(4):
            rng = seeded_rng(11, fi, t)
            target = random_target(rng, int(rng.integers(2, 9)))
            dense = block_fidelity(mu, target)
            stream = optimal_fidelity(src, target)
            assert abs(dense - stream) <= 1e-12
    src = gh_spectrum(777)
    mu = schmidt_from_spectrum(src)
    for t in range(3):
        target = random_target(seeded_rng(12, t), 5)
        assert abs(block_fidelity(mu, target) - optimal_fidelity(src, target)) <= 1e-12


# ---------------------------------------------------------------- superposition

def test_superposed_single_block_degenerate():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 64))
    target = random_target(seeded_rng(21), 3)
    assert superposed_embezzlement(mu, [(1.0, target)]) == pytest.approx(
        block_fidelity(mu, target), abs=1e-13
    )


def test_superposed_identical_blocks():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 64))
    target = random_target(seeded_rng(22), 2)
    w = 1 / math.sqrt(2)
    F = superposed_embezzlement(mu, [(w, target), (w, target)])
    assert F == pytest.approx(block_fidelity(mu, target), abs=1e-12)


def test_superposed_beats_worst_block():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 128))
    for t in range(10):
        rng = seeded_rng(23, t)
        k = int(rng.integers(2, 5))
        weights = np.sort(rng.uniform(0.2, 1.0, k))[::-1]
        weights = weights / math.sqrt(float(np.sum(weights**2)))
        blocks = [(float(w), random_target(rng, 3)) for w in weights]
        F = superposed_embezzlement(mu, blocks)
        floor = min(block_fidelity(mu, phi) for _, phi in blocks)
        assert F >= floor - 1e-12


def test_superposed_validation():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 16))
    t2 = random_target(seeded_rng(24), 2)
    t3 = random_target(seeded_rng(24, 1), 3)
    with pytest.raises(ValueError):
        superposed_embezzlement(mu, [(0.9, t2), (0.9, t2)])  # weights not normalized
    with pytest.raises(ValueError):
        superposed_embezzlement(mu, [(1 / math.sqrt(2), t2), (1 / math.sqrt(2), t3)])
    with pytest.raises(ValueError):
        superposed_embezzlement(mu, [])


# ---------------------------------------------------------------- rank recursion

def test_rank2_base_case_exact():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 64))
    target = random_target(seeded_rng(31), 2)
    outcome = recursive_rank_m(mu, target)
    F = block_fidelity(mu, target)
    assert outcome.achieved == pytest.approx(F, abs=1e-14)
    assert outcome.worst_rank2 == pytest.approx(F, abs=1e-14)
    assert outcome.bound == pytest.approx(1 - F**2, abs=1e-13)


def test_rank4_uniform_target_bound():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 64))
    target = TargetState.normalized((1.0, 1.0, 1.0, 1.0))
    outcome = recursive_rank_m(mu, target)
    assert 1 - outcome.achieved**2 <= 4 * (1 - outcome.worst_rank2**2) + 1e-12
    assert outcome.bound == pytest.approx(4 * (1 - outcome.worst_rank2**2), abs=1e-12)


def test_rank8_randomized_bound():
    for t in range(20):
        rng = seeded_rng(32, t)
        dim = int(rng.integers(16, 256))
        mu = schmidt_from_spectrum(build_spectrum(fdh(), dim))
        target = random_target(rng, 8)
        outcome = recursive_rank_m(mu, target)
        assert 1 - outcome.achieved**2 <= outcome.bound + 1e-12


def test_rank_recursion_validation():
    mu = schmidt_from_spectrum(build_spectrum(fdh(), 16))
    with pytest.raises(ValueError):
        recursive_rank_m(mu, random_target(seeded_rng(33), 3))
    with pytest.raises(ValueError):
        recursive_rank_m(mu, TargetState((1.0,)))
    big = schmidt_from_spectrum(build_spectrum(fdh(), 1 << 14))
    with pytest.raises(ValueError):
        recursive_rank_m(big, random_target(seeded_rng(33, 1), 8))


# ---------------------------------------------------------------- composition bound

def test_compose_bound_values():
    assert compose_bound(1.0, 1.0) == 1.0
    assert compose_bound(0.8, 1.0) == pytest.approx(0.8, abs=1e-14)
    assert compose_bound(1.0, 0.8) == pytest.approx(0.8, abs=1e-14)
    # distances 0.6 + 0.6 pass one: clamp to zero
    assert compose_bound(0.8, 0.8) == 0.0


def test_compose_bound_monotone():
    grid = np.linspace(0.0, 1.0, 21)
    for f2 in (0.3, 0.9, 1.0):
        vals = [compose_bound(f1, f2) for f1 in grid]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        compose_bound(1.2, 0.5)


# ---------------------------------------------------------------- suites

def test_suites_no_violations_and_deterministic():
    rep1 = superposition_suite(trials=25, seed=5)
    rep2 = superposition_suite(trials=25, seed=5)
    assert rep1.violations == 0
    assert rep1.worst_margin == rep2.worst_margin
    assert rep1.worst_margin >= -1e-12

    rec1 = rank_recursion_suite(trials=25, seed=5)
    rec2 = rank_recursion_suite(trials=25, seed=5)
    assert rec1.violations == 0
    assert rec1.worst_margin == rec2.worst_margin
    assert rec1.worst_margin >= -1e-12


def test_custom_runs_source_in_dense_sim():
    src = spectrum_from_runs([(0.5, 2), (0.25, 8)])
    mu = schmidt_from_spectrum(src)
    target = random_target(seeded_rng(41), 2)
    assert abs(block_fidelity(mu, target) - optimal_fidelity(src, target)) <= 1e-12
