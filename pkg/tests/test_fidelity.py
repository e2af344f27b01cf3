"""Streaming fidelity against the brute-force oracle and frozen constants.

The oracle materializes the full product multiset, sorts it, and takes
the top-n overlap; the streaming path must match it to 1e-12.  Frozen
numbers were produced by that oracle (or closed forms) ahead of time.
"""

import math

import numpy as np
import pytest

from conftest import random_target, seeded_rng
from embezzle import (
    PHI_CIRC,
    PHI_PLUS,
    PHI_STAR,
    SweepPointError,
    TargetState,
    brute_force_fidelity,
    build_spectrum,
    fdh,
    fidelity_sweep,
    g,
    gh,
    gh_spectrum,
    h,
    optimal_fidelity,
    ratio_profile,
    regular_value,
    sine,
    sine_matched_fidelity,
    sine_mismatched_fidelity,
    sine_spectrum,
    spectrum_from_runs,
)

# brute-force values for the fdh family, phi-circ, N = 3..10
FDH_PHIO_SWEEP = [
    0.8659959907844973,
    0.887985413037676,
    0.9048359088306996,
    0.9177763949665262,
    0.9278510846066567,
    0.9358351088280045,
    0.9422791490647304,
    0.9475709419819325,
]


def test_fdh2_maximally_entangled():
    src = build_spectrum(fdh(), 2)
    hand = (2 + math.sqrt(2)) / (3 * math.sqrt(2))
    assert optimal_fidelity(src, PHI_CIRC) == pytest.approx(hand, abs=1e-14)
    assert brute_force_fidelity(src, PHI_CIRC) == pytest.approx(
        0.8047378541243649, abs=1e-14
    )


def test_rank_one_target_is_exact():
    one = TargetState((1.0,))
    for src in (
        build_spectrum(fdh(), 1000),
        build_spectrum(g(2), 500),
        gh_spectrum(256),
        sine_spectrum(6),
    ):
        assert optimal_fidelity(src, one) == pytest.approx(1.0, abs=1e-12)


def test_fdh4_with_exact_tie():
    # alpha*mu_4 == beta*mu_1 exactly; the tie must not disturb the result
    src = build_spectrum(fdh(), 4)
    stream = optimal_fidelity(src, PHI_PLUS)
    assert stream == pytest.approx(0.8944271909999157, abs=1e-14)
    assert abs(stream - brute_force_fidelity(src, PHI_PLUS)) <= 1e-12


def test_oracle_equivalence_randomized():
    for fi, spec in enumerate([fdh(), g(1), g(3), h(1), h(3), gh(), sine()]):
        n = (1 << 10) if spec.kind.value != "sine" else (1 << 10)
        src = build_spectrum(spec, n)
        for t in range(6):
            rng = seeded_rng(7, fi, t)
            target = random_target(rng, int(rng.integers(1, 5)))
            a = optimal_fidelity(src, target)
            b = brute_force_fidelity(src, target)
            assert abs(a - b) <= 1e-12, (spec.label, target)


def test_brute_force_guard():
    src = build_spectrum(fdh(), 1 << 21)
    big = random_target(seeded_rng(3), 4)  # 2^21 * 4 products, over the cap
    with pytest.raises(ValueError):
        brute_force_fidelity(src, big)


def test_fidelity_bounds_and_rank1_uniqueness():
    src = build_spectrum(fdh(), 512)
    for target in (PHI_PLUS, PHI_STAR, PHI_CIRC):
        F = optimal_fidelity(src, target)
        assert 0.0 <= F < 1.0  # strictly below 1 for entangled targets
    assert optimal_fidelity(src, TargetState((1.0,))) == pytest.approx(1.0, abs=1e-12)


def test_rearrangement_optimality_spot_check(rng):
    # swapping unequal adjacent sorted products never increases the overlap
    src = build_spectrum(fdh(), 16)
    mu = src.dense_values()
    target = random_target(rng, 3)
    products = np.sort(np.outer(mu, target.coeffs).ravel())[::-1][:16]
    base = float(np.dot(mu, products))
    for i in (0, 3, 7, 14):
        if products[i] == products[i + 1]:
            continue
        swapped = products.copy()
        swapped[[i, i + 1]] = swapped[[i + 1, i]]
        assert float(np.dot(mu, swapped)) < base


def test_gap_bound_small_instance():
    # 1 - F >= (1/2)(1 - 1/sqrt(2))^2 mu_1^2; fdh n=2 numbers from the oracle
    src = build_spectrum(fdh(), 2)
    gap = 1.0 - optimal_fidelity(src, PHI_CIRC)
    mu1 = 1.0 / math.sqrt(src.norm_sq)
    bound = 0.5 * (1 - 1 / math.sqrt(2)) ** 2 * mu1**2
    assert bound == pytest.approx(0.02859547920896834, abs=1e-14)
    assert gap == pytest.approx(0.19526214587563506, abs=1e-12)
    assert gap >= bound


# ---------------------------------------------------------------- ratio profile

def test_ratio_profile_fdh_first_five():
    src = build_spectrum(fdh(), 64)
    rho = ratio_profile(src, PHI_CIRC, 5)
    expected = [math.sqrt(i / (2 * math.ceil(i / 2))) for i in range(1, 6)]
    assert rho == pytest.approx(expected, abs=1e-12)


def test_ratio_profile_rank_one_all_ones():
    src = build_spectrum(g(1), 100)
    assert ratio_profile(src, TargetState((1.0,)), 100) == pytest.approx(
        np.ones(100), abs=1e-15
    )


def test_ratio_profile_prefix_stable():
    short = ratio_profile(build_spectrum(fdh(), 1 << 12), PHI_PLUS, 256)
    long = ratio_profile(build_spectrum(fdh(), 1 << 16), PHI_PLUS, 256)
    assert np.array_equal(short, long)


def test_ratio_profile_h1_approaches_one():
    # for phi-circ, omega_i = h1(ceil(i/2))/sqrt(2): closed-form cross-check
    src = build_spectrum(h(1), 1 << 22)
    samples = [1 << 10, 1 << 16, 1 << 22]
    rho = ratio_profile(src, PHI_CIRC, 1 << 22)
    gaps = []
    for i in samples:
        closed = regular_value(h(1), i // 2) / math.sqrt(2) / regular_value(h(1), i)
        assert rho[i - 1] == pytest.approx(closed, rel=1e-12)
        gaps.append(abs(rho[i - 1] - 1.0))
    assert gaps[0] > gaps[1] > gaps[2]


def test_ratio_profile_guards():
    src = build_spectrum(fdh(), 64)
    with pytest.raises(ValueError):
        ratio_profile(src, PHI_CIRC, 65)
    with pytest.raises(ValueError):
        ratio_profile(src, PHI_CIRC, 0)


# ---------------------------------------------------------------- sweeps

def test_fdh_sweep_matches_oracle_and_increases():
    records = fidelity_sweep(fdh(), PHI_CIRC, range(3, 11))
    fids = [r.fidelity for r in records]
    assert fids == pytest.approx(FDH_PHIO_SWEEP, abs=1e-12)
    assert all(a < b for a, b in zip(fids, fids[1:]))
    assert [r.N for r in records] == list(range(3, 11))
    assert all(r.n == 2**r.N for r in records)
    assert all(r.norm_method == "exact" for r in records)


def test_sweep_rank1_all_ones():
    records = fidelity_sweep(fdh(), TargetState((1.0,)), range(3, 7))
    assert [r.fidelity for r in records] == pytest.approx([1.0] * 4, abs=1e-12)


def test_sweep_deterministic_and_parallel_identical():
    serial = fidelity_sweep(g(1), PHI_PLUS, range(3, 9), jobs=1)
    again = fidelity_sweep(g(1), PHI_PLUS, range(3, 9), jobs=1)
    parallel = fidelity_sweep(g(1), PHI_PLUS, range(3, 9), jobs=2)
    for a, b, c in zip(serial, again, parallel):
        assert a.fidelity == b.fidelity == c.fidelity
        assert a.norm_value == b.norm_value == c.norm_value


def test_sweep_range_validation():
    with pytest.raises(ValueError):
        fidelity_sweep(fdh(), PHI_CIRC, [0, 3])
    with pytest.raises(ValueError):
        fidelity_sweep(fdh(), PHI_CIRC, [34])


def test_sweep_point_error_carries_n():
    with pytest.raises(SweepPointError) as err:
        fidelity_sweep(fdh(), PHI_CIRC, [4], norm_method="ln_approx")
    assert err.value.N == 4


def test_gh_norm_methods_agree_closely():
    exact = fidelity_sweep(gh(), PHI_PLUS, range(18, 21), norm_method="exact")
    approx = fidelity_sweep(gh(), PHI_PLUS, range(18, 21), norm_method="ln_approx")
    for a, b in zip(exact, approx):
        assert a.norm_method == "exact" and b.norm_method == "ln_approx"
        assert abs(a.fidelity - b.fidelity) < 2e-6


def test_gh_auto_norm_switches_past_26():
    from embezzle.fidelity import resolve_norm_method

    assert resolve_norm_method(gh(), 26, "auto") == "exact"
    assert resolve_norm_method(gh(), 27, "auto") == "ln_approx"
    assert resolve_norm_method(fdh(), 33, "auto") == "exact"


def test_gh_beats_fdh_small_n():
    for target in (PHI_PLUS, PHI_STAR, PHI_CIRC):
        for N in (3, 6, 9):
            fg = optimal_fidelity(gh_spectrum(1 << N), target)
            ff = optimal_fidelity(build_spectrum(fdh(), 1 << N), target)
            assert fg > ff, (target.label, N)


# ---------------------------------------------------------------- sine family

def test_sine_matched_values():
    assert sine_matched_fidelity(1) == 0.0
    assert sine_matched_fidelity(2) == pytest.approx(0.5, abs=1e-14)
    assert sine_matched_fidelity(10) == pytest.approx(0.9594929736144975, abs=1e-13)
    # the shifted-overlap sum collapses to cos(pi/(N+1))
    for N in (2, 7, 33, 64):
        assert sine_matched_fidelity(N) == pytest.approx(
            math.cos(math.pi / (N + 1)), abs=1e-12
        )


def test_sine_matched_bound():
    for N in range(2, 65):
        assert sine_matched_fidelity(N) >= 1 - math.pi**2 / (2 * N**2)


def test_sine_mismatched_rejects_other_ranks():
    with pytest.raises(ValueError):
        sine_mismatched_fidelity(8, TargetState((1.0,)))
    with pytest.raises(ValueError):
        sine_mismatched_fidelity(8, random_target(seeded_rng(1), 3))


def test_sine_mismatched_limit():
    limit = 3 / math.sqrt(10)
    gaps = []
    for N in (8, 16, 24):
        F = sine_mismatched_fidelity(N, PHI_PLUS)
        assert F == pytest.approx(sine_matched_fidelity(N) * limit, abs=1e-14)
        gaps.append(abs(F - limit))
    assert gaps[0] > gaps[1] > gaps[2]


def test_sine_mismatched_matched_target_is_matched_fidelity():
    # phi-circ target reproduces the matched protocol value exactly
    for N in (2, 5, 16):
        assert sine_mismatched_fidelity(N, PHI_CIRC) == pytest.approx(
            sine_matched_fidelity(N), abs=1e-14
        )


def test_sine_optimal_fidelity_oracle_equivalence():
    # the generic optimal-fidelity machinery on the expanded spectrum
    src = sine_spectrum(2)
    assert abs(
        optimal_fidelity(src, PHI_CIRC) - brute_force_fidelity(src, PHI_CIRC)
    ) <= 1e-12


def test_custom_runs_source_through_fidelity():
    src = spectrum_from_runs([(0.5, 2), (0.25, 8)])
    assert abs(
        optimal_fidelity(src, PHI_PLUS) - brute_force_fidelity(src, PHI_PLUS)
    ) <= 1e-12
