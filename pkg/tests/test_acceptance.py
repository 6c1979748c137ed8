"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line (measured values and runtime
against its budget) that is printed in the pytest terminal summary; running
this file directly prints the same lines.
"""

import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from nonauto_entropy.coding import Coder
from nonauto_entropy.coupled_expansion import (
    CoverConfig,
    derive_matrix,
    estimate_constants,
    lower_bound,
    upper_bound,
    verify_exact_covering,
    verify_expansion,
)
from nonauto_entropy.entropy_estimator import EstimatorConfig, estimate_entropy
from nonauto_entropy.errors import HypothesisFailure, NoContraction
from nonauto_entropy.subshift import parse_sequence, random_sequence
from nonauto_entropy.system_model import Interval, centered_tent_system, identity_system, tent_system
from nonauto_entropy.transition_matrix import (
    TransitionMatrix,
    all_transition_matrices,
    count_allowable_words,
    enumerate_allowable_words,
    gelfand_estimate,
    has_branching,
    is_irreducible,
    nu_bound,
    random_transition_matrix,
    spectral_radius,
    validate,
)

from conftest import ACCEPTANCE_LINES, VARYING_CENTER, VARYING_SLOPES

pytestmark = pytest.mark.acceptance

LOG2 = math.log(2)
FULL = TransitionMatrix.full(2)
THIRDS = CoverConfig([Interval(0, F(1, 3)), Interval(F(2, 3), 1)])
HALVES = CoverConfig([Interval(0, F(1, 2)), Interval(F(1, 2), 1)])
VARYING_COVER = CoverConfig([Interval(F(2, 15), F(7, 15)), Interval(F(8, 15), F(13, 15))])
RADIUS = F(1, 10**8)


def record(number: int, title: str, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"[{status}] criterion {number:2d} {title}: {detail}; {elapsed:.1f}s (budget {budget:.0f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def test_01_word_counts_match_power_norms():
    t0 = time.perf_counter()
    mismatches = matrices = 0
    for N in range(1, 5):
        for A in all_transition_matrices(N):
            matrices += 1
            for n in range(1, 9):
                if len(enumerate_allowable_words(A, n)) != count_allowable_words(A, n):
                    mismatches += 1
    elapsed = time.perf_counter() - t0
    record(1, "word counts = ||A^(n-1)||", mismatches == 0, f"{matrices} matrices x n<=8, {mismatches} mismatches", elapsed, 30)


def test_02_spectral_radius_and_gelfand():
    t0 = time.perf_counter()
    golden_err = abs(spectral_radius(validate([[1, 1], [1, 0]])) - 1.6180339887)
    full_err = max(abs(spectral_radius(TransitionMatrix.full(N)) - N) for N in range(1, 7))
    rng = np.random.default_rng(2024)
    gel_errs = []
    for _ in range(50):
        A = random_transition_matrix(rng, int(rng.integers(2, 7)), irreducible=True)
        gel_errs.append(abs(gelfand_estimate(A, 2000) - spectral_radius(A)))
    elapsed = time.perf_counter() - t0
    gel_fail = sum(e >= 1e-3 for e in gel_errs)
    ok = golden_err < 1e-6 and full_err < 1e-9 and gel_fail == 0
    detail = (
        f"golden err {golden_err:.1e}, full-shift err {full_err:.1e}, "
        f"gelfand(2000) err max {max(gel_errs):.2e} ({gel_fail}/50 at or above 1e-3)"
    )
    record(2, "spectral radius and Gelfand consistency", ok, detail, elapsed, 120)


def test_03_nu_below_rho():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = -math.inf
    for _ in range(200):
        A = random_transition_matrix(rng, int(rng.integers(1, 9)))
        worst = max(worst, nu_bound(A) - spectral_radius(A))
    elapsed = time.perf_counter() - t0
    record(3, "nu <= rho", worst <= 1e-9, f"max(nu - rho) over 200 matrices = {worst:.2e}", elapsed, 60)


def test_04_branching_irreducible_has_rho_above_one():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    smallest = math.inf
    done = 0
    while done < 100:
        A = random_transition_matrix(rng, int(rng.integers(2, 9)), density=float(rng.uniform(0.2, 0.6)), irreducible=True)
        if not has_branching(A):
            continue
        assert is_irreducible(A)
        smallest = min(smallest, spectral_radius(A))
        done += 1
    elapsed = time.perf_counter() - t0
    record(4, "irreducible with branching => rho > 1", smallest > 1 + 1e-9, f"min rho over 100 matrices = {smallest:.6f}", elapsed, 60)


def test_05_lower_bound_on_tent3_thirds():
    t0 = time.perf_counter()
    sys = tent_system([3])
    A = derive_matrix(sys, THIRDS)
    cert = lower_bound(A, sys, THIRDS)
    _, pts = Coder(sys, THIRDS, A).coded_points(14)
    est = estimate_entropy(sys, EstimatorConfig(n_max=16, restrict_to=tuple(pts)))
    elapsed = time.perf_counter() - t0
    ok = A == FULL and cert.certified and abs(cert.log_rho - LOG2) < 1e-12 and est.h_est >= LOG2 - 0.07
    detail = f"matrix {A.entries}, certified={cert.certified}, bound {cert.log_rho:.6f}, h_est(coded) {est.h_est:.4f} >= {LOG2 - 0.07:.4f}"
    record(5, "lower bound, tent slope 3", ok, detail, elapsed, 120)


def test_06_upper_bound_on_tent2_halves():
    t0 = time.perf_counter()
    sys = tent_system([2])
    exact = verify_exact_covering(sys, HALVES, FULL)
    cert = upper_bound(FULL, sys, HALVES)
    est = estimate_entropy(sys, EstimatorConfig(n_max=16, grid_size=200_000))
    elapsed = time.perf_counter() - t0
    ok = exact and cert.certified and abs(cert.log_rho - LOG2) < 1e-12 and est.h_est <= LOG2 + 0.07
    detail = f"exact covering {exact}, certified={cert.certified}, bound {cert.log_rho:.6f}, h_est(grid) {est.h_est:.4f} <= {LOG2 + 0.07:.4f}"
    record(6, "upper bound, tent slope 2", ok, detail, elapsed, 120)


def test_07_coded_subsystem_entropy_on_time_varying_family():
    t0 = time.perf_counter()
    sys = centered_tent_system(VARYING_SLOPES, VARYING_CENTER)
    A = derive_matrix(sys, VARYING_COVER)
    consts = estimate_constants(sys, VARYING_COVER)
    coder = Coder(sys, VARYING_COVER, A)
    rng = np.random.default_rng(7)
    misses = 0
    for seed in rng.integers(0, 2**63 - 1, size=500):
        alpha = random_sequence(A, int(seed), 14)
        p = coder.code_point(alpha, 1, RADIUS)
        if coder.itinerary(p.value, 1, 14).word != alpha.word(14):
            misses += 1
    _, pts = coder.coded_points(14)
    est = estimate_entropy(sys, EstimatorConfig(n_max=16, restrict_to=tuple(pts)))
    log_rho = math.log(spectral_radius(A))
    elapsed = time.perf_counter() - t0
    ok = (
        VARYING_COVER.is_disjoint()
        and (consts.lam, consts.mu) == (F(12, 5), 3)
        and misses == 0
        and abs(est.h_est - log_rho) <= 0.07
    )
    detail = (
        f"lambda {float(consts.lam)}, mu {float(consts.mu)}, round-trip misses {misses}/500, "
        f"|h_est(coded) - log rho| = |{est.h_est:.4f} - {log_rho:.4f}| = {abs(est.h_est - log_rho):.4f}"
    )
    record(7, "coded subsystem, slopes (2.4, 3)", ok, detail, elapsed, 180)


def test_08_semiconjugacy_residuals():
    t0 = time.perf_counter()
    coders = {
        "tent3": Coder(tent_system([3]), THIRDS, FULL),
        "varying": Coder(centered_tent_system(VARYING_SLOPES, VARYING_CENTER), VARYING_COVER, FULL),
    }
    rng = np.random.default_rng(8)
    worst = {}
    for name, coder in coders.items():
        worst[name] = max(
            float(coder.semiconjugacy_residual(random_sequence(FULL, int(rng.integers(2**62)), 30), int(rng.integers(1, 11)), RADIUS))
            for _ in range(500)
        )
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-6
    detail = ", ".join(f"{k} max residual {v:.2e}" for k, v in worst.items())
    record(8, "semiconjugacy residuals", ok, detail, elapsed, 60)


def test_09_contraction_law():
    t0 = time.perf_counter()
    coder = Coder(centered_tent_system(VARYING_SLOPES, VARYING_CENTER), VARYING_COVER, FULL)
    rng = np.random.default_rng(9)
    worst = F(0)
    checked = 0
    for _ in range(12):
        alpha = random_sequence(FULL, int(rng.integers(2**62)), 26)
        for n in range(1, 11):
            for m, diam in enumerate(coder.refine(alpha, n, 25).diameters):
                worst = max(worst, diam * F(12, 5) ** m)
                checked += 1
    elapsed = time.perf_counter() - t0
    record(9, "diam(V^{m,n}) <= 2.4^-m", worst <= 1, f"{checked} levels, max diam * 2.4^m = {float(worst):.4f}", elapsed, 30)


def test_10_identity_controls():
    t0 = time.perf_counter()
    sys = identity_system()
    est = estimate_entropy(sys, EstimatorConfig())
    rep = verify_expansion(sys, THIRDS, FULL)
    lower = lower_bound(FULL, sys, THIRDS)
    upper = upper_bound(TransitionMatrix.identity(2), sys, HALVES)
    consts = estimate_constants(sys, HALVES)
    blocked_coding = False
    try:
        Coder(sys, HALVES, TransitionMatrix.identity(2)).code_point(parse_sequence(TransitionMatrix.identity(2), "|1"), 1, RADIUS)
    except NoContraction:
        blocked_coding = True
    blocked_full = False
    try:
        Coder(sys, THIRDS, FULL)
    except HypothesisFailure:
        blocked_full = True
    elapsed = time.perf_counter() - t0
    ok = (
        est.h_est < 0.01
        and len(rep.witnesses) > 0
        and consts.lam == 1
        and not lower.certified
        and not upper.certified
        and "(ii_a)" in upper.failures
        and blocked_coding
        and blocked_full
    )
    detail = (
        f"h_est {est.h_est:.4f}, witnesses {len(rep.witnesses)}, lambda {consts.lam}, "
        f"lower refused {lower.failures}, upper refused {upper.failures}, coding blocked {blocked_coding and blocked_full}"
    )
    record(10, "identity controls", ok, detail, elapsed, 30)


if __name__ == "__main__":
    import sys as _sys

    _sys.exit(pytest.main([__file__, "-q"]))
