import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonauto_entropy.coupled_expansion import (
    CoverConfig,
    cover_from_json,
    covering_witnesses,
    derive_matrix,
    estimate_constants,
    expansion_report,
    horizon_is_complete,
    lower_bound,
    upper_bound,
    verify_exact_covering,
    verify_expansion,
)
from nonauto_entropy.errors import InvalidCover, NotATransitionMatrix, SizeMismatch
from nonauto_entropy.system_model import Interval, PiecewiseLinearMap, SystemModel, tent_system
from nonauto_entropy.transition_matrix import TransitionMatrix, validate

LOG2 = math.log(2)
CONSTANT = SystemModel(Interval(0, 1), (PiecewiseLinearMap((0, 1), (F(1, 2), F(1, 2))),))


def test_cover_rejects_overlap():
    with pytest.raises(InvalidCover):
        CoverConfig([Interval(0, F(1, 2)), Interval(F(1, 3), 1)])
    with pytest.raises(InvalidCover):
        cover_from_json({"sets": [[0, "a"]]})
    cfg = cover_from_json({"sets": [[0, "1/3"], ["2/3", 1]], "horizon": 4})
    assert cfg.horizon == 4 and cfg.min_gap() == F(1, 3)


def test_tent3_thirds(tent3, thirds, full2):
    rep = verify_expansion(tent3, thirds, full2)
    assert rep.coupled_expanding and rep.strict
    assert rep.min_gap == F(1, 3)
    assert (rep.lambda_est, rep.mu_est) == (3, 3)


def test_tent2_halves_not_strict(tent2, halves, full2):
    rep = verify_expansion(tent2, halves, full2)
    assert rep.coupled_expanding and not rep.strict
    assert rep.min_gap == 0


def test_identity_witness(identity, thirds, full2):
    rep = verify_expansion(identity, thirds, full2)
    assert not rep.coupled_expanding
    assert (rep.witnesses[0].n, rep.witnesses[0].i, rep.witnesses[0].j) == (1, 1, 2)


def test_derive_examples(tent3, thirds, tent2, identity, halves, golden):
    assert derive_matrix(tent3, thirds) == TransitionMatrix.full(2)
    # f([1/2, 3/4]) = [1/2, 1] covers V_2 = [1/2, 3/4] but not V_1
    assert derive_matrix(tent2, CoverConfig([Interval(0, F(1, 2)), Interval(F(1, 2), F(3, 4))])) == validate([[1, 1], [0, 1]])
    # f([3/4, 1]) = [0, 1/2] covers V_1 only, giving the golden-mean matrix
    assert derive_matrix(tent2, CoverConfig([Interval(0, F(1, 2)), Interval(F(3, 4), 1)])) == golden
    # the identity keeps every set in place, which is still a transition matrix
    assert derive_matrix(identity, thirds) == TransitionMatrix.identity(2)
    with pytest.raises(NotATransitionMatrix):
        derive_matrix(CONSTANT, thirds)


def test_exact_covering_examples(tent2, halves, full2, tent3, thirds, identity):
    assert verify_exact_covering(tent2, halves, full2)
    assert not verify_exact_covering(tent3, thirds, full2)
    assert verify_exact_covering(identity, halves, TransitionMatrix.identity(2))


def test_constants_examples(tent3, thirds, identity, halves):
    assert estimate_constants(tent3, thirds).lam == 3
    two = tent_system([F(5, 2), 3])
    c = estimate_constants(two, thirds)
    assert (c.lam, c.mu) == (F(5, 2), 3)
    c = estimate_constants(identity, halves)
    assert (c.lam, c.mu) == (1, 1) and not c.expanding


def test_constants_for_time_varying_family(varying, varying_cover):
    c = estimate_constants(varying, varying_cover)
    assert (c.lam, c.mu) == (F(12, 5), 3)
    assert c.max_sample_violation < 1e-12


def test_fold_inside_a_set_kills_lambda(tent2):
    c = estimate_constants(tent2, CoverConfig([Interval(F(1, 4), F(3, 4))]))
    assert c.lam == 0 and c.mu == 2


def test_size_mismatch(tent3, thirds):
    with pytest.raises(SizeMismatch):
        verify_expansion(tent3, thirds, TransitionMatrix.full(3))


def test_report_derives_matrix(thirds, tent3):
    rep = expansion_report(CONSTANT, thirds)
    assert rep.matrix is None and rep.matrix_error and rep.witnesses
    assert expansion_report(tent3, thirds).matrix == TransitionMatrix.full(2)


def test_horizon_too_short():
    sys = tent_system([3, 3, 1])
    cfg = CoverConfig([Interval(0, F(1, 3)), Interval(F(2, 3), 1)], horizon=2)
    assert not horizon_is_complete(sys, cfg)
    cert = lower_bound(TransitionMatrix.full(2), sys, cfg)
    assert "horizon" in cert.failures and not cert.certified


class TestCertificates:
    def test_lower_matrix_only(self, golden):
        cert = lower_bound(golden)
        assert not cert.certified and cert.notes == ("matrix-only",)
        assert cert.log_rho == pytest.approx(0.48121182505960347, abs=1e-10)
        assert cert.log_nu == 0

    def test_lower_certified(self, tent3, thirds, full2):
        cert = lower_bound(full2, tent3, thirds)
        assert cert.certified and cert.log_rho == pytest.approx(LOG2, abs=1e-12)

    def test_lower_needs_disjoint_sets(self, tent2, halves, full2):
        cert = lower_bound(full2, tent2, halves)
        assert cert.failures == ("disjoint",)

    def test_upper_certified(self, tent2, halves, full2):
        cert = upper_bound(full2, tent2, halves)
        assert cert.certified and cert.log_rho == pytest.approx(LOG2, abs=1e-12)

    def test_upper_thirds_fails_covering(self, tent3, thirds, full2):
        assert upper_bound(full2, tent3, thirds).failures[0] == "covering"

    def test_upper_identity_fails_expansion(self, identity, halves):
        cert = upper_bound(TransitionMatrix.identity(2), identity, halves)
        assert cert.failures == ("(ii_a)",)


cover_sets = st.lists(st.fractions(min_value=0, max_value=1, max_denominator=24), min_size=4, max_size=6, unique=True).map(sorted)


@settings(max_examples=60)
@given(cover_sets, st.lists(st.sampled_from([2, F(5, 2), 3, 4]), min_size=1, max_size=3))
def test_derived_matrix_is_self_consistent(points, slopes):
    sets = [Interval(points[k], points[k + 1]) for k in range(0, len(points) - 1, 2)]
    sys, cfg = tent_system(slopes), CoverConfig(sets)
    try:
        A = derive_matrix(sys, cfg)
    except NotATransitionMatrix:
        return
    assert covering_witnesses(sys, cfg, A) == []
    if verify_exact_covering(sys, cfg, A):
        assert verify_expansion(sys, cfg, A).coupled_expanding


@settings(max_examples=30)
@given(cover_sets, st.lists(st.sampled_from([2, F(5, 2), 3, F(12, 5)]), min_size=1, max_size=3))
def test_constants_bound_sampled_differences(points, slopes):
    sets = [Interval(points[k], points[k + 1]) for k in range(0, len(points) - 1, 2)]
    sys, cfg = tent_system(slopes), CoverConfig(sets)
    c = estimate_constants(sys, cfg)
    rng = np.random.default_rng(0)
    for _ in range(300):
        V = sets[int(rng.integers(len(sets)))]
        n = int(rng.integers(1, sys.period + 1))
        x, y = rng.uniform(*V.as_floats(), size=2)
        fd = abs(sys.map(n)(x) - sys.map(n)(y))
        assert float(c.lam) * abs(x - y) <= fd + 1e-12
        assert fd <= float(c.mu) * abs(x - y) + 1e-12
    if c.lam is not None:
        assert c.lam <= c.mu
