import math
from fractions import Fraction

import numpy as np
import pytest

from patternlsd.circuits import LinkKind
from patternlsd.combinatorics import CumulantSequence, classify, enumerate_even_words, q1_moment, q2_moment
from patternlsd.limits import MCConfig
from patternlsd.moments import (
    CumulantModel,
    GeneralGModel,
    MPModel,
    PatternModel,
    SparseModel,
    admissible_words,
    band,
    band2,
    constant_moment_bound,
    expression_profile,
    mp_moment,
    named_profile,
    s_moment,
    sa_moment,
    sparse_bounds,
    unbounded_support_lowerbound,
    upper_triangular,
    variance_profile_s_moment,
)

MC = MCConfig(samples=200_000, seed=5)


def test_mp_moment_exact():
    assert mp_moment(1, Fraction(3, 7)) == 1
    y = Fraction(2, 3)
    assert mp_moment(2, y) == 1 + y
    assert mp_moment(3, 0.5) == Fraction(11, 4)
    assert [mp_moment(k, 0.5) for k in range(1, 5)] == [1, Fraction(3, 2), Fraction(11, 4), Fraction(45, 8)]
    with pytest.raises(ValueError):
        mp_moment(0, 1)


def test_s_moment_mp_equals_narayana():
    for k in range(1, 6):
        for y in (0.5, 1.0, 2.0):
            assert s_moment(k, y, MPModel()).value == pytest.approx(float(mp_moment(k, y)), rel=1e-12)
            assert s_moment(k, y, CumulantModel(CumulantSequence.pairs_only(1))).value == pytest.approx(float(mp_moment(k, y)))


def test_s_moment_closed_forms():
    C = CumulantSequence({2: 1.3, 4: 0.7}, higher=0)
    y = 0.6
    assert s_moment(2, y, CumulantModel(C)).value == pytest.approx(0.7 + 1.3**2 + y * 1.3**2)
    lam = 1.7
    assert s_moment(2, y, SparseModel(lam)).value == pytest.approx(lam + lam**2 + y * lam**2)
    res = s_moment(2, y, SparseModel(lam))
    assert set(res.word_breakdown) == {"aaaa", "aabb", "abba"} and res.std_error == 0


def test_s_moment_mc_matches_closed_form():
    C = CumulantSequence({2: 1.0, 4: 0.5, 6: 0.25}, higher=0)
    for k in range(1, 4):
        closed = s_moment(k, 1.5, CumulantModel(C)).value
        sampled = s_moment(k, 1.5, CumulantModel(C), MC, force_mc=True)
        assert abs(closed - sampled.value) <= 3 * sampled.std_error + 1e-12


def test_variance_profile():
    r = variance_profile_s_moment(1, 1.0, upper_triangular, CumulantSequence.pairs_only(1), MC)
    assert abs(r.value - 0.5) <= 3 * r.std_error
    flat = variance_profile_s_moment(3, 0.5, lambda x, y: np.ones_like(x), CumulantSequence.pairs_only(1), MC)
    assert flat.value == pytest.approx(float(mp_moment(3, 0.5)))


def test_profile_breakdown_distinguishes_equal_shapes():
    r = variance_profile_s_moment(4, 1.0, upper_triangular, CumulantSequence.pairs_only(1), MC)
    bd = r.word_breakdown
    nonzero = {w: v for w, v in bd.items() if v > 0}
    pair_words = [w for w in nonzero if len(set(w)) == 4]
    assert len({round(nonzero[w], 2) for w in pair_words}) > 1


def test_argument_order_invariance_at_y1():
    # transposing a symmetric-in-law profile leaves beta_k unchanged at y = 1
    sig = lambda x, y: 1.0 + x * (1 - y)
    sig_t = lambda x, y: sig(y, x)
    C = CumulantSequence.pairs_only(1)
    for k in (2, 3):
        a = variance_profile_s_moment(k, 1.0, sig, C, MC)
        b = variance_profile_s_moment(k, 1.0, sig_t, C, MC)
        assert abs(a.value - b.value) <= 4 * math.hypot(a.std_error, b.std_error)


def test_general_g_model():
    g = GeneralGModel({2: lambda x, y: 2 * x, 4: 0.5})
    r = s_moment(2, 1.0, g, MC)
    # aaaa gives 0.5; one pair word shares its row variable (4 E[x^2] = 4/3), the other does not (1)
    assert abs(r.value - (0.5 + 4 / 3 + 1.0)) <= 4 * r.std_error


def test_profiles():
    x = np.array([0.1, 0.5, 0.9])
    y = np.array([0.2, 0.1, 0.05])
    x2 = np.array([0.1, 0.5, 0.95])
    assert list(band(0.15)(x, y)) == [1.0, 0.0, 0.0]
    assert list(band2(0.15)(x2, y)) == [1.0, 0.0, 1.0]
    assert list(named_profile("upper_triangular")(x, y)) == [1.0, 0.0, 0.0]
    assert list(named_profile("1 + x*y")(x, y)) == pytest.approx([1.02, 1.05, 1.045])
    with pytest.raises(ValueError):
        expression_profile("__import__('os')")


def test_sparse_bounds():
    assert sparse_bounds(1, 0.5, 1.0) == (0.5, 1.0)
    lo, hi = sparse_bounds(2, 0.5, 1.5)
    assert lo == pytest.approx(0.75 + 2 * 0.75**2) and hi == pytest.approx(1.5 + 3 * 2.25)
    assert sparse_bounds(2, 1, 1) == (3.0, 4.0)
    for lam, y in [(1, 0.5), (1.5, 0.5), (1, 2)]:
        for k in range(1, 5):
            lo, hi = sparse_bounds(k, y, lam)
            beta = s_moment(k, y, SparseModel(lam)).value
            assert lo - 1e-12 <= beta <= hi + 1e-12
    assert sparse_bounds(2, 2, 1) == (float(q1_moment(1, 4)), float(q2_moment(2, 4)))


def test_unbounded_support_lowerbound():
    assert unbounded_support_lowerbound(1, 1, 2.5) == 2.5
    assert unbounded_support_lowerbound(1, 2, 1.5) == pytest.approx(1.5**2)
    assert unbounded_support_lowerbound(2, 2, 1.5) == pytest.approx(3 * 1.5**2)
    assert unbounded_support_lowerbound(1, 2, lambda x: 2 * x) == pytest.approx(4 / 3)
    assert unbounded_support_lowerbound(30, 10, 1.0) > 0  # large factorials stay exact
    for t in (2, 3):
        lam = 1.3
        assert s_moment(t, 1.0, SparseModel(lam)).value >= unbounded_support_lowerbound(1, t, lam)


def test_moment_bound_for_constant_models():
    C = CumulantSequence({2: 1.0, 4: 2.0}, higher=0)
    for k in range(1, 5):
        for y in (0.5, 2.0):
            beta = s_moment(k, y, CumulantModel(C)).value
            assert 0 <= beta <= constant_moment_bound(k, y, C)


def test_admissible_words():
    assert len(admissible_words(LinkKind.T_SYM, 2)) == 4
    assert {str(w) for w in admissible_words(LinkKind.H_SYM, 2)} == {"aaaa", "aabb", "abba"}
    with pytest.raises(ValueError):
        admissible_words(LinkKind.T_SYM, 9)


def test_sa_moment_basics():
    pairs = CumulantSequence.pairs_only(1.0)
    assert sa_moment(1, PatternModel(LinkKind.T_SYM, pairs, 0.5), MC).value == pytest.approx(1.0)
    with pytest.raises(ValueError):
        PatternModel(LinkKind.S, pairs, 1.0)
    ones = CumulantSequence.constant(1.0)
    for y in (1, 2, 3):
        for k in (1, 2, 3):
            want = sum(y ** (k - 1) for w in enumerate_even_words(2 * k) if classify(w).symmetric)
            for link in (LinkKind.R_SYM, LinkKind.C_ASYM):
                res = sa_moment(k, PatternModel(link, ones, y), MC)
                assert res.value == want and res.std_error == 0


def test_sa_moment_identities():
    ones = CumulantSequence.constant(1.0)
    for k in (2, 3):
        t = sa_moment(k, PatternModel(LinkKind.T_ASYM, ones, 1.0), MC)
        h = sa_moment(k, PatternModel(LinkKind.H_SYM, ones, 1.0), MC)
        assert abs(t.value - h.value) <= 3 * math.hypot(t.std_error, h.std_error) + 1e-12


def test_sa_moment_with_function_f():
    two = {2: 2.0}
    assert sa_moment(1, PatternModel(LinkKind.H_SYM, two, 0.5), MC).value == pytest.approx(2.0)
    f = {2: lambda x: np.abs(x)}
    res = sa_moment(1, PatternModel(LinkKind.T_SYM, f, 1.0), MC)
    # mean |row - col| for independent uniform coordinates
    assert abs(res.value - 1 / 3) <= 4 * res.std_error
