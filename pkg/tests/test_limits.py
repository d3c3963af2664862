import math

import numpy as np
import pytest

from patternlsd.circuits import PATTERNED_LINKS, LinkKind, finite_ratio
from patternlsd.combinatorics import a_omega, classify, enumerate_even_words, enumerate_words
from patternlsd.limits import (
    MCConfig,
    SignChoice,
    WordPlan,
    admissible,
    build_linear_forms,
    circ_limit,
    combined_limits,
    hankel_asym_limit,
    hankel_sym_limit,
    revcirc_limit,
    s_link_limit,
    s_link_vertex_map,
    sign_choices,
    snap_y,
    toeplitz_asym_limit,
    toeplitz_sym_limit,
    uniform_columns,
    vertex_forms,
    word_limit,
)

MC = MCConfig(samples=200_000, seed=11)


def richardson(link, w, y):
    """First-order extrapolation of exact-word ratios at n = 32, 64."""
    r32, r64 = finite_ratio(link, w, y, [32, 64], exact_word=True)
    return 2 * r64 - r32


def test_mc_config():
    with pytest.raises(ValueError):
        MCConfig(samples=0)
    assert sum(size for _, size in MCConfig(samples=100_001, shard_size=2**15).shards()) == 100_001


def test_uniform_columns_are_common_across_widths():
    a = uniform_columns(MC, 0, 1000, 3)
    b = uniform_columns(MC, 0, 1000, 5)
    assert np.array_equal(a, b[:, :3])
    anti = uniform_columns(MCConfig(samples=10, antithetic=True), 0, 10, 1)[:, 0]
    assert np.allclose(anti[:5] + anti[5:], 1.0)


def test_snap_y():
    assert snap_y(2 + 1e-12) == 2.0
    assert snap_y(0.5) == 0.5
    with pytest.raises(ValueError):
        snap_y(0)


@pytest.mark.parametrize("w, value", [("abba", 1.0), ("abab", 0.0), ("aa", 1.0), ("abbccaabba", 1.0)])
def test_s_link_limit(w, value):
    res = s_link_limit(w, 0.7)
    assert res.value == value and res.std_error == 0.0


def test_s_vertex_map_decides_special_symmetry():
    for m in (2, 4, 6, 8):
        for w in enumerate_words(m):
            assert (s_link_vertex_map(w) is not None) == classify(w).special_symmetric


@pytest.mark.parametrize("link", PATTERNED_LINKS)
def test_zero_classes_are_exact(link):
    for w in enumerate_words(4):
        if admissible(link, w):
            continue
        res = word_limit(link, w, 1.5, MC)
        assert res.value == 0.0 and res.samples == 0


def test_sign_choice_counts():
    for w in enumerate_even_words(6):
        assert len(sign_choices(LinkKind.T_SYM, w)) == a_omega(w)
        assert len(sign_choices(LinkKind.C_SYM, w)) == a_omega(w)
        expected = 1 if classify(w).symmetric else 0
        for link in (LinkKind.T_ASYM, LinkKind.H_SYM, LinkKind.C_ASYM):
            assert len(sign_choices(link, w)) == expected
    with pytest.raises(OverflowError):
        sign_choices(LinkKind.T_SYM, "a" * 12, cap=100)


def test_every_sign_choice_closes():
    for link in PATTERNED_LINKS:
        for w in enumerate_even_words(6):
            for sc in sign_choices(link, w):
                C = vertex_forms(link, w, sc)
                assert C is not None and np.array_equal(C[0], C[-1])


def test_linear_forms():
    assert build_linear_forms(LinkKind.T_SYM, "aa", sign_choices(LinkKind.T_SYM, "aa")[0]) == []
    forms = build_linear_forms(LinkKind.T_ASYM, "abba", sign_choices(LinkKind.T_ASYM, "abba")[0])
    # pi(3) = pi(2) - (pi(2) - pi(1)) = pi(1), a column vertex
    assert len(forms) == 1 and forms[0].scale == "col"
    assert dict(forms[0].coefficients) == {1: 1}
    with pytest.raises(ValueError):
        build_linear_forms(LinkKind.T_ASYM, "abba", SignChoice((1, 1, 1, 1)))


def test_abba_forms_reproduce_link_values():
    # every position of a circuit built from the forms carries its letter's link value
    rng = np.random.default_rng(3)
    for link in (LinkKind.T_ASYM, LinkKind.H_SYM, LinkKind.H_ASYM):
        for w in ("abba", "aabb", "abcabc", "abccba"):
            if not admissible(link, w):
                continue
            plan = WordPlan(link, w, 1.3)
            U = rng.random((50, plan.dim))
            g = plan.scale_uniforms(U)
            for _, C in plan.forms:
                V = g @ C.T.astype(float)
                vals = []
                for i in range(1, len(plan.w) + 1):
                    r, c = (V[:, i - 1], V[:, i]) if i % 2 else (V[:, i], V[:, i - 1])
                    vals.append(r - c if link is LinkKind.T_ASYM else r + c)
                for i, x in enumerate(plan.w.letters):
                    first = plan.first[x - 1] - 1
                    assert np.allclose(vals[i], vals[first])


def test_single_letter_words():
    for link in PATTERNED_LINKS:
        res = word_limit(link, "aa", 1.0, MC)
        assert res.value == pytest.approx(1.0)
    assert toeplitz_sym_limit("aa", 0.4, MC).value == 1.0
    assert revcirc_limit("aa", 0.5, MC).value > 0  # pure integral term below y = 1


@pytest.mark.parametrize("link", PATTERNED_LINKS)
@pytest.mark.parametrize("y", [0.5, 1.0, 2.0])
def test_limits_match_extrapolated_oracle(link, y):
    words = ["aabb", "abba", "aaaa", "abab"]
    if y < 2:
        words += ["abcabc", "abccba", "aabbcc"]
    for w in words:
        if not admissible(link, w):
            continue
        res = word_limit(link, w, y, MC)
        oracle = richardson(link, w, y)
        assert abs(res.value - oracle) <= max(0.03 * res.value, 4 * res.std_error, 0.01), (w, res.value, oracle)


def test_step_parameterization_agrees():
    for w in ("abab", "aabb", "abcabc", "aaaabb"):
        for y in (0.5, 1.0, 2.0):
            x = toeplitz_sym_limit(w, y, MC)
            u = toeplitz_sym_limit(w, y, MC, parameterization="u")
            assert abs(x.value - u.value) <= 4 * math.hypot(x.std_error, u.std_error) + 1e-12
    with pytest.raises(ValueError):
        word_limit(LinkKind.H_SYM, "abba", 1.0, MC, parameterization="u")


def test_toeplitz_asym_equals_hankel_sym_on_symmetric_words():
    for w in enumerate_even_words(6):
        if not classify(w).symmetric:
            continue
        for y in (0.5, 1.0, 2.0):
            t = toeplitz_asym_limit(w, y, MC)
            h = hankel_sym_limit(w, y, MC)
            assert abs(t.value - h.value) <= 3 * math.hypot(t.std_error, h.std_error) + 1e-12


def test_hankel_asym_dominated_and_equal_on_ss_words():
    for w in enumerate_even_words(6):
        if not classify(w).symmetric:
            continue
        hs = hankel_sym_limit(w, 1.0, MC)
        ha = hankel_asym_limit(w, 1.0, MC)
        assert ha.value <= hs.value + 3 * math.hypot(hs.std_error, ha.std_error)
        if classify(w).special_symmetric:
            assert ha.value == pytest.approx(hs.value, abs=3 * math.hypot(hs.std_error, ha.std_error) + 1e-12)
    assert hankel_asym_limit("abcabc", 1.0, MC).value < hankel_sym_limit("abcabc", 1.0, MC).value


def test_integer_y_modular_links_are_exact():
    for w in enumerate_even_words(6):
        for y in (1, 2, 3):
            c = circ_limit(w, y, MC, "sym")
            assert c.std_error == 0.0 and c.samples == 0
            if classify(w).symmetric:
                for res in (revcirc_limit(w, y, MC), circ_limit(w, y, MC, "asym")):
                    assert res.std_error == 0.0 and res.samples == 0
                    assert all(v == 0.0 for key, v in res.terms.items() if key != "floor_power")


def test_integer_y_closed_form_values():
    from patternlsd.combinatorics import generating_profile

    for w in enumerate_even_words(6):
        prof = generating_profile(w)
        k = len(w) // 2
        for y in (1, 2, 3):
            expected = y ** (k - prof.even_gen)
            if classify(w).symmetric:
                assert revcirc_limit(w, y, MC).value == expected
                assert circ_limit(w, y, MC, "asym").value == expected
            assert circ_limit(w, y, MC, "sym").value == a_omega(w) * expected


def test_fractional_terms_sum_to_value():
    res = circ_limit("abcabc", 1.5, MC, "sym")
    assert res.terms is not None
    assert sum(res.terms.values()) == pytest.approx(res.value)
    assert res.terms["floor_power"] == pytest.approx(a_omega("abcabc") * 1.0)


def test_positivity_and_determinism():
    for link in PATTERNED_LINKS:
        for w in ("aabb", "abba", "abcabc"):
            if admissible(link, w):
                v = word_limit(link, w, 0.7, MC).value
                assert v >= 0
                if link not in (LinkKind.H_ASYM, LinkKind.R_ASYM):
                    assert v > 0
    a = word_limit(LinkKind.T_SYM, "abab", 0.7, MC)
    b = word_limit(LinkKind.T_SYM, "abab", 0.7, MC)
    assert a == b


def test_combined_limits_matches_word_sum():
    words = [(w, 1.0) for w in enumerate_even_words(4)]
    res = combined_limits(LinkKind.T_SYM, words, 0.5, MC)
    total = sum(word_limit(LinkKind.T_SYM, w, 0.5, MC).value for w, _ in words)
    assert res.value == pytest.approx(total)
    assert res.std_error > 0
