"""One test per acceptance criterion; each prints a single pass/fail line."""

import pytest

from patternlsd import acceptance

CHECKS = {
    1: acceptance.check_combinatorics,
    2: acceptance.check_exact_count_law,
    3: acceptance.check_abab_decay,
    4: acceptance.check_hypergraph_bijection,
    5: acceptance.check_limits_vs_oracle,
    6: acceptance.check_mp_simulation,
    7: acceptance.check_sparse,
    8: acceptance.check_toeplitz_simulation,
    9: acceptance.check_cross_pattern,
    10: acceptance.check_wigner_square,
    11: acceptance.check_unbounded_support,
}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, acceptance_log):
    res = CHECKS[number]()
    line = res.line()
    print(line)
    acceptance_log.append(line)
    passed = res.passed
    assert passed, line
