import numpy as np
import pytest

from patternlsd.circuits import PATTERNED_LINKS, LinkKind, link_value
from patternlsd.simulate import (
    MatrixSpec,
    esd,
    generate_patterned,
    generate_x,
    link_matrix,
    replicate,
    replication_seeds,
    symmetric_stable,
    wigner_companion,
)

import oracles


def test_spec_validation():
    with pytest.raises(ValueError):
        MatrixSpec(0, 3)
    with pytest.raises(ValueError):
        MatrixSpec(3, 3, entry="cauchy")
    with pytest.raises(ValueError):
        MatrixSpec(3, 3, target="s_link")
    with pytest.raises(ValueError):
        MatrixSpec(3, 3, entry="stable", alpha=2.5)
    with pytest.raises(ValueError):
        MatrixSpec(3, 3, entry="bernoulli", lam=5)
    assert MatrixSpec(3, 4, profile=lambda x, y: x).describe()["profile"] == "<lambda>"


def test_generation_is_deterministic():
    spec = MatrixSpec(20, 30, seed=42)
    assert np.array_equal(generate_x(spec), generate_x(spec))
    assert not np.array_equal(generate_x(spec), generate_x(MatrixSpec(20, 30, seed=43)))


def test_gaussian_scaling():
    x = generate_x(MatrixSpec(200, 400, seed=1))
    assert np.var(x) * 400 == pytest.approx(1.0, rel=0.02)


def test_bernoulli_entries():
    spec = MatrixSpec(300, 300, entry="bernoulli", lam=2.0, seed=2)
    x = generate_x(spec)
    assert set(np.unique(x)) <= {0.0, 1.0}
    # 300 rows with mean 2 ones each
    assert abs(x.sum() - 600) < 5 * np.sqrt(600)


def test_stable_entries_are_finite_and_symmetric():
    z = symmetric_stable(np.random.default_rng(0), 1.5, 200_000)
    assert np.all(np.isfinite(z))
    assert abs(np.median(z)) < 0.02
    c = symmetric_stable(np.random.default_rng(0), 1.0, 10)
    assert np.all(np.isfinite(c))


def test_masks_and_profiles():
    tri = generate_x(MatrixSpec(6, 8, mask="triangular", seed=3))
    i, j = np.indices(tri.shape)
    assert np.all(tri[i > j] == 0) and np.all(tri[i <= j] != 0)
    band = generate_x(MatrixSpec(8, 8, mask="band1", band_m=1, seed=3))
    ii, jj = np.indices((8, 8))
    assert np.all(band[np.abs(ii - jj) > 1] == 0)
    periodic = generate_x(MatrixSpec(8, 8, mask="band2", band_m=1, seed=3))
    assert periodic[0, 7] != 0 and periodic[0, 3] == 0
    prof = generate_x(MatrixSpec(4, 4, profile=lambda x, y: (x > 0.5).astype(float), seed=3))
    assert np.all(prof[:2] == 0) and np.all(prof[2:] != 0)


@pytest.mark.parametrize("link", PATTERNED_LINKS)
def test_link_matrix(link):
    for p, n in [(3, 5), (6, 4)]:
        L = link_matrix(link, p, n)
        assert L.shape == (p, n)
        for i in range(1, p + 1):
            for j in range(1, n + 1):
                assert L[i - 1, j - 1] == link_value(link, i, j, n) == oracles.link(link.value, i, j, n)


@pytest.mark.parametrize("link", PATTERNED_LINKS)
def test_patterned_entries_shared_by_link_value(link):
    A = generate_patterned(link, 7, 5, seed=4)
    L = link_matrix(link, 7, 5)
    for v in np.unique(L):
        vals = A[L == v]
        assert np.all(vals == vals[0])
    assert len(np.unique(A)) == len(np.unique(L))


def test_patterned_spec_route():
    spec = MatrixSpec(10, 12, target="t_sym", seed=9)
    A = generate_x(spec)
    for d in range(10):
        diag = np.concatenate([np.diagonal(A, d), np.diagonal(A, -d)])
        assert np.all(diag == diag[0])


def test_esd_moments_match_traces():
    x = generate_x(MatrixSpec(30, 50, seed=5))
    res = esd(x, k_max=4, bins=10)
    want = oracles.trace_power_moments(x, 4)
    for k in range(1, 5):
        assert res.empirical_moments[k] == pytest.approx(want[k], rel=1e-9)
    edges, counts = res.histogram
    assert counts.sum() == 30 and len(edges) == 11
    assert np.all(res.eigenvalues >= 0) and np.all(np.diff(res.eigenvalues) >= 0)
    q_edges, q_counts = esd(x, bins=5, quantile_bins=True).histogram
    assert q_counts.sum() == 30


def test_esd_rejects_bad_input():
    with pytest.raises(ValueError):
        esd(np.array([[np.nan, 1.0]]))


def test_esd_rank_deficient_is_clamped():
    x = generate_x(MatrixSpec(40, 10, seed=6))
    res = esd(x)
    assert np.all(res.eigenvalues >= 0)
    assert np.sum(res.eigenvalues > 1e-8) == 10


def test_wigner_companion():
    res = wigner_companion(400, seed=7, k_max=4)
    assert res.empirical_moments[2] == pytest.approx(1.0, rel=0.05)
    assert res.empirical_moments[4] == pytest.approx(2.0, rel=0.1)
    assert abs(res.empirical_moments[1]) < 0.05
    assert np.allclose(res.eigenvalues, wigner_companion(400, seed=7).eigenvalues)


def test_replicate():
    spec = MatrixSpec(40, 80, seed=8)
    a = replicate(spec, 3, k_max=3, bins=20)
    b = replicate(spec, 3, k_max=3, bins=20)
    assert np.array_equal(a.moments, b.moments)
    assert a.seeds == replication_seeds(8, 3) and len(set(a.seeds)) == 3
    assert a.moments.shape == (3, 3) and a.pooled.eigenvalues.size == 120
    assert a.mean[0] == pytest.approx(1.0, rel=0.05)
    assert np.all(a.sd > 0)
    assert replicate(spec, 1, keep_eigenvalues=False).pooled.eigenvalues.size == 0
    with pytest.raises(ValueError):
        replicate(spec, 0)


def test_mp_moments_at_moderate_size():
    # y = 1/2: beta_1..3 = 1, 3/2, 11/4
    rep = replicate(MatrixSpec(200, 400, seed=10), 4, k_max=3)
    for k, want in zip((1, 2, 3), (1.0, 1.5, 2.75)):
        assert rep.mean[k - 1] == pytest.approx(want, rel=0.03)


def test_link_kind_strings_accepted():
    assert np.array_equal(link_matrix("c_asym", 3, 3), link_matrix(LinkKind.C_ASYM, 3, 3))
