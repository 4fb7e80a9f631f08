import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from outlierlab.sampler import (
    SeedSpec,
    SparseSymMatrix,
    couple_centered,
    coupled_atoms,
    coupling_constants,
    make_distribution,
    sample_deformed_wigner,
    sample_erdos_renyi,
    sample_sparse_wigner,
)


def test_rademacher_atoms():
    d = make_distribution("rademacher")
    x = d.sample(SeedSpec(1).generator(), 20000)
    assert set(np.unique(x)) == {-1.0, 1.0}
    assert abs(x.mean()) < 0.03
    assert d.h == 1.0 and d.mean == 0.0


def test_constant_one_is_deterministic():
    d = make_distribution("constant_one")
    assert np.all(d.sample(SeedSpec(0).generator(), 50) == 1.0)
    assert d.mean == 1.0


def test_smoothed_rademacher_second_moment():
    d = make_distribution("smoothed(rademacher,0.01)")
    # E[(r + u)^2] = 1 + w^2/3 for u uniform on (-w, w)
    assert d.scale == pytest.approx(math.sqrt(1 + 0.01**2 / 3), abs=1e-15)
    assert d.h == pytest.approx(1.01**2 / (1 + 0.01**2 / 3), rel=1e-12)
    assert d.h == pytest.approx(1.02, abs=1e-3)
    x = d.sample(SeedSpec(3).generator(), 200000)
    assert np.mean(x * x) == pytest.approx(1.0, abs=5e-3)
    assert np.max(x * x) <= d.h


def test_uniform_symmetric_unit_variance():
    d = make_distribution("uniform_symmetric")
    x = d.sample(SeedSpec(4).generator(), 200000)
    assert np.mean(x * x) == pytest.approx(1.0, abs=0.01)
    assert d.h == pytest.approx(3.0)


@pytest.mark.parametrize("kind,h", [("rademacher", 0.5), ("uniform_symmetric", 2.0), ("nope", None)])
def test_bad_distributions_rejected(kind, h):
    with pytest.raises(ValueError):
        make_distribution(kind, h)


def test_full_density_rademacher():
    m = sample_sparse_wigner(4, 1.0, make_distribution("rademacher"), seed=7).toarray()
    assert np.all(np.diag(m) == 0)
    off = m[~np.eye(4, dtype=bool)]
    assert np.all(np.abs(off) == 1)
    assert np.array_equal(m, m.T)


def test_two_vertex_graph():
    m = sample_erdos_renyi(2, 1.0, seed=0).toarray()
    assert np.array_equal(m, [[0, 1], [1, 0]])


def test_edge_count_matches_binomial():
    n, p = 10_000, 1e-3
    pairs = n * (n - 1) // 2
    mean, sd = 2 * pairs * p, 2 * math.sqrt(pairs * p * (1 - p))
    counts = [sample_erdos_renyi(n, p, SeedSpec(11, t)).nnz for t in range(100)]
    assert abs(np.mean(counts) - mean) <= 3 * sd / math.sqrt(len(counts))
    assert mean == pytest.approx(9.999e4, rel=1e-3)


def test_iid_diagonal_and_roundtrip():
    d = make_distribution("uniform_symmetric")
    m = sample_sparse_wigner(50, 0.3, d, diag_mode="iid", seed=2)
    a = m.toarray()
    assert np.any(np.diag(a) != 0)
    back = SparseSymMatrix.loads(m.dumps())
    assert np.array_equal(back.toarray(), a)
    assert back.diag_mode == "iid"


def test_seed_determinism_and_independence():
    d = make_distribution("rademacher")
    a = sample_sparse_wigner(200, 0.05, d, seed=SeedSpec(5, 3)).toarray()
    b = sample_sparse_wigner(200, 0.05, d, seed=SeedSpec(5, 3)).toarray()
    c = sample_sparse_wigner(200, 0.05, d, seed=SeedSpec(5, 4)).toarray()
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("n,p", [(1, 0.5), (10, 0.0), (10, 1.5)])
def test_bad_density_rejected(n, p):
    with pytest.raises(ValueError):
        sample_erdos_renyi(n, p)


def test_seedspec_validation():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(0, -2)


def test_coupling_moments():
    d = make_distribution("constant_one")
    eps = 0.3
    beta, bound_sq = coupling_constants(eps, d)
    a, xi, xp = coupled_atoms(eps, d, SeedSpec(9).generator(), 400000)
    assert np.mean(xp) == pytest.approx(0.0, abs=5e-3)
    assert np.mean(xp * xp) == pytest.approx(1.0, abs=1e-2)
    assert np.max(xp * xp) <= bound_sq * (1 + 1e-12)
    assert beta == pytest.approx(math.sqrt(eps + eps**2 / (1 - eps)))


def test_couple_centered_shares_mask():
    d = make_distribution("rademacher")
    w, wp = couple_centered(300, 0.02, 0.5, d, seed=4)
    wn = w.toarray() != 0
    wpn = wp.toarray() != 0
    assert np.all(wpn[wn])
    with pytest.raises(ValueError):
        couple_centered(300, 0.6, 0.5, d)


def test_deformed_identity_shift():
    d = make_distribution("rademacher")
    a = sample_deformed_wigner(3, [1, 1, 1], d, seed=8)
    base = a - np.eye(3)
    assert np.allclose(np.linalg.eigvalsh(a), np.linalg.eigvalsh(base) + 1)
    assert np.allclose(np.abs(base * math.sqrt(3)), 1)


def test_pure_wigner_norm_near_two():
    a = sample_deformed_wigner(500, [], make_distribution("rademacher"), seed=1)
    assert np.linalg.norm(a, 2) == pytest.approx(2.0, abs=0.15)


def test_deformed_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_deformed_wigner(2, [1, 1, 1], make_distribution("rademacher"))
    with pytest.raises(ValueError):
        sample_deformed_wigner(5, [1], make_distribution("constant_one"))


@given(st.integers(2, 40), st.floats(0.01, 1.0), st.integers(0, 2**32))
def test_sparse_wigner_symmetric_bounded(n, p, seed):
    d = make_distribution("uniform_symmetric")
    a = sample_sparse_wigner(n, p, d, seed=seed).toarray()
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    assert np.all(a * a <= d.h)


@given(st.sampled_from(["rademacher", "uniform_symmetric", "smoothed(rademacher,0.5)",
                        "smoothed(uniform_symmetric,0.2)"]),
       st.floats(0.0, 1.0))
def test_quantile_sq_monotone_and_bounded(kind, a):
    d = make_distribution(kind)
    lo = float(d.quantile_sq(a))
    hi = float(d.quantile_sq(min(1.0, a + 0.1)))
    assert 0 <= lo <= hi <= d.h * (1 + 1e-9)
