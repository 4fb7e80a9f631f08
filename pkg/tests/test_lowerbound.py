import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from outlierlab import lowerbound as lb
from outlierlab.graphcomb import Graph, graph_from_matrix
from outlierlab.sampler import SeedSpec, SparseSymMatrix, sample_erdos_renyi
from outlierlab.spectral import extreme_eigenvalues


def star_matrix(m, weights=None, n=None):
    n = n or m + 1
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    a = np.zeros((n, n))
    a[0, 1:m + 1] = a[1:m + 1, 0] = w
    return a


def regular_tree(root_degree, inner_degree, q):
    edges, layers = [], [[0]]
    nxt = 1
    for r in range(q):
        layer = []
        for u in layers[-1]:
            for _ in range(root_degree if r == 0 else inner_degree - 1):
                edges.append((u, nxt))
                layer.append(nxt)
                nxt += 1
        layers.append(layer)
    i, j = np.array(edges).T
    a = sp.csr_matrix((np.ones(2 * len(edges)), (np.r_[i, j], np.r_[j, i])), shape=(nxt, nxt))
    return SparseSymMatrix(a, "zero")


def test_star_neighborhood():
    g = graph_from_matrix(star_matrix(9))
    tree = lb.q_neighborhood(g, 0, 1)
    assert [len(x) for x in tree.layers] == [1, 9]
    assert tree.proper


def test_triangle_fails():
    tri = Graph(3, [(0, 1), (1, 2), (0, 2)])
    res = lb.q_neighborhood(tri, 0, 1)
    assert not res and res.reason == "cycle in ball"
    loose = lb.q_neighborhood(tri, 0, 1, require_proper=False)
    assert not loose.proper and "cycle in ball" in loose.issues


def test_short_leaf_and_degree_range():
    path = Graph(4, [(0, 1), (1, 2), (2, 3)])
    assert lb.q_neighborhood(path, 0, 5).reason == "short leaf"
    g = graph_from_matrix(regular_tree(4, 3, 3).toarray())
    assert lb.q_neighborhood(g, 0, 3, degree_range=(3, 3))
    assert lb.q_neighborhood(g, 0, 3, degree_range=(4, 5)).reason == "interior degree out of range"


def test_even_depth_rejected():
    with pytest.raises(ValueError):
        lb.q_neighborhood(Graph(2, [(0, 1)]), 0, 2)


def test_star_test_vector_gives_row_norm():
    w = [0.5, -1.2, 0.9, 2.0]
    a = star_matrix(4, w)
    tree = lb.q_neighborhood(graph_from_matrix(a), 0, 1)
    y = lb.build_test_vector(a, tree, 1.0)
    assert lb.rayleigh(a, y) == pytest.approx(math.sqrt(sum(x * x for x in w)), rel=1e-14)
    assert set(y.support) == {1, 2, 3, 4}


def test_regular_tree_closed_form():
    m = regular_tree(40, 10, 3)
    tree = lb.q_neighborhood(graph_from_matrix(m), 0, 3)
    y = lb.build_test_vector(m, tree, 10.0)
    assert y.deltas[2] == pytest.approx(1 / 27, rel=1e-15)
    # ||MY||^2 = 40^2 + 360 (1 + 9/27)^2 and ||Y||^2 = 40 + 360 * 9 / 27^2
    expected = math.sqrt(2240 / (40 + 360 / 81))
    assert lb.rayleigh(m, y) == pytest.approx(expected, abs=1e-10)
    depth = tree.depth_of()
    assert all(depth[z] % 2 == 1 for z in y.support)


def test_delta_ratio_at_four_dt():
    m = regular_tree(40, 4, 5)
    tree = lb.q_neighborhood(graph_from_matrix(m), 0, 5)
    y = lb.build_test_vector(m, tree, 10.0)
    assert y.deltas[2] == pytest.approx(1 / (3 * 9), rel=1e-14)
    assert y.deltas[4] / y.deltas[2] == pytest.approx(1 / (3 * 9), rel=1e-14)


def test_small_root_rejected_unless_truncated():
    a = star_matrix(3)
    tree = lb.q_neighborhood(graph_from_matrix(a), 0, 1)
    with pytest.raises(ValueError):
        lb.build_test_vector(a, tree, 5.0)
    m = regular_tree(3, 3, 3)
    tree = lb.q_neighborhood(graph_from_matrix(m), 0, 3)
    y = lb.build_test_vector(m, tree, 5.0, truncate=True)
    assert y.deltas[2] == 0.0
    # root row gives 3^2, each of the 6 grandchildren gets 1, ||Y||^2 = 3
    assert lb.rayleigh(m, y) == pytest.approx(math.sqrt(5), rel=1e-14)


def test_rayleigh_examples():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((8, 8))
    a = a + a.T
    vals, vecs = np.linalg.eigh(a)
    assert lb.rayleigh(a, vecs[:, 3]) == pytest.approx(abs(vals[3]), rel=1e-12)
    e2 = np.eye(8)[2]
    assert lb.rayleigh(a, e2) == pytest.approx(np.linalg.norm(a[2]), rel=1e-14)
    with pytest.raises(ValueError):
        lb.rayleigh(a, np.zeros(8))


def test_two_disjoint_stars():
    a = np.zeros((12, 12))
    a[0, 1:6] = a[1:6, 0] = 1.0
    a[6, 7:12] = a[7:12, 6] = [2, 1, 1, 1, 1]
    certs = lb.lower_bound_certificate(a, 2, 1, 1.0)
    assert sorted(c.rayleigh for c in certs) == pytest.approx([math.sqrt(5), math.sqrt(8)])
    lam = lb.attach_spectrum(a, certs)
    # each star contributes +-sqrt(row), so the second largest |lambda| is sqrt(8) again
    assert lam == pytest.approx(math.sqrt(8))
    assert lb.interlacing_holds(certs)
    assert all(c.ok for c in certs)


def test_certificate_failure_when_too_few_roots():
    res = lb.lower_bound_certificate(star_matrix(4), 2, 1, 1.0)
    assert not res and len(res.found) == 1
    with pytest.raises(ValueError):
        lb.lower_bound_certificate(star_matrix(4), 0, 1, 1.0)


def test_star_plus_noise_hits_tree_bound():
    rng = np.random.default_rng(3)
    d_tilde = 20
    root = np.where(rng.random(3 * d_tilde) < 0.5, lb.PSI_LIGHT, lb.PSI_HEAVY)
    m, tree = lb.synthetic_tree(rng, root, 3, 19, 20)
    certs = lb.lower_bound_certificate(m, 1, 3, d_tilde)
    c = certs[0]
    assert c.regime == "outlier"
    assert c.rayleigh >= c.target
    assert c.rayleigh <= abs(extreme_eigenvalues(m, 1, tol=1e-10).values[0]) * (1 + 1e-9)


def test_layered_formula_matches_explicit_tree():
    rng = np.random.default_rng(5)
    root = np.where(rng.random(30) < 0.5, lb.PSI_LIGHT, lb.PSI_HEAVY)
    m, tree = lb.synthetic_tree(rng, root, 5, 3, 5)
    y = lb.build_test_vector(m, tree, 5.0)
    explicit = lb.rayleigh(m, y)
    layered = lb.layered_rayleigh(float(root.sum()), 5.0, 5, lb.tree_layer_terms(m, tree))
    assert layered == pytest.approx(explicit, rel=1e-12)


def test_aggregated_sampler_matches_tree_law():
    # mean count of even-layer vertices equals the explicit product of child counts
    rng = np.random.default_rng(9)
    root = np.full(10, lb.PSI_HEAVY)
    totals = [lb.aggregated_layer_terms(rng, root, 3, 4, 6)[2][2].sum() for _ in range(400)]
    assert np.mean(totals) == pytest.approx(10 * 4, rel=0.03)


def test_synthetic_trial_meets_target():
    rng = SeedSpec(1).generator()
    hits = [r >= t for r, t, _ in (lb.synthetic_main_lower_trial(rng, 200) for _ in range(30))]
    assert sum(hits) >= 27


def test_bulk_regime_uses_edge_target():
    m = sample_erdos_renyi(3000, 12 / 3000, SeedSpec(4))
    certs = lb.lower_bound_certificate(m, 1, 1, 13.2, require_proper=False, np_=12.0)
    assert certs[0].regime in ("bulk", "outlier")
    if certs[0].regime == "bulk":
        assert certs[0].target == pytest.approx(lb.bulk_target(12.0))


def test_er_interlacing_k2():
    n = 20000
    np_ = math.log(n) / 2
    for t in range(3):
        m = sample_erdos_renyi(n, np_ / n, SeedSpec(8, t))
        certs = lb.lower_bound_certificate(m, 2, 1, 1.1 * np_, require_proper=False)
        lb.attach_spectrum(m, certs)
        assert lb.interlacing_holds(certs)


def _tree_rate(q, trials, degree_range=None):
    n, np_ = 10**5, 20.0
    hits = 0
    for t in range(trials):
        g = graph_from_matrix(sample_erdos_renyi(n, np_ / n, SeedSpec(5, t)))
        v = int(SeedSpec(6, t).generator().integers(n))
        hits += bool(lb.q_neighborhood(g, v, q, degree_range=degree_range))
    return hits / trials


def test_er_depth_one_balls_are_trees():
    assert _tree_rate(1, 10) >= 0.8


@pytest.mark.xfail(strict=True, reason="at n=1e5, np=20 a depth-3 ball holds ~8000 vertices; "
                                        "cycles and out-of-range degrees are near certain")
def test_er_depth_three_balls_are_trees():
    assert _tree_rate(3, 10, degree_range=(10, 30)) >= 0.8


@pytest.mark.slow
def test_er_large_interlacing_k2():
    n = 10**5
    np_ = math.log(n) / 2
    for t in range(2):
        m = sample_erdos_renyi(n, np_ / n, SeedSpec(12, t))
        certs = lb.lower_bound_certificate(m, 2, 1, 1.1 * np_, require_proper=False)
        lb.attach_spectrum(m, certs)
        assert lb.interlacing_holds(certs)


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_certificates_never_exceed_spectrum(seed, k):
    rng = np.random.default_rng(seed)
    n = 60
    a = np.triu(rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.05), 1)
    a = a + a.T
    certs = lb.lower_bound_certificate(a, k, 1, 0.5, require_proper=False, separation=3)
    if not certs:
        return
    lb.attach_spectrum(a, certs)
    assert lb.interlacing_holds(certs)
