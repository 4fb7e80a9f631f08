"""Eigenvalue lower bounds from tree-shaped test vectors.

Around a vertex ``v`` with a large row, the test vector puts weight on the
odd layers of the depth-``q`` neighborhood: each child ``z`` of an
even-depth vertex at depth ``r`` gets ``delta_r`` times the product of the
entries along the tree path to ``z``. Its Rayleigh quotient
``||MY|| / ||Y||`` lower-bounds ``||M||``. Test vectors around roots that are
far enough apart give orthogonal ``Y_i`` with orthogonal ``M Y_i``, so by
Courant-Fischer the smallest of the ``k`` quotients lower-bounds the
``k``-th largest ``|lambda|``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphcomb import Graph, graph_from_matrix
from .sampler import SparseSymMatrix


@dataclass
class RootedTreeNbhd:
    root: int
    q: int
    layers: list
    parent: dict
    proper: bool = True
    issues: list = field(default_factory=list)

    def depth_of(self):
        return {u: r for r, layer in enumerate(self.layers) for u in layer}

    def children(self):
        out = {u: [] for layer in self.layers for u in layer}
        for z, u in self.parent.items():
            out[u].append(z)
        for u in out:
            out[u].sort()
        return out


@dataclass
class TreeFailure:
    root: int
    reason: str

    def __bool__(self):
        return False


@dataclass
class TestVector:
    support: dict
    deltas: dict

    def dense(self, n) -> np.ndarray:
        y = np.zeros(n)
        for z, c in self.support.items():
            y[z] = c
        return y


def q_neighborhood(g: Graph, v: int, q: int, degree_range=None, require_proper: bool = True):
    """Breadth-first depth-``q`` tree around ``v``.

    With ``require_proper`` the ball must be a tree whose leaves all sit at
    depth ``q`` and, when ``degree_range`` is given, whose interior vertices
    have degrees inside it; otherwise a ``TreeFailure`` is returned. Without
    it the BFS tree is returned with the problems listed in ``issues``.
    """
    if q < 1 or q % 2 == 0:
        raise ValueError("q must be a positive odd integer")
    depth = {v: 0}
    parent = {}
    layers = [[v]]
    issues = []
    queue = deque([v])
    while queue:
        u = queue.popleft()
        if depth[u] == q:
            continue
        for w in g.adj[u]:
            if w not in depth:
                depth[w] = depth[u] + 1
                parent[w] = u
                if len(layers) <= depth[w]:
                    layers.append([])
                layers[depth[w]].append(w)
                queue.append(w)
    in_ball = set(depth)
    n_edges = sum(1 for u in in_ball for w in g.adj[u] if w in in_ball) // 2
    if n_edges != len(in_ball) - 1:
        issues.append("cycle in ball")
    kids = {u: 0 for u in in_ball}
    for z, u in parent.items():
        kids[u] += 1
    if len(layers) <= q or any(kids[u] == 0 and depth[u] < q for u in in_ball):
        issues.append("short leaf")
    if degree_range is not None:
        lo, hi = degree_range
        for u in in_ball:
            if u != v and depth[u] < q and not lo <= g.degree(u) <= hi:
                issues.append("interior degree out of range")
                break
    if issues and require_proper:
        return TreeFailure(v, "; ".join(issues))
    for layer in layers:
        layer.sort()
    return RootedTreeNbhd(v, q, layers, parent, not issues, issues)


def _csr(m):
    if isinstance(m, SparseSymMatrix):
        return m.csr
    if sp.issparse(m):
        return sp.csr_matrix(m)
    return sp.csr_matrix(np.asarray(m, dtype=np.float64))


def build_test_vector(m, tree: RootedTreeNbhd, d_tilde: float, truncate: bool = False) -> TestVector:
    """Test vector with ``delta_0 = 1`` and ``delta_r = delta_{r-2} dt / ((dt-1)(R - dt))``.

    ``R`` is the squared norm of the root row. When ``R <= dt`` the recursion
    has no valid ratio; ``truncate`` then keeps only the root layer.
    """
    csr = _csr(m)
    v = tree.root
    lo, hi = csr.indptr[v], csr.indptr[v + 1]
    r2 = float(np.dot(csr.data[lo:hi], csr.data[lo:hi]))
    deltas = {0: 1.0}
    if r2 <= d_tilde and not truncate:
        raise ValueError(f"root row norm^2 {r2} does not exceed d_tilde {d_tilde}")
    for r in range(2, tree.q, 2):
        if r2 <= d_tilde:
            deltas[r] = 0.0
        else:
            deltas[r] = deltas[r - 2] * d_tilde / ((d_tilde - 1.0) * (r2 - d_tilde))
    prod = {v: 1.0}
    for layer in tree.layers[1:]:
        for z in layer:
            prod[z] = prod[tree.parent[z]] * float(csr[tree.parent[z], z])
    depth = tree.depth_of()
    support = {}
    for z, u in tree.parent.items():
        r = depth[u]
        if r % 2 == 0 and deltas.get(r, 0.0) != 0.0:
            support[z] = deltas[r] * prod[z]
    return TestVector(support, deltas)


def rayleigh(m, y) -> float:
    """``||M y|| / ||y||``."""
    csr = _csr(m)
    vec = y.dense(csr.shape[0]) if isinstance(y, TestVector) else np.asarray(y, dtype=np.float64)
    ny = np.linalg.norm(vec)
    if ny == 0:
        raise ValueError("zero test vector")
    return float(np.linalg.norm(csr @ vec) / ny)


def main_lower_target(row_sq: float, d_tilde: float, eps: float = 0.0) -> float:
    """``(1 - eps) R / sqrt(R - dt)`` for root row norm squared ``R``."""
    return (1.0 - eps) * row_sq / math.sqrt(row_sq - d_tilde)


@dataclass
class Certificate:
    root: int
    depth: int
    row_norm_sq: float
    d_tilde: float
    rayleigh: float
    regime: str
    proper: bool
    target: float = float("nan")
    lambda_k: float = float("nan")

    @property
    def ok(self):
        return self.rayleigh <= self.lambda_k * (1 + 1e-9) + 1e-9


@dataclass
class CertificateFailure:
    reason: str
    found: list

    def __bool__(self):
        return False


def lower_bound_certificate(m, k: int, q: int, d_tilde: float, eps: float = 0.1,
                            require_proper: bool = True, degree_range=None,
                            separation: int | None = None, max_candidates: int | None = None,
                            np_: float | None = None):
    """Up to ``k`` test vectors around far-apart high-norm roots.

    Roots are scanned by decreasing row norm and accepted greedily when they
    lie at distance at least ``separation`` (default ``2q + 3``) from every
    accepted root, which keeps both the vectors and their images disjointly
    supported. A certificate is labelled ``outlier`` when the root row norm
    squared reaches ``2(1 + eps) d_tilde`` and ``bulk`` otherwise. Its
    ``target`` is the tree bound ``(1 - eps) R / sqrt(R - d_tilde)`` in the
    first case and, when ``np_`` is given, the edge ``2 sqrt(np)(1 - eps)`` in
    the second.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    csr = _csr(m)
    g = graph_from_matrix(csr)
    sep = 2 * q + 3 if separation is None else separation
    norms = np.asarray(csr.multiply(csr).sum(axis=1)).ravel()
    order = np.lexsort((np.arange(norms.size), -norms))
    if max_candidates is not None:
        order = order[:max_candidates]
    blocked = np.zeros(csr.shape[0], dtype=bool)
    found = []
    for v in order:
        v = int(v)
        if blocked[v] or norms[v] == 0:
            continue
        tree = q_neighborhood(g, v, q, degree_range, require_proper)
        if not tree:
            continue
        y = build_test_vector(csr, tree, d_tilde, truncate=True)
        if norms[v] >= 2 * (1 + eps) * d_tilde:
            regime, target = "outlier", main_lower_target(float(norms[v]), d_tilde, eps)
        else:
            regime, target = "bulk", float("nan") if np_ is None else bulk_target(np_, eps)
        found.append(Certificate(v, q, float(norms[v]), d_tilde, rayleigh(csr, y), regime, tree.proper, target))
        dist = _ball(g, v, sep - 1)
        blocked[dist] = True
        if len(found) == k:
            return found
    return CertificateFailure(f"only {len(found)} of {k} separated trees found", found)


def _ball(g: Graph, v, radius):
    seen = {v}
    frontier = [v]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for w in g.adj[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return np.fromiter(seen, dtype=np.int64)


def bulk_target(np_: float, eps: float = 0.1) -> float:
    """Semicircle edge ``2 sqrt(np) (1 - eps)`` used when no root row stands out."""
    return 2.0 * math.sqrt(np_) * (1.0 - eps)


# Synthetic trees meeting the hypotheses of the tree lemma. Squared entries
# take two values (0.5 or 1.5, each with probability 1/2, so E xi^2 = 1 and
# h = 1.5); interior degrees are uniform integers in [d_lo, d_hi].

PSI_LIGHT, PSI_HEAVY = 0.5, 1.5


def layered_rayleigh(row_sq: float, d_tilde: float, q: int, layer_terms: dict) -> float:
    """Rayleigh quotient from per-layer sufficient statistics.

    ``layer_terms[r]`` for even ``r >= 2`` is a triple ``(pi2, s, count)`` of
    arrays: the squared path product to a vertex, the sum of its squared child
    entries and how many vertices share those values. With ``Y`` supported on
    odd layers only the even-layer rows of ``M Y`` are nonzero, which gives
    ``||MY||^2 = R^2 + sum Pi (d_{r-2} + d_r S)^2`` and
    ``||Y||^2 = R + sum d_r^2 Pi S``.
    """
    deltas = {0: 1.0}
    for r in range(2, q, 2):
        deltas[r] = deltas[r - 2] * d_tilde / ((d_tilde - 1.0) * (row_sq - d_tilde))
    my2 = [row_sq * row_sq]
    y2 = [row_sq]
    for r in range(2, q, 2):
        pi2, s, count = (np.asarray(a, dtype=np.float64) for a in layer_terms[r])
        my2.append(float(np.sum(count * pi2 * (deltas[r - 2] + deltas[r] * s) ** 2)))
        y2.append(float(np.sum(count * deltas[r] ** 2 * pi2 * s)))
    return math.sqrt(math.fsum(my2) / math.fsum(y2))


def synthetic_tree(rng, root_psi, q: int, d_lo: int, d_hi: int):
    """Explicit random tree as ``(SparseSymMatrix, RootedTreeNbhd)``; small degrees only."""
    root_psi = np.asarray(root_psi, dtype=np.float64)
    rows, cols, vals = [], [], []
    parent = {}
    layers = [[0]]
    nxt = 1
    for psi in root_psi:
        parent[nxt] = 0
        rows.append(0)
        cols.append(nxt)
        vals.append(math.sqrt(psi) * rng.choice([-1.0, 1.0]))
        nxt += 1
    layers.append(list(range(1, nxt)))
    for r in range(1, q):
        layer = []
        for u in layers[r]:
            n_kids = int(rng.integers(d_lo, d_hi + 1)) - 1
            psi = np.where(rng.random(n_kids) < 0.5, PSI_LIGHT, PSI_HEAVY)
            for ps in psi:
                parent[nxt] = u
                rows.append(u)
                cols.append(nxt)
                vals.append(math.sqrt(ps) * rng.choice([-1.0, 1.0]))
                layer.append(nxt)
                nxt += 1
        layers.append(layer)
    r_, c_ = np.array(rows), np.array(cols)
    a = sp.csr_matrix((np.concatenate([vals, vals]), (np.concatenate([r_, c_]), np.concatenate([c_, r_]))),
                      shape=(nxt, nxt))
    return SparseSymMatrix(a, "zero", bound_sq=PSI_HEAVY), RootedTreeNbhd(0, q, layers, parent, True)


def tree_layer_terms(m, tree: RootedTreeNbhd) -> dict:
    """Per-vertex ``(pi2, s, 1)`` statistics of an explicit tree, keyed by even depth."""
    csr = _csr(m)
    kids = tree.children()
    pi2 = {tree.root: 1.0}
    for layer in tree.layers[1:]:
        for z in layer:
            u = tree.parent[z]
            pi2[z] = pi2[u] * float(csr[u, z]) ** 2
    out = {}
    for r in range(2, tree.q, 2):
        layer = tree.layers[r]
        p = [pi2[u] for u in layer]
        s = [sum(float(csr[u, z]) ** 2 for z in kids[u]) for u in layer]
        out[r] = (p, s, np.ones(len(layer)))
    return out


def aggregated_layer_terms(rng, root_psi, q: int, d_lo: int, d_hi: int) -> dict:
    """Draw the per-layer statistics of a random synthetic tree without building it.

    Each vertex is summarized by ``a``, the number of light edges on its root
    path. A vertex draws its child count from the degree law and each child
    edge is heavy with probability 1/2, so the joint (child count, heavy
    children) of all vertices in one class is a single multinomial draw.
    Class counts therefore evolve exactly as in the explicit tree.
    """
    root_psi = np.asarray(root_psi, dtype=np.float64)
    degs = np.arange(d_lo, d_hi + 1)
    kids = degs - 1
    p_deg = np.full(degs.size, 1.0 / degs.size)
    cells_c, cells_j, cells_p = [], [], []
    for c, pd in zip(kids, p_deg):
        j = np.arange(c + 1)
        log_b = (np.array([math.lgamma(c + 1) - math.lgamma(x + 1) - math.lgamma(c - x + 1) for x in j])
                 - c * math.log(2.0))
        cells_c.append(np.full(c + 1, c))
        cells_j.append(j)
        cells_p.append(pd * np.exp(log_b))
    cells_c = np.concatenate(cells_c)
    cells_j = np.concatenate(cells_j)
    cells_p = np.concatenate(cells_p)
    cells_p /= cells_p.sum()
    s_cell = PSI_LIGHT * (cells_c - cells_j) + PSI_HEAVY * cells_j

    counts = {0: int(np.sum(root_psi == PSI_HEAVY)), 1: int(np.sum(root_psi == PSI_LIGHT))}
    if counts[0] + counts[1] != root_psi.size:
        raise ValueError("root entries must be squared values 0.5 or 1.5")
    out = {}
    for r in range(1, q):
        new = {}
        pis, ss, cs = [], [], []
        for a, n_a in counts.items():
            if n_a == 0:
                continue
            pi2 = PSI_LIGHT**a * PSI_HEAVY ** (r - a)
            cell_n = rng.multinomial(n_a, cells_p)
            if r % 2 == 0:
                nz = cell_n > 0
                pis.append(np.full(nz.sum(), pi2))
                ss.append(s_cell[nz])
                cs.append(cell_n[nz])
            heavy_kids = int(np.dot(cell_n, cells_j))
            light_kids = int(np.dot(cell_n, cells_c - cells_j))
            new[a] = new.get(a, 0) + heavy_kids
            new[a + 1] = new.get(a + 1, 0) + light_kids
        if r % 2 == 0:
            out[r] = (np.concatenate(pis), np.concatenate(ss), np.concatenate(cs))
        counts = new
    return out


def synthetic_main_lower_trial(rng, d_tilde: int, q: int = 5, delta: float = 0.05,
                               ratio_range=(2.2, 6.0), eps: float = 0.1):
    """One synthetic instance: returns ``(rayleigh, target, row_sq)``.

    Degrees are uniform on ``[d', d_tilde]`` with ``d' = ceil(d_tilde/(1+delta))``;
    the root row gets squared entries 0.5/1.5 with ``R`` drawn so that
    ``R / d_tilde`` lies in ``ratio_range`` (the hypothesis asks for at least
    ``2(1+eps)``).
    """
    d_lo = int(math.ceil(d_tilde / (1.0 + delta)))
    target_r = rng.uniform(*ratio_range) * d_tilde
    n_root = int(math.ceil(target_r))
    root_psi = np.where(rng.random(n_root) < 0.5, PSI_LIGHT, PSI_HEAVY)
    row_sq = float(root_psi.sum())
    while row_sq < 2 * (1 + eps) * d_tilde:
        root_psi = np.append(root_psi, PSI_HEAVY)
        row_sq += PSI_HEAVY
    terms = aggregated_layer_terms(rng, root_psi, q, d_lo, d_tilde)
    val = layered_rayleigh(row_sq, d_tilde, q, terms)
    return val, main_lower_target(row_sq, d_tilde, eps), row_sq


def attach_spectrum(m, certs, tol: float = 1e-8, seed: int = 0):
    """Fill ``lambda_k`` on each certificate with ``|lambda_(|k|)(M)|``, ``k = len(certs)``."""
    from .spectral import extreme_eigenvalues

    k = len(certs)
    res = extreme_eigenvalues(m, k=k, tol=tol, seed=seed, verify_multiplicity=True)
    lam = abs(res.values[k - 1])
    for c in certs:
        c.lambda_k = lam
    return lam


def interlacing_holds(certs, tol: float = 1e-8) -> bool:
    """Smallest certificate against ``lambda_k``: the Courant-Fischer inequality."""
    return min(c.rayleigh for c in certs) <= certs[0].lambda_k + tol * max(1.0, certs[0].lambda_k)


CERT_FIELDS = ("root", "depth", "row_norm_sq", "d_tilde", "rayleigh", "lambda_k", "ok")


def certificate_rows(certs):
    return [(c.root, c.depth, repr(c.row_norm_sq), repr(c.d_tilde), repr(c.rayleigh), repr(c.lambda_k),
             int(c.ok)) for c in certs]
