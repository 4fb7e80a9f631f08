"""Seedable generation of sparse Wigner, Erdős–Rényi, coupled and deformed matrices.

Randomness comes from counter-based Philox streams keyed by
``(master_seed, trial_index)``, so every trial is reproducible on its own and
independent of the order in which trials run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

KINDS = ("rademacher", "constant_one", "uniform_symmetric", "smoothed")
DIAG_MODES = ("zero", "iid")
DEFAULT_SMOOTHING = 1e-3
_EMPIRICAL_SAMPLES = 10**6
_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class SeedSpec:
    """A trial's position in the random stream family."""

    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if self.trial_index < 0:
            raise ValueError("trial_index must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.trial_index,))
        return np.random.Generator(np.random.Philox(ss))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, SeedSpec):
        return seed.generator()
    if isinstance(seed, np.random.Generator):
        return seed
    return SeedSpec(int(seed)).generator()


@dataclass(frozen=True)
class BoundedDistribution:
    """A bounded atom ``xi`` with unit second moment.

    ``h`` bounds ``xi**2`` almost surely. For the smoothed kind, ``base_kind``
    is perturbed by independent uniform noise on ``(-width, width)`` and the
    sum is rescaled back to unit second moment.
    """

    kind: str
    h: float
    mean: float
    second_moment: float = 1.0
    base_kind: str | None = None
    width: float = 0.0
    _table: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def scale(self) -> float:
        """Divisor applied after smoothing; 1 for unsmoothed kinds."""
        return math.sqrt(1.0 + self.width**2 / 3.0) if self.kind == "smoothed" else 1.0

    @property
    def true_bound_sq(self) -> float:
        return _true_bound_sq(self.kind, self.base_kind, self.width)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        kind = self.base_kind if self.kind == "smoothed" else self.kind
        if kind == "rademacher":
            x = 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
        elif kind == "constant_one":
            x = np.ones(size, dtype=np.float64)
        else:
            x = rng.uniform(-_SQRT3, _SQRT3, size=size)
        if self.kind == "smoothed":
            x = (x + rng.uniform(-self.width, self.width, size=size)) / self.scale
        return x

    def quantile(self, a):
        """Inverse CDF of ``xi`` (left-continuous, ``inf{x : F(x) >= a}``)."""
        a = np.asarray(a, dtype=np.float64)
        s, w = self.scale, self.width
        if self.kind == "rademacher":
            return np.where(a <= 0.5, -1.0, 1.0)
        if self.kind == "constant_one":
            return np.ones_like(a)
        if self.kind == "uniform_symmetric":
            return -_SQRT3 + 2.0 * _SQRT3 * a
        if self.base_kind == "constant_one":
            return (1.0 - w + 2.0 * w * a) / s
        if self.base_kind == "rademacher" and w < 1.0:
            lo = -1.0 - w + 4.0 * w * a
            hi = 1.0 - w + 2.0 * w * (2.0 * a - 1.0)
            return np.where(a <= 0.5, lo, hi) / s
        return self._empirical(a, squared=False)

    def quantile_sq(self, a):
        """Inverse CDF of ``psi = xi**2``; ``quantile_sq(0)`` is its essential infimum."""
        a = np.asarray(a, dtype=np.float64)
        s, w = self.scale, self.width
        if self.kind in ("rademacher", "constant_one"):
            return np.ones_like(a)
        if self.kind == "uniform_symmetric":
            return 3.0 * a * a
        if self.base_kind in ("rademacher", "constant_one") and w < 1.0:
            return ((1.0 - w + 2.0 * w * a) / s) ** 2
        return self._empirical(a, squared=True)

    def _empirical(self, a, squared):
        xs, ps = self._table
        grid = ps if squared else xs
        probs = np.linspace(0.0, 1.0, grid.size)
        return np.interp(a, probs, grid)


def _true_bound_sq(kind, base_kind, width):
    if kind == "rademacher" or kind == "constant_one":
        return 1.0
    if kind == "uniform_symmetric":
        return 3.0
    base_max = _SQRT3 if base_kind == "uniform_symmetric" else 1.0
    return (base_max + width) ** 2 / (1.0 + width**2 / 3.0)


def make_distribution(kind: str, h: float | None = None, *, base_kind: str = "rademacher",
                      width: float = DEFAULT_SMOOTHING, seed: int = 0) -> BoundedDistribution:
    """Build a unit-second-moment bounded atom.

    ``kind`` is one of ``rademacher``, ``constant_one``, ``uniform_symmetric``
    or ``smoothed`` (the last takes ``base_kind`` and ``width``). ``h`` defaults
    to the tightest bound on ``xi**2``; an explicit ``h`` below it is rejected.
    A string of the form ``smoothed(base,width)`` is accepted as shorthand.
    """
    if kind.startswith("smoothed(") and kind.endswith(")"):
        inner = kind[len("smoothed("):-1].split(",")
        base_kind, width, kind = inner[0].strip(), float(inner[1]), "smoothed"
    if kind not in KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    if kind == "smoothed":
        if base_kind not in KINDS[:3]:
            raise ValueError(f"cannot smooth {base_kind!r}")
        if not width > 0:
            raise ValueError("smoothing width must be positive")
    else:
        base_kind, width = None, 0.0
    bound = _true_bound_sq(kind, base_kind, width)
    if h is None:
        h = bound
    if h < 1.0:
        raise ValueError(f"h={h} < 1: a unit-variance atom bounded by sqrt(h) needs h >= 1")
    if h < bound * (1.0 - 1e-12):
        raise ValueError(f"h={h} is below the true bound {bound} on xi^2")
    scale = math.sqrt(1.0 + width**2 / 3.0) if kind == "smoothed" else 1.0
    base_mean = 1.0 if (kind == "constant_one" or base_kind == "constant_one") else 0.0
    table = None
    if kind == "smoothed" and not (base_kind in ("rademacher", "constant_one") and width < 1.0):
        proto = BoundedDistribution(kind, h, base_mean / scale, 1.0, base_kind, width)
        xs = np.sort(proto.sample(SeedSpec(seed).generator(), _EMPIRICAL_SAMPLES))
        table = (xs, np.sort(xs * xs))
    return BoundedDistribution(kind, float(h), base_mean / scale, 1.0, base_kind, width, table)


class SparseSymMatrix:
    """Symmetric sparse matrix in CSR layout.

    ``bound_sq`` records an almost-sure bound on squared entries when the
    generator knows one.
    """

    def __init__(self, csr, diag_mode="zero", bound_sq=None):
        csr = sp.csr_matrix(csr, dtype=np.float64)
        csr.sum_duplicates()
        csr.sort_indices()
        csr.eliminate_zeros()
        if csr.shape[0] != csr.shape[1]:
            raise ValueError("matrix must be square")
        if diag_mode not in DIAG_MODES:
            raise ValueError(f"diag_mode must be one of {DIAG_MODES}")
        if (csr != csr.T).nnz:
            raise ValueError("matrix is not symmetric")
        if diag_mode == "zero" and np.any(csr.diagonal() != 0):
            raise ValueError("diag_mode='zero' but the diagonal has nonzeros")
        self.csr = csr
        self.diag_mode = diag_mode
        self.bound_sq = bound_sq

    @classmethod
    def from_dense(cls, a, diag_mode=None, bound_sq=None):
        a = np.asarray(a, dtype=np.float64)
        if diag_mode is None:
            diag_mode = "iid" if np.any(np.diag(a) != 0) else "zero"
        return cls(sp.csr_matrix(a), diag_mode, bound_sq)

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def value(self, i, j) -> float:
        return float(self.csr[i, j])

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def row(self, i):
        """Column indices and values of row ``i``."""
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        return self.csr.indices[lo:hi], self.csr.data[lo:hi]

    def dumps(self) -> str:
        """Line-oriented text dump of the upper triangle."""
        upper = sp.triu(self.csr).tocoo()
        order = np.lexsort((upper.col, upper.row))
        lines = [f"n {self.n} diag {self.diag_mode}"]
        for k in order:
            lines.append(f"{upper.row[k]} {upper.col[k]} {upper.data[k]:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SparseSymMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if len(head) != 4 or head[0] != "n" or head[2] != "diag":
            raise ValueError("bad matrix header")
        n, mode = int(head[1]), head[3]
        rows, cols, vals = [], [], []
        for ln in lines[1:]:
            i, j, v = ln.split()
            rows.append(int(i))
            cols.append(int(j))
            vals.append(float(v))
        return cls(_mirror(n, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                           np.array(vals, dtype=np.float64)), mode)


def _mirror(n, i, j, v):
    off = i != j
    rows = np.concatenate([i, j[off]])
    cols = np.concatenate([j, i[off]])
    vals = np.concatenate([v, v[off]])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _decode_pairs(n, idx):
    """Map row-major upper-triangle pair indices to ``(i, j)`` with ``i < j``."""
    idx = np.asarray(idx, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(float(b) ** 2 - 8.0 * idx)) / 2.0).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    over = start > idx
    i[over] -= 1
    start = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    under = nxt <= idx
    i[under] += 1
    start = i * (2 * n - i - 1) // 2
    j = idx - start + i + 1
    return i, j


def _bernoulli_pairs(n, p, rng):
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p))
    idx = np.sort(rng.choice(total, size=m, replace=False)) if m else np.zeros(0, np.int64)
    return _decode_pairs(n, idx)


def _check_np(n, p):
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")


def sample_sparse_wigner(n: int, p: float, dist: BoundedDistribution, diag_mode: str = "zero",
                         seed=0) -> SparseSymMatrix:
    """Symmetric matrix with independent ``b * xi`` entries, ``P(b = 1) = p``.

    Edges are drawn first (binomial count, then a uniform subset of pairs),
    then values in sorted pair order, then the diagonal when ``diag_mode`` is
    ``iid``. The lower triangle is a mirror copy.
    """
    _check_np(n, p)
    if diag_mode not in DIAG_MODES:
        raise ValueError(f"diag_mode must be one of {DIAG_MODES}")
    rng = _as_rng(seed)
    i, j = _bernoulli_pairs(n, p, rng)
    v = dist.sample(rng, i.size)
    if diag_mode == "iid":
        d = np.flatnonzero(rng.random(n) < p)
        i = np.concatenate([i, d])
        j = np.concatenate([j, d])
        v = np.concatenate([v, dist.sample(rng, d.size)])
    return SparseSymMatrix(_mirror(n, i, j, v), diag_mode, bound_sq=dist.h)


def sample_erdos_renyi(n: int, p: float, seed=0) -> SparseSymMatrix:
    """Adjacency matrix of G(n, p)."""
    return sample_sparse_wigner(n, p, make_distribution("constant_one"), "zero", seed)


def coupling_constants(eps: float, dist: BoundedDistribution):
    """``(beta, bound_sq)`` for the centered atom ``xi_eps / beta``.

    ``xi_eps = a*xi - eps*(1-a)*E[xi]/(1-eps)`` with ``a ~ Bern(eps)`` has mean
    zero and variance ``beta**2 = eps + eps**2 E[xi]**2 / (1-eps)``.
    """
    mu = dist.mean
    beta = math.sqrt(eps + eps * eps * mu * mu / (1.0 - eps))
    shift = eps * abs(mu) / (1.0 - eps)
    bound_sq = max(dist.h, shift * shift) / beta**2
    return beta, bound_sq


def coupled_atoms(eps: float, dist: BoundedDistribution, rng, size):
    """Draw ``(a, xi, xi_prime)`` triples of the entrywise coupling."""
    rng = _as_rng(rng)
    beta, _ = coupling_constants(eps, dist)
    a = (rng.random(size) < eps).astype(np.float64)
    xi = dist.sample(rng, size)
    xi_eps = a * xi - eps * (1.0 - a) * dist.mean / (1.0 - eps)
    return a, xi, xi_eps / beta


def couple_centered(n: int, p: float, eps: float, dist: BoundedDistribution, seed=0):
    """Coupled pair ``(W, W')`` sharing the sparsity mask ``b'``.

    Entries are ``w = a*b'*xi`` and ``w' = b'*xi_eps/beta`` with independent
    ``a ~ Bern(eps)``, ``b' ~ Bern(p/eps)``. ``W`` is distributed as
    ``sample_sparse_wigner(n, p, dist)`` and ``W'`` has centered unit-variance
    entries at density ``p/eps``; its ``bound_sq`` holds the exact entry bound.
    """
    _check_np(n, p)
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if p > eps:
        raise ValueError(f"p={p} exceeds eps={eps}")
    rng = _as_rng(seed)
    i, j = _bernoulli_pairs(n, p / eps, rng)
    a, xi, xi_prime = coupled_atoms(eps, dist, rng, i.size)
    _, bound_sq = coupling_constants(eps, dist)
    keep = a != 0
    w = SparseSymMatrix(_mirror(n, i[keep], j[keep], xi[keep]), "zero", bound_sq=dist.h)
    w_prime = SparseSymMatrix(_mirror(n, i, j, xi_prime), "zero", bound_sq=bound_sq)
    return w, w_prime


def sample_deformed_wigner(n: int, thetas, dist: BoundedDistribution, seed=0) -> np.ndarray:
    """Dense ``Xi / sqrt(n) + sum_i theta_i e_i e_i^T`` with a full Wigner ``Xi``."""
    thetas = list(thetas)
    if len(thetas) > n:
        raise ValueError("deformation rank exceeds n")
    if abs(dist.mean) > 1e-12:
        raise ValueError("the Wigner part needs a centered atom")
    rng = _as_rng(seed)
    iu = np.triu_indices(n)
    vals = dist.sample(rng, iu[0].size) / math.sqrt(n)
    a = np.zeros((n, n))
    a[iu] = vals
    a = a + np.triu(a, 1).T
    for r, theta in enumerate(thetas):
        a[r, r] += theta
    return a
