"""Row statistics, the outlier predictors, Lambert W0 and a Lanczos eigensolver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import kernels
from .sampler import SeedSpec, SparseSymMatrix

INV_E = math.exp(-1.0)
THRESHOLD_C = 1.0 / math.log(4.0 / math.e)


class NonConvergenceError(RuntimeError):
    """Raised in strict mode when Lanczos runs out of iterations."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class RhoSummary:
    max_row_sq: float
    np: float
    theta: float
    rho: float


@dataclass
class SpectrumResult:
    """Ritz pairs ordered by ``|value|`` descending, then by signed value."""

    eigenvalues: list
    k: int
    matvec_count: int
    converged: bool = True
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.eigenvalues])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r for _, r in self.eigenvalues])


def row_norms_sq(m) -> np.ndarray:
    """Squared Euclidean norm of each row."""
    if isinstance(m, SparseSymMatrix):
        return kernels.row_norms_sq(m.csr)
    if sp.issparse(m):
        return kernels.row_norms_sq(sp.csr_matrix(m))
    a = np.asarray(m, dtype=np.float64)
    return np.einsum("ij,ij->i", a, a)


def rho(max_row_sq: float, np_: float) -> RhoSummary:
    """Outlier location ``theta + np/theta`` with ``theta**2 = max(max_row_sq - np, np)``."""
    if not np_ > 0:
        raise ValueError("np must be positive")
    if max_row_sq < 0:
        raise ValueError("max_row_sq must be non-negative")
    theta = math.sqrt(max(max_row_sq - np_, np_))
    return RhoSummary(float(max_row_sq), float(np_), theta, theta + np_ / theta)


def lambert_w0(z: float) -> float:
    """Principal branch of Lambert W via Halley iteration."""
    z = float(z)
    if z < -INV_E:
        if z < -INV_E - 1e-15:
            raise ValueError(f"lambert_w0 domain is z >= -1/e, got {z}")
        return -1.0
    if z == 0.0:
        return 0.0
    if z < -0.25:
        # branch-point series in p = sqrt(2(ez + 1))
        p = math.sqrt(max(2.0 * (math.e * z + 1.0), 0.0))
        if p < 1e-8:
            return -1.0 + p
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif z < math.e:
        w = math.log1p(z) * (1.0 - math.log1p(math.log1p(z)) / (2.0 + math.log1p(z)))
    else:
        l1 = math.log(z)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    return max(w, -1.0)


def _lambert_arg(n, p):
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    np_ = n * p
    return np_, (math.log(n) - np_) / (math.e * np_)


def predict_max_degree(n: int, p: float) -> float:
    """Max-degree asymptote ``e*np*exp(W0((log n - np)/(e*np)))``."""
    np_, arg = _lambert_arg(n, p)
    return math.e * np_ * math.exp(lambert_w0(arg))


def rho_g_predictor(n: int, p: float) -> float:
    """Outlier location for Erdős–Rényi graphs, with the max degree replaced by its asymptote."""
    np_, _ = _lambert_arg(n, p)
    return rho(predict_max_degree(n, p), np_).rho


def predictor_ratio(c: float) -> float:
    """Limit of ``rho_G / (2 sqrt(np))`` at ``np = c log n``; depends on ``c`` only."""
    if not c > 0:
        raise ValueError("c must be positive")
    g = math.e * math.exp(lambert_w0((1.0 / c - 1.0) / math.e))
    theta_sq = max(g - 1.0, 1.0)
    return (math.sqrt(theta_sq) + 1.0 / math.sqrt(theta_sq)) / 2.0


def bbp_prediction(theta: float) -> float:
    """Limit of the top eigenvalue of a rank-one deformed Wigner matrix."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    return 2.0 if theta <= 1.0 else theta + 1.0 / theta


def _operator(m):
    if isinstance(m, SparseSymMatrix):
        return kernels.make_operator(m.csr), m.n
    if sp.issparse(m):
        csr = sp.csr_matrix(m)
        return kernels.make_operator(csr), csr.shape[0]
    a = np.asarray(m, dtype=np.float64)
    return (lambda x: a @ x), a.shape[0]


def _order(theta):
    return sorted(range(len(theta)), key=lambda i: (-abs(theta[i]), -theta[i]))


def extreme_eigenvalues(m, k: int = 1, tol: float = 1e-8, max_iter: int | None = None,
                        seed: int = 0, strict: bool = False, verify_multiplicity: bool = False,
                        return_vectors: bool = False) -> SpectrumResult:
    """The ``k`` eigenvalues of largest magnitude of a symmetric matrix.

    Lanczos with two-pass classical Gram-Schmidt reorthogonalization against
    the whole basis. Ritz values come from the projection ``Q^T M Q``; both
    spectrum ends are kept and merged by magnitude. A Ritz pair is accepted
    when its true residual ``||M y - theta y||`` is at most ``tol`` times the
    largest Ritz magnitude. When the Krylov space becomes invariant the basis
    is extended with a fresh random direction, which also uncovers repeated
    eigenvalues. ``verify_multiplicity`` forces one such extension after
    convergence and re-checks the answer.
    """
    op, n = _operator(m)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = min(n, max(1000, 4 * k + 40))
    max_iter = min(max_iter, n)
    rng = SeedSpec(seed).generator()

    basis = np.empty((max_iter, n))
    images = np.empty((max_iter, n))
    proj = np.zeros((max_iter, max_iter))
    matvecs = 0
    forced_restart = verify_multiplicity
    previous = None
    best = None

    def fresh(j):
        for _ in range(5):
            v = rng.standard_normal(n)
            for _pass in range(2):
                v -= basis[:j].T @ (basis[:j] @ v)
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                return v / nv
        return None

    q = fresh(0)
    j = 0
    next_check = k
    while True:
        basis[j] = q
        w = op(q)
        matvecs += 1
        images[j] = w
        col = basis[: j + 1] @ w
        proj[: j + 1, j] = col
        proj[j, : j + 1] = col
        r = w - basis[: j + 1].T @ col
        r -= basis[: j + 1].T @ (basis[: j + 1] @ r)
        beta = np.linalg.norm(r)
        j += 1
        scale_est = max(np.abs(col).max(), 1e-300)
        breakdown = beta <= 1e-10 * scale_est
        done_space = j >= max_iter
        if j >= k and (j >= next_check or breakdown or done_space):
            next_check = j + max(5, j // 10)
            best = _ritz(basis[:j], images[:j], proj[:j, :j], k)
            values, res, _ = best
            scale = max(np.abs(values).max(), 1e-300)
            if np.all(res <= tol * scale):
                if forced_restart and j < max_iter:
                    previous = values
                    forced_restart = False
                    breakdown = True
                elif previous is None or np.allclose(values, previous, rtol=0, atol=tol * scale * 10):
                    return _finish(best, k, matvecs, True, return_vectors)
                else:
                    previous = None
        if done_space:
            break
        if breakdown:
            q = fresh(j)
            if q is None:
                break
        else:
            q = r / beta
    if best is None:
        best = _ritz(basis[:j], images[:j], proj[:j, :j], k)
    values, res, _ = best
    scale = max(np.abs(values).max(), 1e-300)
    converged = bool(np.all(res <= tol * scale))
    result = _finish(best, k, matvecs, converged, return_vectors)
    if not converged and strict:
        raise NonConvergenceError(
            f"Lanczos did not converge in {j} steps; worst residual {res.max():.3e}", result)
    return result


def _ritz(basis, images, proj, k):
    theta, s = np.linalg.eigh(proj)
    pick = _order(theta)[:k]
    vals = theta[pick]
    coef = s[:, pick]
    vecs = basis.T @ coef
    res = np.linalg.norm(images.T @ coef - vecs * vals, axis=0)
    return vals, res, vecs


def _finish(best, k, matvecs, converged, return_vectors):
    vals, res, vecs = best
    pairs = [(float(v), float(r)) for v, r in zip(vals, res)]
    return SpectrumResult(pairs, k, matvecs, converged, vecs if return_vectors else None)


def dense_extreme(a, k: int) -> np.ndarray:
    """Reference: the ``k`` largest-magnitude eigenvalues from a dense solve."""
    theta = sla.eigvalsh(np.asarray(a, dtype=np.float64))
    return theta[_order(theta)[:k]]


def seginer_ratio(m, tol: float = 1e-8, seed: int = 0) -> float:
    """Operator norm divided by the largest row norm."""
    top = np.sqrt(row_norms_sq(m).max())
    if top == 0:
        raise ValueError("matrix is zero")
    res = extreme_eigenvalues(m, 1, tol=tol, seed=seed, strict=True)
    return abs(res.values[0]) / top
