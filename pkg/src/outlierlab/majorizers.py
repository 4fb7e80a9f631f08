"""Majorizers of rearranged row profiles.

A majorizer is a non-increasing non-negative vector ``y`` that dominates the
decreasing rearrangement ``x*`` of another vector coordinate by coordinate.
Vectors are stored without trailing zeros; indices past the end read as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampler import BoundedDistribution, SeedSpec

NET_CONSTANT = 8.0
DEFAULT_C1 = 1.0 / 64.0
EPS_FLOOR = 1e-2
_SLACK = 1e-12


def rearranged(x) -> np.ndarray:
    """Decreasing rearrangement of ``|x|`` with trailing zeros dropped."""
    v = np.sort(np.abs(np.asarray(x, dtype=np.float64)))[::-1]
    return v[: np.count_nonzero(v)]


class Majorizer:
    """Non-increasing non-negative vector with implicit zero padding."""

    __slots__ = ("levels",)

    def __init__(self, levels):
        v = np.asarray(levels, dtype=np.float64).ravel()
        if v.size and (np.any(v < 0) or np.any(np.diff(v) > 0)):
            raise ValueError("majorizer levels must be non-negative and non-increasing")
        nz = np.flatnonzero(v)
        self.levels = v[: nz[-1] + 1] if nz.size else v[:0]
        self.levels.setflags(write=False)

    def __len__(self):
        return self.levels.size

    def __getitem__(self, i):
        """1-indexed coordinate, zero beyond the stored length."""
        return float(self.levels[i - 1]) if 1 <= i <= self.levels.size else 0.0

    def __eq__(self, other):
        return isinstance(other, Majorizer) and np.array_equal(self.levels, other.levels)

    def __hash__(self):
        return hash(self.levels.tobytes())

    def __repr__(self):
        return f"Majorizer({np.array2string(self.levels, threshold=12)})"

    @property
    def norm1(self) -> float:
        return float(self.levels.sum())

    def dominates(self, x) -> bool:
        return dominates(self, x)


def dominates(y, x) -> bool:
    """Whether ``y`` is at least the decreasing rearrangement of ``|x|`` entrywise."""
    yl = y.levels if isinstance(y, Majorizer) else np.asarray(y, dtype=np.float64)
    xs = rearranged(x)
    if xs.size > yl.size:
        return False
    return bool(np.all(yl[: xs.size] >= xs))


def is_heavy(row_sq, y: Majorizer) -> bool:
    """A row is heavy when its squared profile is not dominated by ``y``."""
    return not dominates(y, row_sq)


def _in_region(xs, h, gamma, s):
    if xs.size and xs[0] > h * (1 + _SLACK):
        return f"largest entry {xs[0]} exceeds h={h}"
    if xs.sum() > gamma * (1 + _SLACK):
        return f"l1 norm {xs.sum()} exceeds gamma={gamma}"
    if xs.size > s:
        return f"{xs.size} nonzeros exceed s={s}"
    return None


@dataclass(frozen=True)
class NetParams:
    h: float
    gamma: float
    s: int
    eps: float
    c1: float = DEFAULT_C1
    constant: float = NET_CONSTANT


class MajorizerNet:
    """The level/block family covering ``R(h, gamma, s)``.

    Members are not listed: a member is a choice of one level per block,
    non-increasing across blocks, followed by a flat tail of ``s`` copies of
    the threshold ``tau``. Levels are ``h * 2**(-m*e/4)`` with ``e = eps/2``;
    working at half the requested accuracy leaves room for the flat tail so
    that every member has l1 norm at most ``(1 + eps) * gamma``. Block sizes
    start at ``floor(e*gamma/(4h))`` and follow ``2**(c1*e**2*i)*c1*e**2*gamma/h``,
    clipped so no block exceeds ``1 + e/4`` times its predecessor.
    """

    def __init__(self, params: NetParams):
        self.params = params
        h, gamma, s, eps = params.h, params.gamma, params.s, params.eps
        e = eps / 2.0
        self.inner_eps = e
        self.tau = e * gamma / s
        n_levels = max(0, int(math.floor(4.0 * math.log2(h / self.tau) / e + 1e-9))) + 1
        self.levels = h * 2.0 ** (-np.arange(n_levels) * e / 4.0)
        self.levels = self.levels[self.levels >= self.tau * (1 - _SLACK)]
        max_big = int(math.floor(gamma / self.tau + 1e-9))
        sizes = [max(1, int(math.floor(e * gamma / (4.0 * h))))]
        total = sizes[0]
        i = 1
        while total < max_big:
            raw = int(math.floor(2.0 ** (params.c1 * e * e * i) * params.c1 * e * e * gamma / h))
            cap = int(math.floor((1.0 + e / 4.0) * sizes[-1]))
            sizes.append(max(1, min(raw, cap)))
            total += sizes[-1]
            i += 1
        self.block_sizes = np.array(sizes, dtype=np.int64)
        self.block_ends = np.cumsum(self.block_sizes)

    @property
    def tail(self) -> np.ndarray:
        return np.full(self.params.s, self.tau)

    def _level_above(self, value):
        # smallest level >= value; levels are decreasing
        idx = np.searchsorted(-self.levels, -value * (1 + _SLACK), side="right") - 1
        return float(self.levels[max(idx, 0)])

    def classify(self, x) -> Majorizer:
        """Deterministic member dominating ``x``."""
        xs = rearranged(x)
        err = _in_region(xs, self.params.h, self.params.gamma, self.params.s)
        if err:
            raise ValueError(f"vector outside R(h, gamma, s): {err}")
        big = xs[xs >= self.tau]
        parts = []
        start = 0
        for size in self.block_sizes:
            if start >= big.size:
                break
            parts.append(np.full(int(size), self._level_above(big[start])))
            start += int(size)
        parts.append(self.tail)
        return Majorizer(np.concatenate(parts))

    def contains(self, y: Majorizer) -> bool:
        """Whether ``y`` has the shape of a member of this family."""
        v = y.levels
        s, tau = self.params.s, self.tau
        if v.size < s or not np.allclose(v[v.size - s:], tau, rtol=1e-12, atol=0):
            return False
        head = v[: v.size - s]
        if head.size == 0:
            return True
        if head.size not in set(self.block_ends.tolist()):
            return False
        start = 0
        level_set = self.levels
        for size in self.block_sizes:
            if start >= head.size:
                break
            block = head[start:start + int(size)]
            if not np.all(block == block[0]) or not np.any(np.isclose(level_set, block[0], rtol=1e-12)):
                return False
            start += int(size)
        return True

    def max_norm1(self) -> float:
        """Largest l1 norm any member can have for an input in the region."""
        p, e = self.params, self.inner_eps
        return (2.0 ** (e / 4.0) * (1.0 + e / 4.0) + e / 4.0 + e) * p.gamma

    def size_upper(self) -> int:
        """Count of non-increasing level choices over the blocks, an upper bound on the family."""
        n_lev = len(self.levels)
        blocks = len(self.block_sizes)
        return math.comb(n_lev + blocks, blocks)

    def log_size_formula(self) -> float:
        """Natural log of the cardinality formula with the recorded constant."""
        p = self.params
        c = p.constant
        base = c * math.log2(p.h * p.s / (p.eps * p.gamma)) / p.eps
        expo = c * p.eps**-2 * math.log2(p.h / p.eps)
        return expo * math.log(base)

    def dumps(self) -> str:
        p = self.params
        lines = [f"# h={p.h!r} gamma={p.gamma!r} s={p.s} eps={p.eps!r} c1={p.c1!r} C={p.constant!r}",
                 "levels," + ",".join(repr(float(v)) for v in self.levels),
                 "blocks," + ",".join(str(int(b)) for b in self.block_sizes),
                 f"tail,{self.tau!r}"]
        return "\n".join(lines) + "\n"


def build_net(h: float, gamma: float, s: int, eps: float, *, c1: float = DEFAULT_C1,
              constant: float = NET_CONSTANT, strict: bool = True) -> MajorizerNet:
    """Build the covering family for ``R(h, gamma, s)`` at accuracy ``eps``.

    With ``strict`` the hypotheses ``eps in [0.01, 1/2]``, ``eps*gamma/h >= C``
    and ``h*s/(eps*gamma) >= 2`` are enforced.
    """
    if not (h > 0 and gamma > 0 and s >= 1):
        raise ValueError("need h > 0, gamma > 0, s >= 1")
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    if strict:
        if eps < EPS_FLOOR:
            raise ValueError(f"eps={eps} is below the floor {EPS_FLOOR}")
        if eps * gamma / h < constant:
            raise ValueError(f"eps*gamma/h = {eps * gamma / h:.4g} < C = {constant}")
        if h * s / (eps * gamma) < 2:
            raise ValueError(f"h*s/(eps*gamma) = {h * s / (eps * gamma):.4g} < 2")
    return MajorizerNet(NetParams(float(h), float(gamma), int(s), float(eps), c1, constant))


def classify(x, net) -> Majorizer:
    return net.classify(x)


class ExplicitNet:
    """A finite list of majorizers; classification picks the first that dominates."""

    def __init__(self, members):
        self.members = [m if isinstance(m, Majorizer) else Majorizer(m) for m in members]

    def classify(self, x) -> Majorizer:
        for m in self.members:
            if dominates(m, x):
                return m
        raise ValueError("no member of the net dominates the vector")

    def contains(self, y) -> bool:
        return y in self.members


def standard_majorizer(dist: BoundedDistribution, h: float, kappa: float, tau: float) -> Majorizer:
    """Quantile majorizer of ``psi = xi**2``.

    ``h`` for ``i <= tau*kappa``, the ``((kappa-i)/kappa + tau)``-quantile of
    ``psi`` for ``tau*kappa < i <= (1+tau)*kappa``, and 0 afterwards.
    """
    if kappa < 2:
        raise ValueError("kappa must be at least 2")
    if h < 1:
        raise ValueError("h must be at least 1")
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    head = int(math.floor(tau * kappa + 1e-9))
    length = int(math.floor((1 + tau) * kappa + 1e-9))
    i = np.arange(head + 1, length + 1, dtype=np.float64)
    a = np.clip((kappa - i) / kappa + tau, 0.0, 1.0)
    q = np.minimum(np.asarray(dist.quantile_sq(a), dtype=np.float64), h)
    return Majorizer(np.concatenate([np.full(head, float(h)), q]))


def bound_y_bracket(y: Majorizer, h: float, kappa: float, tau: float):
    """``(lower, value, upper)`` for the l1 norm of a standard majorizer."""
    return kappa - h, y.norm1, kappa + (1 + tau * kappa) * h


def prob_heavy_frequency(dist: BoundedDistribution, h: float, kappa: float, tau: float,
                         n: int, trials: int, seed: int = 0) -> float:
    """Fraction of padded sparse rows dominated by the standard majorizer.

    A row has ``n - floor(tau*kappa/2)`` entries ``b*psi`` with
    ``b ~ Bern(kappa/(n-1))``, padded with ``floor(tau*kappa/2)`` copies of ``h``.
    """
    y = standard_majorizer(dist, h, kappa, tau)
    pad = int(math.floor(tau * kappa / 2))
    rng = SeedSpec(seed).generator()
    hits = 0
    for _ in range(trials):
        m = int(rng.binomial(n - pad, kappa / (n - 1)))
        psi = dist.sample(rng, m) ** 2
        if dominates(y, np.concatenate([np.full(pad, float(h)), psi])):
            hits += 1
    return hits / trials


def heavy_vertices(m, y: Majorizer) -> np.ndarray:
    """Boolean mask of rows of a ``SparseSymMatrix`` not dominated by ``y``."""
    csr = m.csr
    out = np.zeros(csr.shape[0], dtype=bool)
    for i in range(csr.shape[0]):
        out[i] = is_heavy(csr.data[csr.indptr[i]:csr.indptr[i + 1]] ** 2, y)
    return out


def max_heavy_neighbors(m, y: Majorizer) -> int:
    """Largest number of heavy neighbors over all vertices."""
    heavy = heavy_vertices(m, y).astype(np.int64)
    pattern = m.csr.copy()
    pattern.data = np.ones_like(pattern.data)
    counts = pattern @ heavy
    return int(counts.max()) if counts.size else 0
