"""Exhaustive check of the row-norm cancellation identity on tiny matrices.

For a symmetric zero-diagonal matrix with independent centered bounded
entries, let ``E_r`` be the event that every squared row norm is at most ``r``.
For a set ``S`` of pairwise disjoint couples, each used exactly once in the
multiset ``E``, let ``E_S`` require
``max(|row_i|^2, |row_j|^2) >= r + xi_ij^2 - h`` for every ``{i, j}`` in ``S``.
Then ``E[prod_E xi * 1{E_r}] = E[prod_E xi * 1{E_S and E_r}]``. Both sides are
computed here by summing over every assignment of a finite-support law.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

ATOMS = {
    "rademacher": ((-1.0, 1.0), (0.5, 0.5)),
    "lazy": ((-1.0, 0.0, 1.0), (0.25, 0.5, 0.25)),
    "skewed": ((-2.0, 1.0), (1.0 / 3.0, 2.0 / 3.0)),
}
MAX_ASSIGNMENTS = 3**10


@dataclass
class PrecancelInstance:
    n: int
    atoms: dict
    edges: list
    s: list
    r: float

    @property
    def h(self) -> float:
        return max(max(v * v for v in vals) for vals, _ in self.atoms.values())


@dataclass
class PrecancelResult:
    lhs: float
    rhs: float
    prob_event: float
    prob_cut: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def _pairs(n):
    return list(itertools.combinations(range(n), 2))


def validate(inst: PrecancelInstance):
    pairs = set(_pairs(inst.n))
    mult = Counter(tuple(sorted(e)) for e in inst.edges)
    if any(e not in pairs for e in mult):
        raise ValueError("edges must be couples of distinct vertices")
    seen = set()
    for e in inst.s:
        e = tuple(sorted(e))
        if seen & set(e):
            raise ValueError("couples in S must be pairwise disjoint")
        seen |= set(e)
        if mult.get(e, 0) != 1:
            raise ValueError(f"couple {e} must appear in E exactly once")
    for vals, probs in inst.atoms.values():
        if abs(math.fsum(v * p for v, p in zip(vals, probs))) > 1e-15:
            raise ValueError("entries must be centered")


def expectations(inst: PrecancelInstance) -> PrecancelResult:
    """Both sides of the identity, by summation over all assignments."""
    validate(inst)
    pairs = _pairs(inst.n)
    laws = [inst.atoms[p] for p in pairs]
    total = math.prod(len(v) for v, _ in laws)
    if total > MAX_ASSIGNMENTS:
        raise ValueError(f"{total} assignments exceed the cap {MAX_ASSIGNMENTS}")
    grids = np.meshgrid(*[np.arange(len(v)) for v, _ in laws], indexing="ij")
    idx = [g.ravel() for g in grids]
    vals = np.stack([np.asarray(laws[c][0])[idx[c]] for c in range(len(pairs))], axis=1)
    prob = np.ones(total)
    for c in range(len(pairs)):
        prob *= np.asarray(laws[c][1])[idx[c]]
    col = {p: c for c, p in enumerate(pairs)}
    sq = vals * vals
    rows = np.zeros((total, inst.n))
    for (i, j), c in col.items():
        rows[:, i] += sq[:, c]
        rows[:, j] += sq[:, c]
    event = np.all(rows <= inst.r, axis=1)
    event_s = np.ones(total, dtype=bool)
    h = inst.h
    for e in inst.s:
        i, j = sorted(e)
        c = col[(i, j)]
        event_s &= np.maximum(rows[:, i], rows[:, j]) >= inst.r + sq[:, c] - h
    prod = np.ones(total)
    for e in inst.edges:
        prod *= vals[:, col[tuple(sorted(e))]]
    lhs = math.fsum((prob * prod)[event])
    rhs = math.fsum((prob * prod)[event & event_s])
    return PrecancelResult(lhs, rhs, math.fsum(prob[event]), math.fsum(prob[event & ~event_s]))


def _closed_walk(rng, n, length):
    while True:
        walk = [int(rng.integers(n))]
        for _ in range(length - 1):
            nxt = int(rng.integers(n - 1))
            walk.append(nxt + (nxt >= walk[-1]))
        if walk[-1] != walk[0]:
            walk.append(walk[0])
            return walk


def random_instance(rng, kinds=("rademacher", "lazy", "skewed"), skew="skewed",
                    nontrivial: bool = False) -> PrecancelInstance:
    """Random ``n <= 5`` instance with a nonempty ``S`` and ``P(E_r) > 0``.

    With ``nontrivial`` the instance must also have a nonzero left side and
    an ``E_S`` that removes positive mass from ``E_r``.
    """
    while True:
        n = int(rng.integers(3, 6))
        pairs = _pairs(n)
        walk = _closed_walk(rng, n, int(rng.choice([4, 6, 8])))
        edges = [tuple(sorted(e)) for e in zip(walk, walk[1:])]
        # symmetric laws on path edges make both sides vanish, so favour the skewed one
        kinds_here = [skew if p in edges and skew in kinds and rng.random() < 0.7
                      else kinds[int(rng.integers(len(kinds)))] for p in pairs]
        if math.prod(len(ATOMS[k][0]) for k in kinds_here) > MAX_ASSIGNMENTS:
            continue
        atoms = {p: ATOMS[k] for p, k in zip(pairs, kinds_here)}
        mult = Counter(edges)
        singles = [e for e in sorted(mult) if mult[e] == 1]
        rng.shuffle(singles)
        s, used = [], set()
        for e in singles:
            if not used & set(e) and rng.random() < 0.8:
                s.append(e)
                used |= set(e)
        if not s:
            continue
        h = max(max(v * v for v in atoms[p][0]) for p in pairs)
        r = float(rng.uniform(0.5, (n - 1) * h))
        inst = PrecancelInstance(n, atoms, edges, s, r)
        res = expectations(inst)
        if res.prob_event > 0 and (not nontrivial or (abs(res.lhs) > 1e-12 and res.prob_cut > 0)):
            return inst
