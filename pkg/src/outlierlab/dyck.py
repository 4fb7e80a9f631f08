"""Exact Dyck-path counting with enumeration oracles.

A Dyck path of semilength ``k`` is a word in ``U``/``D`` with ``k`` of each
whose running height never drops below zero. A return is a visit to height
zero after the start.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

MAX_ENUM_K = 12


def dyck_count_returns(k: int, u: int) -> int:
    """Number of Dyck paths of semilength ``k`` with exactly ``u`` returns."""
    if not 1 <= u <= k:
        raise ValueError("need 1 <= u <= k")
    num = u * math.comb(2 * k - u, k)
    q, r = divmod(num, 2 * k - u)
    assert r == 0
    return q


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def count_returns(word: str) -> int:
    height, returns = 0, 0
    for c in word:
        height += 1 if c == "U" else -1
        if height == 0:
            returns += 1
    return returns


def _words(k):
    out = []

    def rec(prefix, ups, downs):
        if ups == k and downs == k:
            out.append("".join(prefix))
            return
        if ups < k:
            prefix.append("U")
            rec(prefix, ups + 1, downs)
            prefix.pop()
        if downs < ups:
            prefix.append("D")
            rec(prefix, ups, downs + 1)
            prefix.pop()

    rec([], 0, 0)
    return out


def enumerate_dyck(k: int, returns: int | None = None, no_interior_returns: bool = False) -> list:
    """All Dyck words of semilength ``k`` matching the constraints."""
    if not 0 <= k <= MAX_ENUM_K:
        raise ValueError(f"k must lie in [0, {MAX_ENUM_K}]")
    words = _words(k)
    if no_interior_returns:
        returns = 1 if returns is None else returns
        if returns != 1:
            return []
    if returns is not None:
        words = [w for w in words if count_returns(w) == returns]
    return words


def primitive_sequences(s: int, p: int) -> list:
    """Every ``s``-tuple of return-free Dyck words with total semilength ``p``."""
    prim = {j: enumerate_dyck(j, no_interior_returns=True) for j in range(1, p + 1)}
    out = []
    for cut in itertools.combinations(range(1, p), s - 1):
        parts = [b - a for a, b in zip((0,) + cut, cut + (p,))]
        for combo in itertools.product(*(prim[j] for j in parts)):
            out.append(combo)
    return out


def dyck_sequence_bound_check(s: int, p: int):
    """Enumerated count of return-free sequences against ``s/(2p-s) * C(2p-s, p)``."""
    if not 1 <= s <= p <= 10:
        raise ValueError("need 1 <= s <= p <= 10")
    count = len(primitive_sequences(s, p))
    bound = dyck_count_returns(p, s)
    return count, bound, count <= bound


def binomial_sum(p: int, L: float) -> float:
    """``sum_{s=1}^p s/(2p-s) C(2p-s, p) L^s`` by compensated summation."""
    return math.fsum(dyck_count_returns(p, s) * float(L) ** s for s in range(1, p + 1))


def binomial_sum_check(p: int, L: float):
    """The weighted return sum against ``Lt^(2p-1)/(Lt-1)^(p-1)`` with ``Lt = max(L, 2)``."""
    if not L > 1:
        raise ValueError("L must exceed 1")
    if not 1 <= p <= 60:
        raise ValueError("p must lie in [1, 60]")
    lt = max(float(L), 2.0)
    lhs = binomial_sum(p, L)
    rhs = lt ** (2 * p - 1) / (lt - 1.0) ** (p - 1)
    return lhs, rhs, lhs <= rhs


def alpha(p: int, L: float) -> Fraction:
    """``Lt^-p`` times the return sum at ``Lt = max(L, 2)``, exactly."""
    lt = Fraction(max(float(L), 2.0))
    return sum(dyck_count_returns(p, s) * lt ** (s - p) for s in range(1, p + 1))


def alpha_recursion_holds(p: int, L: float) -> bool:
    """``alpha(p+1) <= Lt/(Lt-1) * alpha(p)`` in exact arithmetic."""
    lt = Fraction(max(float(L), 2.0))
    return alpha(p + 1, L) <= lt / (lt - 1) * alpha(p, L)


def beta(m: int, u: int) -> int:
    """``2^m`` for ``u <= 1``; otherwise ``sum_p (u-1)/(2p-u+1) C(2p-u+1, p) 2^(m-2p)``."""
    if m < 0 or u < 0:
        raise ValueError("need m, u >= 0")
    if u <= 1:
        return 2**m
    total = Fraction(0)
    for p in range(u - 1, m // 2 + 1):
        total += Fraction(u - 1, 2 * p - u + 1) * math.comb(2 * p - u + 1, p) * 2 ** (m - 2 * p)
    assert total.denominator == 1
    return int(total)


def toy_norm_bound(d: float, d_tilde: float, k: int):
    """``sum_u N_u d^(k-u) dt^u`` against ``d^k Lt^(2k-1)/(Lt-1)^(k-1)`` with ``Lt = max(dt/d, 2)``."""
    if not d_tilde >= d >= 1:
        raise ValueError("need d_tilde >= d >= 1")
    if not 1 <= k <= 40:
        raise ValueError("k must lie in [1, 40]")
    total = math.fsum(dyck_count_returns(k, u) * float(d) ** (k - u) * float(d_tilde) ** u
                      for u in range(1, k + 1))
    lt = max(d_tilde / d, 2.0)
    closed = float(d) ** k * lt ** (2 * k - 1) / (lt - 1.0) ** (k - 1)
    return total, closed, total <= closed
