"""Encoding of closed paths into the data structure <v, H, A, B, C, W, BC>.

``H`` is the up/down diagram, ``A`` marks steps next to special cycle
vertices, ``B`` marks visits to heavy vertices, ``C`` marks cycle edges of
multiplicity other than two, ``W`` stores a local index for each step and
``BC`` assigns a majorizer to selected heavy visits. Together with the start
vertex the first six components determine the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .graphcomb import Graph, PathReplay, edge_key, graph_from_matrix
from .majorizers import Majorizer, dominates
from .sampler import SparseSymMatrix


class TiedEntriesError(ValueError):
    """A row has two nonzero entries of equal magnitude."""


class MatrixContext:
    """Per-matrix tables shared by every path encoded against it.

    Holds each vertex's neighbors ranked by ``|mu|`` (the simple local index),
    the heavy-vertex mask under ``y`` and the ranking restricted to heavy
    neighbors. Rows with tied magnitudes are rejected because every local
    index would be ambiguous.
    """

    def __init__(self, m, y: Majorizer, net):
        if isinstance(m, SparseSymMatrix):
            csr = m.csr
        elif sp.issparse(m):
            csr = sp.csr_matrix(m)
        else:
            csr = sp.csr_matrix(np.asarray(m, dtype=np.float64))
        csr = csr.copy()
        csr.setdiag(0)
        csr.eliminate_zeros()
        csr.sort_indices()
        self.csr = csr
        self.y = y
        self.net = net
        self.n = csr.shape[0]
        self.graph = graph_from_matrix(csr)
        self.weight = {}
        self.s_ind = []
        self.row_sq = []
        for u in range(self.n):
            lo, hi = csr.indptr[u], csr.indptr[u + 1]
            cols = csr.indices[lo:hi]
            vals = csr.data[lo:hi]
            mags = np.abs(vals)
            if np.unique(mags).size != mags.size:
                raise TiedEntriesError(f"row {u} has tied entry magnitudes")
            order = np.argsort(-mags, kind="stable")
            self.s_ind.append({int(cols[i]): r + 1 for r, i in enumerate(order)})
            for c, v in zip(cols, vals):
                self.weight[(u, int(c))] = float(v)
            self.row_sq.append(vals * vals)
        self.heavy = np.array([not dominates(y, rs) for rs in self.row_sq], dtype=bool)
        self.hv_ind = []
        for u in range(self.n):
            ranked = sorted(self.s_ind[u], key=self.s_ind[u].get)
            hv = [w for w in ranked if self.heavy[w]]
            self.hv_ind.append({w: r + 1 for r, w in enumerate(hv)})
        self._bc = {}

    def mag(self, u, v):
        return abs(self.weight[(u, v)])

    def bc(self, v) -> Majorizer:
        """Majorizer the classifier assigns to the squared row of ``v`` (cached)."""
        if v not in self._bc:
            self._bc[v] = self.net.classify(self.row_sq[v])
        return self._bc[v]


@dataclass
class PathDataStructure:
    v: int
    H: tuple
    A: frozenset
    B: frozenset
    C: frozenset
    W: tuple
    BC: dict = field(default_factory=dict)
    V: frozenset = frozenset()
    up: tuple = ()
    extra_bc: dict = field(default_factory=dict)

    @property
    def length(self):
        return len(self.H) - 1

    def reduced(self):
        return (self.v, self.H, tuple(sorted(self.A)), tuple(sorted(self.B)),
                tuple(sorted(self.C)), self.W)

    def up_times(self, times):
        return {t for t in times if t == 0 or self.up[t]}

    def down_times(self, times):
        return {t for t in times if t >= 1 and not self.up[t]}

    def dumps(self):
        def csv(xs):
            return ",".join(str(x) for x in xs)
        return "|".join([str(self.v), csv(self.H), csv(sorted(self.A)), csv(sorted(self.B)),
                         csv(sorted(self.C)), csv(self.W)])


def build_diagram(path, replay: PathReplay | None = None) -> tuple:
    """Heights ``H(0..L)``: new edges and first-direction tree edges go up, the rest down."""
    rp = replay or PathReplay(path)
    h = [0]
    seen = set()
    for t in range(1, rp.length + 1):
        e = rp.step_edge[t]
        if e not in seen:
            seen.add(e)
            h.append(h[-1] + 1)
        elif e in rp.cycle_edges:
            h.append(h[-1] - 1)
        elif rp.uncov[e] == (rp.path[t - 1], rp.path[t]):
            h.append(h[-1] + 1)
        else:
            h.append(h[-1] - 1)
    return tuple(h)


def encode(path, m, y: Majorizer = None, net=None, context: MatrixContext | None = None
           ) -> PathDataStructure:
    """Data structure of a closed path on the graph of ``m``."""
    ctx = context or MatrixContext(m, y, net)
    rp = PathReplay(path, ctx.graph)
    p = rp.path
    L = rp.length
    if L % 2 or p[0] != p[-1]:
        raise ValueError("expected a closed path of even length")
    H = build_diagram(p, rp)
    up = (False,) + tuple(H[t] > H[t - 1] for t in range(1, L + 1))
    special = rp.is_special_by
    C = frozenset(rp.cycle_times)
    A = frozenset(t for t in range(1, L + 1)
                  if (not up[t] and special(p[t - 1], t - 1))
                  or (up[t] and special(p[t], t - 1)))
    B = frozenset(t for t in range(L + 1) if ctx.heavy[p[t]])

    W = []
    for t in range(1, L + 1):
        u, w = p[t - 1], p[t]
        e = rp.step_edge[t]
        cyc_early = e in rp.cycle_edges and rp.edge_discovery[e] <= t - 1
        if ((t in A or t in C) and cyc_early) or special(w, t - 1):
            W.append(-_cycle_index(rp, ctx, u, w, t))
        elif t in A:
            # cycle indices start at 1, so 0 never collides with a negated one
            W.append(0)
        elif t in B and up[t]:
            W.append(ctx.hv_ind[u][w])
        elif up[t]:
            W.append(ctx.s_ind[u][w])
        else:
            W.append(1)

    b_down = {t for t in B if t >= 1 and not up[t]}
    b_up = B - b_down
    marked = A | b_up | C
    V = set()
    for t in sorted(b_down - A - C):
        s_t = max(t2 for t2 in B if t2 < t)
        if H[s_t] != H[t] or any(s_t <= x <= t for x in marked):
            V.add(t)
    BC = {t: ctx.bc(p[t]) for t in sorted(b_up | V)}
    extra = {}
    for t in range(1, L + 1):
        prev = t - 1
        if up[t] and prev in B and t not in A | B | C and prev in b_down and prev in A | C:
            extra[prev] = ctx.bc(p[prev])
    return PathDataStructure(p[0], H, A, B, C, tuple(W), BC, frozenset(V), up, extra)


def _cycle_index(rp: PathReplay, ctx: MatrixContext, u, w, t):
    ref = ctx.mag(u, w)
    rank = 0
    for y in rp.adj[u]:
        e = edge_key(u, y)
        inside = (e in rp.cycle_edges and rp.edge_discovery[e] <= t - 1) or rp.is_special_by(y, t - 1)
        if inside and ctx.mag(u, y) >= ref:
            rank += 1
    return rank


def path_weight(path, m) -> float:
    """Product of the matrix entries along the path."""
    if isinstance(m, MatrixContext):
        return math.prod(m.weight.get((path[t - 1], path[t]), 0.0) for t in range(1, len(path)))
    if isinstance(m, SparseSymMatrix):
        a = m.csr
    else:
        a = sp.csr_matrix(np.asarray(m, dtype=np.float64)) if not sp.issparse(m) else m.tocsr()
    return math.prod(float(a[path[t - 1], path[t]]) for t in range(1, len(path)))


def _f(ds: PathDataStructure, s):
    b_up = ds.up_times(ds.B)
    if s in ds.A or s in b_up or s in ds.C:
        return s
    earlier = [x for x in ds.V if 1 <= x <= s]
    return max(earlier) if earlier else None


def structure_weight_bound(ds: PathDataStructure, y: Majorizer, h: float) -> float:
    """Product bound on ``|Psi|`` read off the data structure alone.

    ``sqrt(h)`` per step in C; ``h`` per up-step in (A or B) outside C; for the
    remaining up-steps, the ``W(t)``-th coordinate of the majorizer of the
    previous vertex (from BC when that vertex is heavy, else ``y``). Down-steps
    outside C contribute nothing since their edges were already paid for
    squared on the matching up-steps. When the previous heavy visit is a
    down-step inside A or C it has no BC entry; the classifier output stored
    in ``extra_bc`` is used instead.
    """
    bound = 1.0
    union = ds.A | ds.B | ds.C
    for t in range(1, ds.length + 1):
        if t in ds.C:
            bound *= math.sqrt(h)
        elif not ds.up[t]:
            continue
        elif t in ds.A or t in ds.B:
            bound *= h
        elif t - 1 in ds.B:
            s = _f(ds, t - 1)
            maj = None if s is None else ds.BC.get(s, ds.extra_bc.get(s))
            if maj is None:
                raise ValueError(f"no majorizer available for the step at time {t}")
            bound *= maj[ds.W[t - 1]]
        else:
            bound *= y[ds.W[t - 1]]
    return bound


def verify_structure_props(path, ds: PathDataStructure, replay: PathReplay | None = None) -> dict:
    """Check the exact structural statements; returns ``{name: [witnesses]}``, empty on success."""
    rp = replay or PathReplay(path)
    p, H, L = rp.path, ds.H, ds.length
    out = {"above_B_point": [], "nb_levels": [], "V_size": [], "V_nonempty": [],
           "V_same_vertex": [], "up_down_total": [], "up_count": []}
    ac = ds.A | ds.C
    for t in range(L + 1):
        low = H[t]
        hit_ac = False
        for t2 in range(t + 1, L + 1):
            if t2 in ac:
                hit_ac = True
            low = min(low, H[t2])
            if hit_ac or low < H[t]:
                break
            if H[t2] == H[t] and p[t] != p[t2]:
                out["above_B_point"].append((t, t2))

    b_up = ds.up_times(ds.B)
    b_prime = [t for t in ds.B if t < L and H[t + 1] < H[t]]
    c_down = ds.down_times(ds.C)
    if len(b_prime) > 3 * len(c_down) + len(b_up) + 1:
        out["nb_levels"].append((len(b_prime), len(c_down), len(b_up)))

    if len(ds.V) > 5 * len(ds.A | b_up | ds.C) + 1:
        out["V_size"].append((len(ds.V), len(ds.A | b_up | ds.C)))
    for t in sorted(ds.down_times(ds.B) - ds.A - ds.C):
        earlier = [x for x in ds.V if 1 <= x <= t]
        if not earlier:
            out["V_nonempty"].append(t)
        elif p[max(earlier)] != p[t]:
            out["V_same_vertex"].append((max(earlier), t))

    ups, downs = {}, {}
    for t in range(1, L + 1):
        e = rp.step_edge[t]
        tab = ups if ds.up[t] else downs
        tab[e] = tab.get(e, 0) + 1
    for e in rp.uncov:
        if e not in rp.cycle_edges and ups.get(e, 0) != downs.get(e, 0):
            out["up_down_total"].append(e)
    total_up = sum(ds.up[1:])
    c_up = ds.up_times(ds.C)
    if 2 * total_up != L + len(c_up) - len(c_down):
        out["up_count"].append((total_up, len(c_up), len(c_down)))
    return out


def up_minus_down_excess(ds: PathDataStructure) -> int:
    """``|A_down minus C| - |A_up minus C|``, logged as a diagnostic only."""
    return len(ds.down_times(ds.A) - ds.C) - len(ds.up_times(ds.A) - ds.C)


@dataclass
class InjectivityReport:
    count: int
    collisions: list

    @property
    def ok(self):
        return not self.collisions


def check_injectivity(paths, m, y=None, net=None, context=None) -> InjectivityReport:
    """Encode every path and report pairs that share a reduced structure."""
    ctx = context or MatrixContext(m, y, net)
    seen = {}
    collisions = []
    count = 0
    for path in paths:
        key = encode(path, None, context=ctx).reduced()
        tp = tuple(int(v) for v in path)
        count += 1
        if key in seen and seen[key] != tp:
            collisions.append((seen[key], tp))
        else:
            seen.setdefault(key, tp)
    return InjectivityReport(count, collisions)


def closed_paths(g: Graph, length: int) -> np.ndarray:
    """Every closed walk of the given length, one per row."""
    return kernels.closed_walks(g.to_csr(), length)


def distinct_entry_matrix(g: Graph, rng, h: float = 1.0) -> np.ndarray:
    """Symmetric matrix on ``g`` with entries of pairwise distinct magnitude in ``(0, sqrt(h)]``."""
    edges = g.edges
    mags = np.sqrt(h) * (1.0 - rng.permutation(len(edges)) / (len(edges) + 1.0)) if edges else []
    signs = rng.choice([-1.0, 1.0], size=len(edges))
    a = np.zeros((g.n, g.n))
    for (u, v), mg, sg in zip(edges, mags, signs):
        a[u, v] = a[v, u] = mg * sg
    return a
