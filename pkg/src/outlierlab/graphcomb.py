"""Graph structure on small graphs and on the graphs traced by closed paths.

Covers separated nets, tangle-freeness, bridges and cycle edges, the replay of
a path that yields uncovering directions and special cycle vertices, cycle
intervals, and the edge-removal check.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .sampler import SparseSymMatrix


class LemmaViolation(AssertionError):
    """A combinatorial statement that should always hold was found false."""


def edge_key(u, v):
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple undirected graph with sorted neighbor lists."""

    def __init__(self, n, edges=()):
        self.n = int(n)
        nbrs = [set() for _ in range(self.n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError("self-loops are not allowed")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.adj = [sorted(s) for s in nbrs]

    @property
    def edges(self):
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    @property
    def num_edges(self):
        return sum(len(a) for a in self.adj) // 2

    def degree(self, v):
        return len(self.adj[v])

    def has_edge(self, u, v):
        a = self.adj[u]
        i = np.searchsorted(a, v)
        return i < len(a) and a[i] == v

    def to_csr(self):
        rows = [u for u in range(self.n) for _ in self.adj[u]]
        cols = [v for u in range(self.n) for v in self.adj[u]]
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def dumps(self):
        return "\n".join([f"n {self.n}"] + [f"{u} {v}" for u, v in self.edges]) + "\n"

    @classmethod
    def loads(cls, text):
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if len(lines[0]) != 2 or lines[0][0] != "n":
            raise ValueError("bad graph header")
        return cls(int(lines[0][1]), [(int(a), int(b)) for a, b in lines[1:]])

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.num_edges})"


def graph_from_matrix(m) -> Graph:
    """Graph whose edges are the nonzero off-diagonal entries."""
    if isinstance(m, SparseSymMatrix):
        coo = sp.triu(m.csr, 1).tocoo()
    elif sp.issparse(m):
        coo = sp.triu(sp.csr_matrix(m), 1).tocoo()
    else:
        coo = sp.triu(sp.csr_matrix(np.asarray(m, dtype=np.float64)), 1).tocoo()
    keep = coo.data != 0
    return Graph(coo.shape[0], zip(coo.row[keep].tolist(), coo.col[keep].tolist()))


def bfs_distances(g: Graph, source, limit=None):
    """Hop distances from ``source``; ``-1`` for unreached (or beyond ``limit``)."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    order = [source]
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if limit is not None and dist[u] >= limit:
            continue
        for w in g.adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                order.append(w)
                queue.append(w)
    return dist, order


def is_connected(g: Graph, vertices=None) -> bool:
    if g.n == 0:
        return True
    dist, _ = bfs_distances(g, 0 if vertices is None else next(iter(vertices)))
    if vertices is None:
        return bool(np.all(dist >= 0))
    return all(dist[v] >= 0 for v in vertices)


def max_r_separated(g: Graph, r: int) -> list:
    """Greedy maximal set with pairwise distances above ``r``, scanned in BFS order from 0."""
    if r < 1:
        raise ValueError("r must be at least 1")
    if not is_connected(g):
        raise ValueError("graph must be connected")
    _, order = bfs_distances(g, 0)
    near = np.full(g.n, np.iinfo(np.int64).max, dtype=np.int64)
    chosen = []
    for v in order:
        if near[v] > r:
            chosen.append(v)
            dist, _ = bfs_distances(g, v, limit=r)
            hit = dist >= 0
            near[hit] = np.minimum(near[hit], dist[hit])
    return sorted(chosen)


def is_tangle_free(g: Graph, ell: int) -> bool:
    """Whether every radius-``ell`` ball (induced subgraph) has cyclomatic number at most one."""
    if ell < 1:
        raise ValueError("ell must be at least 1")
    for v in range(g.n):
        dist, order = bfs_distances(g, v, limit=ell)
        inside = dist >= 0
        deg_sum = sum(sum(1 for w in g.adj[u] if inside[w]) for u in order)
        if deg_sum // 2 - len(order) + 1 > 1:
            return False
    return True


def bridges(adj: dict) -> set:
    """Bridges of a graph given as ``{vertex: iterable of neighbors}`` (iterative lowlink)."""
    disc, low = {}, {}
    found = set()
    counter = 0
    for root in adj:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        stack = [(root, None, iter(sorted(adj[root])))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue
                if w in disc:
                    low[u] = min(low[u], disc[w])
                else:
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, u, iter(sorted(adj[w]))))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if parent is not None:
                    low[parent] = min(low[parent], low[u])
                    if low[u] > disc[parent]:
                        found.add(edge_key(parent, u))
    return found


def cycle_edges(g: Graph) -> set:
    """Edges lying on some cycle, i.e. the non-bridges."""
    adj = {v: g.adj[v] for v in range(g.n)}
    return set(g.edges) - bridges(adj)


@dataclass
class SpecialVertexReport:
    """Special cycle vertices with their discovery times."""

    meeting: set = field(default_factory=set)
    splitting: set = field(default_factory=set)
    completion: set = field(default_factory=set)
    discovery: dict = field(default_factory=dict)


class PathReplay:
    """Prefix-by-prefix replay of a path.

    Records, for every traversed edge, its multiplicity, its uncovering
    direction and time, and the first prefix in which it lies on a cycle.
    From these the special cycle vertices, the set of odd-or-triple cycle
    times and the discovery times of cycle edges all follow, because the
    property of being special only grows with the prefix.
    """

    def __init__(self, path, host: Graph | None = None):
        path = [int(v) for v in path]
        if len(path) < 1:
            raise ValueError("path needs at least one vertex")
        self.path = tuple(path)
        self.length = len(path) - 1
        self.step_edge = [None] + [edge_key(path[t - 1], path[t]) for t in range(1, len(path))]
        for t in range(1, len(path)):
            if path[t - 1] == path[t]:
                raise ValueError(f"path stays put at time {t}")
            if host is not None and not host.has_edge(path[t - 1], path[t]):
                raise ValueError(f"step {t} is not an edge of the host graph")

        self.uncov = {}
        self.uncov_time = {}
        self.mult = {}
        self.prefix_cycle_time = {}
        self.cyclomatic = [0] * (self.length + 1)
        self.cycle_jump_times = []
        adj = {path[0]: set()}
        n_edges = 0
        for t in range(1, self.length + 1):
            a, b = path[t - 1], path[t]
            e = self.step_edge[t]
            self.mult[e] = self.mult.get(e, 0) + 1
            if e not in self.uncov:
                self.uncov[e] = (a, b)
                self.uncov_time[e] = t
                closes_cycle = b in adj
                adj[a].add(b)
                adj.setdefault(b, set()).add(a)
                n_edges += 1
                if closes_cycle:
                    br = bridges(adj)
                    for f in self.uncov:
                        if f not in self.prefix_cycle_time and f not in br:
                            self.prefix_cycle_time[f] = t
            self.cyclomatic[t] = n_edges - len(adj) + 1
            if self.cyclomatic[t] > self.cyclomatic[t - 1]:
                self.cycle_jump_times.append(t)

        self.vertices = sorted(adj)
        self.adj = {v: sorted(s) for v, s in adj.items()}
        self.cycle_edges = set(self.prefix_cycle_time)
        self.cycle_times = {t for t in range(1, self.length + 1)
                            if self.step_edge[t] in self.cycle_edges
                            and self.mult[self.step_edge[t]] != 2}
        self.edge_discovery = {}
        for e, t0 in self.prefix_cycle_time.items():
            self.edge_discovery[e] = t0
        for t in sorted(self.cycle_times):
            e = self.step_edge[t]
            if t < self.edge_discovery[e]:
                self.edge_discovery[e] = t
        self._special()

    def _special(self):
        inc = {v: [] for v in self.vertices}
        out = {v: [] for v in self.vertices}
        for e, t0 in self.prefix_cycle_time.items():
            a, b = self.uncov[e]
            inc[a].append(t0)
            inc[b].append(t0)
            out[a].append(t0)
        meet, split, comp = {}, {}, {}
        for v in self.vertices:
            ts = sorted(inc[v])
            if len(ts) >= 3:
                meet[v] = ts[2]
            ts = sorted(out[v])
            if len(ts) >= 2:
                split[v] = ts[1]
        for t in self.cycle_jump_times:
            comp.setdefault(self.path[t], t)
        disc = {}
        for table in (meet, split, comp):
            for v, t in table.items():
                disc[v] = min(disc.get(v, t), t)
        self.meeting_time, self.splitting_time, self.completion_time = meet, split, comp
        self.vertex_discovery = disc

    def is_special_by(self, v, t) -> bool:
        """Whether ``v`` is a special cycle vertex of the prefix graph at time ``t``."""
        d = self.vertex_discovery.get(v)
        return d is not None and d <= t

    def graph(self) -> Graph:
        n = max(self.vertices) + 1
        return Graph(n, self.uncov.keys())

    def report(self) -> SpecialVertexReport:
        d = self.vertex_discovery
        return SpecialVertexReport(
            meeting={(v, d[v]) for v in self.meeting_time},
            splitting={(v, d[v]) for v in self.splitting_time},
            completion={(v, d[v]) for v in self.completion_time},
            discovery=dict(d),
        )


def classify_special_vertices(path, host: Graph | None = None) -> SpecialVertexReport:
    """Meeting, splitting and completion points of the graph traced by ``path``."""
    return PathReplay(path, host).report()


def cycle_intervals(g: Graph, cyc: set | None = None, meeting: set | None = None) -> list:
    """Split the cycle edges into maximal chains whose interior avoids meeting points.

    ``meeting`` defaults to vertices with at least three incident cycle edges.
    Each interval is returned as a list of edges in walking order.
    """
    cyc = cycle_edges(g) if cyc is None else set(cyc)
    cyc_adj = {}
    for u, v in cyc:
        cyc_adj.setdefault(u, []).append(v)
        cyc_adj.setdefault(v, []).append(u)
    for v in cyc_adj:
        cyc_adj[v].sort()
    if meeting is None:
        meeting = {v for v, nb in cyc_adj.items() if len(nb) >= 3}
    used = set()
    out = []

    def walk(start, nxt):
        chain = []
        prev, cur = start, nxt
        while True:
            e = edge_key(prev, cur)
            used.add(e)
            chain.append((prev, cur))
            if cur in meeting or cur == start:
                return chain
            step = [w for w in cyc_adj[cur] if edge_key(cur, w) not in used]
            if not step:
                return chain
            prev, cur = cur, step[0]

    for v in sorted(meeting):
        for w in cyc_adj.get(v, []):
            if edge_key(v, w) not in used:
                out.append(walk(v, w))
    for u, v in sorted(cyc):
        if (u, v) not in used:
            out.append(walk(u, v))
    return out


def find_removable_half(g: Graph, sub_vertices, sub_edges, s_edges, check=True) -> list:
    """A subset of ``s_edges`` of size at least half whose removal keeps ``g`` connected.

    Greedy augmentation first; if that stalls below half, every subset of the
    required size is tried. Exhaustion means the statement failed.
    """
    s_edges = [edge_key(*e) for e in s_edges]
    if len(s_edges) > 20:
        raise ValueError("S is capped at 20 edges")
    sub_vertices = set(sub_vertices)
    sub_edges = {edge_key(*e) for e in sub_edges}
    if check:
        if not is_connected(g):
            raise ValueError("G must be connected")
        if sub_vertices:
            sub = Graph(g.n, sub_edges)
            if not is_connected(sub, sub_vertices):
                raise ValueError("the subgraph must be connected")
        cyc = cycle_edges(g)
        for e in s_edges:
            if e not in cyc:
                raise ValueError(f"{e} is not a cycle edge")
            if e in sub_edges:
                raise ValueError(f"{e} lies in the subgraph")
            if e[0] not in sub_vertices and e[1] not in sub_vertices:
                raise ValueError(f"{e} is not incident to the subgraph")
    need = (len(s_edges) + 1) // 2
    all_edges = set(g.edges)

    def ok(removed):
        return is_connected(Graph(g.n, all_edges - set(removed)))

    chosen = []
    for e in s_edges:
        if ok(chosen + [e]):
            chosen.append(e)
    if len(chosen) >= need:
        return chosen
    for size in range(len(s_edges), need - 1, -1):
        for combo in itertools.combinations(s_edges, size):
            if ok(list(combo)):
                return list(combo)
    raise LemmaViolation(f"no removable half among {len(s_edges)} edges")


def random_connected_graph(n, m, rng) -> Graph:
    """Random spanning tree plus extra uniformly chosen edges, ``m`` edges total."""
    edges = set()
    perm = rng.permutation(n)
    for i in range(1, n):
        edges.add(edge_key(int(perm[i]), int(perm[rng.integers(0, i)])))
    m = min(m, n * (n - 1) // 2)
    while len(edges) < m:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.add(edge_key(int(u), int(v)))
    return Graph(n, edges)
