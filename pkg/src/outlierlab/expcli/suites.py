"""Exact property suites shared by ``verify`` and the acceptance tests.

Each suite returns a ``SuiteResult``; ``failures`` lists human-readable
witnesses and must be empty on a healthy build.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .. import dyck, graphcomb, lowerbound, majorizers, pathenc
from ..sampler import SeedSpec, make_distribution, sample_erdos_renyi
from . import precancel


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, cond, witness):
        self.checks += 1
        if not cond:
            self.failures.append(witness)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


BINOMIAL_L = (1.1, 1.5, 2.0, 3.0, 10.0)


@_timed
def dyck_suite(max_k: int = 10, catalan_k: int = 30, max_p: int = 40) -> SuiteResult:
    """Return-count formula vs enumeration, Catalan sums, and the inequality grids."""
    res = SuiteResult("dyck")
    for k in range(1, max_k + 1):
        words = dyck.enumerate_dyck(k)
        counts = {}
        for w in words:
            u = dyck.count_returns(w)
            counts[u] = counts.get(u, 0) + 1
        for u in range(1, k + 1):
            res.check(dyck.dyck_count_returns(k, u) == counts.get(u, 0), f"N_u mismatch at k={k}, u={u}")
    for k in range(1, catalan_k + 1):
        total = sum(dyck.dyck_count_returns(k, u) for u in range(1, k + 1))
        res.check(total == dyck.catalan(k), f"Catalan sum fails at k={k}")
    for p in range(1, max_p + 1):
        for L in BINOMIAL_L:
            _, _, ok = dyck.binomial_sum_check(p, L)
            res.check(ok, f"binomial sum bound fails at p={p}, L={L}")
            res.check(dyck.alpha_recursion_holds(p, L), f"alpha recursion fails at p={p}, L={L}")
    for s in range(1, 8):
        for p in range(s, 8):
            _, _, ok = dyck.dyck_sequence_bound_check(s, p)
            res.check(ok, f"sequence bound fails at s={s}, p={p}")
    for k in range(1, 21):
        for d in (1.0, 2.0, 5.0):
            for ratio in (1.0, 1.5, 2.0, 4.0, 10.0):
                _, _, ok = dyck.toy_norm_bound(d, d * ratio, k)
                res.check(ok, f"toy bound fails at d={d}, d_tilde={d * ratio}, k={k}")
    return res


def tangle_free_corpus(count: int, rng, max_edges: int = 12, ell: int = 2):
    """Random connected graphs with at least one cycle that are ``ell``-tangle-free."""
    out = []
    while len(out) < count:
        n = int(rng.integers(5, 11))
        m = int(rng.integers(n, min(max_edges, n * (n - 1) // 2) + 1))
        g = graphcomb.random_connected_graph(n, m, rng)
        if graphcomb.cycle_edges(g) and graphcomb.is_tangle_free(g, ell):
            out.append(g)
    return out


def corpus_context(g, rng):
    """Distinct-entry matrix on ``g`` with a majorizer that makes some vertices heavy."""
    m = pathenc.distinct_entry_matrix(g, rng, h=1.0)
    y = majorizers.Majorizer([0.8, 0.45, 0.2])
    net = majorizers.ExplicitNet([[1.0, 0.6, 0.3, 0.1], [1.0] * max(1, g.n)])
    return m, y, net


@_timed
def pathenc_suite(n_graphs: int = 50, max_len: int = 8, seed: int = 0) -> SuiteResult:
    """Injectivity, structural propositions, the up-count identity and weight domination."""
    res = SuiteResult("pathenc")
    rng = SeedSpec(seed, 2).generator()
    graphs = tangle_free_corpus(n_graphs, rng)
    n_paths = 0
    worst = 0.0
    for gi, g in enumerate(graphs):
        m, y, net = corpus_context(g, rng)
        ctx = pathenc.MatrixContext(m, y, net)
        for length in range(2, max_len + 1, 2):
            paths = pathenc.closed_paths(g, length)
            report = pathenc.check_injectivity(paths, None, context=ctx)
            res.check(report.ok, f"graph {gi} length {length}: collisions {report.collisions[:2]}")
            for path in paths:
                n_paths += 1
                rp = graphcomb.PathReplay(path, ctx.graph)
                ds = pathenc.encode(path, None, context=ctx)
                props = pathenc.verify_structure_props(path, ds, rp)
                for name, witnesses in props.items():
                    res.check(not witnesses, f"graph {gi} path {path.tolist()}: {name} {witnesses[:2]}")
                psi = abs(pathenc.path_weight(path, ctx))
                bound = pathenc.structure_weight_bound(ds, y, 1.0)
                res.check(psi <= bound * (1 + 1e-12), f"graph {gi} path {path.tolist()}: weight {psi} > {bound}")
                if bound > 0:
                    worst = max(worst, psi / bound)
    res.notes.update(graphs=len(graphs), paths=n_paths, worst_weight_ratio=worst)
    return res


def adversarial_region_vectors(rng, h, gamma, s, count):
    """Vectors of ``R(h, gamma, s)``: spikes, plateaus, dyadic staircases and random profiles."""
    out = []
    for i in range(count):
        kind = i % 5
        if kind == 0:
            k = int(rng.integers(1, min(s, int(gamma // h)) + 1))
            x = np.full(k, h)
        elif kind == 1:
            k = int(rng.integers(1, s + 1))
            x = np.full(k, min(h, gamma / k))
        elif kind == 2:
            levels = h * 2.0 ** -np.arange(0, 40)
            x = np.repeat(levels, rng.integers(1, 8, size=levels.size))[:s]
        elif kind == 3:
            k = int(rng.integers(1, s + 1))
            x = rng.dirichlet(np.full(k, rng.uniform(0.05, 2.0))) * gamma
        else:
            # entries straddling the flat-tail threshold
            tau = 0.25 * gamma / s
            x = np.concatenate([rng.uniform(0.5 * tau, 2 * tau, size=int(rng.integers(1, s))), [h]])[:s]
        x = np.minimum(x, h)
        if x.sum() > gamma:
            x *= gamma / x.sum()
        out.append(x)
    return out


NET_PARAMS = ((4.0, 100.0, 50, 0.5), (2.0, 200.0, 400, 0.25), (1.0, 400.0, 1000, 0.1))


@_timed
def majorizer_suite(per_set: int = 1000, seed: int = 0) -> SuiteResult:
    """Net coverage on adversarial vectors and the standard majorizer norm bracket."""
    res = SuiteResult("majorizers")
    rng = SeedSpec(seed, 3).generator()
    for params in NET_PARAMS:
        h, gamma, s, eps = params
        net = majorizers.build_net(h, gamma, s, eps)
        for x in adversarial_region_vectors(rng, h, gamma, s, per_set):
            y = net.classify(x)
            res.check(majorizers.dominates(y, x), f"{params}: member fails to dominate")
            res.check(y.norm1 <= (1 + eps) * gamma * (1 + 1e-12), f"{params}: member norm {y.norm1}")
            res.check(net.contains(y), f"{params}: classified vector is not a member")
    for kind in ("rademacher", "constant_one", "uniform_symmetric"):
        dist = make_distribution(kind)
        for h in (dist.h, 2.0, 4.0):
            h = max(h, dist.h)
            for kappa in (2, 10, 50, 200):
                for tau in (0.1, 0.2, 0.5, 1.0):
                    y = majorizers.standard_majorizer(dist, h, kappa, tau)
                    lo, val, hi = majorizers.bound_y_bracket(y, h, kappa, tau)
                    res.check(lo <= val <= hi, f"bracket fails for {kind}, h={h}, kappa={kappa}, tau={tau}")
    return res


@_timed
def graphcomb_suite(n_graphs: int = 40, seed: int = 0) -> SuiteResult:
    """Separated nets, interval facts, meeting-point edge bound, replay consistency, edge removal."""
    res = SuiteResult("graphcomb")
    rng = SeedSpec(seed, 4).generator()
    for gi in range(n_graphs):
        n = int(rng.integers(4, 14))
        g = graphcomb.random_connected_graph(n, int(rng.integers(n - 1, min(25, n * (n - 1) // 2) + 1)), rng)
        for r in (1, 2, 3):
            net = graphcomb.max_r_separated(g, r)
            dist = {v: graphcomb.bfs_distances(g, v)[0] for v in net}
            res.check(len(net) <= 2 * g.num_edges / r, f"graph {gi}: net of size {len(net)} at r={r}")
            res.check(all(dist[a][b] > r for a in net for b in net if a != b),
                      f"graph {gi}: net not separated at r={r}")
            res.check(all(any(0 <= dist[a][v] <= r for a in net) for v in range(g.n)),
                      f"graph {gi}: net not maximal at r={r}")
        cyc = sorted(graphcomb.cycle_edges(g))
        if cyc:
            tree = {cyc[0][0]}
            s_edges = [e for e in cyc if cyc[0][0] in e][:20]
            half = graphcomb.find_removable_half(g, tree, set(), s_edges)
            res.check(len(half) >= (len(s_edges) + 1) // 2, f"graph {gi}: removable half too small")
    corpus = tangle_free_corpus(max(5, n_graphs // 4), rng, max_edges=12, ell=1)
    for gi, g in enumerate(corpus):
        for length in (6, 8):
            for path in pathenc.closed_paths(g, length)[::7]:
                _path_facts(res, [int(v) for v in path], g, gi)
    return res


def _path_facts(res, path, g, gi):
    rp = graphcomb.PathReplay(path, g)
    rep = rp.report()
    gp = rp.graph()
    cyc = rp.cycle_edges
    meet = {v for v, _ in rep.meeting}
    for chain in graphcomb.cycle_intervals(gp, cyc, meet):
        inner = {b for _, b in chain[:-1]}
        res.check(len(inner & {v for v, _ in rep.splitting}) <= 1, f"graph {gi} {path}: two splitting points")
        res.check(len(inner & {v for v, _ in rep.completion}) <= 1, f"graph {gi} {path}: two completion points")
    ell = 5
    if graphcomb.is_tangle_free(gp, ell):
        for v in meet:
            deg = sum(1 for e in cyc if v in e)
            res.check(deg <= 6 + 16 * len(rp.uncov) / ell, f"graph {gi} {path}: meeting point degree {deg}")
    for t in range(1, len(path)):
        pre = graphcomb.PathReplay(path[: t + 1], g)
        for name in ("meeting_time", "splitting_time", "completion_time"):
            full = {v for v, s in getattr(rp, name).items() if s <= t}
            res.check(set(getattr(pre, name)) == full, f"graph {gi} {path}: {name} prefix mismatch at t={t}")
        full_d = {v: d for v, d in rp.vertex_discovery.items() if d <= t}
        res.check(pre.vertex_discovery == full_d, f"graph {gi} {path}: discovery mismatch at t={t}")


@_timed
def precancel_suite(instances: int = 20, seed: int = 0, tol: float = 1e-12) -> SuiteResult:
    """Exhaustive cancellation identity on random tiny instances."""
    res = SuiteResult("precancel")
    rng = SeedSpec(seed, 5).generator()
    nontrivial = 0
    for i in range(instances):
        inst = precancel.random_instance(rng, nontrivial=i % 2 == 0)
        out = precancel.expectations(inst)
        nontrivial += abs(out.lhs) > 1e-12 and out.prob_cut > 0
        res.check(out.gap <= tol, f"instance {i}: lhs {out.lhs!r} rhs {out.rhs!r}")
    res.notes["nontrivial"] = nontrivial
    return res


INTERLACING_REGIMES = (
    # (c, k, q, blocks): sparse graphs admit separated roots; denser ones use k = 1
    # or a union of independent graphs so that separated roots exist
    (0.3, 2, 3, 1), (0.5, 3, 1, 1), (1.0, 2, 1, 1), (1.0, 3, 1, 1),
    (2.0, 1, 3, 1), (4.0, 1, 1, 1), (2.0, 2, 3, 2), (4.0, 3, 1, 3),
)


def interlacing_trial(c, k, q, blocks, n, seed, trial):
    """Certificates on a (union of) G(n, c log n / n) against ``|lambda_(|k|)|``; ``None`` if no certificate."""
    p = c * math.log(n) / n
    parts = [sample_erdos_renyi(n, p, SeedSpec(seed, 6_000_000 + 16 * trial + b)).csr for b in range(blocks)]
    m = sp.block_diag(parts, format="csr") if blocks > 1 else parts[0]
    certs = lowerbound.lower_bound_certificate(m, k, q, 1.1 * n * p, require_proper=False)
    if not certs:
        return None
    lowerbound.attach_spectrum(m, certs, seed=trial)
    return certs


@_timed
def interlacing_suite(trials: int = 16, seed: int = 0, n: int = 3000) -> SuiteResult:
    """Smallest certificate against ``|lambda_(|k|)|`` across sparsity regimes."""
    res = SuiteResult("interlacing")
    for t in range(trials):
        c, k, q, blocks = INTERLACING_REGIMES[t % len(INTERLACING_REGIMES)]
        certs = interlacing_trial(c, k, q, blocks, n, seed, t)
        if certs is None:
            res.check(False, f"trial {t}: fewer than {k} separated trees (c={c}, q={q})")
            continue
        res.check(lowerbound.interlacing_holds(certs),
                  f"trial {t}: certificate {min(x.rayleigh for x in certs)} > {certs[0].lambda_k}")
    return res


SUITES = {
    "dyck": dyck_suite,
    "pathenc": lambda seed=0: pathenc_suite(n_graphs=8, max_len=6, seed=seed),
    "majorizers": lambda seed=0: majorizer_suite(per_set=200, seed=seed),
    "graphcomb": lambda seed=0: graphcomb_suite(n_graphs=20, seed=seed),
    "precancel": lambda seed=0: precancel_suite(seed=seed),
    "interlacing": lambda seed=0: interlacing_suite(seed=seed),
}


def run_suites(master_seed: int = 0, names=None):
    """Run the named suites (all by default) in a fixed order."""
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites {unknown}")
    out = []
    for name in names:
        fn = SUITES[name]
        out.append(fn(seed=master_seed) if name != "dyck" else fn())
    return out


def format_table(results) -> str:
    lines = [f"{'suite':<12} {'checks':>8} {'failures':>9}  status"]
    for r in results:
        lines.append(f"{r.name:<12} {r.checks:>8} {len(r.failures):>9}  {'ok' if r.ok else 'FAIL'}")
        for w in r.failures[:3]:
            lines.append(f"    {w}")
    return "\n".join(lines)
