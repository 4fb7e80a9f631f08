"""Monte Carlo experiments and their CSV output.

Every trial derives its own random stream from ``(master_seed, key)`` where
the key depends only on the grid value and the trial number, so results do
not depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
import scipy.linalg as sla

from .. import lowerbound, spectral
from ..sampler import SeedSpec, make_distribution, sample_deformed_wigner, sample_erdos_renyi, sample_sparse_wigner
from .config import ExperimentConfig

SCHEMA = 1


def trial_key(value: float, trial: int) -> int:
    """Stream index for a trial at grid value ``value``."""
    return int(round(value * 1000)) * 1_000_000 + trial


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(rows, columns, experiment, path=None) -> str:
    """Render rows as CSV with a schema comment; also write to ``path`` when given."""
    buf = io.StringIO()
    buf.write(f"#schema={SCHEMA} experiment={experiment}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(getattr(row, c) if not isinstance(row, dict) else row[c]) for c in columns) + "\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path):
    """Parse a CSV written by ``write_csv`` into ``(experiment, columns, rows)``."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith(f"#schema={SCHEMA}"):
        raise ValueError("missing or unsupported schema header")
    head = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    if len(lines) < 2:
        raise ValueError("no column header")
    columns = lines[1].split(",")
    rows = []
    for ln in lines[2:]:
        parts = ln.split(",")
        if len(parts) != len(columns):
            raise ValueError(f"row has {len(parts)} fields, expected {len(columns)}")
        rows.append(dict(zip(columns, parts)))
    return head.get("experiment"), columns, rows


def _map(fn, tasks, workers):
    if workers <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


@dataclass
class SweepRow:
    c: float
    n: int
    trial: int
    lambda_abs_k: float
    two_sqrt_np: float
    rho: float
    rho_g_pred: float
    max_row_norm: float
    max_degree: int
    norm: float
    converged: bool


SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


def sweep_trial(c, trial, n, k, tol, centered, dist_name, master_seed):
    p = c * math.log(n) / n
    seed = SeedSpec(master_seed, trial_key(c, trial))
    if centered:
        m = sample_sparse_wigner(n, p, make_distribution(dist_name), seed=seed)
    else:
        m = sample_erdos_renyi(n, p, seed)
    res = spectral.extreme_eigenvalues(m, k=k, tol=tol, seed=trial)
    row_sq = spectral.row_norms_sq(m)
    np_ = n * p
    degrees = np.diff(m.csr.indptr)
    return SweepRow(
        c=c, n=n, trial=trial,
        lambda_abs_k=float(abs(res.values[k - 1])),
        two_sqrt_np=2.0 * math.sqrt(np_),
        rho=spectral.rho(float(row_sq.max()), np_).rho,
        rho_g_pred=spectral.rho_g_predictor(n, p),
        max_row_norm=float(math.sqrt(row_sq.max())),
        max_degree=int(degrees.max()),
        norm=float(abs(res.values[0])),
        converged=res.converged,
    )


def run_sweep(cfg: ExperimentConfig):
    """One row per (c, trial): ``|lambda_(|k|)|`` of G(n, c log n / n) and the predictors."""
    tasks = [(c, t, cfg.n, cfg.k, cfg.tol, cfg.centered, cfg.dist, cfg.master_seed)
             for c in cfg.c_grid for t in range(cfg.trials)]
    rows = sorted(_map(sweep_trial, tasks, cfg.workers), key=lambda r: (r.c, r.trial))
    text = write_csv(rows, SWEEP_COLUMNS, "sweep", cfg.out_path)
    return rows, text


def sweep_violations(rows):
    """Rows breaking ``rho >= max(max_row_norm, 2 sqrt(np))`` or ``max_row_norm <= ||W||``."""
    bad = []
    for r in rows:
        slack = 1e-9 * max(1.0, r.rho)
        if r.rho < r.max_row_norm - slack or r.rho < r.two_sqrt_np - slack:
            bad.append(r)
        elif r.converged and r.max_row_norm > r.norm * (1 + 1e-7):
            bad.append(r)
    return bad


def median_ratio(rows, c):
    vals = [r.lambda_abs_k / r.two_sqrt_np for r in rows if r.c == c]
    return float(np.median(vals))


@dataclass
class PhaseReport:
    c_grid: tuple
    eps: float
    outlier_fraction: tuple
    median_ratio: tuple
    predictor: tuple
    crossing: float
    threshold: float = spectral.THRESHOLD_C


def outlier_crossing(c_grid, fractions, level=0.5):
    """First ``c`` where the outlier fraction falls to ``level``, interpolated linearly."""
    if fractions[0] < level:
        return float(c_grid[0])
    for (c0, f0), (c1, f1) in zip(zip(c_grid, fractions), zip(c_grid[1:], fractions[1:])):
        if f1 < level <= f0:
            return float(c0 + (f0 - level) / (f0 - f1) * (c1 - c0))
    return float("inf")


def run_phase_check(cfg: ExperimentConfig, rows=None):
    """Outlier fraction ``P(|lambda_(|k|)| > (1 + eps) 2 sqrt(np))`` per ``c``, and the predictor curve."""
    if rows is None:
        rows, _ = run_sweep(cfg)
    fracs, meds = [], []
    for c in cfg.c_grid:
        sel = [r for r in rows if r.c == c]
        fracs.append(sum(r.lambda_abs_k > (1 + cfg.eps) * r.two_sqrt_np for r in sel) / len(sel))
        meds.append(median_ratio(rows, c))
    pred = tuple(spectral.predictor_ratio(c) for c in cfg.c_grid)
    return PhaseReport(tuple(cfg.c_grid), cfg.eps, tuple(fracs), tuple(meds), pred,
                       outlier_crossing(cfg.c_grid, fracs))


def format_phase(rep: PhaseReport) -> str:
    lines = [f"{'c':>8} {'outlier_frac':>13} {'median_ratio':>13} {'predictor':>10}"]
    for c, f, m, p in zip(rep.c_grid, rep.outlier_fraction, rep.median_ratio, rep.predictor):
        lines.append(f"{c:8.4g} {f:13.3f} {m:13.4f} {p:10.4f}")
    lines.append(f"empirical crossing {rep.crossing:.4g} vs threshold {rep.threshold:.4f} (eps={rep.eps})")
    return "\n".join(lines)


@dataclass
class SeginerRow:
    c: float
    n: int
    trial: int
    norm: float
    max_row_norm: float
    ratio: float
    converged: bool


SEGINER_COLUMNS = tuple(f.name for f in fields(SeginerRow))
SEGINER_GRID = (0.3, 0.5, 1.0, 2.0, 4.0, 8.0)


def seginer_trial(c, trial, n, tol, dist_name, master_seed):
    p = c * math.log(n) / n
    m = sample_sparse_wigner(n, p, make_distribution(dist_name), seed=SeedSpec(master_seed, trial_key(c, trial)))
    res = spectral.extreme_eigenvalues(m, k=1, tol=tol, seed=trial)
    top = float(math.sqrt(spectral.row_norms_sq(m).max()))
    norm = float(abs(res.values[0]))
    return SeginerRow(c, n, trial, norm, top, norm / top, res.converged)


def run_seginer(cfg: ExperimentConfig):
    """``||W|| / max_i ||row_i||`` for centered sparse Wigner matrices."""
    tasks = [(c, t, cfg.n, cfg.tol, cfg.dist, cfg.master_seed) for c in cfg.c_grid for t in range(cfg.trials)]
    rows = sorted(_map(seginer_trial, tasks, cfg.workers), key=lambda r: (r.c, r.trial))
    return rows, write_csv(rows, SEGINER_COLUMNS, "seginer", cfg.out_path)


@dataclass
class BBPRow:
    theta: float
    n: int
    trial: int
    lambda1: float
    prediction: float


BBP_COLUMNS = tuple(f.name for f in fields(BBPRow))


def bbp_trial(theta, trial, n, dist_name, master_seed):
    a = sample_deformed_wigner(n, [theta], make_distribution(dist_name), seed=SeedSpec(master_seed, trial_key(theta, trial)))
    top = float(sla.eigvalsh(a, subset_by_index=[n - 1, n - 1])[0])
    return BBPRow(theta, n, trial, top, spectral.bbp_prediction(theta))


def run_bbp(cfg: ExperimentConfig):
    """Top eigenvalue of a rank-one deformed Wigner matrix against ``theta + 1/theta``."""
    tasks = [(th, t, cfg.n, cfg.dist, cfg.master_seed) for th in cfg.thetas for t in range(cfg.trials)]
    rows = sorted(_map(bbp_trial, tasks, cfg.workers), key=lambda r: (r.theta, r.trial))
    return rows, write_csv(rows, BBP_COLUMNS, "bbp", cfg.out_path)


def bbp_medians(rows):
    out = {}
    for th in sorted({r.theta for r in rows}):
        out[th] = float(np.median([r.lambda1 for r in rows if r.theta == th]))
    return out


@dataclass
class LowerBoundRow:
    c: float
    trial: int
    k: int
    root: int
    depth: int
    row_norm_sq: float
    d_tilde: float
    rayleigh: float
    lambda_k: float
    ok: bool
    regime: str
    target: float


LOWERBOUND_COLUMNS = tuple(f.name for f in fields(LowerBoundRow))


def lowerbound_trial(c, trial, n, k, q, tol, master_seed, delta=0.1):
    """Certificates on G(n, c log n / n) compared with ``|lambda_(|k|)|``."""
    p = c * math.log(n) / n
    m = sample_erdos_renyi(n, p, SeedSpec(master_seed, trial_key(c, trial)))
    np_ = n * p
    certs = lowerbound.lower_bound_certificate(m, k, q, (1 + delta) * np_, require_proper=False, np_=np_)
    if not certs:
        return []
    lowerbound.attach_spectrum(m, certs, tol=tol, seed=trial)
    return [LowerBoundRow(c, trial, k, ct.root, ct.depth, ct.row_norm_sq, ct.d_tilde, ct.rayleigh,
                          ct.lambda_k, lowerbound.interlacing_holds(certs), ct.regime, ct.target) for ct in certs]


def run_lowerbound(cfg: ExperimentConfig):
    tasks = [(c, t, cfg.n, cfg.k, cfg.q, cfg.tol, cfg.master_seed) for c in cfg.c_grid for t in range(cfg.trials)]
    rows = [r for batch in _map(lowerbound_trial, tasks, cfg.workers) for r in batch]
    rows.sort(key=lambda r: (r.c, r.trial, r.root))
    return rows, write_csv(rows, LOWERBOUND_COLUMNS, "lowerbound_demo", cfg.out_path)


def rows_as_dicts(rows):
    return [asdict(r) for r in rows]
