"""Command-line entry point.

Exit codes: 0 success, 2 a checked property was falsified, 3 I/O or
configuration error.
"""

from __future__ import annotations

import sys

import click

from ..spectral import bbp_prediction
from . import experiments as ex
from . import suites
from .config import ConfigError, load_config
from .plot import emit_plot

EXIT_OK, EXIT_FALSIFIED, EXIT_IO = 0, 2, 3


class Falsified(Exception):
    pass


def common(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(), default=None, help="key = value file"),
        click.option("--seed", type=int, default=None, help="master seed (u64)"),
        click.option("--n", type=int, default=None),
        click.option("--trials", type=int, default=None),
        click.option("--c", "c_grid", default=None, help="comma-separated np/log n values"),
        click.option("--k", type=int, default=None),
        click.option("--dist", default=None, help="atom distribution name"),
        click.option("--eps", type=float, default=None),
        click.option("--workers", type=int, default=None),
        click.option("--out", type=click.Path(), default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _cfg(experiment, config_path, seed, n, trials, c_grid, k, dist, eps, workers, out, **extra):
    grid = None if c_grid is None else tuple(float(x) for x in c_grid.replace(",", " ").split())
    return load_config(experiment, config_path, master_seed=seed, n=n, trials=trials, c_grid=grid,
                       k=k, dist=dist, eps=eps, workers=workers, out_path=out, **extra)


def _emit(text, out):
    if out is None:
        click.echo(text, nl=False)


@click.group()
def cli():
    """Spectral outlier experiments for sparse random matrices."""


@cli.command()
@common
@click.option("--centered", is_flag=True, default=None, help="centered sparse Wigner instead of G(n, p)")
def sweep(centered, **kw):
    """|lambda_(|k|)| against the predictors over a grid of c = np / log n."""
    cfg = _cfg("sweep", centered=centered, **kw)
    rows, text = ex.run_sweep(cfg)
    _emit(text, cfg.out_path)
    bad = ex.sweep_violations(rows)
    if bad:
        raise Falsified(f"{len(bad)} sweep rows break the sandwich inequalities")


@cli.command()
@common
def phase(**kw):
    """Outlier fraction per c and the predictor curve around the threshold."""
    cfg = _cfg("phase_check", **kw)
    rows, _ = ex.run_sweep(cfg)
    rep = ex.run_phase_check(cfg, rows)
    text = ex.format_phase(rep) + "\n"
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@cli.command()
@common
def seginer(**kw):
    """||W|| / max row norm for centered sparse Wigner matrices."""
    cfg = _cfg("seginer", **kw)
    rows, text = ex.run_seginer(cfg)
    _emit(text, cfg.out_path)
    inside = sum(1 - cfg.tol <= r.ratio <= 2.2 for r in rows)
    if inside < 0.95 * len(rows):
        raise Falsified(f"only {inside} of {len(rows)} ratios lie in [1 - tol, 2.2]")


@cli.command()
@common
def bbp(**kw):
    """Top eigenvalue of rank-one deformed Wigner matrices."""
    cfg = _cfg("bbp", **kw)
    rows, text = ex.run_bbp(cfg)
    _emit(text, cfg.out_path)
    for th, med in ex.bbp_medians(rows).items():
        click.echo(f"# theta={th:g} median={med:.4f} prediction={bbp_prediction(th):.4f}", err=True)


@cli.command("precancel")
@common
def precancel_cmd(**kw):
    """Exhaustive cancellation identity on random tiny instances."""
    cfg = _cfg("precancel", **kw)
    res = suites.precancel_suite(instances=cfg.trials, seed=cfg.master_seed)
    click.echo(suites.format_table([res]))
    if not res.ok:
        raise Falsified("cancellation identity failed")


@cli.command()
@common
@click.option("--suite", "suite_names", multiple=True, help="run only these suites")
def verify(suite_names, **kw):
    """Run the exact property suites and print a table."""
    cfg = _cfg("verify", **kw)
    try:
        results = suites.run_suites(cfg.master_seed, suite_names or None)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    table = suites.format_table(results) + "\n"
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(table)
    else:
        click.echo(table, nl=False)
    failed = [r.name for r in results if not r.ok]
    if failed:
        raise Falsified("failed suites: " + ", ".join(failed))


@cli.command()
@common
@click.option("--q", type=int, default=None, help="tree depth (odd)")
def lowerbound(q, **kw):
    """Tree test-vector certificates against |lambda_(|k|)|."""
    cfg = _cfg("lowerbound_demo", q=q, **kw)
    rows, text = ex.run_lowerbound(cfg)
    _emit(text, cfg.out_path)
    if not all(r.ok for r in rows):
        raise Falsified("a certificate exceeds |lambda_(|k|)|")


@cli.command()
@click.argument("csv_path", type=click.Path())
@click.option("--out", type=click.Path(), required=True)
def plot(csv_path, out):
    """SVG chart of a sweep CSV."""
    emit_plot(csv_path, out)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, prog_name="outlierlab")
    except Falsified as exc:
        click.echo(f"falsified: {exc}", err=True)
        return EXIT_FALSIFIED
    except (ConfigError, OSError, ValueError, click.ClickException) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except click.exceptions.Abort:
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
