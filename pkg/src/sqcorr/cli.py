"""Command-line interface.

Every subcommand writes its outputs plus a provenance.json (config hash,
seed, library versions, histogram backend) into the --out directory, so a
result can always be traced back to the exact inputs that produced it. No
timestamps go into outputs: rerunning with the same config and seed must
give byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 convergence
or truncation error.
"""
from __future__ import annotations

import hashlib
import json
import os
import sys
from pathlib import Path

import click
import numpy as np
import scipy

from . import __version__
from ._backend import BACKEND
from .analysis import csi_r, extract_g2, extract_g3
from .constants import DEFAULT_REP_RATE_HZ
from .estimation import (
    DEFAULT_BOUNDS,
    crossover_fit,
    fit_parameters,
    model_curve,
    read_crossover_csv,
    read_dataset_csv,
)
from .exceptions import (
    DataFormatError,
    DegenerateFitError,
    InvalidParameterError,
    NoConvergenceError,
    SqcorrError,
    TruncationError,
)
from .histograms import (
    DEFAULT_BIN2D_PS,
    DEFAULT_BIN_PS,
    coincidence_histogram_2,
    coincidence_histogram_3,
    histogram_to_csv,
    histogram2d_to_csv,
)
from .simulate import OpticsConfig, PairSourceConfig, generate_timetags
from .states import (
    HyperParams,
    ModeParams,
    MultimodeState,
    broadband_moments,
    expand_hyperparams,
    mode_weights,
    schmidt_number_mu,
    squeezing_db,
)
from .tags import load_tags

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4

_DATA_ERRORS = (DataFormatError, DegenerateFitError)
_CONVERGENCE_ERRORS = (NoConvergenceError, TruncationError)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Map library exceptions onto the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _CONVERGENCE_ERRORS as e:
            _fail(EXIT_CONVERGENCE, str(e))
        except _DATA_ERRORS as e:
            _fail(EXIT_DATA, str(e))
        except InvalidParameterError as e:
            _fail(EXIT_CONFIG, str(e))
        except SqcorrError as e:
            # remaining library errors concern malformed or insufficient data
            _fail(EXIT_DATA, str(e))
        except OSError as e:
            _fail(EXIT_DATA, str(e))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_bytes()
        cfg = json.loads(raw)
    except OSError as e:
        _fail(EXIT_CONFIG, f"cannot read config: {e}")
    except json.JSONDecodeError as e:
        _fail(EXIT_CONFIG, f"config is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        _fail(EXIT_CONFIG, "config root must be a JSON object")
    return cfg


def _config_sha256(path: str | None) -> str | None:
    if path is None:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_provenance(ctx: click.Context, command: str, outputs: list[str]) -> None:
    obj = ctx.obj
    prov = {
        "command": command,
        "config_sha256": obj["config_sha256"],
        "seed": obj["seed"],
        "threads": obj["threads"],
        "backend": BACKEND,
        "outputs": sorted(outputs),
        "versions": {
            "sqcorr": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
    }
    path = obj["out"] / "provenance.json"
    with open(path, "w") as f:
        json.dump(prov, f, indent=2, sort_keys=True)


def _source_from_config(cfg: dict):
    try:
        src = cfg["source"]
        kind = src["kind"]
        if kind == "hyper":
            return HyperParams(
                B=float(src["B"]),
                mu=float(src["mu"]),
                alpha=float(src.get("alpha", 0.0)),
                n_th=float(src.get("n_th", 0.0)),
                d=int(src.get("d", 50)),
            )
        if kind == "pair":
            return PairSourceConfig(
                n_bar=float(src["n_bar"]), n_beams=int(src.get("n_beams", 2))
            )
        if kind == "state":
            modes = tuple(
                ModeParams(
                    r=float(m.get("r", 0.0)),
                    theta=float(m.get("theta", 0.0)),
                    alpha=complex(*m["alpha"]) if isinstance(m.get("alpha"), list)
                    else complex(m.get("alpha", 0.0)),
                    n_th=float(m.get("n_th", 0.0)),
                )
                for m in src["modes"]
            )
            return MultimodeState(modes)
    except (KeyError, TypeError, ValueError) as e:
        _fail(EXIT_CONFIG, f"bad source config: {e!r}")
    _fail(EXIT_CONFIG, f"unknown source kind {src.get('kind')!r}")


def _optics_from_config(cfg: dict, n_pulses: int | None) -> OpticsConfig:
    try:
        opt = dict(cfg["optics"])
        if n_pulses is not None:
            opt["n_pulses"] = n_pulses
        if "splitter" in opt:
            opt["splitter"] = tuple(float(p) for p in opt["splitter"])
        return OpticsConfig(**{k: v for k, v in opt.items()})
    except (KeyError, TypeError, ValueError) as e:
        _fail(EXIT_CONFIG, f"bad optics config: {e!r}")


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON configuration file.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for all stochastic steps.")
@click.option("--out", type=click.Path(file_okay=False), default=".",
              show_default=True, help="Output directory.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="BLAS/OpenMP thread cap.")
@click.version_option(version=__version__)
@click.pass_context
def main(ctx, config_path, seed, out, threads):
    """Broadband photon-correlation simulator and analysis pipeline."""
    if threads < 1:
        _fail(EXIT_CONFIG, f"threads must be >= 1, got {threads}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(threads))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx.obj = {
        "config": _load_config(config_path),
        "config_sha256": _config_sha256(config_path),
        "seed": seed,
        "out": out_dir,
        "threads": threads,
    }


@main.command()
@click.option("--n-pulses", type=int, default=None,
              help="Override the pulse count from the config.")
@click.option("--csv", "as_csv", is_flag=True, help="Write CSV instead of binary tags.")
@click.pass_context
@_guarded
def simulate(ctx, n_pulses, as_csv):
    """Generate a time-tag stream for the configured source and optics."""
    cfg = ctx.obj["config"]
    if "source" not in cfg or "optics" not in cfg:
        _fail(EXIT_CONFIG, "config must define 'source' and 'optics' sections")
    source = _source_from_config(cfg)
    optics = _optics_from_config(cfg, n_pulses)
    out = ctx.obj["out"]
    tag_path = out / ("tags.csv" if as_csv else "tags.bin")
    sidecar_path = out / "tags.json"
    sidecar = generate_timetags(source, optics, ctx.obj["seed"], tag_path,
                                sidecar_path=sidecar_path)
    worst = max(sidecar["clicks_per_pulse_per_channel"], default=0.0)
    if worst >= 0.1:
        click.echo(
            f"warning: {worst:.3f} clicks/pulse on the busiest detector; "
            "binary-detector bias will be significant", err=True)
    _write_provenance(ctx, "simulate", [tag_path.name, sidecar_path.name])
    click.echo(f"wrote {tag_path} ({sidecar['n_channels']} channels, "
               f"{sidecar['n_pulses']} pulses)")


def _hist_options(fn):
    fn = click.option("--rep-rate-hz", type=float, default=DEFAULT_REP_RATE_HZ,
                      show_default=True)(fn)
    fn = click.option("--range-ps", type=float, default=None,
                      help="Half-width of the delay window.")(fn)
    return fn


@main.command("analyze-g2")
@click.argument("tagfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--channel-a", type=int, default=0, show_default=True)
@click.option("--channel-b", type=int, default=1, show_default=True)
@click.option("--bin-ps", type=int, default=DEFAULT_BIN_PS, show_default=True)
@_hist_options
@click.pass_context
@_guarded
def analyze_g2(ctx, tagfile, channel_a, channel_b, bin_ps, range_ps, rep_rate_hz):
    """Histogram two channels and extract satellite-normalized g2(0)."""
    period = 1e12 / rep_rate_hz
    tags = load_tags(tagfile)
    hist = coincidence_histogram_2(tags, channel_a, channel_b, bin_ps, range_ps,
                                   period_ps=period)
    est = extract_g2(hist, period_ps=period)
    out = ctx.obj["out"]
    histogram_to_csv(hist, out / "g2_histogram.csv")
    result = {"channels": [channel_a, channel_b], "bin_ps": bin_ps, **est.as_dict()}
    with open(out / "g2_estimate.json", "w") as f:
        json.dump(result, f, indent=2, sort_keys=True)
    _write_provenance(ctx, "analyze-g2", ["g2_histogram.csv", "g2_estimate.json"])
    click.echo(f"g2(0) = {est.value:.4f} +- {est.std_error:.4f} "
               f"({est.n_satellites_used} satellites, {est.method})")


@main.command("analyze-g3")
@click.argument("tagfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--channel-a", type=int, default=0, show_default=True)
@click.option("--channel-b", type=int, default=1, show_default=True)
@click.option("--channel-c", type=int, default=2, show_default=True)
@click.option("--bin-ps", type=int, default=DEFAULT_BIN2D_PS, show_default=True)
@_hist_options
@click.pass_context
@_guarded
def analyze_g3(ctx, tagfile, channel_a, channel_b, channel_c, bin_ps, range_ps,
               rep_rate_hz):
    """2D-histogram three channels and extract g3(0)."""
    period = 1e12 / rep_rate_hz
    tags = load_tags(tagfile)
    hist = coincidence_histogram_3(tags, channel_a, channel_b, channel_c, bin_ps,
                                   range_ps, period_ps=period)
    est = extract_g3(hist, period_ps=period)
    out = ctx.obj["out"]
    histogram2d_to_csv(hist, out / "g3_histogram.csv")
    result = {"channels": [channel_a, channel_b, channel_c], "bin_ps": bin_ps,
              **est.as_dict()}
    with open(out / "g3_estimate.json", "w") as f:
        json.dump(result, f, indent=2, sort_keys=True)
    _write_provenance(ctx, "analyze-g3", ["g3_histogram.csv", "g3_estimate.json"])
    click.echo(f"g3(0) = {est.value:.4f} +- {est.std_error:.4f} "
               f"({est.n_satellites_used} satellites)")


@main.command()
@click.argument("tagfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--beam-i", type=int, default=0, show_default=True)
@click.option("--beam-j", type=int, default=1, show_default=True)
@click.option("--arms", type=int, default=2, show_default=True,
              help="Detectors per beam (beam-major channel layout).")
@click.option("--bin-ps", type=int, default=DEFAULT_BIN_PS, show_default=True)
@_hist_options
@click.pass_context
@_guarded
def csi(ctx, tagfile, beam_i, beam_j, arms, bin_ps, range_ps, rep_rate_hz):
    """Cauchy-Schwarz test R = g2_ij^2 / (g2_ii g2_jj) between two beams."""
    period = 1e12 / rep_rate_hz
    tags = load_tags(tagfile)
    ci, cj = beam_i * arms, beam_j * arms

    def g2_between(a, b):
        hist = coincidence_histogram_2(tags, a, b, bin_ps, range_ps, period_ps=period)
        return extract_g2(hist, period_ps=period)

    est_ii = g2_between(ci, ci + 1)
    est_jj = g2_between(cj, cj + 1)
    est_ij = g2_between(ci, cj)
    res = csi_r(est_ii, est_jj, est_ij)
    out = ctx.obj["out"]
    with open(out / "csi.json", "w") as f:
        json.dump(res.as_dict(), f, indent=2, sort_keys=True)
    _write_provenance(ctx, "csi", ["csi.json"])
    verdict = "violated" if res.R > 1.0 + res.std_error else "not violated"
    click.echo(f"R = {res.R:.4f} +- {res.std_error:.4f} (classical bound {verdict})")


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--n-starts", type=int, default=16, show_default=True)
@click.option("--max-evaluations", type=int, default=2000, show_default=True)
@click.option("--d", "d_modes", type=int, default=None,
              help="Mode count of the model curve (default: dataset length).")
@click.pass_context
@_guarded
def fit(ctx, dataset, n_starts, max_evaluations, d_modes):
    """Fit hyperparameters (B, mu, alpha, n_th) to a correlation dataset."""
    data = read_dataset_csv(dataset)
    cfg = ctx.obj["config"].get("fit", {})
    bounds = cfg.get("bounds", DEFAULT_BOUNDS)
    try:
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(bounds) != 4:
            raise ValueError(f"need 4 bound pairs, got {len(bounds)}")
    except (TypeError, ValueError) as e:
        _fail(EXIT_CONFIG, f"bad fit bounds: {e}")
    result = fit_parameters(data, bounds=bounds, n_starts=n_starts,
                            seed=ctx.obj["seed"], max_evaluations=max_evaluations,
                            d=d_modes)
    p = result.params
    payload = {
        "params": {"B": p.B, "mu": p.mu, "alpha": p.alpha, "n_th": p.n_th, "d": p.d},
        "objective_value": result.objective_value,
        "n_evaluations": result.n_evaluations,
        "start_index": result.start_index,
        "converged": result.converged,
        "bounds": [list(b) for b in bounds],
    }
    out = ctx.obj["out"]
    with open(out / "fit.json", "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    _write_provenance(ctx, "fit", ["fit.json"])
    click.echo(f"B={p.B:.4f} mu={p.mu:.4f} alpha={p.alpha:.4f} n_th={p.n_th:.4f} "
               f"(objective {result.objective_value:.3e}, "
               f"{result.n_evaluations} evaluations)")


@main.command()
@click.argument("datafile", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@_guarded
def crossover(ctx, datafile):
    """Fit the perturbative-to-nonperturbative yield crossover."""
    x, y = read_crossover_csv(datafile)
    res = crossover_fit(x, y)
    payload = {
        "p_low": res.p_low,
        "p_high": res.p_high,
        "break_intensity": None if res.degenerate else res.break_intensity,
        "degenerate": res.degenerate,
    }
    out = ctx.obj["out"]
    with open(out / "crossover.json", "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    _write_provenance(ctx, "crossover", ["crossover.json"])
    if res.degenerate:
        click.echo(f"single power law, p = {res.p_low:.4f}")
    else:
        click.echo(f"p_low = {res.p_low:.4f}, p_high = {res.p_high:.4f}, "
                   f"break at {res.break_intensity:.4g}")


@main.command()
@click.pass_context
@_guarded
def report(ctx):
    """Summarize the configured hyperparametrized source.

    Writes the per-mode squeezer distribution, the cumulative model curve and
    a JSON summary with the effective mode number and broadband correlations.
    """
    cfg = ctx.obj["config"]
    if "source" not in cfg:
        _fail(EXIT_CONFIG, "config must define a 'source' section")
    source = _source_from_config(cfg)
    if not isinstance(source, HyperParams):
        _fail(EXIT_CONFIG, "report requires a source of kind 'hyper'")
    source.validate()
    out = ctx.obj["out"]

    lam = mode_weights(source.mu, source.d)
    rks = source.B * lam
    with open(out / "modes.csv", "w") as f:
        f.write("k,weight,r,squeezing_db\n")
        for k, (w, r) in enumerate(zip(lam, rks)):
            f.write(f"{k},{float(w)!r},{float(r)!r},{squeezing_db(float(r))!r}\n")

    curve = model_curve(source)
    with open(out / "model_curve.csv", "w") as f:
        f.write("k,mean_n,g2,g3\n")
        for k, row in enumerate(curve, start=1):
            f.write(f"{k},{float(row[0])!r},{float(row[1])!r},{float(row[2])!r}\n")

    s1, g2, g3 = broadband_moments(expand_hyperparams(source))
    summary = {
        "schmidt_number": schmidt_number_mu(source.mu),
        "max_squeezing_db": squeezing_db(float(rks[0])),
        "mean_photon": s1,
        "g2": g2,
        "g3": g3,
        "params": {"B": source.B, "mu": source.mu, "alpha": source.alpha,
                   "n_th": source.n_th, "d": source.d},
    }
    with open(out / "report.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    _write_provenance(ctx, "report", ["modes.csv", "model_curve.csv", "report.json"])
    click.echo(f"K = {summary['schmidt_number']:.4f}, "
               f"mean_n = {s1:.4f}, g2 = {g2:.4f}, g3 = {g3:.4f}")


if __name__ == "__main__":
    main()
