"""Command-line entry point: ``extflag rank|sweep|pair-sweep|explain``."""

from __future__ import annotations

import json
import logging
import sys

import click

from . import experiments as ex
from .faults import MODEL_KINDS, NoiseModel
from .pauli import PauliString


def _floats(ctx, param, value):
    if not value:
        return ()
    out = []
    for chunk in value:
        for tok in chunk.split(","):
            tok = tok.strip()
            if tok:
                try:
                    out.append(float(tok))
                except ValueError:
                    raise click.BadParameter(f"not a number: {tok!r}") from None
    return tuple(out)


def _section(ctx, param, value):
    if value is None:
        return None
    try:
        a, b = value.split(":")
        return int(a), int(b)
    except ValueError:
        raise click.BadParameter("expected A:B with integer moment indices") from None


def common(f):
    opts = [
        click.option("--circuit", default="magic", show_default=True,
                     help="Builtin name (magic, zzzzz) or path to a circuit file."),
        click.option("--model", type=click.Choice(MODEL_KINDS), default="depolarizing",
                     show_default=True),
        click.option("--p", "p_grid", multiple=True, callback=_floats,
                     help="Comma-separated error probabilities."),
        click.option("--epsilon", "eps_grid", multiple=True, callback=_floats,
                     help="Comma-separated overrotation angles (radians)."),
        click.option("--seed", default=0, show_default=True, type=int),
        click.option("--section", callback=_section, default=None,
                     help="Moment range A:B covered by the flags."),
        click.option("--out", default=None, help="Output prefix for PREFIX.csv / PREFIX.json."),
        click.option("--exact-scoring", is_flag=True,
                     help="Score on the instrumented circuit instead of the q heuristic."),
        click.option("--input-state", default=None,
                     help="Per-qubit input labels from 01+-, qubit 0 first."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _config(circuit, model, p_grid, eps_grid, seed, section, out, exact_scoring, input_state,
            **extra) -> ex.ExperimentConfig:
    grid = eps_grid if model == "overrotation" else p_grid
    try:
        return ex.ExperimentConfig(
            circuit=circuit, model=model, parameter_grid=grid, seed=seed, section=section,
            output=out, exact_scoring=exact_scoring, input_state=input_state, **extra,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _emit(cfg, csv_text, summary):
    if cfg.output:
        csv_path, json_path = ex.write_outputs(cfg.output, csv_text, summary)
        click.echo(f"wrote {csv_path} and {json_path}", err=True)
    else:
        click.echo(csv_text, nl=False)


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Synthesize, rank and simulate Pauli flag gadgets."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@common
@click.option("--flags", "n_flags", default=500, show_default=True, type=int)
def rank(n_flags, **kw):
    """Rank random compatible flags by the quality metric."""
    cfg = _config(n_flags=n_flags, **kw)
    try:
        scores = ex.rank_candidates(cfg)
    except (ex.ExperimentError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    summary = {"config": cfg.to_json(), "top": [s.to_row() for s in scores[:10]]}
    _emit(cfg, ex.scores_csv(scores), summary)


@main.command()
@common
@click.option("--flags", "n_flags", default=500, show_default=True, type=int)
def sweep(n_flags, **kw):
    """Simulate random single flags over a parameter grid."""
    cfg = _config(n_flags=n_flags, **kw)
    try:
        rows = ex.run_single_flag_experiment(cfg)
    except (ex.ExperimentError, ValueError, ArithmeticError) as exc:
        raise click.ClickException(str(exc)) from exc
    _emit(cfg, ex.records_csv(rows), ex.summarize(rows, cfg))


@main.command("pair-sweep")
@common
@click.option("--pairs", "n_pairs", default=100, show_default=True, type=int)
@click.option("--max-overlap", default=None, type=int,
              help="Largest shared support of the two disentangling operators.")
def pair_sweep(n_pairs, max_overlap, **kw):
    """Simulate random nested flag pairs over a parameter grid."""
    cfg = _config(n_pairs=n_pairs, max_overlap=max_overlap, **kw)
    try:
        rows = ex.run_pair_experiment(cfg)
    except (ex.ExperimentError, ValueError, ArithmeticError) as exc:
        raise click.ClickException(str(exc)) from exc
    _emit(cfg, ex.records_csv(rows), ex.summarize(rows, cfg))


@main.command()
@click.option("--circuit", default="magic", show_default=True)
@click.option("--flag", "flag_text", required=True, help="Entangling Pauli, e.g. +XYZII.")
@click.option("--model", type=click.Choice(MODEL_KINDS), default="depolarizing",
              show_default=True)
@click.option("--section", callback=_section, default=None)
def explain(circuit, flag_text, model, section):
    """Print the propagation trace and fault accounting of one flag as JSON."""
    try:
        b = ex.resolve_benchmark(circuit, section)
        flag = PauliString.from_label(flag_text)
        if flag.n != b.circuit.width:
            raise ValueError(f"flag has {flag.n} qubits, circuit has {b.circuit.width}")
        report = ex.explain_flag(b.circuit, flag, NoiseModel(model), b.section)
    except (ex.ExperimentError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(report, indent=2))
    if not report["compatibility"]["compatible"]:
        sys.exit(2)


if __name__ == "__main__":
    main()
