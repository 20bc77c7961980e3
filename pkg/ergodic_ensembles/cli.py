# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Command line interface.

The same commands are exposed as the ``ergodic-ensembles`` console script,
which creates its own application, and as ``flask ergodic`` inside an
existing application that loads the extension.
"""

import click
from flask import Flask
from flask.cli import FlaskGroup, with_appcontext

from .errors import ConfigError, NumericalError
from .ext import ErgodicEnsembles
from .harness import TABLE_WRITERS, load_config, run_diagnose, run_simulate, run_verify
from .report import render_report

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


def create_app(**config):
    """Minimal application with the extension loaded."""
    app = Flask("ergodic_ensembles")
    app.config.update(config)
    ErgodicEnsembles(app)
    return app


def experiment_options(fn):
    """Options shared by the experiment commands."""
    options = [
        click.option(
            "--config",
            "config_path",
            required=True,
            type=click.Path(exists=True, dir_okay=False),
            help="Experiment configuration (JSON).",
        ),
        click.option(
            "--seed", type=click.IntRange(0, 2**64 - 1), help="Master seed."
        ),
        click.option(
            "--out", "outdir", type=click.Path(file_okay=False), help="Output directory."
        ),
        click.option(
            "--threads",
            type=click.IntRange(min=0),
            help="Worker threads, 0 for one per CPU.",
        ),
        click.option(
            "--format",
            "table_format",
            type=click.Choice(sorted(TABLE_WRITERS)),
            help="Table format [default: csv].",
        ),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _run(runner, config_path, seed, outdir, threads, table_format):
    try:
        experiment = load_config(config_path)
        result = runner(
            experiment, seed=seed, outdir=outdir, threads=threads, table_format=table_format
        )
    except ConfigError as exc:
        click.secho(f"Error: {exc}", fg="red", err=True)
        raise click.exceptions.Exit(EXIT_CONFIG)
    except NumericalError as exc:
        click.secho(
            f"Error: non-finite value in {exc.component} at step {exc.index}.",
            fg="red",
            err=True,
        )
        raise click.exceptions.Exit(EXIT_NUMERICAL)
    click.echo(f"Wrote {len(result.files)} files to {result.directory}.")
    return result


@click.command()
@experiment_options
@with_appcontext
def simulate(config_path, seed, outdir, threads, table_format):
    """Simulate trajectories."""
    _run(run_simulate, config_path, seed, outdir, threads, table_format)


@click.command()
@experiment_options
@with_appcontext
def diagnose(config_path, seed, outdir, threads, table_format):
    """Run empirical ergodicity diagnostics."""
    _run(run_diagnose, config_path, seed, outdir, threads, table_format)


@click.command()
@experiment_options
@with_appcontext
def verify(config_path, seed, outdir, threads, table_format):
    """Check theorem hypotheses and write a certificate."""
    result = _run(run_verify, config_path, seed, outdir, threads, table_format)
    for report in result.reports:
        click.echo(f"{report.condition:<24} {report.verdict}")
    if result.errored:
        raise click.exceptions.Exit(EXIT_PARTIAL)


@click.command()
@click.option(
    "--out",
    "outdir",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Output directory of a previous run.",
)
@with_appcontext
def report(outdir):
    """Render an HTML report of an output directory."""
    click.echo(render_report(outdir))


@click.group()
def ergodic():
    """Ergodic ensemble experiments."""


cli = FlaskGroup(
    create_app=create_app,
    add_default_commands=False,
    add_version_option=False,
    help="Ergodic ensemble experiments.",
)

for command in (simulate, diagnose, verify, report):
    ergodic.add_command(command)
    cli.add_command(command)
