# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""HTML report of an experiment output directory."""

import csv
import json
import math
import os

from flask import Blueprint, render_template

from .utils import config_value, get_logger

blueprint = Blueprint(
    "ergodic_ensembles",
    __name__,
    template_folder="templates",
)
"""Blueprint used to register the report template."""

REPORT_NAME = "report.html"


@blueprint.app_template_filter("number")
def format_number(value, digits=6):
    """Format a number for the report, leaving other values alone."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return value
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return f"{value:.{digits}g}"


@blueprint.app_template_test("passing")
def is_passing(condition):
    """Test if a serialized condition report passed."""
    return condition.get("verdict") == "pass"


def _read_json(path):
    if not os.path.exists(path):
        return None
    with open(path, "rb") as fp:
        return json.loads(fp.read().decode("utf-8"))


def _read_table(path, rows=20):
    with open(path, newline="", encoding="utf-8") as fp:
        lines = [line for line in fp if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, [])
    body = [row for _, row in zip(range(rows), reader)]
    return {
        "name": os.path.basename(path),
        "header": header,
        "rows": body,
        "total": len(lines) - 1 if lines else 0,
    }


def render_report(outdir, template=None, rows=20):
    """Render the report of an output directory and write it next to the results.

    Must be called inside an application context with the extension loaded.

    :param outdir: Directory written by a harness run.
    :param template: Template name, defaults to ``ERGODIC_REPORT_TEMPLATE``.
    :param rows: Number of rows shown per table.
    :returns: Path of the written report.
    """
    manifest = _read_json(os.path.join(outdir, "manifest.json"))
    certificate = _read_json(os.path.join(outdir, "certificate.json"))
    tables = []
    for name in sorted(os.listdir(outdir)):
        if name.endswith(".csv"):
            try:
                tables.append(_read_table(os.path.join(outdir, name), rows))
            except (OSError, UnicodeDecodeError):
                get_logger().warning(f"Skipping unreadable table {name}.", exc_info=True)
    html = render_template(
        config_value("ERGODIC_REPORT_TEMPLATE", template),
        manifest=manifest,
        certificate=certificate,
        tables=tables,
    )
    path = os.path.join(outdir, REPORT_NAME)
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(html)
    return path
