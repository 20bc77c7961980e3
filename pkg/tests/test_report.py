# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""HTML report tests."""

import json

import pytest
from flask import render_template_string

from ergodic_ensembles.harness import parse_config, run_simulate, run_verify
from ergodic_ensembles.report import format_number, is_passing, render_report


def _experiment(document):
    return parse_config(json.dumps(document).encode("utf-8"))


@pytest.mark.parametrize(
    "value, expected",
    [
        (0.123456789, "0.123457"),
        (3, "3"),
        (1e-12, "1e-12"),
        (float("nan"), "nan"),
        (float("inf"), "inf"),
        ("pass", "pass"),
        (True, True),
        (None, None),
    ],
)
def test_format_number(value, expected):
    """Test numbers are shortened and other values pass through."""
    assert format_number(value) == expected


def test_template_helpers(testapp):
    """Test the filter and test are registered on the application."""
    assert render_template_string("{{ (2.0 / 3) | number }}") == "0.666667"
    assert render_template_string("{{ 2.0 / 3 }}") != "0.666667"
    template = "{% if c is passing %}yes{% else %}no{% endif %}"
    assert render_template_string(template, c={"verdict": "pass"}) == "yes"
    assert render_template_string(template, c={"verdict": "error"}) == "no"
    assert is_passing({"verdict": "fail"}) is False


def test_render_simulation(testapp, twomap_document, tmp_path):
    """Test tables are listed with their row counts."""
    result = run_simulate(_experiment(twomap_document))
    path = render_report(result.directory)
    assert path == str(tmp_path / "results" / "report.html")
    with open(path, encoding="utf-8") as fp:
        html = fp.read()
    assert "Experiment report" in html
    assert result.manifest["config_digest"] in html
    assert "trajectory-0000.csv" in html
    assert "11 of 11 rows." in html
    assert "Conditions" not in html

    with open(render_report(result.directory, rows=5), encoding="utf-8") as fp:
        assert "5 of 11 rows." in fp.read()


def test_render_certificate(testapp, twomap_document):
    """Test condition verdicts and constants are shown."""
    twomap_document["verify"] = {
        "conditions": [
            {"check": "probability_floor"},
            {"check": "thm1_iva", "lipschitz": [0.5], "index_set_size": 3, "delta": 0.5},
        ]
    }
    result = run_verify(_experiment(twomap_document))
    with open(render_report(result.directory), encoding="utf-8") as fp:
        html = fp.read()
    assert "Conditions" in html
    assert "&#10003; pass" in html
    assert '<td class="error">error</td>' in html
    assert "InfeasibleFloorError" in html
    assert "<th>delta_prime</th>" in html


def test_unreadable_table(testapp, tmp_path):
    """Test tables that do not decode are skipped."""
    (tmp_path / "bad.csv").write_bytes(b"k,value\n\xff\xfe\xfa\n")
    (tmp_path / "good.csv").write_bytes(b"# config-digest: sha256:0\nk,value\n0,1.5\n")
    with open(render_report(str(tmp_path)), encoding="utf-8") as fp:
        html = fp.read()
    assert "bad.csv" not in html
    assert "good.csv" in html
    assert "1 of 1 rows." in html
    assert "<h2>Run</h2>" not in html
