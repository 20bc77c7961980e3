# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Experiment harness tests."""

import csv
import json
import os

import pytest

from ergodic_ensembles.errors import ConfigError, NumericalError
from ergodic_ensembles.harness import (
    build_system,
    load_config,
    parse_config,
    parse_selector,
    parse_state,
    run_diagnose,
    run_simulate,
    run_verify,
)
from ergodic_ensembles.utils import digest_bytes


def _agent_block(matrix=0.5, offset=0.0, count=1):
    return {
        "count": count,
        "state_dim": 1,
        "transition_maps": [[{"op": "affine", "matrix": matrix, "offset": offset}]],
        "output_maps": [[{"op": "affine", "matrix": 1.0}]],
        "transition_probs": [1.0],
        "output_probs": [1.0],
    }


def _generic_system(agent=None, controller=None):
    return {
        "agents": [agent or _agent_block()],
        "filter": {"component": "passthrough_filter"},
        "controller": controller or {"component": "constant_controller"},
    }


def _experiment(document):
    return parse_config(json.dumps(document).encode("utf-8"))


def _read(path):
    with open(path, "rb") as fp:
        return fp.read()


def _table(path):
    with open(path, newline="", encoding="utf-8") as fp:
        lines = fp.read().splitlines()
    assert lines[0].startswith("# config-digest: sha256:")
    return list(csv.DictReader(lines[1:]))


def _value(rows, metric, k=""):
    (row,) = [r for r in rows if r["metric"] == metric and r["k"] == str(k)]
    return row["value"]


def test_parse_config():
    """Test a valid document keeps its raw bytes and digest."""
    raw = b'{"seed": 3, "system": {"component": "affine_ifs"}}'
    experiment = parse_config(raw)
    assert experiment.document["seed"] == 3
    assert experiment.digest == digest_bytes(raw)
    assert experiment.seed() == 3
    assert experiment.seed(9) == 9
    assert experiment.directory() == "results"
    assert experiment.directory("elsewhere") == "elsewhere"

    bom = parse_config("\ufeff".encode("utf-8") + raw)
    assert bom.document == experiment.document


@pytest.mark.parametrize(
    "raw, field, line",
    [
        (b'{"system": {"component": "affine_ifs"},\n "seed": }', None, 2),
        (b'{"system": {"component": "affine_ifs"}, "simulate": {"horizon": -1}}',
         "simulate.horizon", None),
        (b'{"system": {"component": "affine_ifs"}, "seed": 1.5}', "seed", None),
        (b'{"system": {"component": "affine_ifs"}, "colour": 1}', "(root)", None),
        (b'{"system": {"component": "affine_ifs"}, "simulate": {"horizon": 10}, '
         b'"output": {"format": "parquet"}}', "output.format", None),
    ],
)
def test_parse_config_errors(raw, field, line):
    """Test syntax errors carry the line and schema errors the field."""
    with pytest.raises(ConfigError) as excinfo:
        parse_config(raw)
    assert excinfo.value.field == field
    assert excinfo.value.line == line


def test_parse_config_rejects_non_finite():
    """Test NaN and infinities are refused."""
    with pytest.raises(ConfigError, match="NaN"):
        parse_config(b'{"system": {"component": "affine_ifs"}, "seed": NaN}')
    with pytest.raises(ConfigError, match="Infinity"):
        parse_config(
            b'{"system": {"component": "affine_ifs"}, '
            b'"simulate": {"horizon": 1, "initial": [-Infinity, 0]}}'
        )


def test_parse_config_undecodable():
    """Test bytes that do not decode are a config error."""
    with pytest.raises(ConfigError, match="decode"):
        parse_config(b'{"seed": "\xff"}', encoding="utf-8")


def test_load_config(write_config, twomap_document):
    """Test configs are read from disk."""
    path = write_config(twomap_document)
    experiment = load_config(path)
    assert experiment.path == path
    assert experiment.raw == _read(path)
    assert experiment.document["simulate"]["horizon"] == 10


def test_build_system_component(testapp):
    """Test system components are looked up in the registry."""
    system = build_system({"component": "affine_ifs", "params": {"probs": [0.25, 0.75]}})
    assert system.name == "affine_ifs"
    fleet = build_system({"component": "phev_fleet", "params": {"agents": 4}})
    assert fleet.n_agents == 4


def test_build_system_generic(testapp):
    """Test agents, filters and controllers wired from blocks."""
    system = build_system(_generic_system(agent=_agent_block(count=3)))
    assert system.n_agents == 3
    assert len(system.layout.groups) == 1
    assert system.dimension == 4

    fleet = build_system(
        {
            "agents": [{"component": "two_mode_agent", "count": 2}],
            "filter": {"component": "max_window_filter", "params": {"window": 3}},
            "controller": {"component": "lag_controller"},
        }
    )
    assert fleet.n_agents == 2
    assert fleet.filter.state_dim == 3


@pytest.mark.parametrize(
    "block, field",
    [
        (_generic_system(controller={"component": "pid2"}), "system.controller.component"),
        (
            _generic_system(controller={"component": "passthrough_filter"}),
            "system.controller.component",
        ),
        (
            {
                "agents": [_agent_block()],
                "filter": {"component": "linear_filter", "params": {"pole": 1.5}},
                "controller": {"component": "constant_controller"},
            },
            "system.filter.params",
        ),
        ({"component": "affine_ifs", "params": {"slope": [0.5]}}, "system.params"),
        (
            _generic_system(agent=_agent_block(matrix=[[1.0, 0.0]])),
            "system.agents.0.transition_maps.0.0",
        ),
        (
            _generic_system(
                controller={"component": "constant_controller", "params": {"input_dim": 2}}
            ),
            "system",
        ),
    ],
)
def test_build_system_errors(testapp, block, field):
    """Test semantic errors name the offending field."""
    with pytest.raises(ConfigError) as excinfo:
        build_system(block)
    assert excinfo.value.field == field


def test_parse_state_and_selector(testapp):
    """Test state and selector blocks."""
    system = build_system({"component": "phev_fleet", "params": {"agents": 2}})
    state = parse_state(system, {"controller": [-3.0]}, "initial")
    assert state[system.coordinates("controller")].tolist() == [-3.0]
    assert parse_state(system, None, "initial").tolist() == [0.0] * system.dimension
    with pytest.raises(ConfigError) as excinfo:
        parse_state(system, [0.0, 1.0], "simulate.initial")
    assert excinfo.value.field == "simulate.initial"

    assert parse_selector(system, "controller", "p").tolist() == [7]
    with pytest.raises(ConfigError):
        parse_selector(system, [99], "diagnose.experiments.0.projection")


def test_run_simulate(testapp, twomap_document, fixed_clock, tmp_path):
    """Test trajectory tables and byte-identical reruns."""
    experiment = _experiment(twomap_document)
    result = run_simulate(experiment)
    assert result.files == ["config.json", "trajectory-0000.csv"]

    table = os.path.join(result.directory, "trajectory-0000.csv")
    lines = _read(table).decode("utf-8").splitlines()
    assert len(lines) == 13
    assert lines[0] == f"# config-digest: {experiment.digest}"
    assert lines[1] == "k,x[0],x[1],pi[0],transition,output"
    assert lines[2].startswith("0,0.0,0.0,0.5,")
    assert lines[-1].endswith(",,")

    manifest = json.loads(_read(os.path.join(result.directory, "manifest.json")))
    assert manifest["master_seed"] == 7
    assert manifest["command"] == "simulate"
    assert manifest["started"] == "2023-11-14T22:13:20+00:00"
    assert manifest["table_format"] == "csv"
    config = _read(os.path.join(result.directory, "config.json"))
    assert digest_bytes(config) == manifest["config_digest"]

    again = run_simulate(experiment, outdir=str(tmp_path / "again"))
    for name in ("trajectory-0000.csv", "manifest.json", "config.json"):
        assert _read(os.path.join(again.directory, name)) == _read(
            os.path.join(result.directory, name)
        )

    other = run_simulate(experiment, seed=8, outdir=str(tmp_path / "other"))
    assert other.manifest["master_seed"] == 8
    assert _read(os.path.join(other.directory, "trajectory-0000.csv")) != _read(table)


def test_run_simulate_table_format(testapp, twomap_document, tmp_path):
    """Test the table format comes from the caller, then the config."""
    twomap_document["output"]["format"] = "csv"
    experiment = _experiment(twomap_document)
    assert experiment.table_format() == "csv"
    assert experiment.table_format("tsv") == "tsv"
    assert run_simulate(experiment, table_format="csv").manifest["table_format"] == "csv"

    with pytest.raises(ConfigError) as excinfo:
        run_simulate(experiment, outdir=str(tmp_path / "tsv"), table_format="tsv")
    assert excinfo.value.field == "output.format"
    assert not os.path.exists(tmp_path / "tsv")


def test_run_simulate_horizon_zero(testapp, twomap_document):
    """Test a zero horizon writes the initial state only."""
    twomap_document["simulate"] = {"horizon": 0, "initial": [1.5, 0.0]}
    result = run_simulate(_experiment(twomap_document))
    lines = _read(os.path.join(result.directory, "trajectory-0000.csv")).splitlines()
    assert len(lines) == 3
    assert lines[2] == b"0,1.5,0.0,0.5,,"


def test_run_simulate_threads(testapp, twomap_document, tmp_path):
    """Test results do not depend on the worker count."""
    twomap_document["simulate"] = {"horizon": 50, "trajectories": 4}
    experiment = _experiment(twomap_document)
    serial = run_simulate(experiment, outdir=str(tmp_path / "serial"), threads=1)
    pooled = run_simulate(experiment, outdir=str(tmp_path / "pooled"), threads=4)
    assert len(serial.files) == 5
    for i in range(4):
        name = f"trajectory-{i:04d}.csv"
        assert _read(os.path.join(serial.directory, name)) == _read(
            os.path.join(pooled.directory, name)
        )
    assert _read(os.path.join(serial.directory, "trajectory-0000.csv")) != _read(
        os.path.join(serial.directory, "trajectory-0001.csv")
    )


def test_run_simulate_numerical_failure(testapp, tmp_path):
    """Test failing runs still write the truncated tables and manifest."""
    document = {
        "system": _generic_system(agent=_agent_block(matrix=1e200)),
        "initial": {"agents": [1.0]},
        "simulate": {"horizon": 5},
        "output": {"directory": str(tmp_path / "failed")},
    }
    with pytest.raises(NumericalError) as excinfo:
        run_simulate(_experiment(document))
    assert excinfo.value.component == "agent[0].transition[0]"
    assert excinfo.value.index == 1
    assert os.path.exists(tmp_path / "failed" / "manifest.json")
    lines = _read(tmp_path / "failed" / "trajectory-0000.csv").splitlines()
    assert len(lines) == 4


def test_run_diagnose(testapp, twomap_document):
    """Test one long-format table per diagnostic."""
    twomap_document["diagnose"] = {
        "experiments": [
            {"id": "moments", "kind": "moments", "trajectories": 2, "horizon": 2000,
             "burn_in": 100},
            {"id": "coupling", "kind": "coupling", "initial_a": [0, 0],
             "initial_b": [2, 0], "trials": 20, "horizon": 8},
            {"id": "averages", "kind": "ergodicity", "initials": [[0, 0], [2, 0]],
             "seeds": [1, 2], "horizon": 5000, "burn_in": 100, "observable": "agents"},
            {"id": "invariance", "kind": "invariance", "trajectories": 2, "horizon": 300,
             "burn_in": 100, "exact": True},
        ]
    }
    result = run_diagnose(_experiment(twomap_document), threads=2)
    assert result.files == [
        "config.json",
        "diagnose-averages.csv",
        "diagnose-coupling.csv",
        "diagnose-invariance.csv",
        "diagnose-moments.csv",
    ]

    moments = _table(os.path.join(result.directory, "diagnose-moments.csv"))
    assert {r["experiment"] for r in moments} == {"moments"}
    assert int(_value(moments, "samples")) == 2 * 1901
    assert float(_value(moments, "mean[0]")) == pytest.approx(1.0, abs=0.1)
    assert float(_value(moments, "variance[0]")) == pytest.approx(1 / 3, abs=0.05)

    coupling = _table(os.path.join(result.directory, "diagnose-coupling.csv"))
    assert float(_value(coupling, "w2", 0)) == 2.0
    assert float(_value(coupling, "w2", 3)) == pytest.approx(0.25)
    assert float(_value(coupling, "rate")) == pytest.approx(0.5)
    assert _value(coupling, "approximate") == "false"
    assert int(_value(coupling, "fit_steps")) == 9

    averages = _table(os.path.join(result.directory, "diagnose-averages.csv"))
    assert _value(averages, "verdict") == "consistent-with-ergodicity"
    assert float(_value(averages, "average[1,2]")) == pytest.approx(1.0, abs=0.1)

    invariance = _table(os.path.join(result.directory, "diagnose-invariance.csv"))
    assert _value(invariance, "residual_method") == "quantile"
    assert float(_value(invariance, "residual")) < 0.3


def test_run_diagnose_thread_count(override_config, twomap_document, tmp_path):
    """Test diagnose tables do not depend on the worker count."""
    override_config(ERGODIC_BATCH_COUNT=5)
    averages = {"id": "averages", "kind": "ergodicity", "initials": [[0, 0], [2, 0]],
                "seeds": [1, 2], "horizon": 400, "observable": "agents"}
    twomap_document["diagnose"] = {
        "experiments": [
            averages,
            {"id": "coupling", "kind": "coupling", "initial_a": [0, 0],
             "initial_b": [2, 0], "trials": 20, "horizon": 8, "mode": "independent"},
        ]
    }
    experiment = _experiment(twomap_document)
    serial = run_diagnose(experiment, outdir=str(tmp_path / "serial"), threads=1)
    parallel = run_diagnose(experiment, outdir=str(tmp_path / "parallel"), threads=2)
    for name in ("diagnose-averages.csv", "diagnose-coupling.csv"):
        assert _read(os.path.join(serial.directory, name)) == _read(
            os.path.join(parallel.directory, name)
        )

    averages["batches"] = 5
    twomap_document["diagnose"] = {"experiments": [averages]}
    explicit = run_diagnose(
        _experiment(twomap_document), outdir=str(tmp_path / "explicit"), threads=2
    )
    assert _table(os.path.join(parallel.directory, "diagnose-averages.csv")) == _table(
        os.path.join(explicit.directory, "diagnose-averages.csv")
    )


def test_run_verify_thread_count(override_config, tmp_path):
    """Test certificates do not depend on the worker count."""
    override_config(ERGODIC_HULL_ACTIVE_SET_MAX_VERTICES=1, ERGODIC_HULL_TOLERANCE=1e-4)
    agent = {
        "count": 2,
        "state_dim": 1,
        "transition_maps": [
            [{"op": "affine", "matrix": 0.5}],
            [{"op": "affine", "matrix": 0.5, "offset": 1.0}],
        ],
        "output_maps": [[{"op": "affine", "matrix": 1.0}]],
        "transition_probs": [0.5, 0.5],
        "output_probs": [1.0],
    }
    experiment = _experiment(
        {
            "seed": 3,
            "system": _generic_system(agent=agent),
            "verify": {"conditions": [{"check": "theorem2", "trials": 4, "horizon": 40}]},
        }
    )
    certificates = [
        _read(
            os.path.join(
                run_verify(experiment, outdir=str(tmp_path / str(n)), threads=n).directory,
                "certificate.json",
            )
        )
        for n in (1, 2)
    ]
    assert certificates[0] == certificates[1]


def test_run_diagnose_errors(testapp, twomap_document):
    """Test duplicate ids and missing blocks."""
    with pytest.raises(ConfigError) as excinfo:
        run_diagnose(_experiment(twomap_document))
    assert excinfo.value.field == "diagnose"

    twomap_document["diagnose"] = {
        "experiments": [
            {"id": "same", "kind": "moments"},
            {"id": "same", "kind": "coupling", "initial_b": [1, 0]},
        ]
    }
    with pytest.raises(ConfigError) as excinfo:
        run_diagnose(_experiment(twomap_document))
    assert excinfo.value.field == "diagnose.experiments.1.id"

    twomap_document["diagnose"] = {"experiments": [{"id": "c", "kind": "coupling"}]}
    with pytest.raises(ConfigError) as excinfo:
        run_diagnose(_experiment(twomap_document))
    assert excinfo.value.field == "diagnose.experiments.0"


VERIFY_CONDITIONS = [
    {"check": "theorem1", "region": {"lower": [-5, -5], "upper": [5, 5]}, "pairs": 1000},
    {"check": "thm1_iva", "lipschitz": [0.4, 0.4], "index_set_size": 2, "delta": 0.5},
    {"check": "probability_floor"},
    {"check": "pi_contraction", "region": {"lower": -5, "upper": 5}, "pairs": 1000},
    {"check": "theorem2", "trials": 20, "horizon": 50, "burn_in": 10},
    {"check": "contraction_metric", "grid": {"lower": -1, "upper": 1, "points": 9},
     "beta": 0.5, "projection": "agents"},
    {"check": "lyapunov", "map": {"transition": [1], "output": [0]}, "projection": "agents",
     "alpha1": {"coefficient": 0.5}, "alpha2": {"coefficient": 2.0},
     "alpha3": {"coefficient": 0.25}, "region": {"lower": -10, "upper": 10},
     "samples": 200},
    {"check": "drift", "V": {"matrix": 1.0, "coordinates": "agents"},
     "states": [[10, 0], [-10, 0], [0, 0]], "small_set": 2.0},
    {"check": "incremental_stability", "region": {"lower": -10, "upper": 10},
     "projection": "agents"},
]


def test_run_verify(testapp, twomap_document):
    """Test the certificate of the two-map benchmark."""
    twomap_document["verify"] = {"conditions": VERIFY_CONDITIONS}
    experiment = _experiment(twomap_document)
    result = run_verify(experiment)
    assert not result.errored
    assert result.files == ["certificate.json", "config.json"]

    certificate = json.loads(_read(os.path.join(result.directory, "certificate.json")))
    assert certificate["config_digest"] == experiment.digest
    assert certificate["master_seed"] == 7
    conditions = [c["condition"] for c in certificate["conditions"]]
    assert conditions == [
        "Thm1-i",
        "Thm1-ii-floor",
        "Thm1-ii-irreducible",
        "Thm1-iii",
        "Thm1-iv-a",
        "Thm1-iv-b",
        "Thm1",
        "Thm1-iv-a",
        "Thm1-ii-floor",
        "Thm1-iv-b",
        "Thm2",
        "Thm2-i",
        "Prop1",
        "Prop2",
        "incremental-stability",
    ]
    assert all(c["verdict"] == "pass" for c in certificate["conditions"])
    theorem2 = certificate["conditions"][10]
    assert theorem2["constants"]["D"] == pytest.approx(2.0, abs=1e-5)
    assert len(theorem2["details"]["canonicals"]) == 2
    drift = certificate["conditions"][13]
    assert drift["constants"]["max_drift"] == -69.5


def test_run_verify_errored_conditions(testapp, twomap_document):
    """Test failing checks are recorded and the run continues."""
    twomap_document["verify"] = {
        "conditions": [
            {"check": "thm1_iva", "lipschitz": [0.5], "index_set_size": 3, "delta": 0.5},
            {"check": "probability_floor"},
        ]
    }
    result = run_verify(_experiment(twomap_document))
    assert result.errored
    assert [r.verdict for r in result.reports] == ["error", "pass"]
    certificate = json.loads(_read(os.path.join(result.directory, "certificate.json")))
    assert certificate["conditions"][0]["error"].startswith("InfeasibleFloorError")


def test_run_verify_expanding_system(testapp, tmp_path):
    """Test an expanding map errors out of the canonical trajectory."""
    document = {
        "system": _generic_system(agent=_agent_block(matrix=1.2)),
        "verify": {"conditions": [{"check": "theorem2", "trials": 2, "horizon": 5}]},
        "output": {"directory": str(tmp_path / "expanding")},
    }
    result = run_verify(_experiment(document))
    assert result.errored
    assert result.reports[0].condition == "Thm2"
    assert result.reports[0].error.startswith("NotContractiveError")


def test_run_verify_config_error(testapp, twomap_document):
    """Test missing condition inputs are config errors, not verdicts."""
    twomap_document["verify"] = {
        "conditions": [{"check": "contraction_metric", "beta": 0.5}]
    }
    with pytest.raises(ConfigError) as excinfo:
        run_verify(_experiment(twomap_document))
    assert excinfo.value.field == "verify.conditions.0.grid"
