# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.


"""Pytest configuration."""

import json

import numpy as np
import pytest
from flask import Flask

from ergodic_ensembles import ErgodicEnsembles
from ergodic_ensembles.api import AgentSpec, ClosedLoopSystem, ControllerSpec
from ergodic_ensembles.expressions import AffineLaw, affine_map, identity_map
from ergodic_ensembles.zoo.affine_ifs import make_affine_ifs_benchmark, make_twomap1d
from ergodic_ensembles.zoo.constant_controller import make_constant_controller
from ergodic_ensembles.zoo.passthrough_filter import make_passthrough_filter


@pytest.fixture(scope="module")
def create_app(instance_path):
    """Application factory fixture for use with pytest-invenio."""

    def _create_app(**config):
        app_ = Flask(
            __name__,
            instance_path=instance_path,
        )
        app_.config.update(config)
        ErgodicEnsembles(app_)
        return app_

    return _create_app


@pytest.fixture()
def testapp(base_app):
    """Application with an active application context."""
    with base_app.app_context():
        yield base_app


@pytest.fixture()
def override_config(testapp):
    """Set application config keys for the duration of one test."""
    saved = {}

    def _override(**values):
        for key, value in values.items():
            saved.setdefault(key, testapp.config[key])
            testapp.config[key] = value

    yield _override
    testapp.config.update(saved)


@pytest.fixture()
def runner(base_app):
    """Click runner bound to the test application."""
    return base_app.test_cli_runner()


@pytest.fixture()
def fixed_clock(monkeypatch):
    """Freeze manifest timestamps."""
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


@pytest.fixture()
def twomap():
    """Maps ``x/2`` and ``x/2 + 1`` with equal odds."""
    return make_twomap1d()


@pytest.fixture()
def single_map():
    """Deterministic ``x/2 + 1`` with fixed point 2."""
    return make_affine_ifs_benchmark([0.5], [1.0], [1.0])


@pytest.fixture()
def halving():
    """Deterministic ``x/2`` with fixed point 0."""
    return make_affine_ifs_benchmark([0.5], [0.0], [1.0])


@pytest.fixture()
def scalar_agent():
    """Factory of one-dimensional agents from slopes, offsets and a law."""

    def _agent(slopes=(0.5,), offsets=(0.0,), probs=None, outputs=None, name="agent"):
        transition_maps = [affine_map(s, o, input_dim=1) for s, o in zip(slopes, offsets)]
        return AgentSpec(
            state_dim=1,
            transition_maps=transition_maps,
            output_maps=outputs or [identity_map(1)],
            transition_probs=probs or AffineLaw(np.full(len(slopes), 1.0 / len(slopes))),
            output_probs=AffineLaw(np.full(len(outputs or [0]), 1.0 / len(outputs or [0]))),
            name=name,
        )

    return _agent


@pytest.fixture()
def tracking_controller():
    """Factory of stateless controllers with ``π = r - ŷ`` on a box."""

    def _controller(reference=1.0, lower=-10.0, upper=10.0):
        def transition(x_c, y_hat, r):
            return np.zeros(0)

        def output(x_c, y_hat, r):
            return np.asarray(r, dtype=float) - np.asarray(y_hat, dtype=float)

        return ControllerSpec(
            state_dim=0,
            transition=transition,
            output=output,
            reference=[reference],
            lower=[lower],
            upper=[upper],
        )

    return _controller


@pytest.fixture()
def make_system(scalar_agent):
    """Factory of closed loops around scalar agents."""

    def _system(agents=None, loop_filter=None, controller=None):
        return ClosedLoopSystem(
            agents=tuple(agents or [scalar_agent()]),
            filter=loop_filter or make_passthrough_filter(1),
            controller=controller or make_constant_controller([0.5], [0.0], [1.0]),
        )

    return _system


@pytest.fixture()
def write_config(tmp_path):
    """Write an experiment document and return its path."""

    def _write(document, name="experiment.json"):
        path = tmp_path / name
        path.write_bytes(json.dumps(document, indent=2).encode("utf-8"))
        return str(path)

    return _write


@pytest.fixture()
def twomap_document(tmp_path):
    """Two-map benchmark experiment writing into a temporary directory."""
    return {
        "seed": 7,
        "system": {"component": "affine_ifs"},
        "simulate": {"horizon": 10},
        "output": {"directory": str(tmp_path / "results")},
    }
