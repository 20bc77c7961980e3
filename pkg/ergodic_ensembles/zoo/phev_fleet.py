# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Fleet of plug-in hybrid vehicles regulated by a pollution signal.

``agents`` identical two-mode vehicles (or proportion-of-use vehicles when
``substeps > 0``) share one agent description, the aggregate emission is
observed through a max-window filter and a lag or PI controller turns the
tracking error into the broadcast signal.
"""

from ..api import ClosedLoopSystem
from ..errors import ParamError
from . import merge_parameters
from .lag_controller import LagControllerParams, make_lag_controller
from .max_window_filter import MaxWindowFilterParams, make_max_window_filter
from .pi_controller import PIControllerParams, make_pi_controller
from .proportion_agent import ProportionAgentParams, make_proportion_agent
from .two_mode_agent import TwoModeAgentParams, make_two_mode_agent

component_kind = "system"

parameters = {
    "agents": 100,
    "emission_on": 1.0,
    "emission_off": 0.0,
    "response_gain": 0.4,
    "p_min": 0.1,
    "p_max": 0.9,
    "substeps": 0,
    "window": 5,
    "controller": "lag",
    "gain": 0.1,
    "pole": 0.99,
    "integral_gain": 0.01,
    "reference": [30.0],
    "lower": [-1.0],
    "upper": [0.0],
    "rounding": None,
}


def make_phev_fleet(**params):
    """Assemble the fleet; keyword arguments override ``parameters``."""
    p = merge_parameters(parameters, params, "phev_fleet")
    if p["agents"] < 1:
        raise ParamError("A fleet needs at least one vehicle.")
    mode = dict(
        emission_on=p["emission_on"],
        emission_off=p["emission_off"],
        response_gain=p["response_gain"],
        p_min=p["p_min"],
        p_max=p["p_max"],
    )
    if p["substeps"]:
        agent = make_proportion_agent(ProportionAgentParams(substeps=p["substeps"], **mode))
    else:
        agent = make_two_mode_agent(TwoModeAgentParams(**mode))
    box = dict(
        reference=p["reference"], lower=p["lower"], upper=p["upper"], rounding=p["rounding"]
    )
    if p["controller"] == "lag":
        controller = make_lag_controller(
            LagControllerParams(gain=p["gain"], pole=p["pole"], **box)
        )
    elif p["controller"] == "pi":
        controller = make_pi_controller(
            PIControllerParams(
                proportional_gain=p["gain"],
                integral_gain=p["integral_gain"],
                pole=p["pole"],
                **box,
            )
        )
    else:
        raise ParamError(f"Unknown controller {p['controller']!r}; use 'lag' or 'pi'.")
    return ClosedLoopSystem(
        agents=(agent,) * p["agents"],
        filter=make_max_window_filter(MaxWindowFilterParams(window=p["window"])),
        controller=controller,
        name="phev_fleet",
    )


def build(params):
    """Build from a parameter block."""
    return make_phev_fleet(**(params or {}))
