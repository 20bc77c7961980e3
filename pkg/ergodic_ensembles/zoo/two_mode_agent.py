# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Two-mode agent.

A stateless agent, e.g. a plug-in hybrid vehicle, that at every step runs in
one of two modes with emissions ``emission_on`` (combustion engine) or
``emission_off`` (electric). The probability of the first mode responds
linearly to the broadcast signal and is clamped to ``[p_min, p_max]``.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ..api import AgentSpec
from ..errors import ParamError
from ..expressions import AffineLaw, constant_map, identity_map
from . import merge_parameters

component_kind = "agent"


@dataclass(frozen=True)
class TwoModeAgentParams:
    """Parameters of :func:`make_two_mode_agent`."""

    emission_on: float = 1.0
    emission_off: float = 0.0
    response_gain: float = 0.4
    p_min: float = 0.1
    p_max: float = 0.9

    def __post_init__(self):
        """Check the clamp bounds."""
        if not 0.0 < self.p_min <= self.p_max < 1.0:
            raise ParamError(
                f"Need 0 < p_min <= p_max < 1, got p_min={self.p_min}, "
                f"p_max={self.p_max}."
            )


parameters = asdict(TwoModeAgentParams())


class ModeLaw(object):
    """``(p_on, 1 - p_on)`` with ``p_on = clamp(0.5 + gain * π, p_min, p_max)``."""

    def __init__(self, gain, p_min, p_max):
        """Initialize law."""
        self.gain = gain
        self.p_min = p_min
        self.p_max = p_max

    def p_on(self, pi):
        """Probability of the first mode."""
        pi = np.atleast_1d(np.asarray(pi, dtype=float))
        return float(np.clip(0.5 + self.gain * pi[0], self.p_min, self.p_max))

    def __call__(self, pi):
        """Evaluate."""
        p = self.p_on(pi)
        return np.array([p, 1.0 - p])


def make_two_mode_agent(params=None):
    """Build a two-mode agent."""
    params = params or TwoModeAgentParams()
    return AgentSpec(
        state_dim=1,
        transition_maps=[identity_map(1)],
        output_maps=[
            constant_map(params.emission_on, 1),
            constant_map(params.emission_off, 1),
        ],
        transition_probs=AffineLaw([1.0]),
        output_probs=ModeLaw(params.response_gain, params.p_min, params.p_max),
        name="two_mode_agent",
    )


def build(params):
    """Build from a parameter block."""
    merged = merge_parameters(parameters, params, "two_mode_agent")
    return make_two_mode_agent(TwoModeAgentParams(**merged))
