# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Agent reporting the share of combustion use within a unit of time.

Each unit of time consists of ``substeps`` independent mode draws of a
:mod:`two-mode agent <ergodic_ensembles.zoo.two_mode_agent>`; the output is
the time-averaged emission, one of ``substeps + 1`` levels selected with
binomial probabilities. This turns binary outputs into values in
``[emission_off, emission_on]``.
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import binom

from ..api import AgentSpec
from ..errors import ParamError
from ..expressions import AffineLaw, constant_map, identity_map
from . import merge_parameters
from .two_mode_agent import ModeLaw, TwoModeAgentParams

component_kind = "agent"


@dataclass(frozen=True)
class ProportionAgentParams(TwoModeAgentParams):
    """Two-mode parameters plus the number of sub-steps."""

    substeps: int = 10

    def __post_init__(self):
        """Check parameters."""
        super().__post_init__()
        if self.substeps < 1:
            raise ParamError("substeps must be at least 1.")


parameters = asdict(ProportionAgentParams())


class ProportionLaw(ModeLaw):
    """Binomial law of the number of combustion sub-steps."""

    def __init__(self, gain, p_min, p_max, substeps):
        """Initialize law."""
        super().__init__(gain, p_min, p_max)
        self.levels = np.arange(substeps + 1)
        self.substeps = substeps

    def __call__(self, pi):
        """Evaluate."""
        return binom.pmf(self.levels, self.substeps, self.p_on(pi))


def make_proportion_agent(params=None):
    """Build a proportion-of-use agent."""
    params = params or ProportionAgentParams()
    shares = np.arange(params.substeps + 1) / params.substeps
    return AgentSpec(
        state_dim=1,
        transition_maps=[identity_map(1)],
        output_maps=[
            constant_map(share * params.emission_on + (1 - share) * params.emission_off, 1)
            for share in shares
        ],
        transition_probs=AffineLaw([1.0]),
        output_probs=ProportionLaw(
            params.response_gain, params.p_min, params.p_max, params.substeps
        ),
        name="proportion_agent",
    )


def build(params):
    """Build from a parameter block."""
    merged = merge_parameters(parameters, params, "proportion_agent")
    return make_proportion_agent(ProportionAgentParams(**merged))
