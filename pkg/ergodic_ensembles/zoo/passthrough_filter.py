# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Identity filter without state, ``ŷ = y``."""

import numpy as np

from ..api import FilterSpec
from . import merge_parameters

component_kind = "filter"

parameters = {"dim": 1}


def _transition(x_f, y):
    return np.zeros(0)


def _output(x_f, y):
    return np.asarray(y, dtype=float).copy()


def make_passthrough_filter(dim=1):
    """Build an identity filter."""
    return FilterSpec(
        state_dim=0,
        transition=_transition,
        output=_output,
        input_dim=dim,
        output_dim=dim,
        name="passthrough_filter",
    )


def build(params):
    """Build from a parameter block."""
    return make_passthrough_filter(**merge_parameters(parameters, params, "passthrough_filter"))
