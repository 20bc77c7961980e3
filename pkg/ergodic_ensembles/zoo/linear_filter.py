# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""First-order linear filter ``x_f' = a_f x_f + b_f y``, ``ŷ = x_f``."""

import numpy as np

from ..api import FilterSpec
from ..errors import ParamError
from . import merge_parameters

component_kind = "filter"

parameters = {"pole": 0.5, "gain": 0.5, "dim": 1}


class LinearFilter(object):
    """Stable first-order filter."""

    def __init__(self, pole, gain):
        """Initialize filter."""
        self.pole = pole
        self.gain = gain

    def transition(self, x_f, y):
        """Next filter state."""
        return self.pole * np.asarray(x_f, dtype=float) + self.gain * np.asarray(y, dtype=float)

    def output(self, x_f, y):
        """Filtered output."""
        return np.asarray(x_f, dtype=float).copy()


def make_linear_filter(pole, gain, dim=1):
    """Build a linear filter.

    :raises ParamError: unless ``|pole| < 1``.
    """
    if not abs(pole) < 1:
        raise ParamError(f"Linear filter pole must satisfy |a_f| < 1, got {pole}.")
    fn = LinearFilter(pole, gain)
    return FilterSpec(
        state_dim=dim,
        transition=fn.transition,
        output=fn.output,
        input_dim=dim,
        output_dim=dim,
        name="linear_filter",
    )


def build(params):
    """Build from a parameter block."""
    merged = merge_parameters(parameters, params, "linear_filter")
    return make_linear_filter(merged["pole"], merged["gain"], merged["dim"])
