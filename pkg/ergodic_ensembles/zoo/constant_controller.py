# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Controller broadcasting a fixed signal."""

import numpy as np

from ..api import ControllerSpec
from . import merge_parameters

component_kind = "controller"

parameters = {"value": [0.5], "lower": None, "upper": None, "input_dim": 1}


class ConstantLaw(object):
    """Stateless constant output."""

    def __init__(self, value):
        """Initialize law."""
        self.value = value

    def transition(self, x_c, y_hat, r):
        """Empty state."""
        return np.zeros(0)

    def output(self, x_c, y_hat, r):
        """The fixed signal."""
        return self.value.copy()


def make_constant_controller(value, lower=None, upper=None, input_dim=1):
    """Build a constant controller; the box defaults to the single point."""
    value = np.atleast_1d(np.asarray(value, dtype=float))
    law = ConstantLaw(value)
    return ControllerSpec(
        state_dim=0,
        transition=law.transition,
        output=law.output,
        reference=np.zeros(input_dim),
        lower=value if lower is None else np.broadcast_to(lower, value.shape),
        upper=value if upper is None else np.broadcast_to(upper, value.shape),
        input_dim=input_dim,
        name="constant_controller",
    )


def build(params):
    """Build from a parameter block."""
    return make_constant_controller(
        **merge_parameters(parameters, params, "constant_controller")
    )
