# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Proportional-integral controller.

``x_c' = a x_c + K_i e`` and ``π = squash(x_c + K_p e)`` with the tracking
error ``e = r - ŷ``. The textbook PI law has ``a = 1``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from ..api import ControllerSpec
from ..errors import ParamError
from . import merge_parameters
from .lag_controller import _box
from .squash import smooth_clamp

component_kind = "controller"


@dataclass(frozen=True)
class PIControllerParams:
    """Parameters of :func:`make_pi_controller`."""

    proportional_gain: float = 0.1
    integral_gain: float = 0.01
    pole: float = 1.0
    reference: list = field(default_factory=lambda: [30.0])
    lower: list = field(default_factory=lambda: [-1.0])
    upper: list = field(default_factory=lambda: [0.0])
    rounding: float = None

    def __post_init__(self):
        """Check the pole."""
        if abs(self.pole) > 1:
            raise ParamError(f"Controller pole must satisfy |a| <= 1, got {self.pole}.")


parameters = asdict(PIControllerParams())


class PILaw(object):
    """Transition and squashed output of the PI controller."""

    def __init__(self, params, lower, upper):
        """Initialize law."""
        self.kp = params.proportional_gain
        self.ki = params.integral_gain
        self.pole = params.pole
        self.lower = lower
        self.upper = upper
        self.rounding = params.rounding

    def transition(self, x_c, y_hat, r):
        """Next integrator state."""
        return self.pole * np.asarray(x_c, dtype=float) + self.ki * (r - y_hat)

    def output(self, x_c, y_hat, r):
        """Signal."""
        return smooth_clamp(
            np.asarray(x_c, dtype=float) + self.kp * (r - y_hat),
            self.lower,
            self.upper,
            self.rounding,
        )


def make_pi_controller(params=None):
    """Build a PI controller."""
    params = params or PIControllerParams()
    reference, lower, upper = _box(params)
    law = PILaw(params, lower, upper)
    return ControllerSpec(
        state_dim=reference.size,
        transition=law.transition,
        output=law.output,
        reference=reference,
        lower=lower,
        upper=upper,
        input_dim=reference.size,
        name="pi_controller",
    )


def build(params):
    """Build from a parameter block."""
    merged = merge_parameters(parameters, params, "pi_controller")
    return make_pi_controller(PIControllerParams(**merged))
