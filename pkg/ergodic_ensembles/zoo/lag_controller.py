# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Lag approximant of a PI controller.

``x_c' = a x_c + K_p (r - ŷ)`` and ``π = squash(x_c)`` onto the signal box.
With ``a = 1`` the controller is a pure integrator.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from ..api import ControllerSpec
from ..errors import ParamError
from . import merge_parameters
from .squash import smooth_clamp

component_kind = "controller"


@dataclass(frozen=True)
class LagControllerParams:
    """Parameters of :func:`make_lag_controller`."""

    gain: float = 0.1
    pole: float = 0.99
    reference: list = field(default_factory=lambda: [30.0])
    lower: list = field(default_factory=lambda: [-1.0])
    upper: list = field(default_factory=lambda: [0.0])
    rounding: float = None

    def __post_init__(self):
        """Check the pole."""
        if abs(self.pole) > 1:
            raise ParamError(f"Controller pole must satisfy |a| <= 1, got {self.pole}.")


parameters = asdict(LagControllerParams())


def _box(params):
    reference = np.atleast_1d(np.asarray(params.reference, dtype=float))
    lower = np.broadcast_to(np.asarray(params.lower, dtype=float), reference.shape)
    upper = np.broadcast_to(np.asarray(params.upper, dtype=float), reference.shape)
    return reference, lower.copy(), upper.copy()


class LagLaw(object):
    """Transition and squashed output of the lag controller."""

    def __init__(self, gain, pole, lower, upper, rounding):
        """Initialize law."""
        self.gain = gain
        self.pole = pole
        self.lower = lower
        self.upper = upper
        self.rounding = rounding

    def transition(self, x_c, y_hat, r):
        """Next controller state."""
        return self.pole * np.asarray(x_c, dtype=float) + self.gain * (r - y_hat)

    def output(self, x_c, y_hat, r):
        """Signal."""
        return smooth_clamp(x_c, self.lower, self.upper, self.rounding)


def make_lag_controller(params=None):
    """Build a lag controller."""
    params = params or LagControllerParams()
    reference, lower, upper = _box(params)
    law = LagLaw(params.gain, params.pole, lower, upper, params.rounding)
    return ControllerSpec(
        state_dim=reference.size,
        transition=law.transition,
        output=law.output,
        reference=reference,
        lower=lower,
        upper=upper,
        input_dim=reference.size,
        name="lag_controller",
    )


def build(params):
    """Build from a parameter block."""
    merged = merge_parameters(parameters, params, "lag_controller")
    return make_lag_controller(LagControllerParams(**merged))
