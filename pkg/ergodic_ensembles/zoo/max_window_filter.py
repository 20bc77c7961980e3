# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Maximum of the aggregate outputs recorded within a time window.

The filter state is a shift register holding the last ``window``
aggregates (``window * dim`` values, oldest first). It is marginally stable
and 1-Lipschitz in the sup norm.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ..api import FilterSpec
from ..errors import ParamError
from . import merge_parameters

component_kind = "filter"


@dataclass(frozen=True)
class MaxWindowFilterParams:
    """Parameters of :func:`make_max_window_filter`."""

    window: int = 5
    dim: int = 1

    def __post_init__(self):
        """Check parameters."""
        if self.window < 1 or self.dim < 1:
            raise ParamError("Window and dimension must be positive.")


parameters = asdict(MaxWindowFilterParams())


class MaxWindow(object):
    """Shift register with a componentwise max read-out."""

    def __init__(self, window, dim):
        """Initialize filter."""
        self.window = window
        self.dim = dim

    def transition(self, x_f, y):
        """Drop the oldest aggregate and append ``y``."""
        x_f = np.asarray(x_f, dtype=float)
        return np.concatenate([x_f[self.dim :], np.asarray(y, dtype=float).ravel()])

    def output(self, x_f, y):
        """Componentwise max over the stored window."""
        return np.asarray(x_f, dtype=float).reshape(self.window, self.dim).max(axis=0)


def make_max_window_filter(params=None):
    """Build a max-window filter."""
    params = params or MaxWindowFilterParams()
    fn = MaxWindow(params.window, params.dim)
    return FilterSpec(
        state_dim=params.window * params.dim,
        transition=fn.transition,
        output=fn.output,
        input_dim=params.dim,
        output_dim=params.dim,
        name="max_window_filter",
    )


def build(params):
    """Build from a parameter block."""
    merged = merge_parameters(parameters, params, "max_window_filter")
    return make_max_window_filter(MaxWindowFilterParams(**merged))
