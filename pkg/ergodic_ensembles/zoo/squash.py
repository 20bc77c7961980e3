# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Smooth clamp onto a box."""

import numpy as np

from ..utils import config_value


def smooth_clamp(x, lower, upper, rounding=None):
    """Clamp with quadratic corners of radius ``rounding``.

    Within ``rounding`` of a bound the kink is replaced by a parabola
    tangent to both pieces, so the map stays 1-Lipschitz and never leaves
    ``[lower, upper]``.
    """
    rounding = config_value("ERGODIC_SQUASH_ROUNDING", rounding)
    x, lower, upper = np.broadcast_arrays(
        np.asarray(x, dtype=float),
        np.asarray(lower, dtype=float),
        np.asarray(upper, dtype=float),
    )
    eps = np.minimum(rounding, (upper - lower) / 2.0)
    safe = np.where(eps > 0, eps, 1.0)
    below = x - lower
    above = upper - x
    out = np.clip(x, lower, upper)
    out = np.where(np.abs(below) < eps, lower + (below + eps) ** 2 / (4 * safe), out)
    out = np.where(np.abs(above) < eps, upper - (above + eps) ** 2 / (4 * safe), out)
    return out
