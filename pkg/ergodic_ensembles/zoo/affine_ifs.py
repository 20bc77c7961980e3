# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Affine iterated function system with constant probabilities.

A single scalar agent moves by ``x -> slope_j * x + offset_j`` with
probability ``probs_j`` and reports its state. The filter passes the
output through and the controller broadcasts a constant, so the chain is a
classical iterated function system with a known invariant measure.
"""

import numpy as np

from ..api import AgentSpec, ClosedLoopSystem
from ..errors import ParamError
from ..expressions import AffineLaw, affine_map, identity_map
from . import merge_parameters
from .constant_controller import make_constant_controller
from .passthrough_filter import make_passthrough_filter

component_kind = "system"

TWOMAP1D = {"slopes": [0.5, 0.5], "offsets": [0.0, 1.0], "probs": [0.5, 0.5]}
"""Maps ``x/2`` and ``x/2 + 1`` with equal odds; invariant law uniform on [0, 2]."""

parameters = dict(TWOMAP1D)


def make_affine_ifs_benchmark(slopes, offsets, probs):
    """Build the benchmark system.

    :raises ParamError: a slope with ``|slope| >= 1`` or mismatched lengths.
    """
    slopes = np.atleast_1d(np.asarray(slopes, dtype=float))
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    probs = np.atleast_1d(np.asarray(probs, dtype=float))
    if not (slopes.size == offsets.size == probs.size) or slopes.size == 0:
        raise ParamError("slopes, offsets and probs must have the same positive length.")
    if np.any(np.abs(slopes) >= 1):
        raise ParamError(f"Every slope must satisfy |slope| < 1, got {slopes.tolist()}.")
    agent = AgentSpec(
        state_dim=1,
        transition_maps=[affine_map(s, o, input_dim=1) for s, o in zip(slopes, offsets)],
        output_maps=[identity_map(1)],
        transition_probs=AffineLaw(probs),
        output_probs=AffineLaw([1.0]),
        name="affine_ifs",
    )
    return ClosedLoopSystem(
        agents=(agent,),
        filter=make_passthrough_filter(1),
        controller=make_constant_controller([0.5], lower=[0.0], upper=[1.0]),
        name="affine_ifs",
    )


def make_twomap1d():
    """The two-map benchmark."""
    return make_affine_ifs_benchmark(**TWOMAP1D)


def build(params):
    """Build from a parameter block."""
    return make_affine_ifs_benchmark(**merge_parameters(parameters, params, "affine_ifs"))
