# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Model zoo of agents, filters, controllers and benchmark systems.

Every component module exposes component_kind (agent, filter,
controller or system), the default parameters and
build(params). Components are registered through the
ergodic_ensembles.components entry-point group.
"""

from ..errors import ParamError


def merge_parameters(defaults, params, component):
    """Overlay params on defaults, rejecting unknown keys."""
    params = dict(params or {})
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise ParamError(f"{component}: unknown parameters {', '.join(unknown)}.")
    merged = dict(defaults)
    merged.update(params)
    return merged
