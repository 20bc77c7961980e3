# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Proxy for the current extension state."""

from flask import current_app
from werkzeug.local import LocalProxy

current_ergodic = LocalProxy(lambda: current_app.extensions["ergodic-ensembles"])
"""Proxy object to the current ergodic-ensembles extension."""
