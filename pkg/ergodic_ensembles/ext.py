# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Flask extension for ergodic ensemble experiments."""

from invenio_base.utils import entry_points
from werkzeug.utils import cached_property

from . import config
from .report import blueprint


class _ErgodicEnsemblesState(object):
    """State object."""

    def __init__(self, app, entry_point_group=None):
        """Initialize state."""
        self.app = app
        self.entry_point_group = entry_point_group
        self._components = {}

    @cached_property
    def components(self):
        """Registered components by name, loading the entry-point group once."""
        if self.entry_point_group is not None:
            self.load_entry_point_group(self.entry_point_group)
            self.entry_point_group = None
        return self._components

    def register_component(self, name, component):
        """Register a model component module."""
        if name in self._components:
            if self._components[name] is component:
                return
            else:
                raise RuntimeError(
                    f"Component '{name}' is already registered with instance "
                    f"{self._components[name]!r}, cannot register different instance "
                    f"{component!r}."
                )
        self._components[name] = component

    def load_entry_point_group(self, entry_point_group):
        """Load components from an entry point group."""
        for ep in entry_points(group=entry_point_group):
            self.register_component(ep.name, ep.load())

    def get_component(self, name, kind=None):
        """Component module registered as ``name``.

        :raises KeyError: unknown name, or a component of another kind.
        """
        component = self.components[name]
        if kind is not None and getattr(component, "component_kind", None) != kind:
            raise KeyError(f"'{name}' is not a {kind} component")
        return component

    def build(self, name, params=None, kind=None):
        """Build a component from its parameter block."""
        return self.get_component(name, kind).build(params or {})


class ErgodicEnsembles(object):
    """Ergodic-Ensembles extension."""

    def __init__(self, app=None, **kwargs):
        """Extension initialization."""
        if app:
            self._state = self.init_app(app, **kwargs)

    def init_app(self, app, entry_point_group="ergodic_ensembles.components"):
        """Flask application initialization."""
        self.init_config(app)
        app.register_blueprint(blueprint)
        state = _ErgodicEnsemblesState(app, entry_point_group=entry_point_group)
        app.extensions["ergodic-ensembles"] = state
        return state

    def init_config(self, app):
        """Initialize configuration."""
        for k in dir(config):
            if k.startswith("ERGODIC_"):
                app.config.setdefault(k, getattr(config, k))

    def __getattr__(self, name):
        """Proxy to state object."""
        return getattr(self._state, name, None)
