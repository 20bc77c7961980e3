# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

r"""Closed-loop ensembles of stochastic agents and their ergodic properties.

Ergodic-Ensembles models a population of agents that each pick one of
finitely many maps at random, with probabilities driven by a broadcast
signal. The summed output of the agents passes through a filter and a
controller, which turns it into the next signal. The closed loop is an
iterated random function with state-dependent probabilities.

The package provides:

- simulation of the closed loop with reproducible random streams;
- a model zoo of agents, filters, controllers and benchmark systems;
- empirical diagnostics (Wasserstein-2 distances, coupling contraction,
  time-average agreement, invariance residuals);
- numerical verifiers of the hypotheses that guarantee unique ergodicity
  and of the bound on the distance to the hull of canonical trajectories;
- a batch harness and command line driven by JSON experiment files.

Initialization
--------------

Create a Flask application and initialize the extension:

>>> from flask import Flask
>>> from ergodic_ensembles import ErgodicEnsembles
>>> app = Flask('myapp')
>>> ext = ErgodicEnsembles(app)

Components of the model zoo are registered through the
``ergodic_ensembles.components`` entry-point group and can be looked up by
name inside an application context:

>>> from ergodic_ensembles import current_ergodic
>>> with app.app_context():
...     system = current_ergodic.build('affine_ifs')

Simulation
----------

The benchmark system moves by ``x/2`` or ``x/2 + 1`` with equal odds. Its
invariant law is uniform on ``[0, 2]``:

>>> from ergodic_ensembles.api import RandomStream, simulate
>>> from ergodic_ensembles.zoo.affine_ifs import make_twomap1d
>>> system = make_twomap1d()
>>> trajectory = simulate(system, system.initial_state(), 100, RandomStream(7))
>>> len(trajectory)
101

Every trajectory owns a substream of a master seed, so reruns with equal
seeds reproduce all states bit-exactly regardless of the number of worker
threads.

Configuration
-------------

All numerical defaults are configuration variables prefixed with
``ERGODIC_`` (see :mod:`ergodic_ensembles.config`). Functions read them
from the current application when an application context is active and use
the package defaults otherwise.

Command line
------------

The ``ergodic-ensembles`` command (also available as ``flask ergodic``) runs
experiment files:

.. code-block:: console

    $ ergodic-ensembles simulate --config experiments/twomap1d.json --out results
    $ ergodic-ensembles verify --config experiments/twomap1d-verify.json --seed 7
    $ ergodic-ensembles report --out results
"""

from .ext import ErgodicEnsembles
from .proxies import current_ergodic

__version__ = "1.0.0"

__all__ = ("__version__", "current_ergodic", "ErgodicEnsembles")
