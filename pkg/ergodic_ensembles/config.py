# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Package configuration."""

ERGODIC_ENUMERATION_CAP = 10**6
"""Largest map index set that verifiers are allowed to enumerate."""

ERGODIC_SIGNAL_TOLERANCE = 1e-9
"""Distance outside the signal box that is clamped instead of rejected."""

ERGODIC_SIMPLEX_TOLERANCE = 1e-12
"""Tolerance on probability vectors (non-negativity and unit sum)."""

ERGODIC_SIGNAL_GRID_POINTS = 100
"""Number of signal-box grid points used to validate probability laws."""

ERGODIC_SQUASH_ROUNDING = 1e-3
"""Corner rounding radius of the smooth clamp used by controllers."""

ERGODIC_W2_EXACT_MAX_SAMPLES = 2000
"""Largest sample count for which W2 is solved as an assignment problem."""

ERGODIC_W2_SLICED_PROJECTIONS = 64
"""Number of random directions of the sliced W2 approximation."""

ERGODIC_W2_SLICED_SEED = 0
"""Seed of the sliced W2 directions."""

ERGODIC_COUPLING_FLOOR_FACTOR = 2.0
"""Coupling rates are fitted on distances above this multiple of the noise floor."""

ERGODIC_ERGODICITY_TAU = 4.0
"""Time-average verdict threshold, in batch-means standard errors."""

ERGODIC_BATCH_COUNT = 20
"""Number of batches used for batch-means standard errors."""

ERGODIC_LIPSCHITZ_MIN_PAIRS = 1000
"""Minimum number of sampled pairs for a Lipschitz or contraction estimate."""

ERGODIC_JACOBIAN_STEP = 1e-5
"""Step of central finite-difference Jacobians."""

ERGODIC_EIGEN_SLACK = 1e-10
"""Slack allowed on eigenvalue inequalities."""

ERGODIC_HULL_TOLERANCE = 1e-9
"""Tolerance of the convex hull projection."""

ERGODIC_HULL_ACTIVE_SET_MAX_VERTICES = 16
"""Above this vertex count the hull projection uses conditional gradients."""

ERGODIC_DEFAULT_SEED = 0
"""Master seed used when neither the config nor the command line sets one."""

ERGODIC_THREADS = 0
"""Worker threads of the harness (0 picks the number of CPUs)."""

ERGODIC_CHARDET_BYTES = 1024
"""Number of bytes to read for character encoding detection of config files."""

ERGODIC_CHARDET_CONFIDENCE = 0.9
"""Confidence threshold for character encoding detection."""

ERGODIC_CONFIG_SCHEMA = "experiment-v1.0.0.json"
"""JSON schema used to validate experiment configuration files."""

ERGODIC_SCHEMA_VERSION = "1.0.0"
"""Schema version written into manifests and certificates."""

ERGODIC_REPORT_TEMPLATE = "ergodic_ensembles/report.html"
"""Template rendered by the ``report`` command."""

ERGODIC_OUTPUT_DIRECTORY = "results"
"""Output directory used when neither the config nor the command line sets one."""

ERGODIC_CANONICAL_HORIZON = 200
"""Iterations used to extract canonical trajectories in ``verify`` runs."""

ERGODIC_TABLE_FORMAT = "csv"
"""Table format used when neither the config nor the command line sets one."""
