# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Generic map expressions.

A map is a list of stages applied in order::

    [{"op": "affine", "matrix": [[0.5, 0.1], [0, 0.5]], "offset": [1, 0]},
     {"op": "clamp", "lower": -10, "upper": 10}]

Only affine stages and the componentwise ``min``, ``max``, ``clamp``, ``sin``
and ``tanh`` nonlinearities exist. Compiled maps act on single vectors or
row-wise on ``(k, n)`` arrays and expose their Jacobian.
"""

import numpy as np

from .errors import ConfigError


class Stage(object):
    """Base stage."""

    affine = False

    def output_dim(self, input_dim):
        """Output dimension for a given input dimension."""
        return input_dim

    def jacobian(self, x):
        """Jacobian at a single point."""
        return np.diag(self.derivative(x))


class Affine(Stage):
    """``x -> A x + b``."""

    affine = True

    def __init__(self, matrix, offset):
        """Initialize stage."""
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.offset = np.atleast_1d(np.asarray(offset, dtype=float))

    def output_dim(self, input_dim):
        """Rows of the matrix."""
        return self.matrix.shape[0]

    def __call__(self, rows):
        """Apply."""
        return rows @ self.matrix.T + self.offset

    def jacobian(self, x):
        """Constant Jacobian."""
        return self.matrix


class Minimum(Stage):
    """Componentwise ``min(x, value)``."""

    def __init__(self, value):
        """Initialize stage."""
        self.value = np.asarray(value, dtype=float)

    def __call__(self, rows):
        """Apply."""
        return np.minimum(rows, self.value)

    def derivative(self, x):
        """One-sided derivative, taken from below at the kink."""
        return (x <= self.value).astype(float) * np.ones_like(x)


class Maximum(Stage):
    """Componentwise ``max(x, value)``."""

    def __init__(self, value):
        """Initialize stage."""
        self.value = np.asarray(value, dtype=float)

    def __call__(self, rows):
        """Apply."""
        return np.maximum(rows, self.value)

    def derivative(self, x):
        """One-sided derivative, taken from above at the kink."""
        return (x >= self.value).astype(float) * np.ones_like(x)


class Clamp(Stage):
    """Componentwise clamp to ``[lower, upper]``."""

    def __init__(self, lower, upper):
        """Initialize stage."""
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)

    def __call__(self, rows):
        """Apply."""
        return np.clip(rows, self.lower, self.upper)

    def derivative(self, x):
        """Derivative inside the closed interval."""
        return ((x >= self.lower) & (x <= self.upper)).astype(float)


class Sine(Stage):
    """Componentwise sine."""

    def __call__(self, rows):
        """Apply."""
        return np.sin(rows)

    def derivative(self, x):
        """Cosine."""
        return np.cos(x)


class Tanh(Stage):
    """Componentwise hyperbolic tangent."""

    def __call__(self, rows):
        """Apply."""
        return np.tanh(rows)

    def derivative(self, x):
        """``1 - tanh(x)**2``."""
        return 1.0 - np.tanh(x) ** 2


class ExpressionMap(object):
    """Composition of stages."""

    def __init__(self, stages, input_dim):
        """Initialize map."""
        self.stages = tuple(stages)
        self.input_dim = int(input_dim)
        dim = self.input_dim
        for stage in self.stages:
            dim = stage.output_dim(dim)
        self.output_dim = dim

    def __call__(self, x):
        """Apply to a vector or row-wise to an array."""
        x = np.asarray(x, dtype=float)
        rows = np.atleast_2d(x)
        for stage in self.stages:
            rows = stage(rows)
        return rows[0] if x.ndim == 1 else rows

    def jacobian(self, x):
        """Jacobian at a single point by the chain rule."""
        point = np.atleast_1d(np.asarray(x, dtype=float))
        jac = np.eye(self.input_dim)
        for stage in self.stages:
            jac = stage.jacobian(point) @ jac
            point = stage(point[None, :])[0]
        return jac

    @property
    def is_affine(self):
        """Whether every stage is affine."""
        return all(stage.affine for stage in self.stages)

    @property
    def lipschitz_constant(self):
        """Operator norm of a purely affine map, ``None`` otherwise."""
        if not self.is_affine:
            return None
        return float(np.linalg.norm(self.jacobian(np.zeros(self.input_dim)), 2))


def _matrix(value, input_dim):
    matrix = np.asarray(value, dtype=float)
    if matrix.ndim == 0:
        return matrix * np.eye(input_dim)
    return np.atleast_2d(matrix)


def affine_map(matrix, offset=0.0, input_dim=None):
    """Compile ``x -> A x + b``; a scalar ``A`` means ``A`` times identity."""
    if input_dim is None:
        input_dim = np.atleast_2d(np.asarray(matrix, dtype=float)).shape[1]
    matrix = _matrix(matrix, input_dim)
    offset = np.broadcast_to(np.asarray(offset, dtype=float), (matrix.shape[0],))
    return ExpressionMap([Affine(matrix, offset)], input_dim)


def identity_map(dim):
    """Identity on ``R^dim``."""
    return affine_map(1.0, 0.0, input_dim=dim)


def constant_map(value, input_dim):
    """Map every input to ``value``."""
    value = np.atleast_1d(np.asarray(value, dtype=float))
    return ExpressionMap([Affine(np.zeros((value.size, input_dim)), value)], input_dim)


def compile_map(stages, input_dim, field="map"):
    """Compile a list of stage definitions.

    :raises ConfigError: unknown op or malformed stage, naming ``field``.
    """
    if isinstance(stages, dict):
        stages = [stages]
    compiled = []
    dim = int(input_dim)
    for i, stage in enumerate(stages):
        where = f"{field}.{i}"
        op = stage.get("op")
        try:
            if op == "affine":
                matrix = _matrix(stage.get("matrix", 1.0), dim)
                if matrix.shape[1] != dim:
                    raise ConfigError(
                        f"matrix has {matrix.shape[1]} columns, expected {dim}",
                        field=where,
                    )
                offset = np.broadcast_to(
                    np.asarray(stage.get("offset", 0.0), dtype=float), (matrix.shape[0],)
                )
                compiled.append(Affine(matrix, offset))
            elif op == "min":
                compiled.append(Minimum(stage["value"]))
            elif op == "max":
                compiled.append(Maximum(stage["value"]))
            elif op == "clamp":
                compiled.append(Clamp(stage["lower"], stage["upper"]))
            elif op == "sin":
                compiled.append(Sine())
            elif op == "tanh":
                compiled.append(Tanh())
            else:
                raise ConfigError(f"unknown op {op!r}", field=where)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"malformed stage ({exc})", field=where) from exc
        dim = compiled[-1].output_dim(dim)
    return ExpressionMap(compiled, input_dim)


class AffineLaw(object):
    """Probability law ``p(π) = intercept + gradient π``."""

    def __init__(self, intercept, gradient=None):
        """Initialize law."""
        self.intercept = np.atleast_1d(np.asarray(intercept, dtype=float))
        self.gradient = None
        if gradient is not None:
            self.gradient = np.atleast_2d(np.asarray(gradient, dtype=float))
            if self.gradient.shape[0] != self.intercept.size:
                self.gradient = self.gradient.T

    def __call__(self, pi):
        """Evaluate."""
        if self.gradient is None:
            return self.intercept.copy()
        pi = np.atleast_1d(np.asarray(pi, dtype=float))
        return self.intercept + self.gradient @ pi


def compile_law(value, field="law"):
    """Constant vector or ``{"intercept": [...], "gradient": [[...]]}``."""
    try:
        if isinstance(value, dict):
            return AffineLaw(value["intercept"], value.get("gradient"))
        return AffineLaw(value)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed probability law ({exc})", field=field) from exc
