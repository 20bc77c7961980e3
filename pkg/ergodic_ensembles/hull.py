# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Euclidean projection onto the convex hull of finitely many points.

The projection solves ``min ||x - V^T α||`` over the probability simplex.
Small vertex sets use Wolfe's minimum-norm-point active-set method, which
terminates exactly; larger sets use conditional gradients with away steps
stopped by the duality gap. Scalar problems reduce to an interval.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError
from .utils import config_value

MAX_ITERATIONS = 100000
EPSILON = 1e-12


@dataclass(frozen=True)
class HullProjection:
    """Closest hull point, its simplex weights and the distance."""

    point: np.ndarray
    weights: np.ndarray
    distance: float
    method: str


def _interval(x, vertices):
    lo, hi = int(np.argmin(vertices[:, 0])), int(np.argmax(vertices[:, 0]))
    weights = np.zeros(len(vertices))
    value = x[0]
    if value <= vertices[lo, 0]:
        weights[lo] = 1.0
    elif value >= vertices[hi, 0]:
        weights[hi] = 1.0
    else:
        share = (value - vertices[lo, 0]) / (vertices[hi, 0] - vertices[lo, 0])
        weights[lo], weights[hi] = 1.0 - share, share
    return weights


def _affine_minimizer(points):
    # min ||P^T mu|| subject to sum(mu) = 1 via the KKT system.
    k = len(points)
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = points @ points.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    solution = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return solution[:k]


def _min_norm_point(points, tolerance=EPSILON):
    """Wolfe's method on ``points`` already shifted by ``-x``."""
    scale = max(1.0, float(np.max(np.sum(points**2, axis=1))))
    active = [int(np.argmin(np.sum(points**2, axis=1)))]
    lam = np.array([1.0])
    current = points[active[0]].copy()
    for _ in range(MAX_ITERATIONS):
        j = int(np.argmin(points @ current))
        if current @ current - current @ points[j] <= tolerance * scale or j in active:
            break
        active.append(j)
        lam = np.append(lam, 0.0)
        while True:
            mu = _affine_minimizer(points[active])
            if np.all(mu > tolerance):
                lam = mu
                break
            shrink = lam - mu
            candidates = (mu <= tolerance) & (shrink > 0)
            theta = np.min(lam[candidates] / shrink[candidates]) if np.any(candidates) else 1.0
            lam = lam + theta * (mu - lam)
            keep = lam > tolerance
            active = [a for a, k in zip(active, keep) if k]
            lam = lam[keep] / lam[keep].sum()
        current = lam @ points[active]
    weights = np.zeros(len(points))
    weights[active] = lam
    return weights


def _away_step_frank_wolfe(points, tolerance):
    weights = np.zeros(len(points))
    start = int(np.argmin(np.sum(points**2, axis=1)))
    weights[start] = 1.0
    current = points[start].copy()
    for _ in range(MAX_ITERATIONS):
        gradient = points @ current
        toward = int(np.argmin(gradient))
        support = np.flatnonzero(weights > 0)
        away = int(support[np.argmax(gradient[support])])
        gap = current @ current - gradient[toward]
        if gap <= tolerance:
            break
        if gap >= gradient[away] - current @ current:
            direction = points[toward] - current
            limit = 1.0
            index, sign = toward, 1.0
        else:
            direction = current - points[away]
            limit = weights[away] / (1.0 - weights[away]) if weights[away] < 1 else np.inf
            index, sign = away, -1.0
        denominator = direction @ direction
        if denominator == 0:
            break
        gamma = min(max(-(current @ direction) / denominator, 0.0), limit)
        if sign > 0:
            weights *= 1.0 - gamma
            weights[index] += gamma
        else:
            weights *= 1.0 + gamma
            weights[index] -= gamma
            if gamma == limit:
                weights[index] = 0.0
        current = current + gamma * direction
    return weights


def project_onto_hull(x, vertices, tolerance=None, max_active_set=None):
    """Project ``x`` onto the convex hull of ``vertices``.

    :raises InsufficientSamplesError: no vertices.
    """
    tolerance = config_value("ERGODIC_HULL_TOLERANCE", tolerance)
    max_active_set = config_value("ERGODIC_HULL_ACTIVE_SET_MAX_VERTICES", max_active_set)
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim < 2:
        vertices = vertices.reshape(-1, x.size)
    if len(vertices) == 0:
        raise InsufficientSamplesError("A hull needs at least one vertex.")

    if x.size == 1:
        weights, method = _interval(x, vertices), "interval"
    elif len(vertices) <= max_active_set:
        weights, method = _min_norm_point(vertices - x), "active-set"
    else:
        weights, method = _away_step_frank_wolfe(vertices - x, tolerance**2), "frank-wolfe"
    point = weights @ vertices
    return HullProjection(point, weights, float(np.linalg.norm(x - point)), method)


def hull_distance(x, vertices, tolerance=None):
    """Distance from ``x`` to the convex hull of ``vertices``."""
    return project_onto_hull(x, vertices, tolerance).distance
