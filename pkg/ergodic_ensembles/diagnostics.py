# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Empirical ergodicity diagnostics.

Invariant measures are estimated from pooled trajectory states, compared in
the Wasserstein-2 distance and examined with coupling and time-average tests.
Every comparison of empirical measures carries sampling noise, so coupling
reports include a noise floor computed from an independent replication.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .api import (
    CompositeMap,
    RandomStream,
    as_stream,
    as_vector,
    enumerate_map_indices,
    selection_probability,
    signal,
    simulate,
    step,
)
from .errors import DimensionError, InsufficientSamplesError, ParamError
from .utils import config_value, run_ordered

CONSISTENT = "consistent-with-ergodicity"
VIOLATED = "ergodicity-violated"


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted point cloud in ``R^D``."""

    samples: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        """Normalize shapes and check the weights."""
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        object.__setattr__(self, "samples", samples)
        if len(samples) == 0:
            raise InsufficientSamplesError("An empirical measure needs samples.")
        if self.weights is None:
            weights = np.full(len(samples), 1.0 / len(samples))
        else:
            weights = np.asarray(self.weights, dtype=float).ravel()
            if (
                weights.size != len(samples)
                or np.any(weights < 0)
                or abs(weights.sum() - 1.0) > 1e-12
            ):
                raise ParamError("Weights must be a probability vector over the samples.")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def point_mass(cls, point):
        """Dirac measure."""
        return cls(np.atleast_1d(np.asarray(point, dtype=float))[None, :])

    @property
    def dimension(self):
        """Dimension ``D``."""
        return self.samples.shape[1]

    @property
    def size(self):
        """Number of atoms."""
        return self.samples.shape[0]

    @property
    def uniform(self):
        """Whether all atoms carry equal weight."""
        return bool(np.all(self.weights == self.weights[0]))

    @property
    def mean(self):
        """Mean vector."""
        return self.weights @ self.samples

    @property
    def covariance(self):
        """Covariance matrix (population normalization)."""
        centered = self.samples - self.mean
        return (centered * self.weights[:, None]).T @ centered


def empirical_measure(trajectories, burn_in=0, thinning=1, projection=None):
    """Pool states ``B, B+T, B+2T, ...`` of every trajectory.

    :raises InsufficientSamplesError: no state survives burn-in.
    """
    if thinning < 1 or burn_in < 0:
        raise ParamError("Need burn_in >= 0 and thinning >= 1.")
    pooled = [t.project(projection)[burn_in::thinning] for t in trajectories]
    pooled = [chunk for chunk in pooled if len(chunk)]
    if not pooled:
        raise InsufficientSamplesError(
            f"No samples left after a burn-in of {burn_in} steps."
        )
    return EmpiricalMeasure(np.concatenate(pooled))


@dataclass(frozen=True)
class W2Estimate:
    """Wasserstein-2 distance with the method that produced it."""

    value: float
    method: str
    approximate: bool = False

    def __float__(self):
        """Distance as a float."""
        return self.value


def _quantile_w2_squared(x, a, y, b):
    ox, oy = np.argsort(x, kind="stable"), np.argsort(y, kind="stable")
    x, a, y, b = x[ox], a[ox], y[oy], b[oy]
    if x.size == y.size and np.all(a == a[0]) and np.all(b == b[0]):
        return float(np.mean((x - y) ** 2))
    ca, cb = np.cumsum(a), np.cumsum(b)
    levels = np.unique(np.clip(np.concatenate([[0.0], ca, cb]), 0.0, 1.0))
    mids = (levels[:-1] + levels[1:]) / 2
    ix = np.minimum(np.searchsorted(ca, mids), x.size - 1)
    iy = np.minimum(np.searchsorted(cb, mids), y.size - 1)
    return float(np.sum(np.diff(levels) * (x[ix] - y[iy]) ** 2))


def _sliced_w2(mu, nu, projections, seed):
    directions = np.random.default_rng(seed).standard_normal((projections, mu.dimension))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    total = 0.0
    for direction in directions:
        total += _quantile_w2_squared(
            mu.samples @ direction, mu.weights, nu.samples @ direction, nu.weights
        )
    return np.sqrt(total / projections)


def wasserstein2(mu, nu, method=None, projections=None, seed=None, max_exact=None):
    """Wasserstein-2 distance between two empirical measures.

    One dimension uses the sorted-quantile coupling. Equal-size uniform
    clouds of at most ``max_exact`` points use an optimal assignment on
    squared Euclidean costs. Anything else falls back to the sliced distance
    over random directions, which is flagged approximate.

    :param method: Force ``quantile``, ``assignment`` or ``sliced``.
    :raises DimensionError: the measures live in different dimensions.
    """
    if mu.dimension != nu.dimension:
        raise DimensionError(
            f"Cannot compare measures of dimension {mu.dimension} and {nu.dimension}."
        )
    max_exact = config_value("ERGODIC_W2_EXACT_MAX_SAMPLES", max_exact)
    if method is None:
        if mu.dimension == 1:
            method = "quantile"
        elif mu.size == nu.size <= max_exact and mu.uniform and nu.uniform:
            method = "assignment"
        else:
            method = "sliced"

    if method == "quantile":
        if mu.dimension != 1:
            raise DimensionError("The quantile coupling needs one-dimensional measures.")
        value = np.sqrt(
            _quantile_w2_squared(mu.samples[:, 0], mu.weights, nu.samples[:, 0], nu.weights)
        )
        return W2Estimate(float(value), "quantile")
    if method == "assignment":
        if mu.size != nu.size:
            raise DimensionError("The assignment coupling needs equal sample counts.")
        cost = cdist(mu.samples, nu.samples, "sqeuclidean")
        rows, cols = linear_sum_assignment(cost)
        return W2Estimate(float(np.sqrt(cost[rows, cols].mean())), "assignment")
    if method == "sliced":
        projections = config_value("ERGODIC_W2_SLICED_PROJECTIONS", projections)
        seed = config_value("ERGODIC_W2_SLICED_SEED", seed)
        return W2Estimate(float(_sliced_w2(mu, nu, projections, seed)), "sliced", True)
    raise ValueError(f"Unknown Wasserstein method {method!r}.")


def batch_means_standard_error(values, batches=None):
    """Standard error of a time average by non-overlapping batch means."""
    batches = config_value("ERGODIC_BATCH_COUNT", batches)
    values = np.asarray(values, dtype=float).ravel()
    count = min(batches, values.size)
    if count < 2:
        raise InsufficientSamplesError("Batch means need at least two samples.")
    size = values.size // count
    means = values[: count * size].reshape(count, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(count))


def coordinate_observable(system, selector=0):
    """Observable returning one coordinate (or the mean of several) of the state."""
    coords = np.atleast_1d(
        system.coordinates(selector) if isinstance(selector, str) else selector
    )

    def observable(states):
        return np.asarray(states, dtype=float)[..., coords].mean(axis=-1)

    return observable


def residue_observable(system, selector=0, period=1.0):
    """``cos(2π c / period)`` of a coordinate observable ``c``.

    An integrating controller fed integer-valued errors moves its state in
    steps of ``gain``; with ``period = gain`` the observable is constant
    along every such trajectory and its time average recalls the starting
    residue.
    """
    if not period > 0:
        raise ParamError(f"Period must be positive, got {period}.")
    base = coordinate_observable(system, selector)

    def observable(states):
        return np.cos(2.0 * np.pi * base(states) / period)

    return observable


def _raise_failure(trajectory):
    if trajectory.error is not None:
        raise trajectory.error
    return trajectory


@dataclass(frozen=True)
class CouplingReport:
    """Distances between two ensembles of coupled trajectories."""

    distances: np.ndarray
    rate: float
    noise_floor: float
    fit_steps: int
    mode: str
    trials: int
    approximate: bool = False
    floor_distances: np.ndarray = field(default=None, repr=False)


def _fit_rate(distances, threshold):
    usable = []
    for k, d in enumerate(distances):
        if not d > threshold:
            break
        usable.append(k)
    if len(usable) < 2:
        return float("nan"), len(usable)
    slope = np.polyfit(np.array(usable, dtype=float), np.log(distances[usable]), 1)[0]
    return float(np.exp(slope)), len(usable)


def coupling_contraction_test(
    system,
    x0_a,
    x0_b,
    trials,
    horizon,
    mode="shared",
    seed=None,
    projection=None,
    floor_factor=None,
    threads=1,
):
    """Track ``W2`` between ensembles started at ``x0_a`` and ``x0_b``.

    Pair ``i`` runs on substream ``i`` from ``x0_a``; its partner from
    ``x0_b`` reuses that substream in ``shared`` mode and uses substream
    ``n + i`` in ``independent`` mode. A third ensemble from ``x0_a`` on
    substreams ``2n + i`` measures the noise floor, the mean distance between
    two independent ensembles over the second half of the horizon. The rate
    is a log-linear fit over the leading steps whose distance exceeds
    ``floor_factor`` times the floor (independent mode) or zero (shared
    mode, where pathwise coupling has no sampling floor).
    """
    if trials < 2 or horizon < 2:
        raise ParamError("Coupling needs at least two trials and a horizon of two.")
    if mode not in ("shared", "independent"):
        raise ParamError(f"Unknown coupling mode {mode!r}.")
    seed = config_value("ERGODIC_DEFAULT_SEED", seed)
    floor_factor = config_value("ERGODIC_COUPLING_FLOOR_FACTOR", floor_factor)
    offset = 0 if mode == "shared" else trials

    jobs = (
        [(x0_a, i) for i in range(trials)]
        + [(x0_b, offset + i) for i in range(trials)]
        + [(x0_a, 2 * trials + i) for i in range(trials)]
    )
    runs = run_ordered(
        lambda job: _raise_failure(
            simulate(system, job[0], horizon, RandomStream(seed, job[1]))
        ),
        jobs,
        threads,
    )
    clouds = [
        np.stack([run.project(projection) for run in runs[j * trials : (j + 1) * trials]])
        for j in range(3)
    ]

    def distance(first, second, k):
        return wasserstein2(EmpiricalMeasure(first[:, k]), EmpiricalMeasure(second[:, k]))

    estimates = [distance(clouds[0], clouds[1], k) for k in range(horizon + 1)]
    floors = np.array(
        [float(distance(clouds[0], clouds[2], k)) for k in range(horizon + 1)]
    )
    distances = np.array([float(e) for e in estimates])
    noise_floor = float(floors[horizon // 2 :].mean())
    threshold = floor_factor * noise_floor if mode == "independent" else 0.0
    rate, fit_steps = _fit_rate(distances, threshold)
    return CouplingReport(
        distances=distances,
        rate=rate,
        noise_floor=noise_floor,
        fit_steps=fit_steps,
        mode=mode,
        trials=trials,
        approximate=any(e.approximate for e in estimates),
        floor_distances=floors,
    )


@dataclass(frozen=True)
class ErgodicityReport:
    """Time averages of an observable across initial states and seeds."""

    runs: list
    averages: np.ndarray
    standard_errors: np.ndarray
    spread: float
    max_z: float
    tau: float
    verdict: str


def time_average_ergodicity_test(
    system,
    observable,
    initials,
    seeds,
    horizon,
    burn_in=0,
    tau=None,
    batches=None,
    threads=1,
):
    """Compare post-burn-in time averages of every (initial, seed) run.

    Run ``(i, s)`` uses substream ``i`` of master seed ``s``. The verdict is
    ``consistent-with-ergodicity`` when every pairwise difference of averages
    stays within ``tau`` combined batch-means standard errors,
    ``|a_r - a_s| <= tau * sqrt(se_r**2 + se_s**2)``, and
    ``ergodicity-violated`` otherwise.

    :param observable: Vectorized function of a ``(T, D)`` array of state
        vectors returning ``T`` values.
    """
    if len(initials) < 2 or len(seeds) < 2:
        raise ParamError("Need at least two initial states and two seeds.")
    if horizon <= burn_in:
        raise InsufficientSamplesError("Horizon must exceed the burn-in.")
    tau = config_value("ERGODIC_ERGODICITY_TAU", tau)
    runs = [(i, s) for i, s in itertools.product(range(len(initials)), seeds)]

    def run(job):
        i, s = job
        trajectory = _raise_failure(
            simulate(system, initials[i], horizon, RandomStream(s, i))
        )
        values = np.asarray(observable(trajectory.states[burn_in:]), dtype=float)
        return float(values.mean()), batch_means_standard_error(values, batches)

    results = run_ordered(run, runs, threads)
    averages = np.array([r[0] for r in results])
    errors = np.array([r[1] for r in results])

    max_z = 0.0
    for r, s in itertools.combinations(range(len(results)), 2):
        gap = abs(averages[r] - averages[s])
        scale = np.hypot(errors[r], errors[s])
        if gap == 0:
            continue
        max_z = max(max_z, gap / scale if scale > 0 else float("inf"))
    return ErgodicityReport(
        runs=runs,
        averages=averages,
        standard_errors=errors,
        spread=float(averages.max() - averages.min()),
        max_z=float(max_z),
        tau=tau,
        verdict=CONSISTENT if max_z <= tau else VIOLATED,
    )


def invariance_residual(system, mu, rng, projection=None, exact=False, cap=None):
    """``W2`` between ``mu`` and its image under one step of the chain.

    ``mu`` holds full state vectors. By default each atom is pushed through
    one sampled step; with ``exact`` every atom is split over all composite
    maps weighted by their selection probabilities.
    """
    if mu.dimension != system.dimension:
        raise DimensionError(
            f"Measure dimension {mu.dimension} does not match the state "
            f"dimension {system.dimension}."
        )
    coords = system.coordinates(projection)
    if exact:
        indices = enumerate_map_indices(system, cap)
        maps = [CompositeMap(system, m) for m in indices]
        points, weights = [], []
        for sample, weight in zip(mu.samples, mu.weights):
            pi = signal(system, sample)
            for m, fmap in zip(indices, maps):
                q = selection_probability(system, m, pi)
                if q > 0:
                    points.append(fmap(sample))
                    weights.append(weight * q)
        weights = np.array(weights)
        image = EmpiricalMeasure(np.array(points)[:, coords], weights / weights.sum())
    else:
        stream = as_stream(rng)
        image = EmpiricalMeasure(
            np.array([as_vector(step(system, x, stream)[0])[coords] for x in mu.samples]),
            mu.weights,
        )
    return wasserstein2(EmpiricalMeasure(mu.samples[:, coords], mu.weights), image)
