# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Numerical checks of unique ergodicity and boundedness hypotheses.

Unique ergodicity of the closed loop follows from four hypotheses on the
composite maps ``F_m`` and their selection laws:

* (i) every ``F_m`` is globally Lipschitz with constant ``l_m``;
* (ii) selection probabilities are bounded below by ``δ, δ' > 0`` and the
  Markov matrices they induce are irreducible;
* (iii) the signal set is compact;
* (iv) either (a) ``max_m l_m (2 - |M| δ) < 1`` or (b) every ``π ∘ F_m`` is
  a contraction.

When every ``F_m`` is uniformly contracting with rate ``λ_m`` and the
canonical trajectories ``x^(m)`` stay within ``R`` of each other, sample paths
end up within ``D = λR / (1 - λ)`` of the convex hull of the canonical
trajectories.

Every check returns a :class:`ConditionReport`. Sampled estimates of suprema
are lower bounds, so pass verdicts built on samples carry a caveat.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .api import (
    CompositeMap,
    MapIndex,
    RandomStream,
    as_vector,
    enumerate_map_indices,
    selection_probability,
    signal,
    signal_grid,
    simulate,
    step,
)
from .errors import (
    DimensionError,
    InfeasibleFloorError,
    InsufficientSamplesError,
    MatrixError,
    MetricSingularError,
    NotContractiveError,
    NumericalError,
    ParamError,
    SamplerError,
)
from .hull import hull_distance
from .utils import config_value, run_ordered

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
ERROR = "error"

SAMPLED_CAVEAT = "Sampled estimate of a supremum; it is a lower bound on the true value."


def _plain(value):
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, MapIndex):
        return {
            "transition": list(value.transition_choices),
            "output": list(value.output_choices),
        }
    return value


@dataclass
class ConditionReport:
    """Outcome of one hypothesis check."""

    condition: str
    check: str
    verdict: str
    margin: float = float("nan")
    constants: dict = field(default_factory=dict)
    provenance: str = "sampled"
    caveat: str = None
    method: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    error: str = None

    def __post_init__(self):
        """A pass needs a positive margin."""
        if self.verdict == PASS and not self.margin > 0:
            raise ValueError(f"{self.condition}: pass verdict with margin {self.margin}.")

    @classmethod
    def errored(cls, condition, check, exc):
        """Report for a check that raised."""
        return cls(
            condition=condition,
            check=check,
            verdict=ERROR,
            error=f"{type(exc).__name__}: {exc}",
        )

    @property
    def passed(self):
        """Whether the verdict is a pass."""
        return self.verdict == PASS

    def to_dict(self):
        """JSON-ready representation."""
        return {
            "condition": self.condition,
            "check": self.check,
            "verdict": self.verdict,
            "margin": _plain(self.margin),
            "constants": _plain(self.constants),
            "provenance": self.provenance,
            "caveat": self.caveat,
            "method": _plain(self.method),
            "details": _plain(self.details),
            "error": self.error,
        }


def _verdict(margin):
    return PASS if margin > 0 else FAIL


def _apply_rows(fn, rows):
    return np.array([np.atleast_1d(np.asarray(fn(row), dtype=float)) for row in rows])


def projected(fn, coordinates):
    """Restrict the output of ``fn`` to ``coordinates``."""
    coordinates = np.asarray(coordinates, dtype=int)

    def restricted(x):
        return np.asarray(fn(x), dtype=float)[coordinates]

    return restricted


def numerical_jacobian(fn, x, h=None):
    """Central finite-difference Jacobian of ``fn`` at ``x``.

    :raises NumericalError: a non-finite entry.
    """
    h = config_value("ERGODIC_JACOBIAN_STEP", h)
    x = as_vector(x)
    columns = []
    for i in range(x.size):
        shift = np.zeros_like(x)
        shift[i] = h
        columns.append(
            (np.atleast_1d(fn(x + shift)) - np.atleast_1d(fn(x - shift))) / (2 * h)
        )
    jacobian = np.stack(columns, axis=1)
    if not np.all(np.isfinite(jacobian)):
        raise NumericalError("jacobian")
    return jacobian


class BoxSampler(object):
    """Uniform samples from an axis-aligned box."""

    def __init__(self, lower, upper, seed=0):
        """Initialize sampler."""
        self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
        self.upper = np.broadcast_to(
            np.asarray(upper, dtype=float), self.lower.shape
        ).copy()
        self.generator = np.random.Generator(np.random.PCG64(seed))

    @property
    def diameter(self):
        """Euclidean diameter of the box."""
        return float(np.linalg.norm(self.upper - self.lower))

    def __call__(self, n):
        """Draw ``n`` points as an ``(n, D)`` array."""
        return self.lower + (self.upper - self.lower) * self.generator.random(
            (n, self.lower.size)
        )


def box_sampler(lower, upper, seed=0, dimension=None):
    """Sampler on ``[lower, upper]``, broadcasting scalars to ``dimension``."""
    if dimension is not None:
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (dimension,))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (dimension,))
    return BoxSampler(lower, upper, seed)


@dataclass(frozen=True)
class LipschitzEstimate:
    """Lipschitz constant with its provenance."""

    value: float
    provenance: str
    pairs: int = 0
    jacobians: int = 0
    caveat: str = None


def estimate_lipschitz(
    fn, sampler=None, pairs=None, analytic=None, jacobians=None, h=None, min_pairs=None
):
    """Largest sampled difference quotient of ``fn``, or an analytic override.

    Pair quotients ``||F(x) - F(x')|| / ||x - x'||`` are augmented by the
    spectral norm of central-difference Jacobians at sampled points.

    :raises SamplerError: the sampler has zero diameter.
    :raises ParamError: fewer pairs than the configured minimum without an
        analytic override.
    """
    if analytic is not None:
        return LipschitzEstimate(float(analytic), "analytic")
    pairs = config_value("ERGODIC_LIPSCHITZ_MIN_PAIRS", pairs)
    min_pairs = config_value("ERGODIC_LIPSCHITZ_MIN_PAIRS", min_pairs)
    if pairs < min_pairs:
        raise ParamError(f"Need at least {min_pairs} pairs, got {pairs}.")
    if sampler is None:
        raise SamplerError("A domain sampler is required without an analytic override.")
    jacobians = min(pairs, 100) if jacobians is None else jacobians
    first, second = sampler(pairs), sampler(pairs)
    gaps = np.linalg.norm(first - second, axis=1)
    if not np.max(gaps) > 0:
        raise SamplerError("Degenerate sampler: all sampled points coincide.")
    keep = gaps > 0
    images = np.linalg.norm(
        _apply_rows(fn, first[keep]) - _apply_rows(fn, second[keep]), axis=1
    )
    value = float(np.max(images / gaps[keep]))
    for point in sampler(jacobians) if jacobians else []:
        value = max(value, float(np.linalg.norm(numerical_jacobian(fn, point, h), 2)))
    return LipschitzEstimate(value, "sampled", int(keep.sum()), jacobians, SAMPLED_CAVEAT)


def probability_floor(system, grid=None, points=None):
    """Floors ``δ = min p_ij(π)`` and ``δ' = min p'_iℓ(π)`` over a signal grid.

    A floor that is not positive is reported as a failed hypothesis.
    """
    if grid is None:
        grid = signal_grid(system.controller.lower, system.controller.upper, points)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise InsufficientSamplesError("The signal grid is empty.")
    delta, delta_prime = np.inf, np.inf
    argmin, argmin_prime = None, None
    for pi in grid:
        for p, q in system.laws(pi):
            if p.min() < delta:
                delta, argmin = float(p.min()), pi
            if q.min() < delta_prime:
                delta_prime, argmin_prime = float(q.min()), pi
    margin = min(delta, delta_prime)
    return ConditionReport(
        condition="Thm1-ii-floor",
        check="selection probabilities bounded below on the signal set",
        verdict=_verdict(margin),
        margin=margin,
        constants={
            "delta": delta,
            "delta_prime": delta_prime,
            "argmin_delta": argmin,
            "argmin_delta_prime": argmin_prime,
        },
        caveat="Evaluated on a grid over the signal box.",
        method={"grid_points": len(grid)},
    )


@dataclass(frozen=True)
class IrreducibilityResult:
    """Strongly connected components of a stochastic matrix."""

    irreducible: bool
    components: list

    def __bool__(self):
        """Irreducibility."""
        return self.irreducible


def irreducibility_check(matrix, tolerance=1e-9, threshold=1e-12):
    """Whether the directed graph of entries above ``threshold`` is strongly connected.

    :raises MatrixError: non-square matrix or rows off the simplex.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
        raise MatrixError(f"Expected a non-empty square matrix, got shape {matrix.shape}.")
    if (
        not np.all(np.isfinite(matrix))
        or np.any(matrix < -tolerance)
        or np.any(np.abs(matrix.sum(axis=1) - 1.0) > tolerance)
    ):
        raise MatrixError("Rows must be probability vectors.")
    count, labels = connected_components(
        csr_matrix(matrix > threshold), directed=True, connection="strong"
    )
    components = sorted(
        (np.flatnonzero(labels == c).tolist() for c in range(count)), key=lambda c: c[0]
    )
    return IrreducibilityResult(count == 1, components)


def induced_markov_matrix(system, pi, group=0, kind="transition"):
    """Markov matrix over one agent's maps induced by its selection law.

    Selections are drawn afresh every step, so every row equals the law at
    ``pi``.
    """
    p, q = system.laws(pi)[group]
    law = p if kind == "transition" else q
    return np.tile(law, (law.size, 1))


def check_thm1_iva(lipschitz, index_set_size, delta):
    """Evaluate ``max_m l_m (2 - |M| δ) < 1``.

    :raises InfeasibleFloorError: ``δ |M| > 1``.
    """
    lipschitz = np.atleast_1d(np.asarray(lipschitz, dtype=float))
    if not np.all(np.isfinite(lipschitz)) or not math.isfinite(delta):
        raise ParamError("Lipschitz constants and δ must be finite.")
    if delta * index_set_size > 1 + 1e-12:
        raise InfeasibleFloorError(
            f"Floor δ={delta} over {index_set_size} maps exceeds the total mass."
        )
    value = float(lipschitz.max() * (2 - index_set_size * delta))
    margin = 1.0 - value
    return ConditionReport(
        condition="Thm1-iv-a",
        check="max_m l_m (2 - |M| delta) < 1",
        verdict=_verdict(margin),
        margin=margin,
        constants={
            "l_max": float(lipschitz.max()),
            "index_set_size": int(index_set_size),
            "delta": float(delta),
            "value": value,
        },
        provenance="analytic",
    )


def _map_indices(system, maps=None, seed=0, cap=None):
    cap = config_value("ERGODIC_ENUMERATION_CAP", cap)
    if maps is None and system.index_set_size <= cap:
        return enumerate_map_indices(system, cap), True
    generator = np.random.Generator(np.random.PCG64(seed))
    count = maps or 32
    indices = []
    for _ in range(count):
        indices.append(
            MapIndex(
                tuple(int(generator.integers(a.w)) for a in system.agents),
                tuple(int(generator.integers(a.h)) for a in system.agents),
            )
        )
    return indices, False


def estimate_map_lipschitz(
    system, sampler, pairs=None, maps=None, projection=None, jacobians=None, seed=0
):
    """Sampled Lipschitz constant ``l_m`` of every (or a sample of) ``F_m``.

    Quotients use full state differences in the denominator and the
    projected image in the numerator.
    """
    coords = system.coordinates(projection)
    indices, complete = _map_indices(system, maps, seed)
    estimates = {
        m: estimate_lipschitz(
            projected(CompositeMap(system, m), coords),
            sampler,
            pairs,
            jacobians=jacobians,
        )
        for m in indices
    }
    return estimates, complete


def estimate_pi_contraction(
    system, sampler, pairs=None, maps=None, jacobians=None, seed=0
):
    """Estimate ``κ = max_m Lip(π ∘ F_m)`` and report whether ``κ < 1``."""
    indices, complete = _map_indices(system, maps, seed)
    kappa = 0.0
    for m in indices:
        fmap = CompositeMap(system, m)
        estimate = estimate_lipschitz(
            lambda x, fmap=fmap: signal(system, fmap(x)),
            sampler,
            pairs,
            jacobians=jacobians,
        )
        kappa = max(kappa, estimate.value)
    margin = 1.0 - kappa
    return kappa, ConditionReport(
        condition="Thm1-iv-b",
        check="pi o F_m is a contraction for every map",
        verdict=_verdict(margin),
        margin=margin,
        constants={"kappa": kappa},
        caveat=SAMPLED_CAVEAT,
        method={"maps": len(indices), "all_maps": complete, "pairs": pairs},
    )


def selection_floor(system, grid=None, points=None):
    """``min_m q_m(π)`` over a signal grid, without enumerating maps."""
    if grid is None:
        grid = signal_grid(system.controller.lower, system.controller.upper, points)
    floor = np.inf
    for pi in np.atleast_2d(grid):
        value = 1.0
        for group, (p, q) in zip(system.layout.groups, system.laws(pi)):
            value *= (p.min() * q.min()) ** len(group.members)
        floor = min(floor, value)
    return float(floor)


def check_theorem1(
    system, sampler, pairs=None, maps=None, projection=None, points=None, jacobians=None
):
    """Check hypotheses (i) to (iv) and combine them."""
    reports = []
    grid = signal_grid(system.controller.lower, system.controller.upper, points)

    def guarded(condition, check, fn):
        try:
            report = fn()
        except Exception as exc:
            report = ConditionReport.errored(condition, check, exc)
        reports.append(report)
        return report

    estimates = {}

    def lipschitz():
        found, complete = estimate_map_lipschitz(
            system, sampler, pairs, maps, projection, jacobians
        )
        estimates.update(found)
        values = [e.value for e in found.values()]
        finite = all(math.isfinite(v) for v in values)
        return ConditionReport(
            condition="Thm1-i",
            check="every F_m is globally Lipschitz",
            verdict=PASS if finite else FAIL,
            margin=1.0 if finite else 0.0,
            constants={"l_max": max(values), "l_min": min(values)},
            caveat=SAMPLED_CAVEAT,
            method={"maps": len(values), "all_maps": complete},
            details={"l": {str(i): v for i, v in enumerate(values)}},
        )

    def irreducible():
        worst = []
        for pi in grid:
            for g in range(len(system.layout.groups)):
                for kind in ("transition", "output"):
                    result = irreducibility_check(induced_markov_matrix(system, pi, g, kind))
                    if not result:
                        worst.append({"signal": pi, "group": g, "kind": kind})
        return ConditionReport(
            condition="Thm1-ii-irreducible",
            check="induced Markov matrices are irreducible",
            verdict=FAIL if worst else PASS,
            margin=0.0 if worst else 1.0,
            caveat="Evaluated on a grid over the signal box.",
            method={"grid_points": len(grid)},
            details={"violations": worst[:10]},
        )

    def compact():
        ctrl = system.controller
        return ConditionReport(
            condition="Thm1-iii",
            check="signal set is compact",
            verdict=PASS,
            margin=1.0,
            constants={"lower": ctrl.lower, "upper": ctrl.upper},
            provenance="analytic",
        )

    def iva():
        delta = selection_floor(system, grid)
        l_values = [e.value for e in estimates.values()]
        report = check_thm1_iva(l_values, system.index_set_size, delta)
        report.provenance = "sampled"
        report.caveat = SAMPLED_CAVEAT
        return report

    guarded("Thm1-i", "every F_m is globally Lipschitz", lipschitz)
    guarded(
        "Thm1-ii-floor",
        "selection probabilities bounded below on the signal set",
        lambda: probability_floor(system, grid),
    )
    guarded("Thm1-ii-irreducible", "induced Markov matrices are irreducible", irreducible)
    guarded("Thm1-iii", "signal set is compact", compact)
    iva_report = guarded("Thm1-iv-a", "max_m l_m (2 - |M| delta) < 1", iva)
    ivb_report = guarded(
        "Thm1-iv-b",
        "pi o F_m is a contraction for every map",
        lambda: estimate_pi_contraction(system, sampler, pairs, maps, jacobians)[1],
    )

    base = reports[:4]
    if any(r.verdict == ERROR for r in base) or (
        iva_report.verdict == ERROR and ivb_report.verdict == ERROR
    ):
        verdict = ERROR
    elif all(r.passed for r in base) and (iva_report.passed or ivb_report.passed):
        verdict = PASS
    else:
        verdict = FAIL
    alternatives = [r.margin for r in (iva_report, ivb_report) if math.isfinite(r.margin)]
    margins = [r.margin for r in base if math.isfinite(r.margin)]
    if alternatives:
        margins.append(max(alternatives))
    reports.append(
        ConditionReport(
            condition="Thm1",
            check="unique ergodicity hypotheses (i)-(iii) and (iv-a) or (iv-b)",
            verdict=verdict,
            margin=min(margins) if margins else float("nan"),
            caveat=SAMPLED_CAVEAT,
        )
    )
    return reports


@dataclass(frozen=True, eq=False)
class CanonicalTrajectory:
    """Common limit of the orbits of one composite map."""

    points: np.ndarray
    rate: float
    residual: float = 0.0
    spreads: np.ndarray = None
    converged: bool = True
    transient: int = 0
    index: MapIndex = None
    coordinates: np.ndarray = None

    @classmethod
    def constant(cls, point, rate=0.0, index=None):
        """Canonical trajectory resting at a fixed point."""
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), rate, index=index)

    @property
    def dimension(self):
        """Dimension of the stored points."""
        return self.points.shape[1]

    def at(self, k):
        """Point at step ``k``, holding the last point beyond the stored range."""
        return self.points[min(k, len(self.points) - 1)]


def canonical_trajectory(fmap, starts, horizon, tol=1e-9, index=None, coordinates=None):
    """Iterate ``fmap`` from every start and extract the limit trajectory.

    The rate is the slope of a log-linear fit of the largest distance to the
    first orbit. The first orbit, with the transient dropped once the spread
    falls below ``tol``, is the canonical representative. Spread and points
    use ``coordinates`` of the state, by default the dynamic coordinates of
    a :class:`CompositeMap` and everything otherwise.

    :raises NotContractiveError: the spread grows over the horizon.
    """
    starts = [as_vector(s) for s in starts]
    if len(starts) < 2:
        raise ParamError("A canonical trajectory needs at least two starts.")
    if coordinates is None:
        coordinates = (
            fmap.system.coordinates("dynamic")
            if isinstance(fmap, CompositeMap)
            else np.arange(starts[0].size)
        )
    coordinates = np.asarray(coordinates, dtype=int)
    orbits = np.empty((len(starts), horizon + 1, starts[0].size))
    orbits[:, 0] = starts
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(horizon):
            for s in range(len(starts)):
                orbits[s, k + 1] = fmap(orbits[s, k])
    part = orbits[:, :, coordinates]
    spreads = np.max(np.linalg.norm(part - part[:1], axis=2), axis=0)
    if not spreads[0] > 0:
        raise ParamError("Starts must differ on the tracked coordinates.")
    if not np.all(np.isfinite(spreads)) or spreads[-1] > spreads[0]:
        raise NotContractiveError(
            f"Orbit spread grows from {spreads[0]:.3g} to {spreads[-1]:.3g}."
        )

    usable = []
    for k, spread in enumerate(spreads):
        if not spread >= 1e-8 * spreads[0] or spread == 0:
            break
        usable.append(k)
    if len(usable) >= 2:
        steps = np.array(usable, dtype=float)
        coefficients, residuals = np.polyfit(steps, np.log(spreads[usable]), 1, full=True)[:2]
        rate = float(np.exp(coefficients[0]))
        residual = float(np.sqrt(residuals[0] / len(usable))) if len(residuals) else 0.0
    else:
        rate, residual = 0.0, 0.0

    below = np.flatnonzero(spreads < tol)
    converged = bool(below.size)
    transient = int(below[0]) if converged else horizon
    return CanonicalTrajectory(
        points=part[0, transient:].copy(),
        rate=rate,
        residual=residual,
        spreads=spreads,
        converged=converged,
        transient=transient,
        index=index,
        coordinates=coordinates,
    )


def trajectory_envelope_R(canonicals, horizon=None):
    """``R = max_k max_{m1, m2} ||x^(m1)(k) - x^(m2)(k)||`` over a finite horizon.

    :raises InsufficientSamplesError: no canonical trajectories.
    """
    if not canonicals:
        raise InsufficientSamplesError("Need at least one canonical trajectory.")
    if len({c.dimension for c in canonicals}) != 1:
        raise DimensionError("Canonical trajectories differ in dimension.")
    if horizon is None:
        horizon = max(len(c.points) for c in canonicals) - 1
    envelope = 0.0
    for k in range(horizon + 1):
        points = np.array([c.at(k) for c in canonicals])
        for a, b in itertools.combinations(range(len(points)), 2):
            envelope = max(envelope, float(np.linalg.norm(points[a] - points[b])))
    return envelope


def _hull_distances(path, canonicals):
    if path.shape[1] == 1:
        k = np.arange(len(path))
        columns = np.array([[c.at(i)[0] for i in k] for c in canonicals])
        lo, hi = columns.min(axis=0), columns.max(axis=0)
        x = path[:, 0]
        return np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return np.array(
        [hull_distance(x, [c.at(k) for c in canonicals]) for k, x in enumerate(path)]
    )


def theorem2_bound_check(
    system,
    canonicals,
    trials,
    horizon,
    burn_in=0,
    epsilon=1e-6,
    initials=None,
    seed=None,
    threads=1,
):
    """Check that sample paths end within ``D = λR / (1 - λ)`` of the canonical hull.

    ``trials`` realizations start from ``initials`` (cycled, zeros by
    default) on substreams ``0..trials-1``. The verdict compares the largest
    post-burn-in hull distance with ``D + epsilon``; the transient envelope
    ``D + (d0 - D) λ^k`` over all steps is reported alongside.

    :raises NotContractiveError: ``λ >= 1``.
    """
    seed = config_value("ERGODIC_DEFAULT_SEED", seed)
    rate = max(c.rate for c in canonicals)
    if rate >= 1:
        raise NotContractiveError(f"Largest contraction rate {rate} is not below one.")
    envelope = trajectory_envelope_R(canonicals)
    bound = rate * envelope / (1 - rate)
    coordinates = canonicals[0].coordinates
    if coordinates is None:
        coordinates = system.coordinates("dynamic")
    initials = initials or [system.initial_state()]

    def run(i):
        trajectory = simulate(
            system, initials[i % len(initials)], horizon, RandomStream(seed, i)
        )
        if trajectory.error is not None:
            raise trajectory.error
        distances = _hull_distances(trajectory.states[:, coordinates], canonicals)
        powers = rate ** np.arange(len(distances))
        envelope_excess = distances - (bound + (distances[0] - bound) * powers)
        return float(distances[burn_in:].max()), float(envelope_excess.max())

    results = run_ordered(run, range(trials), threads)
    worst = max(r[0] for r in results)
    transient_excess = max(r[1] for r in results)
    margin = bound + epsilon - worst
    converged = all(c.converged for c in canonicals)
    verdict = _verdict(margin) if converged else INCONCLUSIVE
    return ConditionReport(
        condition="Thm2",
        check="paths stay within D of the hull of canonical trajectories",
        verdict=verdict,
        margin=margin,
        constants={
            "lambda": rate,
            "R": envelope,
            "D": bound,
            "max_hull_distance": worst,
            "transient_excess": transient_excess,
        },
        caveat="R is a finite-horizon estimate of a supremum.",
        method={
            "trials": trials,
            "horizon": horizon,
            "burn_in": burn_in,
            "epsilon": epsilon,
            "seed": seed,
            "canonicals": len(canonicals),
        },
    )


class MetricFactory(object):
    """Contraction metric: a constant ``Θ`` or a state-dependent ``ψ(x)``."""

    def __init__(self, theta=None, psi=None):
        """Initialize metric; exactly one of ``theta`` and ``psi`` is required."""
        if (theta is None) == (psi is None):
            raise ParamError("Give either a constant theta or a function psi.")
        self.theta = None if theta is None else np.atleast_2d(np.asarray(theta, dtype=float))
        self.psi = psi

    @property
    def mode(self):
        """``constant`` or ``state``."""
        return "constant" if self.theta is not None else "state"

    def matrix(self, x):
        """Metric matrix at ``x``."""
        if self.theta is not None:
            return self.theta
        return np.atleast_2d(np.asarray(self.psi(x), dtype=float))


def _check_nonsingular(matrix, x):
    if not np.all(np.isfinite(matrix)) or np.linalg.cond(matrix) > 1e12:
        raise MetricSingularError(f"Metric is singular at {np.array2string(np.asarray(x))}.")


def contraction_metric_check(
    fmap,
    metric,
    grid,
    beta_target,
    jacobian=None,
    h=None,
    slack=None,
    coordinates=None,
):
    """Check ``G^T G - I ⪯ -β I`` at every grid state.

    Constant mode forms ``G = Θ^T J Θ``; state mode forms
    ``G = ψ(F(x)) J ψ(x)^{-1}``. ``J`` is the analytic Jacobian when given,
    a central-difference one otherwise, restricted to ``coordinates``.

    :raises MetricSingularError: ``ψ`` singular at a grid state.
    """
    slack = config_value("ERGODIC_EIGEN_SLACK", slack)
    worst = -np.inf
    eta, rho = np.inf, -np.inf
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    for x in grid:
        full = jacobian(x) if jacobian is not None else numerical_jacobian(fmap, x, h)
        full = np.atleast_2d(np.asarray(full, dtype=float))
        if not np.all(np.isfinite(full)):
            raise NumericalError("jacobian")
        if coordinates is not None:
            full = full[np.ix_(coordinates, coordinates)]
        here = metric.matrix(x)
        _check_nonsingular(here, x)
        if metric.mode == "constant":
            g = here.T @ full @ here
        else:
            there = metric.matrix(fmap(x))
            _check_nonsingular(there, x)
            g = there @ full @ np.linalg.inv(here)
        worst = max(worst, float(np.linalg.eigvalsh(g.T @ g - np.eye(g.shape[1])).max()))
        gram = np.linalg.eigvalsh(here.T @ here)
        eta, rho = min(eta, float(gram.min())), max(rho, float(gram.max()))
    margin = -beta_target + slack - worst
    return ConditionReport(
        condition="Thm2-i",
        check="G^T G - I <= -beta I on the grid",
        verdict=_verdict(margin),
        margin=margin,
        constants={"beta": beta_target, "mu": -worst, "eta": eta, "rho": rho},
        provenance="sampled",
        caveat="Checked on grid states only.",
        method={
            "grid_points": len(grid),
            "jacobian": "analytic" if jacobian is not None else "central-difference",
            "metric": metric.mode,
        },
    )


def lyapunov_decrease_check(
    fmap,
    V,
    alpha1,
    alpha2,
    alpha3,
    canonical,
    sampler,
    samples=None,
    path_length=10,
    coordinates=None,
):
    """Check the sandwich and decrease conditions of a Lyapunov candidate.

    On sampled pairs, ``α1(|z|) <= V(z) <= α2(|z|)`` with ``z = x1 - x2``.
    Along orbits of ``fmap`` started at sampled states,
    ``V(F(x) - x^(m)(k+1)) - V(x - x^(m)(k)) <= -α3(|F(x) - x^(m)(k+1)|)``.
    The margin is the smallest slack over both families.
    """
    samples = config_value("ERGODIC_LIPSCHITZ_MIN_PAIRS", samples)
    if coordinates is None:
        coordinates = (
            canonical.coordinates
            if canonical.coordinates is not None
            else np.arange(canonical.dimension)
        )
    first, second = sampler(samples)[:, coordinates], sampler(samples)[:, coordinates]
    sandwich = np.inf
    for z in first - second:
        s = float(np.linalg.norm(z))
        value = float(V(z))
        sandwich = min(sandwich, value - alpha1(s), alpha2(s) - value)

    decrease = np.inf
    starts = sampler(max(1, samples // path_length))
    for x in starts:
        for k in range(path_length):
            image = np.asarray(fmap(x), dtype=float)
            before = x[coordinates] - canonical.at(k)
            after = image[coordinates] - canonical.at(k + 1)
            change = float(V(after)) - float(V(before))
            decrease = min(decrease, -alpha3(float(np.linalg.norm(after))) - change)
            x = image
    margin = float(min(sandwich, decrease))
    return ConditionReport(
        condition="Prop1",
        check="Lyapunov sandwich and decrease conditions",
        verdict=_verdict(margin),
        margin=margin,
        constants={"sandwich_slack": float(sandwich), "decrease_slack": float(decrease)},
        caveat="Checked on sampled pairs and orbit states only.",
        method={"samples": samples, "path_length": path_length},
    )


def _in_small_set(small_set, vector, coordinates):
    if small_set is None:
        return False
    if callable(small_set):
        return bool(small_set(vector))
    return float(np.linalg.norm(vector[coordinates])) <= float(small_set)


def stochastic_drift_check(
    system,
    V,
    states=None,
    initial=None,
    trials=100,
    horizon=10,
    small_set=None,
    drift_margin=0.0,
    inner=100,
    seed=None,
    cap=None,
):
    """Check ``E[V(x(k+1)) | x(k)] - V(x(k)) <= -K`` outside a small set.

    States are ``states`` when given, otherwise every state of ``trials``
    simulated paths of length ``horizon`` from ``initial``. The expectation
    is exact over all maps when ``|M|`` is at most ``cap`` and a mean of
    ``inner`` sampled steps otherwise. ``small_set`` is a predicate on state
    vectors or a radius around the origin of the dynamic coordinates.
    """
    seed = config_value("ERGODIC_DEFAULT_SEED", seed)
    cap = config_value("ERGODIC_ENUMERATION_CAP", cap)
    if states is None:
        initial = initial if initial is not None else system.initial_state()
        states = []
        for i in range(trials):
            trajectory = simulate(system, initial, horizon, RandomStream(seed, i))
            states.extend(trajectory.states)
    states = [as_vector(s) for s in states]
    exact = system.index_set_size <= cap
    if exact:
        indices = enumerate_map_indices(system, cap)
        maps = [CompositeMap(system, m) for m in indices]
    coordinates = system.coordinates("dynamic")

    drifts, errors = [], []
    for i, x in enumerate(states):
        current = float(V(x))
        if exact:
            pi = signal(system, x)
            expected = sum(
                selection_probability(system, m, pi) * float(V(f(x)))
                for m, f in zip(indices, maps)
            )
            drifts.append(expected - current)
            errors.append(0.0)
        else:
            stream = RandomStream(seed, trials + i)
            values = np.array(
                [float(V(as_vector(step(system, x, stream)[0]))) for _ in range(inner)]
            )
            drifts.append(float(values.mean()) - current)
            errors.append(float(values.std(ddof=1) / np.sqrt(inner)))
    drifts, errors = np.array(drifts), np.array(errors)
    outside = np.array([not _in_small_set(small_set, x, coordinates) for x in states])
    if not np.any(outside):
        return ConditionReport(
            condition="Prop2",
            check="stochastic drift outside the small set",
            verdict=INCONCLUSIVE,
            caveat="Every sampled state lies in the small set.",
            method={"states": len(states), "exact": exact},
            details={"drifts": drifts, "standard_errors": errors},
        )
    worst = float(drifts[outside].max())
    margin = -drift_margin - worst
    return ConditionReport(
        condition="Prop2",
        check="stochastic drift outside the small set",
        verdict=_verdict(margin),
        margin=margin,
        constants={
            "max_drift": worst,
            "drift_margin": drift_margin,
            "max_standard_error": float(errors[outside].max()),
        },
        provenance="analytic" if exact else "sampled",
        caveat="Checked at sampled states only.",
        method={"states": len(states), "exact": exact, "inner": None if exact else inner},
        details={"drifts": drifts, "standard_errors": errors},
    )


def incremental_stability_test(fmap, sampler, pairs=100, horizon=20, coordinates=None):
    """Largest ratio ``|F^k(x1) - F^k(x2)| / |x1 - x2|`` over sampled pairs, per ``k``.

    Passes when the ratio at the horizon is below one.
    """
    first, second = sampler(pairs), sampler(pairs)
    if coordinates is None:
        coordinates = np.arange(first.shape[1])
    gaps = np.linalg.norm(first[:, coordinates] - second[:, coordinates], axis=1)
    if not np.max(gaps) > 0:
        raise SamplerError("Degenerate sampler: all sampled points coincide.")
    keep = gaps > 0
    first, second, gaps = first[keep], second[keep], gaps[keep]
    ratios = []
    for _ in range(horizon):
        first = _apply_rows(fmap, first)
        second = _apply_rows(fmap, second)
        spread = np.linalg.norm(first[:, coordinates] - second[:, coordinates], axis=1)
        ratios.append(float(np.max(spread / gaps)))
    margin = 1.0 - ratios[-1]
    return ConditionReport(
        condition="incremental-stability",
        check="orbit distances shrink uniformly",
        verdict=_verdict(margin),
        margin=margin,
        constants={"final_ratio": ratios[-1]},
        caveat=SAMPLED_CAVEAT,
        method={"pairs": int(keep.sum()), "horizon": horizon},
        details={"ratios": ratios},
    )
