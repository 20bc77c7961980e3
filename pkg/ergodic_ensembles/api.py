# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Closed-loop ensembles as iterated random functions.

An ensemble of ``N`` agents is driven by a broadcast signal ``π``. At every
step each agent picks one of its transition maps and one of its output maps
with probabilities that depend on ``π``; the aggregate output is filtered and
fed to a controller which produces the next signal. For a fixed choice of all
maps the closed loop is a deterministic map ``F_m`` of the stacked state, so
the whole system is an iterated random function with state dependent
probabilities.

Maps of an :class:`AgentSpec` are vectorized: agents sharing one spec are
stepped as a batch and every map receives a ``(k, n_i)`` array of agent
states, returning ``(k, n_i)`` (transition) or ``(k, d)`` (output) arrays.
Use :func:`rowwise` to wrap a map written for a single state vector.

The stacked state vector is laid out as
``(x_1, ..., x_N, x_f, x_c, y_prev)`` where ``y_prev`` buffers the previous
aggregate output so that the signal is a function of the state alone.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DimensionError,
    EnumerationCapError,
    NumericalError,
    ParamError,
    ProbabilityLawError,
    SignalRangeError,
)
from .utils import MASK64, config_value, derive_seed

COORDINATE_SELECTORS = ("agents", "filter", "controller", "output", "dynamic", "all")


def rowwise(fn):
    """Vectorize a map written for a single state vector."""

    def vectorized(rows):
        rows = np.atleast_2d(rows)
        return np.array([np.atleast_1d(fn(row)) for row in rows], dtype=float)

    return vectorized


def _finite(value, component):
    value = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(value)):
        raise NumericalError(component)
    return value


def _law(fn, pi, component, tolerance):
    p = np.asarray(fn(pi), dtype=float).ravel()
    if (
        p.size == 0
        or not np.all(np.isfinite(p))
        or p.min() < -tolerance
        or abs(p.sum() - 1.0) > tolerance
    ):
        raise ProbabilityLawError(
            f"{component} at signal {np.array2string(pi)} is not on the simplex: "
            f"{np.array2string(p)}"
        )
    return p


def signal_grid(lower, upper, points=None):
    """Regular grid of about ``points`` signals over the box ``[lower, upper]``."""
    points = config_value("ERGODIC_SIGNAL_GRID_POINTS", points)
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    per_axis = max(1, int(np.ceil(points ** (1.0 / lower.size))))
    axes = [
        np.array([lo]) if lo == hi else np.linspace(lo, hi, per_axis)
        for lo, hi in zip(lower, upper)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class RandomStream(object):
    """Reproducible random substream of a master seed.

    The substream seed is the SplitMix64 finalizer applied to
    ``master_seed XOR (stream_index * 0x9E3779B97F4A7C15)``; it seeds a PCG64
    generator, so alternate implementations can reproduce every draw.
    """

    def __init__(self, master_seed, stream_index=0):
        """Initialize stream."""
        self.master_seed = int(master_seed) & MASK64
        self.stream_index = int(stream_index)
        self.seed = derive_seed(self.master_seed, self.stream_index)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size):
        """Draw ``size`` uniforms on ``[0, 1)``."""
        return self.generator.random(size)

    def substream(self, stream_index):
        """Fresh stream with the same master seed and another index."""
        return RandomStream(self.master_seed, stream_index)

    def __repr__(self):
        """Representation."""
        return (
            f"RandomStream(master_seed={self.master_seed}, "
            f"stream_index={self.stream_index})"
        )


def as_stream(rng):
    """Accept a :class:`RandomStream` or a master seed."""
    if isinstance(rng, RandomStream):
        return rng
    return RandomStream(rng)


@dataclass(frozen=True, eq=False)
class AgentSpec:
    """One agent: transition and output maps chosen by signal-dependent laws."""

    state_dim: int
    transition_maps: tuple
    output_maps: tuple
    transition_probs: object
    output_probs: object
    output_dim: int = 1
    name: str = "agent"

    def __post_init__(self):
        """Validate counts."""
        object.__setattr__(self, "transition_maps", tuple(self.transition_maps))
        object.__setattr__(self, "output_maps", tuple(self.output_maps))
        if self.state_dim < 1 or self.output_dim < 1:
            raise ParamError(f"{self.name}: dimensions must be positive.")
        if not self.transition_maps or not self.output_maps:
            raise ParamError(f"{self.name}: needs at least one map of each kind.")

    @property
    def w(self):
        """Number of transition maps."""
        return len(self.transition_maps)

    @property
    def h(self):
        """Number of output maps."""
        return len(self.output_maps)


@dataclass(frozen=True, eq=False)
class FilterSpec:
    """Filter ``x_f' = W_f(x_f, y)``, ``ŷ = H_f(x_f, y)``."""

    state_dim: int
    transition: object
    output: object
    input_dim: int = 1
    output_dim: int = 1
    name: str = "filter"


@dataclass(frozen=True, eq=False)
class ControllerSpec:
    """Controller ``x_c' = W_c(x_c, ŷ, r)``, ``π = H_c(x_c, ŷ, r)`` in a box."""

    state_dim: int
    transition: object
    output: object
    reference: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    input_dim: int = 1
    name: str = "controller"

    def __post_init__(self):
        """Normalize arrays and check the signal box."""
        for key in ("reference", "lower", "upper"):
            object.__setattr__(
                self, key, np.atleast_1d(np.asarray(getattr(self, key), dtype=float))
            )
        if self.lower.shape != self.upper.shape:
            raise ParamError(f"{self.name}: signal box bounds differ in shape.")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ParamError(f"{self.name}: signal box must be compact.")
        if np.any(self.lower > self.upper):
            raise ParamError(f"{self.name}: empty signal box.")

    @property
    def signal_dim(self):
        """Dimension of the signal set."""
        return self.lower.size


@dataclass(frozen=True, order=True)
class MapIndex:
    """Choice of every agent's transition and output map (0-based)."""

    transition_choices: tuple
    output_choices: tuple


@dataclass(frozen=True, eq=False)
class SystemState:
    """State ``(x_1..x_N, x_f, x_c, y_prev)`` of a closed loop."""

    agents: np.ndarray
    filter: np.ndarray
    controller: np.ndarray
    output: np.ndarray

    @property
    def vector(self):
        """Stacked state vector."""
        return np.concatenate([self.agents, self.filter, self.controller, self.output])


def as_vector(value):
    """Flat float vector of a state or array."""
    if isinstance(value, SystemState):
        return value.vector
    return np.atleast_1d(np.asarray(value, dtype=float)).ravel()


class _AgentGroup(object):
    """Agents sharing one spec, stepped together."""

    def __init__(self, spec, members, take):
        self.spec = spec
        self.members = members
        self.take = take


class _Layout(object):
    """Offsets of the stacked state vector."""

    def __init__(self, system):
        agents = system.agents
        dims = [agent.state_dim for agent in agents]
        offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        self.agent_offsets = offsets
        n_agents = int(offsets[-1])
        n_f = system.filter.state_dim
        n_c = system.controller.state_dim
        self.output_dim = agents[0].output_dim
        self.agent_slice = slice(0, n_agents)
        self.filter_slice = slice(n_agents, n_agents + n_f)
        self.controller_slice = slice(n_agents + n_f, n_agents + n_f + n_c)
        self.output_slice = slice(n_agents + n_f + n_c, n_agents + n_f + n_c + self.output_dim)
        self.dimension = n_agents + n_f + n_c + self.output_dim

        order, members = [], {}
        for i, agent in enumerate(agents):
            if id(agent) not in members:
                order.append(agent)
                members[id(agent)] = []
            members[id(agent)].append(i)
        self.groups = []
        for spec in order:
            ids = np.array(members[id(spec)], dtype=int)
            take = offsets[ids][:, None] + np.arange(spec.state_dim)[None, :]
            self.groups.append(_AgentGroup(spec, ids, take))


@dataclass(frozen=True, eq=False)
class ClosedLoopSystem:
    """Agents, filter and controller wired into one feedback loop.

    Descriptions are immutable and can be shared between threads.
    """

    agents: tuple
    filter: FilterSpec
    controller: ControllerSpec
    name: str = "system"

    def __post_init__(self):
        """Check dimensions and probability laws."""
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise ParamError("A closed loop needs at least one agent.")
        d = self.agents[0].output_dim
        if any(agent.output_dim != d for agent in self.agents):
            raise DimensionError("All agents must share the output dimension.")
        if self.filter.input_dim != d:
            raise DimensionError(
                f"Filter input dimension {self.filter.input_dim} does not match "
                f"aggregate output dimension {d}."
            )
        if self.controller.input_dim != self.filter.output_dim:
            raise DimensionError(
                f"Controller input dimension {self.controller.input_dim} does not "
                f"match filter output dimension {self.filter.output_dim}."
            )
        self._check_maps()
        self.check_laws()

    @cached_property
    def layout(self):
        """Precomputed offsets and agent groups."""
        return _Layout(self)

    @property
    def n_agents(self):
        """Number of agents."""
        return len(self.agents)

    @property
    def dimension(self):
        """Dimension of the stacked state vector."""
        return self.layout.dimension

    @property
    def signal_dim(self):
        """Dimension of the signal set."""
        return self.controller.signal_dim

    @property
    def index_set_size(self):
        """``|M| = prod(w_i) * prod(h_i)``."""
        size = 1
        for agent in self.agents:
            size *= agent.w * agent.h
        return size

    def _check_maps(self):
        def shaped(value, shape, component):
            value = np.asarray(value, dtype=float)
            if value.shape != shape:
                raise DimensionError(
                    f"{component} returned shape {value.shape}, expected {shape}."
                )

        for group in self.layout.groups:
            spec = group.spec
            sample = np.zeros((1, spec.state_dim))
            for j, fn in enumerate(spec.transition_maps):
                shaped(fn(sample), (1, spec.state_dim), f"{spec.name}.transition[{j}]")
            for j, fn in enumerate(spec.output_maps):
                shaped(fn(sample), (1, spec.output_dim), f"{spec.name}.output[{j}]")
        d = self.layout.output_dim
        x_f = np.zeros(self.filter.state_dim)
        shaped(
            self.filter.transition(x_f, np.zeros(d)),
            (self.filter.state_dim,),
            "filter.transition",
        )
        y_hat = np.zeros(self.filter.output_dim)
        shaped(self.filter.output(x_f, np.zeros(d)), y_hat.shape, "filter.output")
        x_c = np.zeros(self.controller.state_dim)
        ref = self.controller.reference
        shaped(
            self.controller.transition(x_c, y_hat, ref),
            (self.controller.state_dim,),
            "controller.transition",
        )
        shaped(
            self.controller.output(x_c, y_hat, ref),
            (self.signal_dim,),
            "controller.output",
        )

    def check_laws(self, points=None, tolerance=None):
        """Check every probability law on a grid over the signal box."""
        tolerance = config_value("ERGODIC_SIMPLEX_TOLERANCE", tolerance)
        for pi in signal_grid(self.controller.lower, self.controller.upper, points):
            self.laws(pi, tolerance)

    def laws(self, pi, tolerance=None):
        """Transition and output laws of every agent group at signal ``pi``."""
        tolerance = config_value("ERGODIC_SIMPLEX_TOLERANCE", tolerance)
        pi = np.atleast_1d(np.asarray(pi, dtype=float))
        return [
            (
                _law(group.spec.transition_probs, pi, f"{group.spec.name}.p", tolerance),
                _law(group.spec.output_probs, pi, f"{group.spec.name}.p'", tolerance),
            )
            for group in self.layout.groups
        ]

    def coordinates(self, selector=None):
        """Indices of the state vector picked by a named selector or index list."""
        if selector is None:
            selector = "dynamic"
        if not isinstance(selector, str):
            coords = np.asarray(selector, dtype=int).ravel()
            if coords.size and (coords.min() < 0 or coords.max() >= self.dimension):
                raise DimensionError(f"Coordinates {coords} outside the state vector.")
            return coords
        lay = self.layout
        span = {
            "agents": lay.agent_slice,
            "filter": lay.filter_slice,
            "controller": lay.controller_slice,
            "output": lay.output_slice,
            "dynamic": slice(0, lay.output_slice.start),
            "all": slice(0, lay.dimension),
        }
        if selector not in span:
            raise ValueError(
                f"Unknown coordinate selector {selector!r}; "
                f"expected one of {', '.join(COORDINATE_SELECTORS)}."
            )
        return np.arange(lay.dimension)[span[selector]]

    def initial_state(
        self, agent_states=None, filter_state=None, controller_state=None, output=None
    ):
        """Build a state, defaulting every block to zeros."""
        lay = self.layout

        def block(value, size, label):
            if value is None:
                return np.zeros(size)
            if isinstance(value, (list, tuple)) and value:
                value = np.concatenate(
                    [np.atleast_1d(np.asarray(v, dtype=float)).ravel() for v in value]
                )
            array = np.atleast_1d(np.asarray(value, dtype=float)).ravel()
            if array.size != size:
                raise DimensionError(f"{label} block has size {array.size}, expected {size}.")
            return array

        return SystemState(
            agents=block(agent_states, lay.agent_slice.stop, "agents"),
            filter=block(filter_state, self.filter.state_dim, "filter"),
            controller=block(controller_state, self.controller.state_dim, "controller"),
            output=block(output, lay.output_dim, "output"),
        )

    def state_from_vector(self, vector):
        """Split a stacked vector into a :class:`SystemState`."""
        v = as_vector(vector)
        lay = self.layout
        if v.size != lay.dimension:
            raise DimensionError(f"State vector has size {v.size}, expected {lay.dimension}.")
        return SystemState(
            agents=v[lay.agent_slice].copy(),
            filter=v[lay.filter_slice].copy(),
            controller=v[lay.controller_slice].copy(),
            output=v[lay.output_slice].copy(),
        )

    def agent_state(self, state, i):
        """State of agent ``i``."""
        offsets = self.layout.agent_offsets
        return as_vector(state)[offsets[i] : offsets[i + 1]]


def _state_vector(system, state):
    v = as_vector(state)
    if v.size != system.dimension:
        raise DimensionError(f"State has size {v.size}, expected {system.dimension}.")
    if not np.all(np.isfinite(v)):
        raise NumericalError("state")
    return v


def _signal(system, v, tolerance):
    lay = system.layout
    ctrl = system.controller
    x_f, x_c, y_prev = v[lay.filter_slice], v[lay.controller_slice], v[lay.output_slice]
    y_hat = _finite(system.filter.output(x_f, y_prev), "filter.output")
    pi = np.atleast_1d(
        _finite(ctrl.output(x_c, y_hat, ctrl.reference), "controller.output")
    )
    excess = max(np.max(ctrl.lower - pi), np.max(pi - ctrl.upper))
    if excess > tolerance:
        raise SignalRangeError(
            f"Signal {np.array2string(pi)} leaves the box "
            f"[{np.array2string(ctrl.lower)}, {np.array2string(ctrl.upper)}]."
        )
    return np.clip(pi, ctrl.lower, ctrl.upper)


def _draw(law, u):
    cdf = np.cumsum(law)
    return np.minimum(np.searchsorted(cdf, u, side="right"), law.size - 1)


def _choose(system, laws, u):
    n = system.n_agents
    transitions = np.empty(n, dtype=np.int64)
    outputs = np.empty(n, dtype=np.int64)
    for group, (p, q) in zip(system.layout.groups, laws):
        transitions[group.members] = _draw(p, u[group.members, 0])
        outputs[group.members] = _draw(q, u[group.members, 1])
    return transitions, outputs


def _rows(values, rows, members, component):
    values = np.asarray(values, dtype=float)
    bad = ~np.all(np.isfinite(values.reshape(values.shape[0], -1)), axis=1)
    if np.any(bad):
        agent = int(members[rows][np.argmax(bad)])
        raise NumericalError(f"agent[{agent}].{component}")
    return values


def _advance(system, v, transitions, outputs):
    lay = system.layout
    old = v[lay.agent_slice]
    new = np.empty_like(old)
    y = np.zeros(lay.output_dim)
    for group in lay.groups:
        spec = group.spec
        states = old[group.take]
        chosen_t = transitions[group.members]
        chosen_o = outputs[group.members]
        moved = np.empty_like(states)
        for j in np.unique(chosen_t):
            rows = chosen_t == j
            moved[rows] = np.reshape(
                _rows(spec.transition_maps[j](states[rows]), rows, group.members,
                      f"transition[{j}]"),
                (int(rows.sum()), spec.state_dim),
            )
        for j in np.unique(chosen_o):
            rows = chosen_o == j
            emitted = _rows(spec.output_maps[j](states[rows]), rows, group.members,
                            f"output[{j}]")
            y += np.reshape(emitted, (int(rows.sum()), lay.output_dim)).sum(axis=0)
        new[group.take] = moved
    ctrl = system.controller
    x_f, x_c = v[lay.filter_slice], v[lay.controller_slice]
    filter_next = _finite(system.filter.transition(x_f, y), "filter.transition")
    y_hat = _finite(system.filter.output(x_f, y), "filter.output")
    controller_next = _finite(
        ctrl.transition(x_c, y_hat, ctrl.reference), "controller.transition"
    )
    return np.concatenate([new, np.ravel(filter_next), np.ravel(controller_next), y])


def _check_index(system, m):
    if len(m.transition_choices) != system.n_agents or len(m.output_choices) != system.n_agents:
        raise DimensionError("Map index must name one choice per agent.")
    for i, agent in enumerate(system.agents):
        if not (0 <= m.transition_choices[i] < agent.w and 0 <= m.output_choices[i] < agent.h):
            raise DimensionError(f"Map index out of range for agent {i}: {m}.")


def signal(system, state, tolerance=None):
    """Signal ``π = H_c(x_c, H_f(x_f, y_prev), r)`` clamped to the signal box.

    :raises NumericalError: non-finite filter or controller output.
    :raises SignalRangeError: output outside the box beyond the tolerance.
    """
    tolerance = config_value("ERGODIC_SIGNAL_TOLERANCE", tolerance)
    return _signal(system, _state_vector(system, state), tolerance)


def sample_map_index(system, pi, rng, tolerance=None):
    """Sample a map index at signal ``pi``.

    Each agent's transition and output choice is drawn independently by
    inverse CDF; exactly two uniforms are consumed per agent, agent ``i``
    using draw ``2i`` for its transition and ``2i + 1`` for its output.
    """
    laws = system.laws(pi, tolerance)
    u = as_stream(rng).uniform(2 * system.n_agents).reshape(system.n_agents, 2)
    transitions, outputs = _choose(system, laws, u)
    return MapIndex(tuple(int(j) for j in transitions), tuple(int(j) for j in outputs))


def selection_probability(system, m, pi):
    """Probability ``q_m(π)`` of selecting the composite map ``m``."""
    _check_index(system, m)
    laws = system.laws(pi)
    probability = 1.0
    for group, (p, q) in zip(system.layout.groups, laws):
        for i in group.members:
            probability *= p[m.transition_choices[i]] * q[m.output_choices[i]]
    return float(probability)


def enumerate_map_indices(system, cap=None):
    """All map indices in lexicographic order.

    :raises EnumerationCapError: the index set is larger than ``cap``.
    """
    cap = config_value("ERGODIC_ENUMERATION_CAP", cap)
    size = system.index_set_size
    if size > cap:
        raise EnumerationCapError(
            f"Index set has {size} maps, above the enumeration cap {cap}; "
            "use sampling instead."
        )
    transitions = itertools.product(*[range(agent.w) for agent in system.agents])
    transitions = list(transitions)
    outputs = list(itertools.product(*[range(agent.h) for agent in system.agents]))
    return [MapIndex(t, o) for t in transitions for o in outputs]


def apply_composite_map(system, m, state):
    """Apply the deterministic composite map ``F_m`` to a state."""
    _check_index(system, m)
    v = _state_vector(system, state)
    return system.state_from_vector(
        _advance(
            system,
            v,
            np.asarray(m.transition_choices, dtype=np.int64),
            np.asarray(m.output_choices, dtype=np.int64),
        )
    )


@dataclass(frozen=True, eq=False)
class CompositeMap:
    """``F_m`` as a callable on stacked state vectors."""

    system: ClosedLoopSystem
    index: MapIndex

    def __post_init__(self):
        """Validate the index."""
        _check_index(self.system, self.index)

    def __call__(self, vector):
        """Apply the map."""
        return _advance(
            self.system,
            as_vector(vector),
            np.asarray(self.index.transition_choices, dtype=np.int64),
            np.asarray(self.index.output_choices, dtype=np.int64),
        )


def step(system, state, rng, index=None):
    """One transition of the chain: ``(next_state, π, m)``.

    With ``index`` the map is forced, but the stream still advances by its
    fixed number of draws.
    """
    v = _state_vector(system, state)
    pi = _signal(system, v, config_value("ERGODIC_SIGNAL_TOLERANCE"))
    sampled = sample_map_index(system, pi, rng)
    m = sampled if index is None else index
    return apply_composite_map(system, m, v), pi, m


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sample path of the chain.

    ``states`` holds stacked state vectors for ``k = 0..K``, ``signals`` the
    signal at each of those states and the choice arrays the sampled map
    index of each transition.
    """

    system: ClosedLoopSystem
    states: np.ndarray
    signals: np.ndarray
    transition_choices: np.ndarray
    output_choices: np.ndarray
    seed: int
    stream_index: int
    failure_index: int = None
    error: Exception = None

    @property
    def horizon(self):
        """Number of recorded transitions."""
        return len(self.states) - 1

    @property
    def selections(self):
        """Sampled map indices ``σ(0..K-1)``."""
        return [
            MapIndex(tuple(int(j) for j in t), tuple(int(j) for j in o))
            for t, o in zip(self.transition_choices, self.output_choices)
        ]

    def state(self, k):
        """State at step ``k``."""
        return self.system.state_from_vector(self.states[k])

    def project(self, selector=None):
        """State vectors restricted to selected coordinates."""
        return self.states[:, self.system.coordinates(selector)]

    def __len__(self):
        """Number of recorded states."""
        return len(self.states)


def simulate(system, initial, horizon, rng):
    """Run the chain for ``horizon`` steps.

    A :class:`NumericalError` stops the run; the returned trajectory then
    holds the prefix and records the failure index and error.
    """
    if horizon < 0:
        raise ValueError("Horizon must be non-negative.")
    rng = as_stream(rng)
    signal_tolerance = config_value("ERGODIC_SIGNAL_TOLERANCE")
    simplex_tolerance = config_value("ERGODIC_SIMPLEX_TOLERANCE")
    n = system.n_agents
    v = _state_vector(system, initial)

    states = np.empty((horizon + 1, system.dimension))
    signals = np.full((horizon + 1, system.signal_dim), np.nan)
    transitions = np.empty((horizon, n), dtype=np.int64)
    outputs = np.empty((horizon, n), dtype=np.int64)
    states[0] = v
    failure, error = None, None
    for k in range(horizon + 1):
        try:
            pi = _signal(system, v, signal_tolerance)
            signals[k] = pi
            if k == horizon:
                break
            laws = system.laws(pi, simplex_tolerance)
            u = rng.uniform(2 * n).reshape(n, 2)
            chosen_t, chosen_o = _choose(system, laws, u)
            v = _advance(system, v, chosen_t, chosen_o)
        except NumericalError as exc:
            failure, error = k, NumericalError(exc.component, k)
            break
        transitions[k], outputs[k], states[k + 1] = chosen_t, chosen_o, v

    stop = horizon if failure is None else failure
    return Trajectory(
        system=system,
        states=states[: stop + 1],
        signals=signals[: stop + 1],
        transition_choices=transitions[:stop],
        output_choices=outputs[:stop],
        seed=rng.master_seed,
        stream_index=rng.stream_index,
        failure_index=failure,
        error=error,
    )
