# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Closed-loop core tests."""

import itertools

import numpy as np
import pytest

from ergodic_ensembles.api import (
    AgentSpec,
    ClosedLoopSystem,
    ControllerSpec,
    MapIndex,
    RandomStream,
    apply_composite_map,
    enumerate_map_indices,
    rowwise,
    sample_map_index,
    selection_probability,
    signal,
    simulate,
    step,
)
from ergodic_ensembles.errors import (
    DimensionError,
    EnumerationCapError,
    NumericalError,
    ParamError,
    ProbabilityLawError,
    SignalRangeError,
)
from ergodic_ensembles.expressions import AffineLaw, affine_map, identity_map
from ergodic_ensembles.utils import derive_seed
from ergodic_ensembles.zoo.linear_filter import make_linear_filter
from ergodic_ensembles.zoo.max_window_filter import (
    MaxWindowFilterParams,
    make_max_window_filter,
)


def test_random_stream():
    """Test substreams are reproducible and distinct."""
    first = RandomStream(7, 3).uniform(5)
    assert np.array_equal(first, RandomStream(7, 3).uniform(5))
    assert not np.array_equal(first, RandomStream(7, 4).uniform(5))
    assert not np.array_equal(first, RandomStream(8, 3).uniform(5))
    assert RandomStream(7, 3).seed == derive_seed(7, 3)
    stream = RandomStream(7, 3)
    assert stream.substream(4).seed == RandomStream(7, 4).seed


def test_signal_tracking(make_system, tracking_controller):
    """Test the signal composes filter and controller."""
    system = make_system(controller=tracking_controller())
    state = system.initial_state(agent_states=[5.0], output=[0.3])
    assert signal(system, state) == pytest.approx([0.7])


def test_signal_constant(twomap):
    """Test a constant controller broadcasts its value everywhere."""
    for x in (-3.0, 0.0, 12.5):
        state = twomap.initial_state(agent_states=[x], output=[x])
        assert signal(twomap, state) == pytest.approx([0.5])


def test_signal_max_window(make_system, tracking_controller):
    """Test the signal reads the maximum of the stored window."""
    system = make_system(
        loop_filter=make_max_window_filter(MaxWindowFilterParams(window=3)),
        controller=tracking_controller(),
    )
    state = system.initial_state(filter_state=[0.2, 0.9, 0.4])
    assert signal(system, state) == pytest.approx([0.1])


def test_signal_errors(make_system, tracking_controller):
    """Test out-of-box and non-finite signals."""
    system = make_system(controller=tracking_controller(lower=0.0, upper=1.0))
    with pytest.raises(SignalRangeError):
        signal(system, system.initial_state(output=[5.0]))
    # Within tolerance the signal is clamped
    clamped = signal(system, system.initial_state(output=[1.0 + 1e-12]))
    assert clamped[0] == 0.0
    with pytest.raises(NumericalError):
        signal(system, system.initial_state(output=[np.inf]))


def test_system_validation(scalar_agent, make_system):
    """Test laws and dimensions are checked on construction."""
    with pytest.raises(ProbabilityLawError):
        make_system(agents=[scalar_agent((0.5, 0.5), (0.0, 1.0), AffineLaw([0.6, 0.6]))])
    with pytest.raises(ProbabilityLawError):
        make_system(agents=[scalar_agent((0.5, 0.5), (0.0, 1.0), AffineLaw([1.2, -0.2]))])
    with pytest.raises(DimensionError):
        make_system(loop_filter=make_linear_filter(0.5, 0.5, dim=2))
    with pytest.raises(ParamError):
        ClosedLoopSystem(
            agents=(),
            filter=make_linear_filter(0.5, 0.5),
            controller=make_system().controller,
        )
    with pytest.raises(ParamError):
        ControllerSpec(
            state_dim=0,
            transition=None,
            output=None,
            reference=[0.0],
            lower=[1.0],
            upper=[0.0],
        )
    with pytest.raises(ParamError):
        ControllerSpec(
            state_dim=0,
            transition=None,
            output=None,
            reference=[0.0],
            lower=[0.0],
            upper=[np.inf],
        )


def test_state_layout(make_system, scalar_agent):
    """Test the stacked state layout and coordinate selectors."""
    system = make_system(
        agents=[scalar_agent(), scalar_agent()],
        loop_filter=make_max_window_filter(MaxWindowFilterParams(window=3)),
    )
    assert system.dimension == 2 + 3 + 0 + 1
    assert list(system.coordinates("agents")) == [0, 1]
    assert list(system.coordinates("filter")) == [2, 3, 4]
    assert list(system.coordinates("controller")) == []
    assert list(system.coordinates("output")) == [5]
    assert list(system.coordinates("dynamic")) == [0, 1, 2, 3, 4]
    assert list(system.coordinates([5, 0])) == [5, 0]
    with pytest.raises(ValueError):
        system.coordinates("everything")
    with pytest.raises(DimensionError):
        system.coordinates([6])

    state = system.initial_state(agent_states=[[1.0], [2.0]], output=[3.0])
    assert list(state.vector) == [1.0, 2.0, 0.0, 0.0, 0.0, 3.0]
    assert list(system.state_from_vector(state.vector).agents) == [1.0, 2.0]
    assert system.agent_state(state, 1) == pytest.approx([2.0])
    with pytest.raises(DimensionError):
        system.initial_state(agent_states=[1.0])
    with pytest.raises(DimensionError):
        system.state_from_vector(np.zeros(5))


def test_sample_map_index_degenerate(make_system, scalar_agent):
    """Test a degenerate law always selects the same map."""
    system = make_system(
        agents=[scalar_agent((0.5, 0.5), (0.0, 1.0), AffineLaw([1.0, 0.0]))]
    )
    stream = RandomStream(1)
    for _ in range(100):
        assert sample_map_index(system, [0.5], stream) == MapIndex((0,), (0,))


def test_sample_map_index_frequencies(make_system, scalar_agent):
    """Test sampled frequencies follow the selection laws."""
    draws = 20000
    system = make_system(
        agents=[scalar_agent((0.5, 0.5), (0.0, 1.0), AffineLaw([0.3, 0.7]))]
    )
    stream = RandomStream(11)
    hits = sum(
        sample_map_index(system, [0.5], stream).transition_choices[0] == 0
        for _ in range(draws)
    )
    assert hits / draws == pytest.approx(0.3, abs=0.02)

    pair = make_system(
        agents=[scalar_agent((0.5, 0.5), (0.0, 1.0)), scalar_agent((0.5, 0.5), (0.0, 1.0))]
    )
    counts = {}
    for _ in range(draws):
        m = sample_map_index(pair, [0.5], stream)
        counts[m.transition_choices] = counts.get(m.transition_choices, 0) + 1
    assert sorted(counts) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    for count in counts.values():
        assert count / draws == pytest.approx(0.25, abs=0.02)


def test_selection_probability(make_system, scalar_agent):
    """Test composite selection probabilities."""
    system = make_system(
        agents=[scalar_agent((0.5, 0.5), (0.0, 1.0), AffineLaw([0.3, 0.7]))]
    )
    assert selection_probability(system, MapIndex((1,), (0,)), [0.5]) == pytest.approx(0.7)

    pair = make_system(
        agents=[scalar_agent((0.5, 0.5), (0.0, 1.0)), scalar_agent((0.5, 0.5), (0.0, 1.0))]
    )
    for m in enumerate_map_indices(pair):
        assert selection_probability(pair, m, [0.5]) == pytest.approx(0.25)

    law = AffineLaw([0.5, 0.5], [[0.2], [-0.2]])
    varying = make_system(
        agents=[
            scalar_agent((0.5, 0.5), (0.0, 1.0), law),
            scalar_agent((0.5, 0.2, 0.1), (0.0, 1.0, 2.0), outputs=[identity_map(1)] * 2),
        ],
    )
    rng = np.random.default_rng(3)
    for pi in rng.uniform(0.0, 1.0, 10):
        total = sum(
            selection_probability(varying, m, [pi]) for m in enumerate_map_indices(varying)
        )
        assert total == pytest.approx(1.0, abs=1e-12)


def test_enumerate_map_indices(make_system, scalar_agent, twomap):
    """Test the index set size and order."""
    assert len(enumerate_map_indices(twomap)) == 2

    system = make_system(
        agents=[
            scalar_agent((0.5, 0.5), (0.0, 1.0)),
            scalar_agent((0.5, 0.2, 0.1), (0.0, 1.0, 2.0), outputs=[identity_map(1)] * 2),
        ],
    )
    indices = enumerate_map_indices(system)
    assert system.index_set_size == 12
    assert len(indices) == 12
    assert len(set(indices)) == 12
    assert indices[0] == MapIndex((0, 0), (0, 0))
    assert indices == sorted(indices)
    with pytest.raises(EnumerationCapError):
        enumerate_map_indices(system, cap=5)

    deterministic = make_system()
    assert enumerate_map_indices(deterministic) == [MapIndex((0,), (0,))]


def test_apply_composite_map(scalar_agent, make_system):
    """Test the deterministic composite map."""

    def keep(x_c, y_hat, r):
        return np.asarray(x_c, dtype=float)

    def constant(x_c, y_hat, r):
        return np.array([0.5])

    controller = ControllerSpec(
        state_dim=1,
        transition=keep,
        output=constant,
        reference=[0.0],
        lower=[0.0],
        upper=[1.0],
    )
    system = make_system(controller=controller)
    state = system.initial_state(agent_states=[2.0], controller_state=[0.0])
    image = apply_composite_map(system, MapIndex((0,), (0,)), state)
    assert image.agents == pytest.approx([1.0])
    assert image.output == pytest.approx([2.0])
    assert image.controller == pytest.approx([0.0])

    pair = make_system(agents=[scalar_agent((1.0,), (0.0,))] * 2)
    image = apply_composite_map(
        pair, MapIndex((0, 0), (0, 0)), pair.initial_state(agent_states=[1.0, 2.0])
    )
    assert image.output == pytest.approx([3.0])

    fixed = make_system(agents=[scalar_agent((0.5,), (1.0,))])
    image = apply_composite_map(
        fixed, MapIndex((0,), (0,)), fixed.initial_state(agent_states=[2.0])
    )
    assert image.agents == pytest.approx([2.0])

    with pytest.raises(DimensionError):
        apply_composite_map(fixed, MapIndex((1,), (0,)), fixed.initial_state())
    with pytest.raises(DimensionError):
        apply_composite_map(fixed, MapIndex((0, 0), (0, 0)), fixed.initial_state())


def test_step(twomap, make_system):
    """Test one transition of the chain."""
    state = twomap.initial_state()
    for seed in range(20):
        following, pi, m = step(twomap, state, RandomStream(seed))
        assert following.agents[0] in (0.0, 1.0)
        assert following.agents[0] == m.transition_choices[0]
        assert pi == pytest.approx([0.5])

    first = step(twomap, state, RandomStream(5))
    second = step(twomap, state, RandomStream(5))
    assert np.array_equal(first[0].vector, second[0].vector)
    assert first[2] == second[2]

    deterministic = make_system()
    start = deterministic.initial_state(agent_states=[4.0])
    following, _, m = step(deterministic, start, RandomStream(0))
    expected = apply_composite_map(deterministic, MapIndex((0,), (0,)), start)
    assert np.array_equal(following.vector, expected.vector)


def test_step_forced_index_consumes_draws(twomap):
    """Test a forced map index still advances the stream."""
    forced = RandomStream(3)
    following, _, m = step(twomap, twomap.initial_state(), forced, index=MapIndex((1,), (0,)))
    assert m == MapIndex((1,), (0,))
    assert following.agents == pytest.approx([1.0])
    reference = RandomStream(3)
    reference.uniform(2)
    assert forced.uniform(1) == reference.uniform(1)


def test_simulate_horizon_zero(twomap):
    """Test an empty evolution keeps the initial state."""
    trajectory = simulate(twomap, twomap.initial_state(agent_states=[1.5]), 0, 1)
    assert len(trajectory) == 1
    assert trajectory.horizon == 0
    assert trajectory.states[0] == pytest.approx([1.5, 0.0])
    assert trajectory.selections == []


def test_simulate_twomap_recursion(twomap):
    """Test simulation against a straight-line recursion on the same stream."""
    seed, horizon = 42, 20
    trajectory = simulate(twomap, twomap.initial_state(), horizon, RandomStream(seed))

    generator = np.random.Generator(np.random.PCG64(derive_seed(seed, 0)))
    x, expected = 0.0, [0.0]
    for _ in range(horizon):
        u = generator.random(2)
        x = 0.5 * x + (1.0 if u[0] >= 0.5 else 0.0)
        expected.append(x)
    assert list(trajectory.states[:, 0]) == expected
    # The buffered output is the previous agent state
    assert list(trajectory.states[1:, 1]) == expected[:-1]
    assert trajectory.seed == seed
    assert trajectory.stream_index == 0


def test_simulate_geometric_decay(halving):
    """Test a deterministic contraction."""
    trajectory = simulate(halving, halving.initial_state(agent_states=[8.0]), 3, 0)
    assert list(trajectory.project("agents")[:, 0]) == [8.0, 4.0, 2.0, 1.0]
    assert trajectory.state(3).agents == pytest.approx([1.0])


def test_simulate_numerical_failure(make_system):
    """Test a non-finite transition stops the run and keeps the prefix."""
    agent = AgentSpec(
        state_dim=1,
        transition_maps=[rowwise(lambda x: x * 1e200)],
        output_maps=[identity_map(1)],
        transition_probs=AffineLaw([1.0]),
        output_probs=AffineLaw([1.0]),
    )
    system = make_system(agents=[agent])
    trajectory = simulate(system, system.initial_state(agent_states=[1.0]), 5, 0)
    assert trajectory.failure_index == 1
    assert isinstance(trajectory.error, NumericalError)
    assert trajectory.error.component == "agent[0].transition[0]"
    assert trajectory.error.index == 1
    assert len(trajectory) == 2
    assert len(trajectory.selections) == 1

    with pytest.raises(ValueError):
        simulate(system, system.initial_state(), -1, 0)
    with pytest.raises(NumericalError):
        simulate(system, system.initial_state(agent_states=[np.nan]), 1, 0)


def test_laws_on_simplex(twomap):
    """Test laws stay on the simplex over the signal box."""
    for pi in np.linspace(0.0, 1.0, 100):
        for p, q in twomap.laws([pi]):
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            assert q.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(p >= 0) and np.all(q >= 0)


def test_agents_share_groups(scalar_agent, make_system):
    """Test agents sharing one spec are stepped as one group."""
    shared = scalar_agent((0.5, 0.5), (0.0, 1.0))
    system = make_system(agents=[shared, shared, scalar_agent()])
    assert len(system.layout.groups) == 2
    assert list(system.layout.groups[0].members) == [0, 1]

    trajectory = simulate(system, system.initial_state(), 30, RandomStream(9))
    for k, m in enumerate(trajectory.selections):
        before, after = trajectory.states[k], trajectory.states[k + 1]
        for i, j in enumerate(m.transition_choices[:2]):
            assert after[i] == pytest.approx(0.5 * before[i] + j)
        assert after[2] == pytest.approx(0.5 * before[2])
    assert list(itertools.chain(*trajectory.output_choices)) == [0] * 90
