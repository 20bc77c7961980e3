# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Batch experiment harness.

An experiment is a JSON document validated against the experiment schema
(``jsonschemas/experiment-v1.0.0.json``). The ``system`` block names a
registered system component or wires agents, a filter and a controller
together; ``simulate``, ``diagnose`` and ``verify`` blocks drive the runners
of the same name. Runners must be called inside an application context with
the extension loaded, since components are looked up in its registry.

Every run writes into one output directory: CSV tables headed by a
``# config-digest:`` line, a copy of the raw config as ``config.json``, a
``certificate.json`` for ``verify`` and a ``manifest.json`` listing them.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

from . import __version__
from .api import (
    AgentSpec,
    ClosedLoopSystem,
    CompositeMap,
    MapIndex,
    RandomStream,
    as_vector,
    enumerate_map_indices,
    signal_grid,
    simulate,
)
from .diagnostics import (
    EmpiricalMeasure,
    coordinate_observable,
    coupling_contraction_test,
    empirical_measure,
    invariance_residual,
    residue_observable,
    time_average_ergodicity_test,
    wasserstein2,
)
from .errors import ConfigError, DimensionError, ErgodicEnsemblesError
from .expressions import compile_law, compile_map
from .proxies import current_ergodic
from .utils import config_value, detect_encoding, digest_bytes, get_logger, run_ordered
from .verifiers import (
    ERROR,
    ConditionReport,
    MetricFactory,
    box_sampler,
    canonical_trajectory,
    check_theorem1,
    check_thm1_iva,
    contraction_metric_check,
    estimate_pi_contraction,
    incremental_stability_test,
    lyapunov_decrease_check,
    probability_floor,
    stochastic_drift_check,
    theorem2_bound_check,
)

SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "jsonschemas")

TABLE_HEADER = ["experiment", "k", "metric", "value"]

CONDITION_IDS = {
    "theorem1": "Thm1",
    "thm1_iva": "Thm1-iv-a",
    "probability_floor": "Thm1-ii-floor",
    "pi_contraction": "Thm1-iv-b",
    "theorem2": "Thm2",
    "contraction_metric": "Thm2-i",
    "lyapunov": "Prop1",
    "drift": "Prop2",
    "incremental_stability": "incremental-stability",
}


@dataclass(frozen=True)
class Experiment:
    """Validated experiment configuration and the bytes it was read from."""

    document: dict
    raw: bytes
    path: str = None

    @property
    def digest(self):
        """Content hash of the raw config."""
        return digest_bytes(self.raw)

    def section(self, name):
        """A top-level block that a runner requires."""
        if name not in self.document:
            raise ConfigError(f"missing '{name}' block", field=name)
        return self.document[name]

    def seed(self, override=None):
        """Master seed: command line, then config, then the default."""
        if override is not None:
            return int(override)
        return int(self.document.get("seed", config_value("ERGODIC_DEFAULT_SEED")))

    def directory(self, override=None):
        """Output directory: command line, then config, then the default."""
        if override is not None:
            return override
        return self.document.get("output", {}).get(
            "directory", config_value("ERGODIC_OUTPUT_DIRECTORY")
        )

    def table_format(self, override=None):
        """Table format: command line, then config, then the default."""
        if override is not None:
            return override
        return self.document.get("output", {}).get(
            "format", config_value("ERGODIC_TABLE_FORMAT")
        )


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} is not allowed")


def _field(path):
    return ".".join(str(p) for p in path)


def _check_finite(value, path=()):
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError("number out of range", field=_field(path))
    if isinstance(value, dict):
        for key, item in value.items():
            _check_finite(item, path + (key,))
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _check_finite(item, path + (i,))


def load_schema(name=None):
    """Experiment JSON schema."""
    name = config_value("ERGODIC_CONFIG_SCHEMA", name)
    with open(os.path.join(SCHEMA_DIR, name), "rb") as fp:
        return json.loads(fp.read().decode("utf-8"))


def validate_config(document, schema=None):
    """Validate a parsed document.

    :raises ConfigError: the most relevant schema violation, naming its field.
    """
    error = best_match(Draft7Validator(schema or load_schema()).iter_errors(document))
    if error is not None:
        raise ConfigError(error.message, field=_field(error.absolute_path) or "(root)")
    _check_finite(document)


def parse_config(raw, encoding="utf-8", path=None):
    """Decode, parse and validate config bytes.

    :raises ConfigError: undecodable bytes, JSON syntax errors (with the
        line) or schema violations (with the field).
    """
    try:
        text = raw.decode(encoding or "utf-8")
    except (UnicodeDecodeError, LookupError) as exc:
        raise ConfigError(f"cannot decode config as {encoding}") from exc
    try:
        document = json.loads(text.lstrip("\ufeff"), parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{exc.msg} (column {exc.colno})", line=exc.lineno) from exc
    validate_config(document)
    return Experiment(document, raw, path)


def load_config(path):
    """Read an experiment config file."""
    with open(path, "rb") as fp:
        encoding = detect_encoding(fp, default="utf-8")
        raw = fp.read()
    return parse_config(raw, encoding, path)


def _component(block, kind, where):
    name = block["component"]
    try:
        module = current_ergodic.get_component(name, kind)
    except KeyError:
        raise ConfigError(
            f"unknown {kind} component {name!r}", field=f"{where}.component"
        ) from None
    try:
        return module.build(block.get("params") or {})
    except (ErgodicEnsemblesError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field=f"{where}.params") from exc


def _agent(block, where):
    state_dim = block["state_dim"]
    transition_maps = [
        compile_map(m, state_dim, f"{where}.transition_maps.{j}")
        for j, m in enumerate(block["transition_maps"])
    ]
    output_maps = [
        compile_map(m, state_dim, f"{where}.output_maps.{j}")
        for j, m in enumerate(block["output_maps"])
    ]
    try:
        return AgentSpec(
            state_dim=state_dim,
            transition_maps=transition_maps,
            output_maps=output_maps,
            transition_probs=compile_law(
                block["transition_probs"], f"{where}.transition_probs"
            ),
            output_probs=compile_law(block["output_probs"], f"{where}.output_probs"),
            output_dim=block.get("output_dim", output_maps[0].output_dim),
            name=block.get("name", f"agent{where.rsplit('.', 1)[-1]}"),
        )
    except (ErgodicEnsemblesError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), field=where) from exc


def build_system(block, where="system"):
    """Closed loop described by a ``system`` block.

    :raises ConfigError: unknown components or invalid parameters, naming
        the field.
    """
    if "component" in block:
        return _component(block, "system", where)
    agents = []
    for i, agent in enumerate(block["agents"]):
        at = f"{where}.agents.{i}"
        spec = _component(agent, "agent", at) if "component" in agent else _agent(agent, at)
        agents.extend([spec] * agent.get("count", 1))
    loop_filter = _component(block["filter"], "filter", f"{where}.filter")
    controller = _component(block["controller"], "controller", f"{where}.controller")
    try:
        return ClosedLoopSystem(
            agents=tuple(agents),
            filter=loop_filter,
            controller=controller,
            name=block.get("name", "system"),
        )
    except ErgodicEnsemblesError as exc:
        raise ConfigError(str(exc), field=where) from exc


def parse_state(system, value, where):
    """Stacked state vector from a flat list or a block object, zeros by default."""
    try:
        if value is None:
            return as_vector(system.initial_state())
        if isinstance(value, dict):
            return as_vector(
                system.initial_state(
                    value.get("agents"),
                    value.get("filter"),
                    value.get("controller"),
                    value.get("output"),
                )
            )
        return as_vector(system.state_from_vector(value))
    except DimensionError as exc:
        raise ConfigError(str(exc), field=where) from exc


def parse_selector(system, value, where, default="dynamic"):
    """Coordinate indices picked by a selector."""
    try:
        return system.coordinates(default if value is None else value)
    except (DimensionError, ValueError) as exc:
        raise ConfigError(str(exc), field=where) from exc


def parse_index(system, value, where):
    """Map index from ``{"transition": [...], "output": [...]}``, all zeros by default."""
    if value is None:
        zeros = (0,) * system.n_agents
        return MapIndex(zeros, zeros)
    index = MapIndex(tuple(value["transition"]), tuple(value["output"]))
    try:
        CompositeMap(system, index)
    except (ErgodicEnsemblesError, ValueError) as exc:
        raise ConfigError(str(exc), field=where) from exc
    return index


def _box(system, region, where):
    try:
        lower = np.broadcast_to(np.asarray(region["lower"], dtype=float), (system.dimension,))
        upper = np.broadcast_to(np.asarray(region["upper"], dtype=float), (system.dimension,))
    except ValueError as exc:
        raise ConfigError(
            f"bounds do not match the state dimension {system.dimension}", field=where
        ) from exc
    if np.any(upper < lower):
        raise ConfigError("upper bound below lower bound", field=where)
    return lower, upper


def parse_sampler(system, region, where, seed):
    """Uniform state sampler on a region block."""
    if region is None:
        raise ConfigError("a region is required", field=where)
    lower, upper = _box(system, region, where)
    return box_sampler(lower, upper, region.get("seed", seed))


def parse_grid(system, region, where):
    """Grid of states on a region block."""
    if region is None:
        raise ConfigError("a grid is required", field=where)
    lower, upper = _box(system, region, where)
    return signal_grid(lower, upper, region.get("points"))


def _require(block, key, where):
    if key not in block:
        raise ConfigError(f"'{key}' is required", field=where)
    return block[key]


class QuadraticForm(object):
    """``V(x) = (x_c - center)^T P (x_c - center)`` on selected coordinates."""

    def __init__(self, matrix, dimension, center=0.0, coordinates=None):
        """Initialize form; a scalar ``matrix`` means a multiple of the identity."""
        matrix = np.asarray(matrix, dtype=float)
        self.matrix = matrix * np.eye(dimension) if matrix.ndim == 0 else np.atleast_2d(matrix)
        if self.matrix.shape != (dimension, dimension):
            raise ValueError(
                f"matrix has shape {self.matrix.shape}, expected {(dimension, dimension)}"
            )
        self.center = np.broadcast_to(np.asarray(center, dtype=float), (dimension,))
        self.coordinates = coordinates

    def __call__(self, x):
        """Evaluate."""
        z = np.asarray(x, dtype=float)
        if self.coordinates is not None:
            z = z[self.coordinates]
        z = z - self.center
        return float(z @ self.matrix @ z)


class Comparison(object):
    """Comparison function ``s -> c s^p``."""

    def __init__(self, coefficient, power=2.0):
        """Initialize function."""
        self.coefficient = float(coefficient)
        self.power = float(power)

    def __call__(self, s):
        """Evaluate."""
        return self.coefficient * s**self.power


def parse_quadratic(block, dimension, where, coordinates=None):
    """Quadratic Lyapunov candidate, ``|z|^2`` by default."""
    block = block or {}
    try:
        return QuadraticForm(
            block.get("matrix", 1.0), dimension, block.get("center", 0.0), coordinates
        )
    except ValueError as exc:
        raise ConfigError(str(exc), field=where) from exc


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return str(value)


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.isoformat(timespec="seconds")


def _csv_table(digest, header, rows):
    buffer = io.StringIO()
    buffer.write(f"# config-digest: {digest}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue().encode("utf-8")


TABLE_WRITERS = {"csv": _csv_table}


class OutputDirectory(object):
    """Writer of one run's files."""

    def __init__(self, path, experiment, seed, table_format=None):
        """Create the directory and store the raw config.

        :raises ConfigError: unknown table format.
        """
        table_format = experiment.table_format(table_format)
        if table_format not in TABLE_WRITERS:
            raise ConfigError(
                f"unknown table format {table_format!r}; expected one of "
                f"{', '.join(sorted(TABLE_WRITERS))}",
                field="output.format",
            )
        self.path = path
        self.experiment = experiment
        self.seed = seed
        self.table_format = table_format
        self.files = []
        self.started = _timestamp()
        os.makedirs(path, exist_ok=True)
        self.write_bytes("config.json", experiment.raw)

    def write_bytes(self, name, data):
        """Write one file."""
        with open(os.path.join(self.path, name), "wb") as fp:
            fp.write(data)
        self.files.append(name)

    def write_table(self, stem, header, rows):
        """Write a table headed by the config digest as ``stem.<format>``."""
        data = TABLE_WRITERS[self.table_format](self.experiment.digest, header, rows)
        self.write_bytes(f"{stem}.{self.table_format}", data)

    def write_json(self, name, data):
        """Write a JSON document with sorted keys."""
        text = json.dumps(data, indent=2, sort_keys=True, allow_nan=False)
        self.write_bytes(name, (text + "\n").encode("utf-8"))

    def finish(self, command):
        """Write ``manifest.json`` and return it."""
        manifest = {
            "schema_version": config_value("ERGODIC_SCHEMA_VERSION"),
            "command": command,
            "config_digest": self.experiment.digest,
            "master_seed": self.seed,
            "tool_version": __version__,
            "started": self.started,
            "finished": _timestamp(),
            "files": sorted(self.files),
            "table_format": self.table_format,
        }
        text = json.dumps(manifest, indent=2, sort_keys=True)
        with open(os.path.join(self.path, "manifest.json"), "wb") as fp:
            fp.write((text + "\n").encode("utf-8"))
        return manifest


@dataclass
class RunResult:
    """Files written by a run and the condition reports of ``verify``."""

    directory: str
    manifest: dict
    reports: list = field(default_factory=list)

    @property
    def files(self):
        """Emitted files, manifest excluded."""
        return self.manifest["files"]

    @property
    def errored(self):
        """Whether any condition check raised."""
        return any(report.verdict == ERROR for report in self.reports)


def _completed(trajectory):
    if trajectory.error is not None:
        raise trajectory.error
    return trajectory


def _ensemble(system, initial, horizon, count, seed, threads, offset=0):
    return run_ordered(
        lambda i: _completed(simulate(system, initial, horizon, RandomStream(seed, i))),
        range(offset, offset + count),
        threads,
    )


def run_simulate(experiment, seed=None, outdir=None, threads=None, table_format=None):
    """Simulate trajectories and write one table per trajectory.

    Columns are ``k``, the state vector, the signal and the map choices of
    the transition leaving step ``k``.

    :raises NumericalError: after writing the truncated tables, when a
        trajectory failed.
    """
    block = experiment.section("simulate")
    system = build_system(experiment.document["system"])
    initial = parse_state(
        system, block.get("initial", experiment.document.get("initial")), "simulate.initial"
    )
    seed = experiment.seed(seed)
    horizon = block["horizon"]
    count = block.get("trajectories", 1)
    logger = get_logger()
    logger.info(f"Simulating {count} trajectories of {horizon} steps with seed {seed}.")

    trajectories = run_ordered(
        lambda i: simulate(system, initial, horizon, RandomStream(seed, i)),
        range(count),
        threads,
    )
    out = OutputDirectory(experiment.directory(outdir), experiment, seed, table_format)
    header = (
        ["k"]
        + [f"x[{i}]" for i in range(system.dimension)]
        + [f"pi[{j}]" for j in range(system.signal_dim)]
        + ["transition", "output"]
    )
    failure = None
    for i, trajectory in enumerate(trajectories):
        rows = []
        for k in range(len(trajectory)):
            if k < trajectory.horizon:
                choices = [
                    " ".join(str(int(c)) for c in trajectory.transition_choices[k]),
                    " ".join(str(int(c)) for c in trajectory.output_choices[k]),
                ]
            else:
                choices = ["", ""]
            rows.append(
                [k] + list(trajectory.states[k]) + list(trajectory.signals[k]) + choices
            )
        out.write_table(f"trajectory-{i:04d}", header, rows)
        if trajectory.error is not None and failure is None:
            failure = trajectory.error
    manifest = out.finish("simulate")
    if failure is not None:
        logger.error(f"Simulation failed at step {failure.index} in {failure.component}.")
        raise failure
    return RunResult(out.path, manifest)


def _moments(system, spec, where, seed, threads, initial):
    runs = _ensemble(
        system, initial, spec.get("horizon", 1000), spec.get("trajectories", 1), seed, threads
    )
    mu = empirical_measure(
        runs,
        spec.get("burn_in", 0),
        spec.get("thinning", 1),
        parse_selector(system, spec.get("projection"), f"{where}.projection"),
    )
    rows = [("", "samples", mu.size)]
    for c, (mean, variance) in enumerate(zip(mu.mean, np.diag(mu.covariance))):
        rows.append(("", f"mean[{c}]", mean))
        rows.append(("", f"variance[{c}]", variance))
    return rows


def _coupling(system, spec, where, seed, threads, initial):
    report = coupling_contraction_test(
        system,
        parse_state(system, spec.get("initial_a", initial.tolist()), f"{where}.initial_a"),
        parse_state(system, _require(spec, "initial_b", where), f"{where}.initial_b"),
        trials=spec.get("trials", 100),
        horizon=spec.get("horizon", 30),
        mode=spec.get("mode", "shared"),
        seed=seed,
        projection=parse_selector(system, spec.get("projection"), f"{where}.projection"),
        threads=threads,
    )
    rows = []
    for k, (distance, floor) in enumerate(zip(report.distances, report.floor_distances)):
        rows.append((k, "w2", distance))
        rows.append((k, "noise_floor", floor))
    rows += [
        ("", "rate", report.rate),
        ("", "noise_floor", report.noise_floor),
        ("", "fit_steps", report.fit_steps),
        ("", "approximate", report.approximate),
    ]
    return rows


def _ergodicity(system, spec, where, seed, threads, initial):
    initials = [
        parse_state(system, value, f"{where}.initials.{i}")
        for i, value in enumerate(_require(spec, "initials", where))
    ]
    selector = parse_selector(system, spec.get("observable"), f"{where}.observable")
    if "period" in spec:
        observable = residue_observable(system, selector, spec["period"])
    else:
        observable = coordinate_observable(system, selector)
    report = time_average_ergodicity_test(
        system,
        observable,
        initials,
        spec.get("seeds", [seed, seed + 1]),
        horizon=spec.get("horizon", 1000),
        burn_in=spec.get("burn_in", 0),
        tau=spec.get("tau"),
        batches=spec.get("batches"),
        threads=threads,
    )
    rows = []
    for (i, s), average, error in zip(report.runs, report.averages, report.standard_errors):
        rows.append(("", f"average[{i},{s}]", average))
        rows.append(("", f"standard_error[{i},{s}]", error))
    rows += [
        ("", "spread", report.spread),
        ("", "max_z", report.max_z),
        ("", "tau", report.tau),
        ("", "verdict", report.verdict),
    ]
    return rows


def _invariance(system, spec, where, seed, threads, initial):
    count = spec.get("trajectories", 10)
    horizon = spec.get("horizon", 1000)
    burn_in = spec.get("burn_in", 0)
    projection = parse_selector(system, spec.get("projection"), f"{where}.projection")
    first = _ensemble(system, initial, horizon, count, seed, threads)
    second = _ensemble(system, initial, horizon, count, seed, threads, offset=count)
    mu = empirical_measure(first, burn_in, projection="all")
    residual = invariance_residual(
        system,
        mu,
        RandomStream(seed, 2 * count),
        projection=projection,
        exact=spec.get("exact", False),
    )
    benchmark = wasserstein2(
        EmpiricalMeasure(mu.samples[:, projection]),
        empirical_measure(second, burn_in, projection=projection),
    )
    return [
        ("", "residual", residual.value),
        ("", "residual_method", residual.method),
        ("", "noise_benchmark", benchmark.value),
    ]


DIAGNOSTICS = {
    "moments": _moments,
    "coupling": _coupling,
    "ergodicity": _ergodicity,
    "invariance": _invariance,
}


def run_diagnose(experiment, seed=None, outdir=None, threads=None, table_format=None):
    """Run every diagnose experiment and write one long-format table each."""
    block = experiment.section("diagnose")
    seed = experiment.seed(seed)
    ids = [spec["id"] for spec in block["experiments"]]
    for i, name in enumerate(ids):
        if ids.index(name) != i:
            raise ConfigError(f"duplicate id {name!r}", field=f"diagnose.experiments.{i}.id")

    base = None
    prepared = []
    for i, spec in enumerate(block["experiments"]):
        where = f"diagnose.experiments.{i}"
        if "system" in spec:
            system = build_system(spec["system"], f"{where}.system")
        else:
            base = base or build_system(experiment.section("system"))
            system = base
        initial = parse_state(
            system, spec.get("initial", experiment.document.get("initial")), f"{where}.initial"
        )
        prepared.append((spec, where, system, initial))

    out = OutputDirectory(experiment.directory(outdir), experiment, seed, table_format)
    logger = get_logger()
    for spec, where, system, initial in prepared:
        logger.info(f"Running {spec['kind']} diagnostic '{spec['id']}'.")
        rows = DIAGNOSTICS[spec["kind"]](system, spec, where, seed, threads, initial)
        out.write_table(
            f"diagnose-{spec['id']}",
            TABLE_HEADER,
            [(spec["id"],) + tuple(row) for row in rows],
        )
    return RunResult(out.path, out.finish("diagnose"))


def _maps(cond):
    maps = cond.get("maps", "all")
    return None if maps == "all" else maps


def _theorem1(system, cond, where, seed, threads, initial):
    return check_theorem1(
        system,
        parse_sampler(system, cond.get("region"), f"{where}.region", seed),
        pairs=cond.get("pairs"),
        maps=_maps(cond),
        projection=parse_selector(system, cond.get("projection"), f"{where}.projection"),
        points=cond.get("points"),
        jacobians=cond.get("jacobians"),
    )


def _thm1_iva(system, cond, where, seed, threads, initial):
    return [
        check_thm1_iva(
            _require(cond, "lipschitz", where),
            cond.get("index_set_size", system.index_set_size),
            _require(cond, "delta", where),
        )
    ]


def _probability_floor(system, cond, where, seed, threads, initial):
    return [probability_floor(system, points=cond.get("points"))]


def _pi_contraction(system, cond, where, seed, threads, initial):
    sampler = parse_sampler(system, cond.get("region"), f"{where}.region", seed)
    return [
        estimate_pi_contraction(
            system, sampler, cond.get("pairs"), _maps(cond), cond.get("jacobians"), seed
        )[1]
    ]


def _starts(system, cond, where):
    if "starts" in cond:
        return [
            parse_state(system, value, f"{where}.starts.{i}")
            for i, value in enumerate(cond["starts"])
        ]
    return [np.zeros(system.dimension), np.ones(system.dimension)]


def _canonical(system, cond, where, index, coordinates):
    return canonical_trajectory(
        CompositeMap(system, index),
        _starts(system, cond, where),
        cond.get("canonical_horizon", config_value("ERGODIC_CANONICAL_HORIZON")),
        cond.get("tol", 1e-9),
        index=index,
        coordinates=coordinates,
    )


def _theorem2(system, cond, where, seed, threads, initial):
    starts = _starts(system, cond, where)
    horizon = cond.get("canonical_horizon", config_value("ERGODIC_CANONICAL_HORIZON"))
    canonicals = run_ordered(
        lambda m: canonical_trajectory(
            CompositeMap(system, m), starts, horizon, cond.get("tol", 1e-9), index=m
        ),
        enumerate_map_indices(system),
        threads,
    )
    report = theorem2_bound_check(
        system,
        canonicals,
        trials=cond.get("trials", 100),
        horizon=cond.get("horizon", 1000),
        burn_in=cond.get("burn_in", 0),
        epsilon=cond.get("epsilon", 1e-6),
        initials=[initial],
        seed=seed,
        threads=threads,
    )
    report.details["canonicals"] = [
        {
            "index": c.index,
            "rate": c.rate,
            "converged": c.converged,
            "transient": c.transient,
            "limit": c.points[-1],
        }
        for c in canonicals
    ]
    return [report]


def _contraction_metric(system, cond, where, seed, threads, initial):
    coords = parse_selector(system, cond.get("projection"), f"{where}.projection")
    try:
        metric = MetricFactory(theta=cond.get("theta", np.eye(coords.size)))
    except ErgodicEnsemblesError as exc:
        raise ConfigError(str(exc), field=f"{where}.theta") from exc
    return [
        contraction_metric_check(
            CompositeMap(system, parse_index(system, cond.get("map"), f"{where}.map")),
            metric,
            parse_grid(system, cond.get("grid"), f"{where}.grid"),
            _require(cond, "beta", where),
            h=cond.get("step"),
            coordinates=coords,
        )
    ]


def _lyapunov(system, cond, where, seed, threads, initial):
    index = parse_index(system, cond.get("map"), f"{where}.map")
    coords = parse_selector(system, cond.get("projection"), f"{where}.projection")
    alphas = [
        Comparison(**_require(cond, name, where)) for name in ("alpha1", "alpha2", "alpha3")
    ]
    return [
        lyapunov_decrease_check(
            CompositeMap(system, index),
            parse_quadratic(cond.get("V"), coords.size, f"{where}.V"),
            *alphas,
            canonical=_canonical(system, cond, where, index, coords),
            sampler=parse_sampler(system, cond.get("region"), f"{where}.region", seed),
            samples=cond.get("samples"),
            path_length=cond.get("path_length", 10),
            coordinates=coords,
        )
    ]


def _drift(system, cond, where, seed, threads, initial):
    block = cond.get("V") or {}
    coords = parse_selector(system, block.get("coordinates"), f"{where}.V.coordinates")
    states = cond.get("states")
    if states is not None:
        states = [
            parse_state(system, value, f"{where}.states.{i}") for i, value in enumerate(states)
        ]
    if "initial" in cond:
        initial = parse_state(system, cond["initial"], f"{where}.initial")
    return [
        stochastic_drift_check(
            system,
            parse_quadratic(block, coords.size, f"{where}.V", coordinates=coords),
            states=states,
            initial=initial,
            trials=cond.get("trials", 100),
            horizon=cond.get("horizon", 10),
            small_set=cond.get("small_set"),
            drift_margin=cond.get("drift_margin", 0.0),
            inner=cond.get("inner", 100),
            seed=seed,
        )
    ]


def _incremental_stability(system, cond, where, seed, threads, initial):
    return [
        incremental_stability_test(
            CompositeMap(system, parse_index(system, cond.get("map"), f"{where}.map")),
            parse_sampler(system, cond.get("region"), f"{where}.region", seed),
            pairs=cond.get("pairs", 100),
            horizon=cond.get("horizon", 20),
            coordinates=parse_selector(system, cond.get("projection"), f"{where}.projection"),
        )
    ]


VERIFIERS = {
    "theorem1": _theorem1,
    "thm1_iva": _thm1_iva,
    "probability_floor": _probability_floor,
    "pi_contraction": _pi_contraction,
    "theorem2": _theorem2,
    "contraction_metric": _contraction_metric,
    "lyapunov": _lyapunov,
    "drift": _drift,
    "incremental_stability": _incremental_stability,
}


def run_verify(experiment, seed=None, outdir=None, threads=None, table_format=None):
    """Check every requested condition and write ``certificate.json``.

    A condition whose check raises is recorded with verdict ``error``; the
    run continues with the next one.
    """
    block = experiment.section("verify")
    system = build_system(experiment.section("system"))
    initial = parse_state(system, experiment.document.get("initial"), "initial")
    seed = experiment.seed(seed)
    logger = get_logger()

    reports = []
    for i, cond in enumerate(block["conditions"]):
        where = f"verify.conditions.{i}"
        check = cond["check"]
        logger.info(f"Checking {check}.")
        try:
            reports.extend(VERIFIERS[check](system, cond, where, seed, threads, initial))
        except ConfigError:
            raise
        except Exception as exc:
            logger.warning(f"Condition check {check} ({where}) errored.", exc_info=True)
            reports.append(ConditionReport.errored(CONDITION_IDS[check], check, exc))

    out = OutputDirectory(experiment.directory(outdir), experiment, seed, table_format)
    out.write_json(
        "certificate.json",
        {
            "schema_version": config_value("ERGODIC_SCHEMA_VERSION"),
            "config_digest": experiment.digest,
            "master_seed": seed,
            "conditions": [report.to_dict() for report in reports],
        },
    )
    return RunResult(out.path, out.finish("verify"), reports)
