# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Errors raised by the simulator, diagnostics and verifiers."""


class ErgodicEnsemblesError(Exception):
    """Base class of all package errors."""


class NumericalError(ErgodicEnsemblesError):
    """A map produced a non-finite value."""

    def __init__(self, component, index=None, message=None):
        """Initialize error.

        :param component: Name of the failing component, e.g. ``agent[3].output[1]``.
        :param index: Step index at which the failure happened, when known.
        """
        self.component = component
        self.index = index
        super().__init__(
            message or f"Non-finite value produced by {component}"
            + (f" at step {index}" if index is not None else "")
        )


class SignalRangeError(ErgodicEnsemblesError):
    """The controller output left the signal box."""


class ProbabilityLawError(ErgodicEnsemblesError):
    """A probability vector is not on the simplex."""


class EnumerationCapError(ErgodicEnsemblesError):
    """The map index set is too large to enumerate."""


class ParamError(ErgodicEnsemblesError, ValueError):
    """Invalid component parameters."""


class DimensionError(ErgodicEnsemblesError, ValueError):
    """Incompatible dimensions."""


class InsufficientSamplesError(ErgodicEnsemblesError):
    """Not enough samples to form an estimate."""


class SamplerError(ErgodicEnsemblesError):
    """A domain sampler is degenerate."""


class MatrixError(ErgodicEnsemblesError, ValueError):
    """Malformed stochastic matrix."""


class InfeasibleFloorError(ErgodicEnsemblesError):
    """Probability floors exceed the total probability mass."""


class NotContractiveError(ErgodicEnsemblesError):
    """A map or a family of maps fails to contract."""


class MetricSingularError(ErgodicEnsemblesError):
    """A contraction metric is singular at a grid state."""


class ConfigError(ErgodicEnsemblesError):
    """Invalid experiment configuration."""

    def __init__(self, message, field=None, line=None):
        """Initialize error."""
        self.field = field
        self.line = line
        location = ""
        if field:
            location = f"{field}: "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")
